#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stf/checkpoint.hpp"
#include "stf/cli.hpp"
#include "stf/config.hpp"
#include "stf/data.hpp"
#include "stf/model.hpp"
#include "stf/train.hpp"

using namespace stf;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("stf");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    REQUIRE(os);
    os << body;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int count_lines_with(const std::string& body, const std::string& prefix) {
    int count = 0;
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind(prefix, 0) == 0) {
            ++count;
        }
    }
    return count;
}

const char* kSmallConfig =
    "# desk-scale model\n"
    "embed_width=6\n"
    "gat_width=6\n"
    "stgcn_channels=8\n"
    "gru_hidden=10\n"
    "epochs=2\n"
    "seed=9\n";

}  // namespace

TEST_CASE("synth is deterministic, validates flags, and reparses") {
    const fs::path dir = fresh_dir("stf_cli_synth");
    const auto out1 = (dir / "a.txt").string();
    const auto out2 = (dir / "b.txt").string();
    CHECK(run({"synth", "--agents", "4", "--frames", "20", "--seed", "7", "--out", out1}) == 0);
    CHECK(run({"synth", "--agents", "4", "--frames", "20", "--seed", "7", "--out", out2}) == 0);
    CHECK(slurp(out1) == slurp(out2));

    CHECK(run({"synth", "--agents", "0", "--frames", "20", "--out", out1}) != 0);
    CHECK(run({"synth", "--agents", "2", "--frames", "20", "--kinds", "warp", "--out", out1}) !=
          0);

    CHECK(parse_records_file(out2).size() == 80);
    fs::remove_all(dir);
}

TEST_CASE("full pipeline: synth, train, evaluate, predict, plot") {
    const fs::path dir = fresh_dir("stf_cli_pipeline");
    const auto data = (dir / "data.txt").string();
    const auto cfg_path = (dir / "run.cfg").string();
    const auto out = (dir / "run").string();
    spit(cfg_path, kSmallConfig);

    REQUIRE(run({"synth", "--agents", "5", "--frames", "16", "--seed", "3", "--out", data}) == 0);
    REQUIRE(run({"train", "--data", data, "--config", cfg_path, "--out", out}) == 0);

    CHECK(fs::exists(fs::path(out) / "config.txt"));
    CHECK(fs::exists(fs::path(out) / "history.csv"));
    const auto ckpt = (fs::path(out) / "checkpoint-final.ckpt").string();
    REQUIRE(fs::exists(ckpt));

    // resolved-config echo reproduces the parsed configuration
    const RunConfig echoed = parse_run_config_file((fs::path(out) / "config.txt").string());
    CHECK(echoed.embed_width == 6);
    CHECK(echoed.seed == 9);
    CHECK(echoed.epochs == 2);

    const auto csv = (dir / "metrics.csv").string();
    REQUIRE(run({"evaluate", "--data", data, "--checkpoint", ckpt, "--out", csv}) == 0);
    const std::string metrics = slurp(csv);
    CHECK(count_lines_with(metrics, "rmse,vehicle,") == 6);
    CHECK(count_lines_with(metrics, "rmse,pedestrian,") == 6);
    CHECK(count_lines_with(metrics, "rmse,bike,") == 6);
    CHECK(count_lines_with(metrics, "rmse,weighted,") == 6);
    CHECK(count_lines_with(metrics, "rmse,all,") == 6);
    CHECK(metrics.find("rmse,weighted,3.0,") != std::string::npos);

    // deterministic CSV bytes
    const auto csv2 = (dir / "metrics2.csv").string();
    REQUIRE(run({"evaluate", "--data", data, "--checkpoint", ckpt, "--out", csv2}) == 0);
    CHECK(slurp(csv) == slurp(csv2));

    const auto preds = (dir / "preds.txt").string();
    REQUIRE(run({"predict", "--data", data, "--checkpoint", ckpt, "--out", preds}) == 0);
    std::ifstream ps(preds);
    long long frame, agent;
    double x, y;
    int rows = 0;
    while (ps >> frame >> agent >> x >> y) {
        ++rows;
    }
    CHECK(rows > 0);

    const auto svg = (dir / "rmse.svg").string();
    REQUIRE(run({"plot", "--metrics", csv, "--out", svg}) == 0);
    const std::string svg_body = slurp(svg);
    CHECK(count_lines_with(svg_body, "<circle") == 6);
    const auto svg2 = (dir / "rmse2.svg").string();
    REQUIRE(run({"plot", "--metrics", csv, "--out", svg2}) == 0);
    CHECK(svg_body == slurp(svg2));

    fs::remove_all(dir);
}

TEST_CASE("train rejects unknown config keys, missing data, bad flags") {
    const fs::path dir = fresh_dir("stf_cli_badcfg");
    const auto data = (dir / "data.txt").string();
    REQUIRE(run({"synth", "--agents", "3", "--frames", "14", "--out", data}) == 0);

    const auto bad = (dir / "bad.cfg").string();
    spit(bad, "embed_width=6\nwarp_drive=9\n");
    CHECK(run({"train", "--data", data, "--config", bad, "--out", (dir / "o").string()}) != 0);
    try {
        parse_run_config_file(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("warp_drive") != std::string::npos);
    }

    CHECK(run({"train", "--data", (dir / "nope.txt").string(), "--out",
               (dir / "o2").string()}) != 0);
    CHECK(run({"train", "--data", data}) != 0);  // missing required --out
    CHECK(run({"definitely-not-a-command"}) != 0);
    fs::remove_all(dir);
}

TEST_CASE("evaluate: zero-displacement checkpoint on stationary agents scores zero") {
    const fs::path dir = fresh_dir("stf_cli_zero");
    // stationary scene: three agents covering the weighted categories
    std::ostringstream data;
    for (int frame = 0; frame < 12; ++frame) {
        data << frame << " 1 1 5.0 5.0 0 4.5 2.0 1.6 0\n";
        data << frame << " 2 3 8.0 2.0 0 0.5 0.5 1.7 0\n";
        data << frame << " 3 5 1.0 9.0 0 1.8 0.6 1.5 0\n";
    }
    const auto data_path = (dir / "still.txt").string();
    spit(data_path, data.str());

    RunConfig cfg;
    cfg.embed_width = 6;
    cfg.gat_width = 6;
    cfg.stgcn_channels = 8;
    cfg.gru_hidden = 10;
    StfModel model(model_config_from(cfg), cfg.seed);
    auto& head_w = model.tape().param("head.w");
    auto& head_b = model.tape().param("head.b");
    std::fill_n(head_w.data(), head_w.size(), 0.0);
    std::fill_n(head_b.data(), head_b.size(), 0.0);
    OptimizerState opt;
    const auto ckpt = (dir / "zero.ckpt").string();
    save_checkpoint_file(make_checkpoint(model, opt, 0, cfg), ckpt);

    const auto csv = (dir / "metrics.csv").string();
    REQUIRE(run({"evaluate", "--data", data_path, "--checkpoint", ckpt, "--out", csv}) == 0);
    std::istringstream is(slurp(csv));
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.rfind("count,", 0) == 0) {
            continue;
        }
        CHECK(line.substr(line.rfind(',') + 1) == "0.000000");
    }
    fs::remove_all(dir);
}

TEST_CASE("evaluate rejects a mismatched config override") {
    const fs::path dir = fresh_dir("stf_cli_mismatch");
    const auto data = (dir / "data.txt").string();
    REQUIRE(run({"synth", "--agents", "4", "--frames", "16", "--out", data}) == 0);
    const auto cfg_path = (dir / "run.cfg").string();
    spit(cfg_path, kSmallConfig);
    const auto out = (dir / "run").string();
    REQUIRE(run({"train", "--data", data, "--config", cfg_path, "--out", out}) == 0);
    const auto ckpt = (fs::path(out) / "checkpoint-final.ckpt").string();

    const auto other_cfg = (dir / "other.cfg").string();
    spit(other_cfg, "embed_width=12\n");
    CHECK(run({"evaluate", "--data", data, "--checkpoint", ckpt, "--config", other_cfg, "--out",
               (dir / "m.csv").string()}) != 0);
    CHECK(run({"evaluate", "--data", data, "--checkpoint", ckpt, "--config", cfg_path, "--out",
               (dir / "m.csv").string()}) == 0);
    fs::remove_all(dir);
}

namespace {

// Four agents over four frames whose pairwise distances realize the
// three-frame fixture edge sets under a 2-meter threshold.
const char* kFixtureScene =
    "0 1 1 0.0 0.0 0 4 2 1.6 0\n"
    "0 2 2 1.0 0.0 0 4 2 1.6 0\n"
    "0 3 3 0.0 1.0 0 .5 .5 1.7 0\n"
    "0 4 4 -1.9 0.0 0 2 .8 1.5 0\n"
    "1 1 1 0.0 0.0 0 4 2 1.6 0\n"
    "1 2 2 10.0 10.0 0 4 2 1.6 0\n"
    "1 3 3 1.2 0.0 0 .5 .5 1.7 0\n"
    "1 4 4 0.6 1.0 0 2 .8 1.5 0\n"
    "2 1 1 0.0 0.0 0 4 2 1.6 0\n"
    "2 2 2 1.4 0.0 0 4 2 1.6 0\n"
    "2 3 3 -10.0 -10.0 0 .5 .5 1.7 0\n"
    "2 4 4 0.7 0.9 0 2 .8 1.5 0\n"
    "3 1 1 0.0 0.0 0 4 2 1.6 0\n"
    "3 2 2 1.4 0.0 0 4 2 1.6 0\n"
    "3 3 3 -10.0 -10.0 0 .5 .5 1.7 0\n"
    "3 4 4 0.7 0.9 0 2 .8 1.5 0\n";

const char* kFixtureDump =
    "3 4\n"
    "011111110000\n"
    "101011110000\n"
    "110011110000\n"
    "100011110000\n"
    "111100111111\n"
    "111100001111\n"
    "111110011111\n"
    "111110101111\n"
    "000011110101\n"
    "000011111001\n"
    "000011110000\n"
    "000011111100\n";

}  // namespace

TEST_CASE("graph-dump reproduces the fixture adjacency byte-for-byte") {
    const fs::path dir = fresh_dir("stf_cli_gdump");
    const auto data = (dir / "scene.txt").string();
    spit(data, kFixtureScene);
    const auto cfg_path = (dir / "g.cfg").string();
    spit(cfg_path, "t_his=3\nt_pred=1\nd_close=2.0\n");
    const auto out = (dir / "graph.txt").string();
    REQUIRE(run({"graph-dump", "--data", data, "--config", cfg_path, "--window", "0", "--out",
                 out}) == 0);
    CHECK(slurp(out) == kFixtureDump);

    CHECK(run({"graph-dump", "--data", data, "--config", cfg_path, "--window", "5", "--out",
               out}) != 0);
    fs::remove_all(dir);
}

TEST_CASE("graph-dump of a single agent is the banded self-chain") {
    const fs::path dir = fresh_dir("stf_cli_gdump1");
    std::ostringstream scene;
    for (int frame = 0; frame < 4; ++frame) {
        scene << frame << " 9 3 " << 0.5 * frame << " 0 0 .5 .5 1.7 0\n";
    }
    const auto data = (dir / "one.txt").string();
    spit(data, scene.str());
    const auto cfg_path = (dir / "g.cfg").string();
    spit(cfg_path, "t_his=3\nt_pred=1\nd_close=2.0\n");
    const auto out = (dir / "graph.txt").string();
    REQUIRE(run({"graph-dump", "--data", data, "--config", cfg_path, "--out", out}) == 0);
    CHECK(slurp(out) == "3 1\n010\n101\n010\n");
    fs::remove_all(dir);
}

TEST_CASE("train --resume continues a run bit-exactly") {
    const fs::path dir = fresh_dir("stf_cli_resume");
    const auto data = (dir / "data.txt").string();
    REQUIRE(run({"synth", "--agents", "4", "--frames", "16", "--seed", "2", "--out", data}) == 0);

    const std::string base_cfg =
        "embed_width=6\ngat_width=6\nstgcn_channels=8\ngru_hidden=10\nseed=9\n";
    const auto cfg2 = (dir / "two.cfg").string();
    const auto cfg4 = (dir / "four.cfg").string();
    spit(cfg2, base_cfg + "epochs=2\n");
    spit(cfg4, base_cfg + "epochs=4\n");

    const auto direct = (dir / "direct").string();
    REQUIRE(run({"train", "--data", data, "--config", cfg4, "--out", direct}) == 0);

    const auto first = (dir / "first").string();
    REQUIRE(run({"train", "--data", data, "--config", cfg2, "--out", first}) == 0);
    const auto resumed = (dir / "resumed").string();
    REQUIRE(run({"train", "--data", data, "--config", cfg4, "--out", resumed, "--resume",
                 (fs::path(first) / "checkpoint-final.ckpt").string()}) == 0);

    CHECK(slurp(fs::path(resumed) / "checkpoint-final.ckpt") ==
          slurp(fs::path(direct) / "checkpoint-final.ckpt"));

    // resuming under an incompatible model config is refused
    const auto other = (dir / "other.cfg").string();
    spit(other, base_cfg + "epochs=4\ngru_hidden=12\n");
    CHECK(run({"train", "--data", data, "--config", other, "--out", (dir / "x").string(),
               "--resume", (fs::path(first) / "checkpoint-final.ckpt").string()}) != 0);
    fs::remove_all(dir);
}

TEST_CASE("plot rejects malformed input") {
    const fs::path dir = fresh_dir("stf_cli_plot");
    const auto empty = (dir / "empty.csv").string();
    spit(empty, "");
    CHECK(run({"plot", "--metrics", empty, "--out", (dir / "o.svg").string()}) != 0);

    const auto no_rows = (dir / "norows.csv").string();
    spit(no_rows, "metric,category,horizon,value\nade,all,,1.000000\n");
    CHECK(run({"plot", "--metrics", no_rows, "--out", (dir / "o.svg").string()}) != 0);
    fs::remove_all(dir);
}
