// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion enforces its own runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "stf/checkpoint.hpp"
#include "stf/cli.hpp"
#include "stf/config.hpp"
#include "stf/data.hpp"
#include "stf/graph.hpp"
#include "stf/metrics.hpp"
#include "stf/model.hpp"
#include "stf/ops.hpp"
#include "stf/rng.hpp"
#include "stf/train.hpp"

using namespace stf;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<void(std::string& note)> run;  // throws on failure
};

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw CheckFailure(what);
    }
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "cannot open " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    os << body;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("stf");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

// ---------------------------------------------------------------- fixtures

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

std::vector<TrainItem> overfit_suite(const RunConfig& cfg) {
    std::vector<SceneWindow> windows;
    for (int s = 0; s < 5; ++s) {
        ScenarioSpec spec;
        spec.agent_count = 4;
        spec.duration = 21;
        spec.seed = 11 + static_cast<std::uint64_t>(s);
        spec.speed_min = 0.4;
        spec.speed_max = 1.2;
        spec.noise_sigma = 0.0;
        spec.kinds = {MotionKind::kConstantVelocity, MotionKind::kConstantTurn};
        auto part = build_windows(generate_synthetic(spec),
                                  {cfg.t_his, cfg.t_pred, cfg.n_max, cfg.stride});
        windows.insert(windows.end(), part.begin(), part.end());
    }
    return prepare_items(windows, cfg);
}

SceneWindow random_scene(std::uint64_t seed, int agents) {
    ScenarioSpec spec;
    spec.agent_count = agents;
    spec.duration = 12;
    spec.seed = seed;
    spec.noise_sigma = 0.4;
    spec.kinds = {MotionKind::kConstantVelocity, MotionKind::kConstantTurn,
                  MotionKind::kApproachYield};
    const auto windows = build_windows(generate_synthetic(spec), {6, 6, 32, 1});
    require(!windows.empty(), "random scene produced no window");
    return normalize_window(windows.front());
}

// ------------------------------------------------------------- criteria

void criterion_graph_dump(std::string& note) {
    const fs::path dir = fresh_dir("stf_acc_graph");
    spit(dir / "scene.txt", kFixtureScene);
    spit(dir / "g.cfg", "t_his=3\nt_pred=1\nd_close=2.0\n");
    const auto out = (dir / "graph.txt").string();
    require(cli({"graph-dump", "--data", (dir / "scene.txt").string(), "--config",
                 (dir / "g.cfg").string(), "--window", "0", "--out", out}) == 0,
            "graph-dump exited nonzero");
    require(slurp(out) == kFixtureDump, "adjacency dump differs from the golden matrix");
    fs::remove_all(dir);
    note = "12x12 adjacency byte-exact";
}

void criterion_metric_recombination(std::string& note) {
    struct Row {
        double v, p, b, published, tol;
    };
    const Row wsade_rows[] = {
        {7.9467, 7.1811, 12.8805, 8.5881, 1e-3},
        {3.948, 1.746, 3.233, 2.514, 1e-3},
        {1.9874, 0.6834, 1.700, 1.1679, 1e-3},
        {2.403, 0.799, 2.001, 1.384, 1e-3},
    };
    for (const Row& r : wsade_rows) {
        const double got = weighted_summary(r.v, r.p, r.b);
        require(std::abs(got - r.published) < r.tol,
                "WSADE recombination missed " + std::to_string(r.published));
    }
    const Row wsfde_rows[] = {
        {6.080, 2.981, 4.913, 4.026, 2e-3},
        {3.5783, 1.3048, 3.2151, 2.1798, 2e-3},
        {2.972, 1.012, 2.392, 1.707, 2e-3},
    };
    for (const Row& r : wsfde_rows) {
        const double got = weighted_summary(r.v, r.p, r.b);
        require(std::abs(got - r.published) < r.tol,
                "WSFDE recombination missed " + std::to_string(r.published));
    }
    // Known inconsistency in the published table: this row's weighted sum of
    // its own per-category entries is ~14.019, not the printed 24.2262. The
    // formula result is asserted; the printed value is recorded as wrong.
    const double inconsistent = weighted_summary(12.7757, 11.1210, 22.7912);
    require(std::abs(inconsistent - 14.019384) < 1e-4, "inconsistent-row recombination drifted");
    require(std::abs(inconsistent - 24.2262) > 10.0, "inconsistent row unexpectedly matches");
    note = "7 rows recombine; 1 documented discrepancy (24.2262 vs 14.0194)";
}

void criterion_gradient_integrity(std::string& note) {
    Rng rng(2025);
    double worst = 0.0;
    auto track = [&worst](double err) { worst = std::max(worst, err); };

    {  // matmul + bias + elementwise activations
        GradTape tape;
        std::vector<double> w(12), b(4);
        for (double& v : w) v = rng.uniform(-1, 1);
        for (double& v : b) v = rng.uniform(-1, 1);
        tape.parameter("w", {3, 4}, w);
        tape.parameter("b", {4}, b);
        std::vector<double> xd(6);
        for (double& v : xd) v = rng.uniform(-1, 1);
        Tensor x({2, 3}, xd);
        track(fd_check(
            [&] {
                Tensor h = add_bias(matmul(x, tape.param("w")), tape.param("b"));
                return sum_all(mul(elu(h), leaky_relu(h, 0.2)));
            },
            tape, 1e-5));
    }
    {  // masked_softmax
        GradTape tape;
        std::vector<double> l(6), wd(6);
        for (double& v : l) v = rng.uniform(-2, 2);
        for (double& v : wd) v = rng.uniform(-1, 1);
        tape.parameter("logits", {6}, l);
        Tensor weight({6}, wd);
        track(fd_check(
            [&] { return sum_all(mul(masked_softmax(tape.param("logits"), {0, 2, 3, 5}), weight)); },
            tape, 1e-5));
    }
    {  // conv_time
        GradTape tape;
        std::vector<double> k(18), xd(16), wd(24);
        for (double& v : k) v = rng.uniform(-1, 1);
        for (double& v : xd) v = rng.uniform(-1, 1);
        for (double& v : wd) v = rng.uniform(-1, 1);
        tape.parameter("k", {3, 2, 3}, k);
        tape.parameter("x", {4, 2, 2}, xd);
        Tensor weight({4 * 2 * 3}, wd);
        track(fd_check(
            [&] {
                return sum_all(
                    mul(reshape(conv_time(tape.param("x"), tape.param("k")), {24}), weight));
            },
            tape, 1e-5));
    }
    {  // gru_cell
        GradTape tape;
        auto init = [&](const std::string& name, std::vector<int> shape) {
            long long n = 1;
            for (int d : shape) n *= d;
            std::vector<double> data(static_cast<std::size_t>(n));
            for (double& v : data) v = rng.uniform(-0.7, 0.7);
            return tape.parameter(name, shape, data);
        };
        GruParams p;
        p.w_z = init("wz", {3, 4});
        p.w_r = init("wr", {3, 4});
        p.w_h = init("wh", {3, 4});
        p.u_z = init("uz", {4, 4});
        p.u_r = init("ur", {4, 4});
        p.u_h = init("uh", {4, 4});
        p.b_z = init("bz", {4});
        p.b_r = init("br", {4});
        p.b_h = init("bh", {4});
        std::vector<double> xd(6), hd(8), wd(8);
        for (double& v : xd) v = rng.uniform(-1, 1);
        for (double& v : hd) v = rng.uniform(-1, 1);
        for (double& v : wd) v = rng.uniform(-1, 1);
        Tensor x({2, 3}, xd), h({2, 4}, hd), weight({2, 4}, wd);
        track(fd_check([&] { return sum_all(mul(gru_cell(x, h, p), weight)); }, tape, 1e-5));
    }
    // end-to-end loss on a small-magnitude probe (keeps finite-difference
    // noise below the threshold floor)
    for (std::uint64_t seed : {73ULL, 74ULL, 75ULL}) {
        ModelConfig cfg;
        cfg.t_his = 3;
        cfg.t_pred = 2;
        cfg.embed_width = 4;
        cfg.gat_width = 4;
        cfg.stgcn_channels = 6;
        cfg.gru_hidden = 8;
        StfModel model(cfg, seed);
        Rng prng(seed * 31 + 7);
        for (const auto& name : model.tape().param_names()) {
            Tensor& p = model.tape().param(name);
            const double bound = name.rfind("head.", 0) == 0 ? 0.01 : 0.35;
            for (long long i = 0; i < p.size(); ++i) {
                p.data()[i] = prng.uniform(-bound, bound);
            }
        }
        ScenarioSpec spec;
        spec.agent_count = 3;
        spec.duration = 5;
        spec.seed = seed + 6;
        spec.speed_min = 0.02;
        spec.speed_max = 0.06;
        auto recs = generate_synthetic(spec);
        for (auto& r : recs) {
            r.x *= 0.05;
            r.y *= 0.05;
        }
        const auto windows = build_windows(recs, {3, 2, 32, 1});
        SceneWindow w = normalize_window(windows.front());
        IntegratedGraph g = build_graph(w, {10.0, 3});
        track(fd_check([&] { return loss_fn(model.forward(w, g), w, LossKind::kMse); },
                       model.tape(), 1e-5));
    }
    require(worst < 1e-4, "max relative gradient error " + std::to_string(worst));
    char buf[64];
    std::snprintf(buf, sizeof buf, "max relative error %.2e", worst);
    note = buf;
}

void criterion_overfit(std::string& note) {
    RunConfig cfg;  // defaults: lr 1e-3, batch 1, seed 1, full widths
    cfg.epochs = 500;
    auto items = overfit_suite(cfg);
    require(items.size() == 50, "suite must hold 50 windows");

    StfModel model(model_config_from(cfg), cfg.seed);
    OptimizerState opt;
    opt.lr = cfg.lr;
    std::vector<std::size_t> train_idx, val_idx;
    split_items(items.size(), cfg.seed, train_idx, val_idx);
    for (long long epoch = 1; epoch <= cfg.epochs; ++epoch) {
        train_epoch(model, items, train_idx, opt, cfg, epoch);
    }
    std::vector<SceneWindow> vw;
    std::vector<PredictionSet> vp;
    for (std::size_t wi : val_idx) {
        model.tape().reset();
        vp.push_back(model.forward(items[wi].window, items[wi].graph));
        vw.push_back(items[wi].window);
    }
    model.tape().reset();
    const double wsade = evaluate(vw, vp).wsade.value();
    require(wsade < 0.05, "held-out WSADE " + std::to_string(wsade) + " >= 0.05");

    // single-window variant
    StfModel solo(model_config_from(cfg), cfg.seed);
    OptimizerState opt2;
    opt2.lr = cfg.lr;
    std::vector<std::size_t> order{0};
    double loss = 1e9;
    for (long long epoch = 1; epoch <= cfg.epochs; ++epoch) {
        loss = train_epoch(solo, items, order, opt2, cfg, epoch);
    }
    require(loss < 1e-3, "single-window loss " + std::to_string(loss) + " >= 1e-3");
    char buf[96];
    std::snprintf(buf, sizeof buf, "held-out WSADE %.4f m; single-window loss %.2e", wsade, loss);
    note = buf;
}

void criterion_attention_normalization(std::string& note) {
    ModelConfig cfg;
    cfg.embed_width = 8;
    cfg.gat_width = 8;
    cfg.stgcn_channels = 8;
    cfg.gru_hidden = 8;
    StfModel model(cfg, 7);
    long long rows_checked = 0;
    for (int scene = 0; scene < 100; ++scene) {
        SceneWindow w = random_scene(9000 + static_cast<std::uint64_t>(scene), 3 + scene % 5);
        IntegratedGraph g = build_graph(w, {10.0, cfg.t_his});
        model.tape().reset();
        ForwardTrace trace;
        model.stf_block(w, g, &trace);
        const int m = g.nodes();
        for (const auto& att : trace.attention) {
            for (int u = 0; u < m; ++u) {
                if (!g.valid[static_cast<std::size_t>(u)]) {
                    continue;
                }
                double sum = 0.0;
                for (int v = 0; v < m; ++v) {
                    sum += att[static_cast<std::size_t>(u) * m + v];
                }
                require(std::abs(sum - 1.0) <= 1e-9,
                        "attention row off by " + std::to_string(sum - 1.0));
                ++rows_checked;
            }
        }
    }
    model.tape().reset();
    note = std::to_string(rows_checked) + " attention rows within 1e-9";
}

void criterion_mask_permutation(std::string& note) {
    ModelConfig cfg;
    cfg.embed_width = 8;
    cfg.gat_width = 8;
    cfg.stgcn_channels = 10;
    cfg.gru_hidden = 12;
    StfModel model(cfg, 99);
    for (int scene = 0; scene < 20; ++scene) {
        SceneWindow w = random_scene(500 + static_cast<std::uint64_t>(scene), 4 + scene % 3);
        IntegratedGraph g = build_graph(w, {10.0, cfg.t_his});
        model.tape().reset();
        PredictionSet base = model.forward(w, g);

        // phantom agent appended at the high-id end
        SceneWindow padded = w;
        padded.n = w.n + 1;
        padded.positions.assign(static_cast<std::size_t>(w.frames()) * padded.n * 2, 0.0);
        padded.mask.assign(static_cast<std::size_t>(w.frames()) * padded.n, 0);
        for (int t = 0; t < w.frames(); ++t) {
            for (int i = 0; i < w.n; ++i) {
                const std::size_t src = static_cast<std::size_t>(t) * w.n + i;
                const std::size_t dst = static_cast<std::size_t>(t) * padded.n + i;
                padded.mask[dst] = w.mask[src];
                padded.positions[dst * 2] = w.positions[src * 2];
                padded.positions[dst * 2 + 1] = w.positions[src * 2 + 1];
            }
        }
        padded.agent_ids.push_back(100000 + scene);
        padded.agent_types.push_back(AgentType::kOther);
        model.tape().reset();
        PredictionSet aug = model.forward(padded, build_graph(padded, {10.0, cfg.t_his}));
        for (int t = 0; t < base.t_pred; ++t) {
            for (int i = 0; i < w.n; ++i) {
                for (int axis = 0; axis < 2; ++axis) {
                    require(std::abs(aug.position(t, i, axis) - base.position(t, i, axis)) <=
                                1e-9,
                            "phantom agent shifted a real prediction");
                }
            }
        }

        // full permutation must commute exactly
        std::vector<int> perm(static_cast<std::size_t>(w.n));
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(7000 + static_cast<std::uint64_t>(scene));
        rng.shuffle(perm);
        SceneWindow pw = w;
        for (int i = 0; i < w.n; ++i) {
            const int src = perm[static_cast<std::size_t>(i)];
            pw.agent_ids[static_cast<std::size_t>(i)] = w.agent_ids[static_cast<std::size_t>(src)];
            pw.agent_types[static_cast<std::size_t>(i)] =
                w.agent_types[static_cast<std::size_t>(src)];
            for (int t = 0; t < w.frames(); ++t) {
                const std::size_t dst = static_cast<std::size_t>(t) * w.n + i;
                const std::size_t so = static_cast<std::size_t>(t) * w.n + src;
                pw.mask[dst] = w.mask[so];
                pw.positions[dst * 2] = w.positions[so * 2];
                pw.positions[dst * 2 + 1] = w.positions[so * 2 + 1];
            }
        }
        model.tape().reset();
        PredictionSet pp = model.forward(pw, build_graph(pw, {10.0, cfg.t_his}));
        for (int t = 0; t < base.t_pred; ++t) {
            for (int i = 0; i < w.n; ++i) {
                const int src = perm[static_cast<std::size_t>(i)];
                require(pp.position(t, i, 0) == base.position(t, src, 0) &&
                            pp.position(t, i, 1) == base.position(t, src, 1),
                        "permutation did not commute exactly");
            }
        }
    }
    note = "20 scenes: phantom within 1e-9 (exact), permutation exact";
}

void criterion_determinism(std::string& note) {
    const fs::path dir = fresh_dir("stf_acc_determinism");
    spit(dir / "run.cfg", "epochs=25\nseed=5\ncheckpoint_interval=10\n");
    auto one_run = [&](const std::string& tag) {
        const fs::path sub = dir / tag;
        fs::create_directories(sub);
        const auto data = (sub / "data.txt").string();
        require(cli({"synth", "--agents", "5", "--frames", "20", "--seed", "21", "--out",
                     data}) == 0,
                "synth failed");
        require(cli({"train", "--data", data, "--config", (dir / "run.cfg").string(), "--out",
                     (sub / "run").string()}) == 0,
                "train failed");
        require(cli({"evaluate", "--data", data, "--checkpoint",
                     (sub / "run" / "checkpoint-final.ckpt").string(), "--out",
                     (sub / "metrics.csv").string()}) == 0,
                "evaluate failed");
        return std::make_pair(slurp(sub / "metrics.csv"),
                              slurp(sub / "run" / "checkpoint-final.ckpt"));
    };
    const auto a = one_run("a");
    const auto b = one_run("b");
    require(a.first == b.first, "metrics CSV bytes differ between identical runs");
    require(a.second == b.second, "checkpoint bytes differ between identical runs");
    fs::remove_all(dir);
    note = "metrics CSV and checkpoints byte-identical";
}

void criterion_metric_units(std::string& note) {
    SceneWindow w;
    w.t_his = 2;
    w.t_pred = 2;
    w.n = 1;
    w.positions.assign(4 * 2, 0.0);
    w.mask.assign(4, 1);
    w.agent_ids = {1};
    w.agent_types = {AgentType::kSmallVehicle};
    w.frame_ids = {0, 1, 2, 3};
    PredictionSet p;
    p.t_pred = 2;
    p.n = 1;
    p.predicted = {1};
    p.positions = Tensor({2, 1, 2}, {3.0, 4.0, 3.0, 4.0});
    p.displacements = Tensor::zeros({2, 1, 2});

    const auto r = rmse_horizon(p, w, std::nullopt, 1);
    require(r.has_value() && *r == 5.0, "3-4-5 RMSE is not exactly 5");
    const auto both = ade_fde(p, w, std::nullopt);
    require(both.has_value() && std::abs(both->first - 5.0) < 1e-15 &&
                std::abs(both->second - 5.0) < 1e-15,
            "constant offset must give ADE = FDE = offset");

    PredictionSet perfect = p;
    perfect.positions = Tensor::zeros({2, 1, 2});
    const MetricsReport rep = evaluate({w}, {perfect});
    require(rep.all.ade == 0.0 && rep.all.fde == 0.0 && *rep.rmse_all[0] == 0.0 &&
                *rep.rmse_all[1] == 0.0,
            "perfect prediction must score all zeros");
    note = "exact unit values hold";
}

void criterion_real_file_smoke(std::string& note) {
    const fs::path dir = fresh_dir("stf_acc_smoke");
    fs::path data;
    const char* env = std::getenv("STF_APOLLO_FILE");
    if (env != nullptr && fs::exists(env)) {
        data = env;
        note = "real file: " + std::string(env);
    } else {
        // Stand-in with the dataset's shape: a 1-minute sequence at 2 fps,
        // global-scale coordinates, agents entering and leaving.
        std::ostringstream body;
        Rng rng(808);
        char buf[256];
        const double bx = 587000.0, by = 4141000.0;
        for (int a = 0; a < 24; ++a) {
            const int born = rng.uniform_int(0, 60);
            const int death = std::min(120, born + rng.uniform_int(20, 90));
            const int type = 1 + a % 5;
            const double speed = type == 3 ? rng.uniform(0.5, 1.8) : rng.uniform(2.0, 9.0);
            const double theta = rng.uniform(0.0, 6.283185);
            double x = bx + rng.uniform(-60.0, 60.0);
            double y = by + rng.uniform(-60.0, 60.0);
            for (int f = born; f < death; ++f) {
                std::snprintf(buf, sizeof buf, "%d %d %d %.3f %.3f 0.0 4.0 1.8 1.5 %.3f\n", f,
                              a + 1, type, x, y, theta);
                body << buf;
                x += speed * 0.5 * std::cos(theta);
                y += speed * 0.5 * std::sin(theta);
            }
        }
        data = dir / "minute.txt";
        spit(data, body.str());
        note = "synthetic stand-in (set STF_APOLLO_FILE for a real sequence)";
    }
    spit(dir / "run.cfg", "epochs=1\nd_close=25.0\n");
    require(cli({"train", "--data", data.string(), "--config", (dir / "run.cfg").string(),
                 "--out", (dir / "run").string()}) == 0,
            "one-epoch training failed");
    require(cli({"evaluate", "--data", data.string(), "--checkpoint",
                 (dir / "run" / "checkpoint-final.ckpt").string(), "--out",
                 (dir / "metrics.csv").string()}) == 0,
            "evaluation failed");
    const std::string csv = slurp(dir / "metrics.csv");
    require(csv.find("wsade,,,") != std::string::npos, "metrics CSV lacks a WSADE row");
    fs::remove_all(dir);
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "integrated-graph golden dump", 1.0, criterion_graph_dump},
        {2, "weighted metric recombination", 1.0, criterion_metric_recombination},
        {3, "gradient integrity (finite differences)", 120.0, criterion_gradient_integrity},
        {4, "overfit convergence on the synthetic suite", 300.0, criterion_overfit},
        {5, "attention normalization on random scenes", 120.0, criterion_attention_normalization},
        {6, "mask/phantom invariance and permutation equivariance", 120.0,
         criterion_mask_permutation},
        {7, "end-to-end determinism", 120.0, criterion_determinism},
        {8, "metric unit values", 1.0, criterion_metric_units},
        {9, "minute-sequence ingest smoke", 300.0, criterion_real_file_smoke},
    };

    int failures = 0;
    for (auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string note;
        std::string error;
        try {
            c.run(note);
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (error.empty() && elapsed > c.budget_seconds) {
            error = "runtime " + std::to_string(elapsed) + " s exceeds budget";
        }
        if (error.empty()) {
            std::printf("[PASS] %d %-52s (%6.2f s)  %s\n", c.id, c.name.c_str(), elapsed,
                        note.c_str());
        } else {
            ++failures;
            std::printf("[FAIL] %d %-52s (%6.2f s)  %s\n", c.id, c.name.c_str(), elapsed,
                        error.c_str());
        }
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("ACCEPTANCE: all %zu criteria passed\n", criteria.size());
        return 0;
    }
    std::printf("ACCEPTANCE: %d of %zu criteria FAILED\n", failures, criteria.size());
    return 1;
}
