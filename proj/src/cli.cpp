#include "stf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stf/checkpoint.hpp"
#include "stf/config.hpp"
#include "stf/data.hpp"
#include "stf/graph.hpp"
#include "stf/metrics.hpp"
#include "stf/model.hpp"
#include "stf/train.hpp"

namespace stf {

namespace {

namespace fs = std::filesystem;

std::vector<TrajectoryRecord> load_records(const std::string& data_path) {
    if (!fs::exists(data_path)) {
        throw IoError("data path '" + data_path + "' does not exist");
    }
    if (fs::is_directory(data_path)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(data_path)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw IoError("data directory '" + data_path + "' is empty");
        }
        std::vector<TrajectoryRecord> all;
        long long frame_base = 0;
        for (const auto& f : files) {
            auto part = parse_records_file(f);
            // Files are independent sequences; keep their frame ranges
            // disjoint so windows never straddle file boundaries.
            long long max_frame = 0;
            for (auto& r : part) {
                r.frame_id += frame_base;
                max_frame = std::max(max_frame, r.frame_id);
            }
            frame_base = max_frame + 2;  // leave a gap
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    return parse_records_file(data_path);
}

RunConfig load_config(const std::string& config_path, std::optional<std::uint64_t> seed_override) {
    RunConfig cfg;
    if (!config_path.empty()) {
        cfg = parse_run_config_file(config_path);
    }
    if (seed_override.has_value()) {
        cfg.seed = *seed_override;
    }
    cfg.validate();
    return cfg;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    os << body;
    if (!os) {
        throw IoError("write failed for '" + path + "'");
    }
}

struct SynthArgs {
    int agents = 4;
    int frames = 20;
    std::uint64_t seed = 1;
    double noise = 0.0;
    double speed_min = 0.5;
    double speed_max = 2.0;
    std::string kinds = "cv,ct";
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    ScenarioSpec spec;
    spec.agent_count = a.agents;
    spec.duration = a.frames;
    spec.seed = a.seed;
    spec.noise_sigma = a.noise;
    spec.speed_min = a.speed_min;
    spec.speed_max = a.speed_max;
    spec.kinds.clear();
    std::istringstream ks(a.kinds);
    std::string kind;
    while (std::getline(ks, kind, ',')) {
        if (kind == "cv") {
            spec.kinds.push_back(MotionKind::kConstantVelocity);
        } else if (kind == "ct") {
            spec.kinds.push_back(MotionKind::kConstantTurn);
        } else if (kind == "ay") {
            spec.kinds.push_back(MotionKind::kApproachYield);
        } else {
            throw ConfigError("synth: unknown motion kind '" + kind + "' (use cv, ct, ay)");
        }
    }
    const auto records = generate_synthetic(spec);
    std::ostringstream body;
    write_records(records, body);
    write_text_file(a.out, body.str());
    return 0;
}

struct TrainArgs {
    std::string data;
    std::string config;
    std::string out;
    std::string resume;
    std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
    RunConfig cfg = load_config(a.config, a.seed);

    std::optional<Checkpoint> resume;
    long long start_epoch = 0;
    if (!a.resume.empty()) {
        resume = load_checkpoint_file(a.resume);
        const RunConfig ck_cfg = config_from_entries(resume->config);
        if (a.config.empty()) {
            const auto saved_seed = cfg.seed;
            cfg = ck_cfg;
            if (a.seed.has_value()) {
                cfg.seed = saved_seed;
            }
        } else if (ck_cfg.model_signature() != cfg.model_signature()) {
            throw ConfigError("resume: checkpoint/config mismatch");
        }
        start_epoch = resume->epoch;
    }

    const auto records = load_records(a.data);
    const auto windows = build_windows(records, {cfg.t_his, cfg.t_pred, cfg.n_max, cfg.stride});
    if (windows.empty()) {
        throw Error("train: data yields no usable windows");
    }
    const auto items = prepare_items(windows, cfg);

    StfModel model(model_config_from(cfg), cfg.seed);
    OptimizerState opt;
    opt.lr = cfg.lr;
    if (resume.has_value()) {
        restore_model(model, *resume);
        restore_optimizer(opt, *resume);
    }

    fs::create_directories(a.out);
    {
        std::ostringstream body;
        write_run_config(cfg, body);
        write_text_file((fs::path(a.out) / "config.txt").string(), body.str());
    }

    const FitResult result = fit(model, items, opt, cfg, a.out, start_epoch);

    std::ostringstream history;
    write_history_csv(result.history, history);
    write_text_file((fs::path(a.out) / "history.csv").string(), history.str());
    return 0;
}

struct EvalArgs {
    std::string data;
    std::string checkpoint;
    std::string config;  // optional cross-check
    std::string out;
};

// Shared by evaluate and predict: rebuild the model from the checkpoint's
// config snapshot and run it over the data.
struct EvalRun {
    RunConfig cfg;
    std::vector<SceneWindow> windows;
    std::vector<PredictionSet> predictions;
};

EvalRun run_model_over(const EvalArgs& a) {
    const Checkpoint ck = load_checkpoint_file(a.checkpoint);
    RunConfig cfg = config_from_entries(ck.config);
    if (!a.config.empty()) {
        const RunConfig user = parse_run_config_file(a.config);
        if (user.model_signature() != cfg.model_signature()) {
            throw ConfigError("evaluate: checkpoint/config mismatch");
        }
    }

    const auto records = load_records(a.data);
    auto windows = build_windows(records, {cfg.t_his, cfg.t_pred, cfg.n_max, cfg.stride});
    if (windows.empty()) {
        throw Error("evaluate: data yields no usable windows");
    }
    auto items = prepare_items(windows, cfg);

    StfModel model(model_config_from(cfg), cfg.seed);
    restore_model(model, ck);

    EvalRun run;
    run.cfg = cfg;
    for (auto& item : items) {
        model.tape().reset();
        run.predictions.push_back(model.forward(item.window, item.graph));
        run.windows.push_back(std::move(item.window));
    }
    model.tape().reset();
    return run;
}

int cmd_evaluate(const EvalArgs& a) {
    const EvalRun run = run_model_over(a);
    const MetricsReport report = evaluate(run.windows, run.predictions);
    std::ostringstream body;
    write_metrics_csv(report, body);
    write_text_file(a.out, body.str());
    return 0;
}

int cmd_predict(const EvalArgs& a) {
    const EvalRun run = run_model_over(a);
    std::ostringstream body;
    write_predictions(run.windows, run.predictions, body);
    write_text_file(a.out, body.str());
    return 0;
}

struct GraphDumpArgs {
    std::string data;
    std::string config;
    int window = 0;
    std::string out;
};

int cmd_graph_dump(const GraphDumpArgs& a) {
    RunConfig cfg = load_config(a.config, std::nullopt);
    const auto records = load_records(a.data);
    const auto windows = build_windows(records, {cfg.t_his, cfg.t_pred, cfg.n_max, cfg.stride});
    if (a.window < 0 || a.window >= static_cast<int>(windows.size())) {
        throw Error("graph-dump: window index " + std::to_string(a.window) +
                    " out of range (have " + std::to_string(windows.size()) + ")");
    }
    const IntegratedGraph g =
        build_graph(windows[static_cast<std::size_t>(a.window)], {cfg.d_close, cfg.t_his});
    std::ostringstream body;
    dump_graph(g, body);
    write_text_file(a.out, body.str());
    return 0;
}

struct PlotArgs {
    std::string metrics;
    std::string out;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

int cmd_plot(const PlotArgs& a) {
    std::ifstream is(a.metrics);
    if (!is) {
        throw IoError("plot: cannot open '" + a.metrics + "'");
    }
    std::string line;
    if (!std::getline(is, line) || split_csv_line(line) !=
                                       std::vector<std::string>{"metric", "category", "horizon",
                                                                "value"}) {
        throw ParseError("plot: '" + a.metrics + "' is not a metrics CSV");
    }
    std::vector<std::pair<double, double>> points;  // (horizon seconds, weighted rmse)
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw ParseError("plot: line " + std::to_string(line_no) + ": expected 4 fields");
        }
        if (fields[0] == "rmse" && fields[1] == "weighted") {
            try {
                points.emplace_back(std::stod(fields[2]), std::stod(fields[3]));
            } catch (const std::exception&) {
                throw ParseError("plot: line " + std::to_string(line_no) + ": bad number");
            }
        }
    }
    if (points.empty()) {
        throw Error("plot: no weighted RMSE rows in '" + a.metrics + "'");
    }
    std::sort(points.begin(), points.end());

    const double width = 640, height = 400;
    const double ml = 60, mr = 20, mt = 20, mb = 45;
    double max_v = 0.0, max_h = 0.0;
    for (const auto& [h, v] : points) {
        max_v = std::max(max_v, v);
        max_h = std::max(max_h, h);
    }
    if (max_v <= 0.0) {
        max_v = 1.0;
    }
    const double min_h = points.front().first;
    const double span_h = max_h > min_h ? max_h - min_h : 1.0;
    auto xmap = [&](double h) { return ml + (h - min_h) / span_h * (width - ml - mr); };
    auto ymap = [&](double v) { return height - mb - v / (max_v * 1.1) * (height - mt - mb); };

    char buf[256];
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", ml,
                  height - mb, width - mr, height - mb);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", ml,
                  mt, ml, height - mb);
    svg << buf;
    svg << "<text x=\"320\" y=\"392\" font-size=\"13\" text-anchor=\"middle\">prediction horizon "
           "(s)</text>\n";
    svg << "<text x=\"14\" y=\"210\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 14 210)\">weighted RMSE (m)</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", xmap(points[i].first),
                      ymap(points[i].second));
        svg << buf;
    }
    svg << "\"/>\n";
    for (const auto& [h, v] : points) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\" fill=\"#1f77b4\"/>\n", xmap(h),
                      ymap(v));
        svg << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.1f\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.1f</text>\n",
                      xmap(h), height - mb + 16, h);
        svg << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" "
                      "text-anchor=\"middle\">%.3f</text>\n",
                      xmap(h), ymap(v) - 8, v);
        svg << buf;
    }
    svg << "</svg>\n";
    write_text_file(a.out, svg.str());
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"spatiotemporal trajectory prediction lab"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic trajectory file");
    synth_cmd->add_option("--agents", synth.agents, "number of agents");
    synth_cmd->add_option("--frames", synth.frames, "scene duration in frames (2 fps)");
    synth_cmd->add_option("--seed", synth.seed, "random seed");
    synth_cmd->add_option("--noise", synth.noise, "positional noise sigma in meters");
    synth_cmd->add_option("--speed-min", synth.speed_min, "minimum agent speed (m/s)");
    synth_cmd->add_option("--speed-max", synth.speed_max, "maximum agent speed (m/s)");
    synth_cmd->add_option("--kinds", synth.kinds, "comma list of motion kinds: cv,ct,ay");
    synth_cmd->add_option("--out", synth.out, "output records file")->required();

    TrainArgs train;
    std::uint64_t train_seed = 0;
    auto* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--data", train.data, "records file or directory")->required();
    train_cmd->add_option("--config", train.config, "key=value config file");
    train_cmd->add_option("--out", train.out, "output directory")->required();
    train_cmd->add_option("--resume", train.resume, "checkpoint to resume from");
    auto* seed_opt = train_cmd->add_option("--seed", train_seed, "override config seed");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint, write metrics CSV");
    eval_cmd->add_option("--data", eval.data, "records file or directory")->required();
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--config", eval.config, "config file to cross-check");
    eval_cmd->add_option("--out", eval.out, "output CSV path")->required();

    EvalArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "write predicted trajectories");
    predict_cmd->add_option("--data", predict.data, "records file or directory")->required();
    predict_cmd->add_option("--checkpoint", predict.checkpoint, "checkpoint file")->required();
    predict_cmd->add_option("--config", predict.config, "config file to cross-check");
    predict_cmd->add_option("--out", predict.out, "output predictions path")->required();

    GraphDumpArgs gdump;
    auto* gdump_cmd = app.add_subcommand("graph-dump", "dump a window's adjacency matrix");
    gdump_cmd->add_option("--data", gdump.data, "records file or directory")->required();
    gdump_cmd->add_option("--config", gdump.config, "key=value config file");
    gdump_cmd->add_option("--window", gdump.window, "window index");
    gdump_cmd->add_option("--out", gdump.out, "output text path")->required();

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plot", "plot weighted RMSE against the horizon");
    plot_cmd->add_option("--metrics", plot.metrics, "metrics CSV from evaluate")->required();
    plot_cmd->add_option("--out", plot.out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth_cmd) {
            return cmd_synth(synth);
        }
        if (*train_cmd) {
            if (seed_opt->count() > 0) {
                train.seed = train_seed;
            }
            return cmd_train(train);
        }
        if (*eval_cmd) {
            return cmd_evaluate(eval);
        }
        if (*predict_cmd) {
            return cmd_predict(predict);
        }
        if (*gdump_cmd) {
            return cmd_graph_dump(gdump);
        }
        if (*plot_cmd) {
            return cmd_plot(plot);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace stf
