#include "stf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "stf/errors.hpp"

namespace stf {

namespace {

// One scored agent in one window: its category and the Euclidean error at
// each horizon it has ground truth for.
struct Sample {
    MetricCategory cat;
    std::vector<std::optional<double>> err;
};

void check_aligned(const PredictionSet& pred, const SceneWindow& w) {
    if (pred.n != w.n || pred.t_pred != w.t_pred) {
        throw ContractError("metrics: prediction shape does not match window");
    }
}

std::vector<Sample> collect(const SceneWindow& w, const PredictionSet& p) {
    check_aligned(p, w);
    std::vector<Sample> out;
    for (int i = 0; i < w.n; ++i) {
        if (!w.predicted(i)) {
            continue;
        }
        Sample s;
        s.cat = category_of(w.agent_types[static_cast<std::size_t>(i)]);
        s.err.resize(static_cast<std::size_t>(w.t_pred));
        bool any = false;
        for (int t = 0; t < w.t_pred; ++t) {
            if (!w.valid(w.t_his + t, i)) {
                continue;
            }
            const double dx = p.position(t, i, 0) - w.px(w.t_his + t, i);
            const double dy = p.position(t, i, 1) - w.py(w.t_his + t, i);
            s.err[static_cast<std::size_t>(t)] = std::sqrt(dx * dx + dy * dy);
            any = true;
        }
        if (any) {
            out.push_back(std::move(s));
        }
    }
    return out;
}

bool in_filter(MetricCategory cat, const std::optional<MetricCategory>& filter) {
    return !filter.has_value() || cat == *filter;
}

std::optional<double> rmse_of(const std::vector<Sample>& samples,
                              const std::optional<MetricCategory>& filter, int t0) {
    double sq = 0.0;
    long long count = 0;
    for (const auto& s : samples) {
        if (!in_filter(s.cat, filter)) {
            continue;
        }
        const auto& e = s.err[static_cast<std::size_t>(t0)];
        if (e.has_value()) {
            sq += *e * *e;
            ++count;
        }
    }
    if (count == 0) {
        return std::nullopt;
    }
    return std::sqrt(sq / static_cast<double>(count));
}

std::optional<CategoryScore> score_of(const std::vector<Sample>& samples,
                                      const std::optional<MetricCategory>& filter) {
    CategoryScore sc;
    double ade_sum = 0.0, fde_sum = 0.0;
    for (const auto& s : samples) {
        if (!in_filter(s.cat, filter)) {
            continue;
        }
        double last = 0.0;
        bool any = false;
        for (const auto& e : s.err) {
            if (e.has_value()) {
                ade_sum += *e;
                ++sc.pairs;
                last = *e;
                any = true;
            }
        }
        if (any) {
            fde_sum += last;
            ++sc.agents;
        }
    }
    if (sc.agents == 0) {
        return std::nullopt;
    }
    sc.ade = ade_sum / static_cast<double>(sc.pairs);
    sc.fde = fde_sum / static_cast<double>(sc.agents);
    return sc;
}

}  // namespace

std::optional<double> rmse_horizon(const PredictionSet& pred, const SceneWindow& truth,
                                   std::optional<MetricCategory> filter, int t) {
    if (t < 1 || t > truth.t_pred) {
        throw ContractError("rmse_horizon: t must lie in [1, t_pred]");
    }
    return rmse_of(collect(truth, pred), filter, t - 1);
}

std::optional<std::pair<double, double>> ade_fde(const PredictionSet& pred,
                                                 const SceneWindow& truth,
                                                 std::optional<MetricCategory> filter) {
    const auto sc = score_of(collect(truth, pred), filter);
    if (!sc.has_value()) {
        return std::nullopt;
    }
    return std::make_pair(sc->ade, sc->fde);
}

double weighted_summary(double vehicle, double pedestrian, double bike, const MetricWeights& w) {
    return w.d_v * vehicle + w.d_p * pedestrian + w.d_b * bike;
}

std::optional<double> weighted_summary(const std::optional<double>& vehicle,
                                       const std::optional<double>& pedestrian,
                                       const std::optional<double>& bike,
                                       const MetricWeights& w) {
    if (!vehicle.has_value() || !pedestrian.has_value() || !bike.has_value()) {
        return std::nullopt;
    }
    return weighted_summary(*vehicle, *pedestrian, *bike, w);
}

MetricsReport evaluate(const std::vector<SceneWindow>& windows,
                       const std::vector<PredictionSet>& predictions, const MetricWeights& w) {
    if (windows.size() != predictions.size()) {
        throw ContractError("evaluate: window/prediction count mismatch");
    }
    int t_pred = 0;
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        t_pred = std::max(t_pred, windows[i].t_pred);
        auto part = collect(windows[i], predictions[i]);
        samples.insert(samples.end(), part.begin(), part.end());
    }
    if (samples.empty()) {
        throw EvaluationError("evaluate: no scored agents");
    }
    for (auto& s : samples) {
        s.err.resize(static_cast<std::size_t>(t_pred));
    }

    MetricsReport r;
    r.t_pred = t_pred;
    r.vehicle = score_of(samples, MetricCategory::kVehicle);
    r.pedestrian = score_of(samples, MetricCategory::kPedestrian);
    r.bike = score_of(samples, MetricCategory::kBike);
    r.other = score_of(samples, MetricCategory::kOther);
    r.all = *score_of(samples, std::nullopt);

    auto opt_ade = [](const std::optional<CategoryScore>& s) {
        return s.has_value() ? std::optional<double>(s->ade) : std::nullopt;
    };
    auto opt_fde = [](const std::optional<CategoryScore>& s) {
        return s.has_value() ? std::optional<double>(s->fde) : std::nullopt;
    };
    r.wsade = weighted_summary(opt_ade(r.vehicle), opt_ade(r.pedestrian), opt_ade(r.bike), w);
    r.wsfde = weighted_summary(opt_fde(r.vehicle), opt_fde(r.pedestrian), opt_fde(r.bike), w);

    r.rmse_vehicle.resize(static_cast<std::size_t>(t_pred));
    r.rmse_pedestrian.resize(static_cast<std::size_t>(t_pred));
    r.rmse_bike.resize(static_cast<std::size_t>(t_pred));
    r.rmse_weighted.resize(static_cast<std::size_t>(t_pred));
    r.rmse_all.resize(static_cast<std::size_t>(t_pred));
    for (int t = 0; t < t_pred; ++t) {
        const auto u = static_cast<std::size_t>(t);
        r.rmse_vehicle[u] = rmse_of(samples, MetricCategory::kVehicle, t);
        r.rmse_pedestrian[u] = rmse_of(samples, MetricCategory::kPedestrian, t);
        r.rmse_bike[u] = rmse_of(samples, MetricCategory::kBike, t);
        r.rmse_weighted[u] =
            weighted_summary(r.rmse_vehicle[u], r.rmse_pedestrian[u], r.rmse_bike[u], w);
        r.rmse_all[u] = rmse_of(samples, std::nullopt, t);
    }
    return r;
}

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string horizon_seconds(int t0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 0.5 * (t0 + 1));
    return buf;
}

}  // namespace

void write_metrics_csv(const MetricsReport& r, std::ostream& os) {
    os << "metric,category,horizon,value\n";
    auto summary_row = [&](const char* metric, const char* cat,
                           const std::optional<CategoryScore>& s, bool fde) {
        if (s.has_value()) {
            os << metric << "," << cat << ",," << fmt6(fde ? s->fde : s->ade) << "\n";
        }
    };
    summary_row("ade", "vehicle", r.vehicle, false);
    summary_row("ade", "pedestrian", r.pedestrian, false);
    summary_row("ade", "bike", r.bike, false);
    os << "ade,all,," << fmt6(r.all.ade) << "\n";
    summary_row("fde", "vehicle", r.vehicle, true);
    summary_row("fde", "pedestrian", r.pedestrian, true);
    summary_row("fde", "bike", r.bike, true);
    os << "fde,all,," << fmt6(r.all.fde) << "\n";
    if (r.wsade.has_value()) {
        os << "wsade,,," << fmt6(*r.wsade) << "\n";
    }
    if (r.wsfde.has_value()) {
        os << "wsfde,,," << fmt6(*r.wsfde) << "\n";
    }
    auto rmse_rows = [&](const char* cat, const std::vector<std::optional<double>>& col) {
        for (int t = 0; t < r.t_pred; ++t) {
            const auto& v = col[static_cast<std::size_t>(t)];
            if (v.has_value()) {
                os << "rmse," << cat << "," << horizon_seconds(t) << "," << fmt6(*v) << "\n";
            }
        }
    };
    rmse_rows("vehicle", r.rmse_vehicle);
    rmse_rows("pedestrian", r.rmse_pedestrian);
    rmse_rows("bike", r.rmse_bike);
    rmse_rows("weighted", r.rmse_weighted);
    rmse_rows("all", r.rmse_all);
    auto count_row = [&](const char* cat, const std::optional<CategoryScore>& s) {
        if (s.has_value()) {
            os << "count," << cat << ",," << s->agents << "\n";
        }
    };
    count_row("vehicle", r.vehicle);
    count_row("pedestrian", r.pedestrian);
    count_row("bike", r.bike);
    count_row("other", r.other);
    os << "count,all,," << r.all.agents << "\n";
}

}  // namespace stf
