#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stf/data.hpp"
#include "stf/model.hpp"

namespace stf {

/// Category weights of the weighted-sum metrics (vehicle, pedestrian, bike).
struct MetricWeights {
    double d_v = 0.20;
    double d_p = 0.58;
    double d_b = 0.22;
};

struct CategoryScore {
    double ade = 0.0;
    double fde = 0.0;
    long long agents = 0;  // scored agents (at least one scored horizon)
    long long pairs = 0;   // scored (agent, horizon) pairs
};

/// Full evaluation summary. An empty category is reported as absent, never
/// as zero; the weighted metrics exist only when all three weighted
/// categories are present.
struct MetricsReport {
    int t_pred = 0;
    std::optional<CategoryScore> vehicle, pedestrian, bike, other;
    CategoryScore all;
    std::optional<double> wsade, wsfde;
    std::vector<std::optional<double>> rmse_vehicle, rmse_pedestrian, rmse_bike;
    std::vector<std::optional<double>> rmse_weighted, rmse_all;
};

/// Root mean squared displacement over scored agents at horizon t (1-based).
/// Returns nullopt when the scored set is empty (absent-category signal).
std::optional<double> rmse_horizon(const PredictionSet& pred, const SceneWindow& truth,
                                   std::optional<MetricCategory> filter, int t);

/// (ADE, FDE) over the scored set: ADE pools every scored (agent, horizon)
/// pair; FDE averages each agent's error at its last scored horizon.
std::optional<std::pair<double, double>> ade_fde(const PredictionSet& pred,
                                                 const SceneWindow& truth,
                                                 std::optional<MetricCategory> filter);

double weighted_summary(double vehicle, double pedestrian, double bike,
                        const MetricWeights& w = {});
std::optional<double> weighted_summary(const std::optional<double>& vehicle,
                                       const std::optional<double>& pedestrian,
                                       const std::optional<double>& bike,
                                       const MetricWeights& w = {});

/// Pool every window and produce the complete report. Throws EvaluationError
/// when nothing at all is scored.
MetricsReport evaluate(const std::vector<SceneWindow>& windows,
                       const std::vector<PredictionSet>& predictions,
                       const MetricWeights& w = {});

/// CSV emission: header "metric,category,horizon,value", horizons in seconds
/// at 2 fps, values with fixed 6-decimal formatting.
void write_metrics_csv(const MetricsReport& report, std::ostream& os);

}  // namespace stf
