#pragma once

#include <string>
#include <vector>

#include "stf/checkpoint.hpp"
#include "stf/config.hpp"
#include "stf/graph.hpp"
#include "stf/model.hpp"
#include "stf/optim.hpp"

namespace stf {

enum class LossKind { kMse, kSmoothL1 };
LossKind loss_kind_from(const std::string& name);

/// Mean error over scored (agent, horizon) pairs: squared Euclidean position
/// error for kMse, per-coordinate Huber for kSmoothL1. Masked slots never
/// contribute. Throws ContractError when nothing is scored.
Tensor loss_fn(const PredictionSet& pred, const SceneWindow& w, LossKind kind);

/// A window ready for training: normalized, with its graph prebuilt.
struct TrainItem {
    SceneWindow window;
    IntegratedGraph graph;
};

std::vector<TrainItem> prepare_items(const std::vector<SceneWindow>& raw, const RunConfig& cfg);

/// Deterministic 80/20 split on window index, derived from the run seed.
void split_items(std::size_t count, std::uint64_t seed, std::vector<std::size_t>& train,
                 std::vector<std::size_t>& held_out);

/// One seeded shuffled pass: forward/backward per batch, global-norm clip,
/// one adaptive step per batch. Returns the mean per-window loss. A
/// non-finite loss aborts naming the offending window.
double train_epoch(StfModel& model, const std::vector<TrainItem>& items,
                   const std::vector<std::size_t>& order_pool, OptimizerState& opt,
                   const RunConfig& cfg, long long epoch);

struct HistoryRow {
    long long epoch = 0;
    double loss = 0.0;
    bool has_wsade = false;
    double wsade = 0.0;
};

struct FitResult {
    std::vector<HistoryRow> history;
    std::vector<std::string> checkpoints_written;
};

/// Run epochs start_epoch+1 .. cfg.epochs, evaluating held-out WSADE each
/// epoch and writing checkpoints into out_dir (empty: keep everything in
/// memory). Fully determined by (seed, data, config).
FitResult fit(StfModel& model, const std::vector<TrainItem>& items, OptimizerState& opt,
              const RunConfig& cfg, const std::string& out_dir, long long start_epoch = 0);

void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& os);

// Checkpoint bridging.
Checkpoint make_checkpoint(const StfModel& model, const OptimizerState& opt, long long epoch,
                           const RunConfig& cfg);
void restore_model(StfModel& model, const Checkpoint& ck);
void restore_optimizer(OptimizerState& opt, const Checkpoint& ck);

}  // namespace stf
