#pragma once

#include <cstdint>
#include <vector>

#include "stf/config.hpp"
#include "stf/data.hpp"
#include "stf/graph.hpp"
#include "stf/ops.hpp"
#include "stf/tensor.hpp"

namespace stf {

struct ModelConfig {
    int t_his = 6;
    int t_pred = 6;
    int embed_width = 16;      // F
    int gat_width = 16;        // F' per attention head
    int gat_layers = 2;
    int attention_heads = 1;
    double leaky_slope = 0.2;
    int stgcn_layers = 3;
    int stgcn_channels = 32;
    int temporal_kernel = 3;
    int gru_hidden = 64;

    void validate() const;
};

ModelConfig model_config_from(const RunConfig& run);

/// Per-node feature grid over the observation span, flattened time-major to
/// [t*n, c]. Masked slots are zero and stay zero through every block.
struct NodeFeatures {
    Tensor values;  // [t*n, c]
    int t = 0, n = 0, c = 0;
    std::vector<std::uint8_t> mask;  // [t*n]
};

/// Decoded future trajectories in the window's normalized frame. Positions
/// are the cumulative sum of displacements from each agent's last observed
/// position. Only agents valid at the anchor frame are prediction targets.
struct PredictionSet {
    int t_pred = 0, n = 0;
    std::vector<Tensor> step_positions;      // t_pred entries of [n,2], on tape
    std::vector<Tensor> step_displacements;  // t_pred entries of [n,2], on tape
    Tensor positions;                        // [t_pred, n, 2], plain copy
    Tensor displacements;                    // [t_pred, n, 2], plain copy
    std::vector<std::uint8_t> predicted;     // [n]

    double position(int t, int i, int axis) const {
        return positions.data()[(static_cast<std::size_t>(t) * n + i) * 2 + axis];
    }
};

/// Effective attention rows captured during a forward pass, one [m*m] matrix
/// per (gat layer, head). Rows of valid nodes sum to 1 over their support;
/// fallback rows are a one-hot on the node itself.
struct ForwardTrace {
    int nodes = 0;
    std::vector<std::vector<double>> attention;
};

/// Per-frame graph convolution with the symmetrically normalized
/// adjacency-plus-self-loop over valid nodes. Reductions iterate neighbors in
/// (time, agent_id) order so agent permutations commute bit-exactly.
Tensor graph_conv(const Tensor& x, const IntegratedGraph& g,
                  const std::vector<long long>& agent_ids);

class StfModel {
  public:
    StfModel(const ModelConfig& cfg, std::uint64_t seed);

    /// Two-layer MLP lifting (x, y) to embed_width features per node.
    NodeFeatures embed(const SceneWindow& w);

    /// One attention layer over the integrated graph. Empty-neighborhood
    /// nodes fall back to their own mapped feature.
    NodeFeatures gat_layer(int layer, const NodeFeatures& f, const IntegratedGraph& g,
                           const std::vector<long long>& agent_ids,
                           std::vector<std::vector<double>>* attention_out = nullptr);

    /// embed -> gat_layer stack with exponential-linear units in between.
    NodeFeatures stf_block(const SceneWindow& w, const IntegratedGraph& g,
                           ForwardTrace* trace = nullptr);

    /// Stacked (graph conv, temporal conv, rectifier, residual) layers.
    NodeFeatures stgcn_block(const SceneWindow& w, const IntegratedGraph& g);

    /// Feature-axis concatenation over an identical (t, n) grid.
    static NodeFeatures fuse(const NodeFeatures& a, const NodeFeatures& b);

    /// GRU encoder over the fused history, then an autoregressive GRU
    /// decoder emitting per-frame displacements. t_pred_override > 0
    /// shortens/extends the horizon without touching the config.
    PredictionSet decode(const NodeFeatures& fused, const SceneWindow& w,
                         int t_pred_override = 0);

    PredictionSet forward(const SceneWindow& w, const IntegratedGraph& g,
                          ForwardTrace* trace = nullptr);

    GradTape& tape() { return tape_; }
    const GradTape& tape() const { return tape_; }
    const ModelConfig& config() const { return cfg_; }
    int fused_width() const { return cfg_.gat_width * cfg_.attention_heads + cfg_.stgcn_channels; }

  private:
    Tensor window_input(const SceneWindow& w) const;

    ModelConfig cfg_;
    GradTape tape_;

    Tensor embed_w1_, embed_b1_, embed_w2_, embed_b2_;
    struct GatHead {
        Tensor w, a_src, a_dst;
    };
    std::vector<std::vector<GatHead>> gat_;
    struct StgcnLayer {
        Tensor gw, gb, kernel, kb;
    };
    std::vector<StgcnLayer> stgcn_;
    GruParams enc_, dec_;
    Tensor head_w_, head_b_;
};

}  // namespace stf
