#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stf {

/// Flat key=value run configuration. Every key has a default; unknown keys
/// are rejected at parse time. The canonical serialization (write_run_config)
/// is echoed into run outputs and checkpoints for provenance.
struct RunConfig {
    // windowing
    int t_his = 6;
    int t_pred = 6;
    int n_max = 32;
    int stride = 1;
    // graph
    double d_close = 10.0;
    // model
    int embed_width = 16;
    int gat_width = 16;
    int gat_layers = 2;
    int attention_heads = 1;
    double leaky_slope = 0.2;
    int stgcn_layers = 3;
    int stgcn_channels = 32;
    int temporal_kernel = 3;
    int gru_hidden = 64;
    // training
    double lr = 1e-3;
    int epochs = 100;
    int batch_size = 1;
    std::uint64_t seed = 1;
    int checkpoint_interval = 0;  // 0: final checkpoint only
    double grad_clip = 5.0;
    std::string loss = "mse";  // mse | smooth_l1

    void validate() const;

    /// Keys that must agree between a checkpoint and an evaluation run
    /// (windowing + graph + model), serialized canonically.
    std::string model_signature() const;
};

RunConfig parse_run_config(std::istream& is);
RunConfig parse_run_config_file(const std::string& path);
/// Apply one "key=value" assignment (same validation as file parsing).
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

void write_run_config(const RunConfig& cfg, std::ostream& os);
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);
RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace stf
