#pragma once

#include <map>
#include <string>
#include <vector>

#include "stf/tensor.hpp"

namespace stf {

/// Adaptive-moment optimizer state. Accumulators are keyed by parameter name
/// and allocated lazily with the parameter's shape on first step.
struct OptimizerState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step_count = 0;
    std::map<std::string, std::vector<double>> m;
    std::map<std::string, std::vector<double>> v;
};

/// One bias-corrected adaptive update over every registered parameter.
/// Gradients must cover all parameters and be finite; a NaN/Inf gradient
/// aborts with the offending parameter's name before anything is mutated.
void adam_step(GradTape& params, const GradMap& grads, OptimizerState& state);

/// Global L2-norm clipping across all gradients, in place. Returns the norm
/// measured before clipping.
double clip_gradients(GradMap& grads, double max_norm);

}  // namespace stf
