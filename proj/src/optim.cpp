#include "stf/optim.hpp"

#include <cmath>

#include "stf/errors.hpp"

namespace stf {

void adam_step(GradTape& params, const GradMap& grads, OptimizerState& state) {
    for (const auto& name : params.param_names()) {
        auto it = grads.find(name);
        if (it == grads.end()) {
            throw ContractError("adam_step: no gradient supplied for parameter '" + name + "'");
        }
        const Tensor& g = it->second;
        if (g.shape() != params.param(name).shape()) {
            throw DimensionError("adam_step: gradient shape mismatch for '" + name + "'");
        }
        for (long long i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g.data()[i])) {
                throw PoisonedGradientError("adam_step: non-finite gradient for parameter '" +
                                            name + "'");
            }
        }
    }

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (const auto& name : params.param_names()) {
        Tensor& p = params.param(name);
        const Tensor& g = grads.at(name);
        auto& m = state.m[name];
        auto& v = state.v[name];
        if (m.empty()) {
            m.assign(static_cast<std::size_t>(p.size()), 0.0);
            v.assign(static_cast<std::size_t>(p.size()), 0.0);
        }
        for (long long i = 0; i < p.size(); ++i) {
            const auto u = static_cast<std::size_t>(i);
            const double gi = g.data()[i];
            m[u] = state.beta1 * m[u] + (1.0 - state.beta1) * gi;
            v[u] = state.beta2 * v[u] + (1.0 - state.beta2) * gi * gi;
            const double mhat = m[u] / bc1;
            const double vhat = v[u] / bc2;
            p.data()[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

double clip_gradients(GradMap& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, g] : grads) {
        (void)name;
        for (long long i = 0; i < g.size(); ++i) {
            sq += g.data()[i] * g.data()[i];
        }
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double factor = max_norm / norm;
        for (auto& [name, g] : grads) {
            (void)name;
            for (long long i = 0; i < g.size(); ++i) {
                g.data()[i] *= factor;
            }
        }
    }
    return norm;
}

}  // namespace stf
