#pragma once

#include <functional>
#include <vector>

#include "stf/tensor.hpp"

namespace stf {

// Differentiable primitives. Every op validates shapes, computes the forward
// value eagerly, verifies the output is finite, and (when any input lives on
// a tape) records its backward closure.

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n] -> [m,n]

Tensor add(const Tensor& a, const Tensor& b);  // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise

/// x[..., C] + bias[C], broadcast over leading dims.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);

/// out[i][j] = col[i] + row[j]. Inputs are [m] / [m,1] vectors.
Tensor outer_sum(const Tensor& col, const Tensor& row);

/// Column-axis concatenation of two [m, *] matrices.
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Slice index t of axis 0; the result drops that axis.
Tensor time_slice(const Tensor& x, int t);

Tensor sum_all(const Tensor& x);  // -> [1]

/// Same data, new shape (element count preserved). Not a copy.
Tensor reshape(const Tensor& x, std::vector<int> shape);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor elu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
/// Elementwise Huber with delta 1: 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
Tensor smooth_l1(const Tensor& x);

/// Softmax of a [n] vector restricted to `active` (sorted unique indices).
/// Inactive outputs are exactly zero; stabilized by max subtraction.
/// Throws EmptyNeighborhoodError when `active` is empty.
Tensor masked_softmax(const Tensor& logits, const std::vector<int>& active);

enum class PadMode { kSame };

/// 1-D convolution along the time axis of x[T,N,C_in] with kernel
/// [k,C_in,C_out], zero "same" padding, independently per agent column.
Tensor conv_time(const Tensor& x, const Tensor& kernel, PadMode mode = PadMode::kSame);

/// Weights of one gated recurrent unit cell.
struct GruParams {
    Tensor w_z, w_r, w_h;  // [C_in, H]
    Tensor u_z, u_r, u_h;  // [H, H]
    Tensor b_z, b_r, b_h;  // [H]
};

/// One GRU update for a batch: x[B,C_in], h[B,H] -> [B,H].
Tensor gru_cell(const Tensor& x, const Tensor& h, const GruParams& p);

/// Central-difference check of tape gradients for the scalar function f,
/// which must rebuild its graph on the tape each call. Returns the worst
/// relative error over all parameter elements, with denominator
/// max(|analytic|, |estimate|, 1e-8). f is evaluated twice up front; if the
/// two values differ, f is not deterministic and the check refuses to run.
double fd_check(const std::function<Tensor()>& f, GradTape& tape, double eps);

// Test/support helpers.
bool all_finite(const Tensor& x);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace stf
