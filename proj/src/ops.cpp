#include "stf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

namespace stf {

namespace {

// Central exit point of every forward computation: verifies finiteness and
// binds the result to the tape when gradients are being recorded.
Tensor finish(GradTape* tape, std::vector<int> shape, std::vector<double> data, const char* op) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw Error(std::string(op) + " produced a non-finite value");
        }
    }
    if (tape == nullptr) {
        return Tensor(std::move(shape), std::move(data));
    }
    return tape->make_recorded(std::move(shape), std::move(data));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
    }
}

// Elementwise unary op; dfdx receives (input, output).
template <typename F, typename D>
Tensor unary_op(const Tensor& x, const char* name, F&& f, D&& dfdx) {
    const long long n = x.size();
    std::vector<double> out(static_cast<std::size_t>(n));
    const double* xd = x.data();
    for (long long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = f(xd[i]);
    }
    GradTape* tape = common_tape({&x});
    Tensor y = finish(tape, x.shape(), std::move(out), name);
    if (tape != nullptr && x.node() >= 0) {
        const int nx = x.node(), ny = y.node();
        auto xs = x.storage();
        auto ys = y.storage();
        auto d = dfdx;
        tape->record([tape, nx, ny, xs, ys, d, n] {
            const auto& go = tape->grad(ny);
            auto& gx = tape->grad(nx);
            for (long long i = 0; i < n; ++i) {
                const auto u = static_cast<std::size_t>(i);
                gx[u] += go[u] * d((*xs)[u], (*ys)[u]);
            }
        });
    }
    return y;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
        throw DimensionError("matmul: incompatible shapes " + a.shape_str() + " and " +
                             b.shape_str());
    }
    const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
    const double* ad = a.data();
    const double* bd = b.data();
    for (int i = 0; i < m; ++i) {
        for (int l = 0; l < k; ++l) {
            const double ail = ad[static_cast<std::size_t>(i) * k + l];
            if (ail == 0.0) {
                continue;
            }
            const double* brow = bd + static_cast<std::size_t>(l) * n;
            double* orow = out.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                orow[j] += ail * brow[j];
            }
        }
    }
    GradTape* tape = common_tape({&a, &b});
    Tensor y = finish(tape, {m, n}, std::move(out), "matmul");
    if (tape != nullptr) {
        const int na = a.node(), nb = b.node(), ny = y.node();
        auto as = a.storage();
        auto bs = b.storage();
        tape->record([tape, na, nb, ny, as, bs, m, k, n] {
            const auto& go = tape->grad(ny);
            if (na >= 0) {
                auto& ga = tape->grad(na);
                const auto& bd = *bs;
                for (int i = 0; i < m; ++i) {
                    for (int l = 0; l < k; ++l) {
                        double s = 0.0;
                        const double* grow = go.data() + static_cast<std::size_t>(i) * n;
                        const double* brow = bd.data() + static_cast<std::size_t>(l) * n;
                        for (int j = 0; j < n; ++j) {
                            s += grow[j] * brow[j];
                        }
                        ga[static_cast<std::size_t>(i) * k + l] += s;
                    }
                }
            }
            if (nb >= 0) {
                auto& gb = tape->grad(nb);
                const auto& ad = *as;
                for (int i = 0; i < m; ++i) {
                    const double* grow = go.data() + static_cast<std::size_t>(i) * n;
                    for (int l = 0; l < k; ++l) {
                        const double ail = ad[static_cast<std::size_t>(i) * k + l];
                        if (ail == 0.0) {
                            continue;
                        }
                        double* brow = gb.data() + static_cast<std::size_t>(l) * n;
                        for (int j = 0; j < n; ++j) {
                            brow[j] += ail * grow[j];
                        }
                    }
                }
            }
        });
    }
    return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    const long long n = a.size();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = a.data()[i] + b.data()[i];
    }
    GradTape* tape = common_tape({&a, &b});
    Tensor y = finish(tape, a.shape(), std::move(out), "add");
    if (tape != nullptr) {
        const int na = a.node(), nb = b.node(), ny = y.node();
        tape->record([tape, na, nb, ny, n] {
            const auto& go = tape->grad(ny);
            if (na >= 0) {
                auto& ga = tape->grad(na);
                for (long long i = 0; i < n; ++i) {
                    ga[static_cast<std::size_t>(i)] += go[static_cast<std::size_t>(i)];
                }
            }
            if (nb >= 0) {
                auto& gb = tape->grad(nb);
                for (long long i = 0; i < n; ++i) {
                    gb[static_cast<std::size_t>(i)] += go[static_cast<std::size_t>(i)];
                }
            }
        });
    }
    return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    const long long n = a.size();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = a.data()[i] - b.data()[i];
    }
    GradTape* tape = common_tape({&a, &b});
    Tensor y = finish(tape, a.shape(), std::move(out), "sub");
    if (tape != nullptr) {
        const int na = a.node(), nb = b.node(), ny = y.node();
        tape->record([tape, na, nb, ny, n] {
            const auto& go = tape->grad(ny);
            if (na >= 0) {
                auto& ga = tape->grad(na);
                for (long long i = 0; i < n; ++i) {
                    ga[static_cast<std::size_t>(i)] += go[static_cast<std::size_t>(i)];
                }
            }
            if (nb >= 0) {
                auto& gb = tape->grad(nb);
                for (long long i = 0; i < n; ++i) {
                    gb[static_cast<std::size_t>(i)] -= go[static_cast<std::size_t>(i)];
                }
            }
        });
    }
    return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    const long long n = a.size();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = a.data()[i] * b.data()[i];
    }
    GradTape* tape = common_tape({&a, &b});
    Tensor y = finish(tape, a.shape(), std::move(out), "mul");
    if (tape != nullptr) {
        const int na = a.node(), nb = b.node(), ny = y.node();
        auto as = a.storage();
        auto bs = b.storage();
        tape->record([tape, na, nb, ny, as, bs, n] {
            const auto& go = tape->grad(ny);
            if (na >= 0) {
                auto& ga = tape->grad(na);
                for (long long i = 0; i < n; ++i) {
                    const auto u = static_cast<std::size_t>(i);
                    ga[u] += go[u] * (*bs)[u];
                }
            }
            if (nb >= 0) {
                auto& gb = tape->grad(nb);
                for (long long i = 0; i < n; ++i) {
                    const auto u = static_cast<std::size_t>(i);
                    gb[u] += go[u] * (*as)[u];
                }
            }
        });
    }
    return y;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    if (bias.rank() != 1 || x.rank() < 1 || x.shape().back() != bias.shape()[0]) {
        throw DimensionError("add_bias: bias " + bias.shape_str() + " does not match last axis of " +
                             x.shape_str());
    }
    const int c = bias.shape()[0];
    const long long rows = x.size() / c;
    std::vector<double> out(static_cast<std::size_t>(x.size()));
    const double* xd = x.data();
    const double* bd = bias.data();
    for (long long r = 0; r < rows; ++r) {
        for (int j = 0; j < c; ++j) {
            out[static_cast<std::size_t>(r) * c + j] = xd[r * c + j] + bd[j];
        }
    }
    GradTape* tape = common_tape({&x, &bias});
    Tensor y = finish(tape, x.shape(), std::move(out), "add_bias");
    if (tape != nullptr) {
        const int nx = x.node(), nb = bias.node(), ny = y.node();
        tape->record([tape, nx, nb, ny, rows, c] {
            const auto& go = tape->grad(ny);
            if (nx >= 0) {
                auto& gx = tape->grad(nx);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    gx[i] += go[i];
                }
            }
            if (nb >= 0) {
                auto& gb = tape->grad(nb);
                for (long long r = 0; r < rows; ++r) {
                    for (int j = 0; j < c; ++j) {
                        gb[static_cast<std::size_t>(j)] += go[static_cast<std::size_t>(r) * c + j];
                    }
                }
            }
        });
    }
    return y;
}

Tensor scale(const Tensor& x, double cfac) {
    return unary_op(
        x, "scale", [cfac](double v) { return v * cfac; },
        [cfac](double, double) { return cfac; });
}

Tensor add_scalar(const Tensor& x, double cadd) {
    return unary_op(
        x, "add_scalar", [cadd](double v) { return v + cadd; },
        [](double, double) { return 1.0; });
}

namespace {

int vector_length(const Tensor& v, const char* op) {
    if (v.rank() == 1) {
        return v.shape()[0];
    }
    if (v.rank() == 2 && v.shape()[1] == 1) {
        return v.shape()[0];
    }
    throw DimensionError(std::string(op) + ": expected a vector, got " + v.shape_str());
}

}  // namespace

Tensor outer_sum(const Tensor& col, const Tensor& row) {
    const int m = vector_length(col, "outer_sum");
    const int n = vector_length(row, "outer_sum");
    std::vector<double> out(static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(i) * n + j] = col.data()[i] + row.data()[j];
        }
    }
    GradTape* tape = common_tape({&col, &row});
    Tensor y = finish(tape, {m, n}, std::move(out), "outer_sum");
    if (tape != nullptr) {
        const int nc = col.node(), nr = row.node(), ny = y.node();
        tape->record([tape, nc, nr, ny, m, n] {
            const auto& go = tape->grad(ny);
            if (nc >= 0) {
                auto& gc = tape->grad(nc);
                for (int i = 0; i < m; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < n; ++j) {
                        s += go[static_cast<std::size_t>(i) * n + j];
                    }
                    gc[static_cast<std::size_t>(i)] += s;
                }
            }
            if (nr >= 0) {
                auto& gr = tape->grad(nr);
                for (int i = 0; i < m; ++i) {
                    for (int j = 0; j < n; ++j) {
                        gr[static_cast<std::size_t>(j)] += go[static_cast<std::size_t>(i) * n + j];
                    }
                }
            }
        });
    }
    return y;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape()[0] != b.shape()[0]) {
        throw DimensionError("concat_cols: incompatible shapes " + a.shape_str() + " and " +
                             b.shape_str());
    }
    const int m = a.shape()[0], ca = a.shape()[1], cb = b.shape()[1];
    std::vector<double> out(static_cast<std::size_t>(m) * (ca + cb));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < ca; ++j) {
            out[static_cast<std::size_t>(i) * (ca + cb) + j] =
                a.data()[static_cast<std::size_t>(i) * ca + j];
        }
        for (int j = 0; j < cb; ++j) {
            out[static_cast<std::size_t>(i) * (ca + cb) + ca + j] =
                b.data()[static_cast<std::size_t>(i) * cb + j];
        }
    }
    GradTape* tape = common_tape({&a, &b});
    Tensor y = finish(tape, {m, ca + cb}, std::move(out), "concat_cols");
    if (tape != nullptr) {
        const int na = a.node(), nb = b.node(), ny = y.node();
        tape->record([tape, na, nb, ny, m, ca, cb] {
            const auto& go = tape->grad(ny);
            if (na >= 0) {
                auto& ga = tape->grad(na);
                for (int i = 0; i < m; ++i) {
                    for (int j = 0; j < ca; ++j) {
                        ga[static_cast<std::size_t>(i) * ca + j] +=
                            go[static_cast<std::size_t>(i) * (ca + cb) + j];
                    }
                }
            }
            if (nb >= 0) {
                auto& gb = tape->grad(nb);
                for (int i = 0; i < m; ++i) {
                    for (int j = 0; j < cb; ++j) {
                        gb[static_cast<std::size_t>(i) * cb + j] +=
                            go[static_cast<std::size_t>(i) * (ca + cb) + ca + j];
                    }
                }
            }
        });
    }
    return y;
}

Tensor time_slice(const Tensor& x, int t) {
    if (x.rank() < 2) {
        throw DimensionError("time_slice: rank >= 2 required, got " + x.shape_str());
    }
    const int d0 = x.shape()[0];
    if (t < 0 || t >= d0) {
        throw DimensionError("time_slice: index out of range");
    }
    const long long block = x.size() / d0;
    std::vector<int> shape(x.shape().begin() + 1, x.shape().end());
    std::vector<double> out(static_cast<std::size_t>(block));
    const double* xd = x.data() + static_cast<std::size_t>(t) * block;
    std::copy(xd, xd + block, out.begin());
    GradTape* tape = common_tape({&x});
    Tensor y = finish(tape, std::move(shape), std::move(out), "time_slice");
    if (tape != nullptr && x.node() >= 0) {
        const int nx = x.node(), ny = y.node();
        tape->record([tape, nx, ny, t, block] {
            const auto& go = tape->grad(ny);
            auto& gx = tape->grad(nx);
            for (long long i = 0; i < block; ++i) {
                gx[static_cast<std::size_t>(t) * block + i] += go[static_cast<std::size_t>(i)];
            }
        });
    }
    return y;
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (long long i = 0; i < x.size(); ++i) {
        s += x.data()[i];
    }
    GradTape* tape = common_tape({&x});
    Tensor y = finish(tape, {1}, {s}, "sum_all");
    if (tape != nullptr && x.node() >= 0) {
        const int nx = x.node(), ny = y.node();
        const long long n = x.size();
        tape->record([tape, nx, ny, n] {
            const double g = tape->grad(ny)[0];
            auto& gx = tape->grad(nx);
            for (long long i = 0; i < n; ++i) {
                gx[static_cast<std::size_t>(i)] += g;
            }
        });
    }
    return y;
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) {
            throw DimensionError("reshape: shape entries must be positive");
        }
        n *= d;
    }
    if (n != x.size()) {
        throw DimensionError("reshape: element count mismatch for " + x.shape_str());
    }
    Tensor y = x;  // shares data, node, tape
    y.shape_ = std::move(shape);
    return y;
}

Tensor relu(const Tensor& x) {
    return unary_op(
        x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) {
        throw ContractError("leaky_relu: slope must lie in (0,1)");
    }
    return unary_op(
        x, "leaky_relu", [slope](double v) { return v >= 0.0 ? v : slope * v; },
        [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor elu(const Tensor& x) {
    return unary_op(
        x, "elu", [](double v) { return v > 0.0 ? v : std::expm1(v); },
        [](double v, double y) { return v > 0.0 ? 1.0 : y + 1.0; });
}

Tensor sigmoid(const Tensor& x) {
    return unary_op(
        x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
    return unary_op(
        x, "tanh", [](double v) { return std::tanh(v); },
        [](double, double y) { return 1.0 - y * y; });
}

Tensor smooth_l1(const Tensor& x) {
    return unary_op(
        x, "smooth_l1",
        [](double v) { return std::abs(v) < 1.0 ? 0.5 * v * v : std::abs(v) - 0.5; },
        [](double v, double) { return std::clamp(v, -1.0, 1.0); });
}

Tensor masked_softmax(const Tensor& logits, const std::vector<int>& active) {
    if (logits.rank() != 1) {
        throw DimensionError("masked_softmax: expected a rank-1 tensor, got " + logits.shape_str());
    }
    if (active.empty()) {
        throw EmptyNeighborhoodError("masked_softmax: empty active set");
    }
    const int n = logits.shape()[0];
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (active[i] < 0 || active[i] >= n) {
            throw ContractError("masked_softmax: active index out of range");
        }
        if (i > 0 && active[i] <= active[i - 1]) {
            throw ContractError("masked_softmax: active indices must be sorted and unique");
        }
    }
    double mx = logits.data()[active[0]];
    for (int idx : active) {
        mx = std::max(mx, logits.data()[idx]);
    }
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    double denom = 0.0;
    for (int idx : active) {
        const double e = std::exp(logits.data()[idx] - mx);
        out[static_cast<std::size_t>(idx)] = e;
        denom += e;
    }
    for (int idx : active) {
        out[static_cast<std::size_t>(idx)] /= denom;
    }
    GradTape* tape = common_tape({&logits});
    Tensor y = finish(tape, logits.shape(), std::move(out), "masked_softmax");
    if (tape != nullptr && logits.node() >= 0) {
        const int nx = logits.node(), ny = y.node();
        auto ys = y.storage();
        auto idxs = active;
        tape->record([tape, nx, ny, ys, idxs] {
            const auto& go = tape->grad(ny);
            auto& gx = tape->grad(nx);
            double dot = 0.0;
            for (int idx : idxs) {
                const auto u = static_cast<std::size_t>(idx);
                dot += go[u] * (*ys)[u];
            }
            for (int idx : idxs) {
                const auto u = static_cast<std::size_t>(idx);
                gx[u] += (*ys)[u] * (go[u] - dot);
            }
        });
    }
    return y;
}

Tensor conv_time(const Tensor& x, const Tensor& kernel, PadMode mode) {
    if (mode != PadMode::kSame) {
        throw ConfigError("conv_time: unsupported padding mode");
    }
    if (x.rank() != 3 || kernel.rank() != 3) {
        throw DimensionError("conv_time: expected x[T,N,C_in] and kernel[k,C_in,C_out]");
    }
    const int t = x.shape()[0], n = x.shape()[1], cin = x.shape()[2];
    const int k = kernel.shape()[0], kcin = kernel.shape()[1], cout = kernel.shape()[2];
    if (k % 2 == 0) {
        throw ConfigError("conv_time: kernel width must be odd, got " + std::to_string(k));
    }
    if (kcin != cin) {
        throw DimensionError("conv_time: channel mismatch " + x.shape_str() + " vs " +
                             kernel.shape_str());
    }
    const int half = k / 2;
    std::vector<double> out(static_cast<std::size_t>(t) * n * cout, 0.0);
    const double* xd = x.data();
    const double* kd = kernel.data();
    for (int ti = 0; ti < t; ++ti) {
        for (int j = 0; j < k; ++j) {
            const int src = ti + j - half;
            if (src < 0 || src >= t) {
                continue;
            }
            for (int ni = 0; ni < n; ++ni) {
                const double* xrow = xd + (static_cast<std::size_t>(src) * n + ni) * cin;
                double* orow = out.data() + (static_cast<std::size_t>(ti) * n + ni) * cout;
                const double* kslab = kd + static_cast<std::size_t>(j) * cin * cout;
                for (int ci = 0; ci < cin; ++ci) {
                    const double xv = xrow[ci];
                    if (xv == 0.0) {
                        continue;
                    }
                    const double* kr = kslab + static_cast<std::size_t>(ci) * cout;
                    for (int co = 0; co < cout; ++co) {
                        orow[co] += xv * kr[co];
                    }
                }
            }
        }
    }
    GradTape* tape = common_tape({&x, &kernel});
    Tensor y = finish(tape, {t, n, cout}, std::move(out), "conv_time");
    if (tape != nullptr) {
        const int nx = x.node(), nk = kernel.node(), ny = y.node();
        auto xs = x.storage();
        auto ks = kernel.storage();
        tape->record([tape, nx, nk, ny, xs, ks, t, n, cin, k, cout, half] {
            const auto& go = tape->grad(ny);
            for (int ti = 0; ti < t; ++ti) {
                for (int j = 0; j < k; ++j) {
                    const int src = ti + j - half;
                    if (src < 0 || src >= t) {
                        continue;
                    }
                    for (int ni = 0; ni < n; ++ni) {
                        const double* grow =
                            go.data() + (static_cast<std::size_t>(ti) * n + ni) * cout;
                        const std::size_t xoff = (static_cast<std::size_t>(src) * n + ni) * cin;
                        const std::size_t koff = static_cast<std::size_t>(j) * cin * cout;
                        if (nx >= 0) {
                            auto& gx = tape->grad(nx);
                            for (int ci = 0; ci < cin; ++ci) {
                                const double* kr = ks->data() + koff + static_cast<std::size_t>(ci) * cout;
                                double s = 0.0;
                                for (int co = 0; co < cout; ++co) {
                                    s += grow[co] * kr[co];
                                }
                                gx[xoff + static_cast<std::size_t>(ci)] += s;
                            }
                        }
                        if (nk >= 0) {
                            auto& gk = tape->grad(nk);
                            for (int ci = 0; ci < cin; ++ci) {
                                const double xv = (*xs)[xoff + static_cast<std::size_t>(ci)];
                                if (xv == 0.0) {
                                    continue;
                                }
                                double* kr = gk.data() + koff + static_cast<std::size_t>(ci) * cout;
                                for (int co = 0; co < cout; ++co) {
                                    kr[co] += xv * grow[co];
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    return y;
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const GruParams& p) {
    if (x.rank() != 2 || h.rank() != 2 || x.shape()[0] != h.shape()[0]) {
        throw DimensionError("gru_cell: expected x[B,C] and h[B,H], got " + x.shape_str() +
                             " and " + h.shape_str());
    }
    const int cin = x.shape()[1], hidden = h.shape()[1];
    if (p.w_z.shape() != std::vector<int>{cin, hidden} ||
        p.u_z.shape() != std::vector<int>{hidden, hidden} ||
        p.b_z.shape() != std::vector<int>{hidden}) {
        throw DimensionError("gru_cell: parameter shapes do not match inputs " + x.shape_str() +
                             " / " + h.shape_str());
    }
    Tensor z = sigmoid(add_bias(add(matmul(x, p.w_z), matmul(h, p.u_z)), p.b_z));
    Tensor r = sigmoid(add_bias(add(matmul(x, p.w_r), matmul(h, p.u_r)), p.b_r));
    Tensor cand = tanh(add_bias(add(matmul(x, p.w_h), matmul(mul(r, h), p.u_h)), p.b_h));
    // h' = (1 - z) * h + z * cand
    return add(h, mul(z, sub(cand, h)));
}

double fd_check(const std::function<Tensor()>& f, GradTape& tape, double eps) {
    if (!(eps > 0.0)) {
        throw ContractError("fd_check: eps must be positive");
    }
    auto eval = [&]() {
        tape.reset();
        Tensor t = f();
        if (t.size() != 1) {
            throw ContractError("fd_check: f must return a scalar");
        }
        return t;
    };
    const double v1 = eval().value();
    Tensor loss = eval();
    if (loss.value() != v1) {
        throw ContractError("fd_check: f is not deterministic (two evaluations differ)");
    }
    GradMap analytic = tape.backward(loss);

    double worst = 0.0;
    for (const auto& name : tape.param_names()) {
        Tensor& p = tape.param(name);
        const Tensor& g = analytic.at(name);
        for (long long i = 0; i < p.size(); ++i) {
            double* slot = p.data() + i;
            const double saved = *slot;
            *slot = saved + eps;
            const double fp = eval().value();
            *slot = saved - eps;
            const double fm = eval().value();
            *slot = saved;
            const double est = (fp - fm) / (2.0 * eps);
            const double ana = g.data()[i];
            const double denom = std::max({std::abs(ana), std::abs(est), 1e-8});
            worst = std::max(worst, std::abs(ana - est) / denom);
        }
    }
    tape.reset();
    return worst;
}

bool all_finite(const Tensor& x) {
    for (long long i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x.data()[i])) {
            return false;
        }
    }
    return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (long long i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

}  // namespace stf
