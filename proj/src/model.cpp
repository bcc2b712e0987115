#include "stf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "stf/rng.hpp"

namespace stf {

void ModelConfig::validate() const {
    auto positive = [](int v, const char* what) {
        if (v <= 0) {
            throw ConfigError(std::string("model config: ") + what + " must be positive");
        }
    };
    positive(t_his, "t_his");
    positive(t_pred, "t_pred");
    positive(embed_width, "embed_width");
    positive(gat_width, "gat_width");
    positive(gat_layers, "gat_layers");
    positive(attention_heads, "attention_heads");
    positive(stgcn_layers, "stgcn_layers");
    positive(stgcn_channels, "stgcn_channels");
    positive(temporal_kernel, "temporal_kernel");
    positive(gru_hidden, "gru_hidden");
    if (temporal_kernel % 2 == 0) {
        throw ConfigError("model config: temporal_kernel must be odd");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
        throw ConfigError("model config: leaky_slope must lie in (0,1)");
    }
}

ModelConfig model_config_from(const RunConfig& run) {
    ModelConfig m;
    m.t_his = run.t_his;
    m.t_pred = run.t_pred;
    m.embed_width = run.embed_width;
    m.gat_width = run.gat_width;
    m.gat_layers = run.gat_layers;
    m.attention_heads = run.attention_heads;
    m.leaky_slope = run.leaky_slope;
    m.stgcn_layers = run.stgcn_layers;
    m.stgcn_channels = run.stgcn_channels;
    m.temporal_kernel = run.temporal_kernel;
    m.gru_hidden = run.gru_hidden;
    return m;
}

namespace {

// Flat node index helpers; nodes are time-major (t * n + i).
struct NodeOrder {
    int t, n;
    int time_of(int flat) const { return flat / n; }
    int agent_of(int flat) const { return flat % n; }
};

// Neighbor lists in canonical (time, agent_id) order. Reducing in this order
// makes sums invariant to how agents are laid out in the window, which keeps
// forward() exactly equivariant under agent permutation.
std::vector<std::vector<int>> canonical_neighbors(const IntegratedGraph& g,
                                                  const std::vector<long long>& ids) {
    const int m = g.nodes();
    NodeOrder ord{g.t, g.n};
    std::vector<std::vector<int>> out(static_cast<std::size_t>(m));
    for (int u = 0; u < m; ++u) {
        auto& list = out[static_cast<std::size_t>(u)];
        for (int v = 0; v < m; ++v) {
            if (g.flat[static_cast<std::size_t>(u) * m + v]) {
                list.push_back(v);
            }
        }
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            const int ta = ord.time_of(a), tb = ord.time_of(b);
            if (ta != tb) {
                return ta < tb;
            }
            const long long ia = ids[static_cast<std::size_t>(ord.agent_of(a))];
            const long long ib = ids[static_cast<std::size_t>(ord.agent_of(b))];
            if (ia != ib) {
                return ia < ib;
            }
            return a < b;
        });
    }
    return out;
}

std::vector<std::uint8_t> node_mask_of(const IntegratedGraph& g) {
    return g.valid;
}

// Elementwise multiply by a constant 0/1 row mask expanded over channels.
Tensor apply_mask(const Tensor& x, const std::vector<std::uint8_t>& mask) {
    if (x.rank() != 2 || x.shape()[0] != static_cast<int>(mask.size())) {
        throw DimensionError("apply_mask: mask length does not match rows of " + x.shape_str());
    }
    const int rows = x.shape()[0], cols = x.shape()[1];
    std::vector<double> m(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        const double v = mask[static_cast<std::size_t>(r)] ? 1.0 : 0.0;
        for (int c = 0; c < cols; ++c) {
            m[static_cast<std::size_t>(r) * cols + c] = v;
        }
    }
    return mul(x, Tensor({rows, cols}, std::move(m)));
}

// Attention-weighted neighbor aggregation over the integrated graph.
// logits(u,v) = leaky_relu(s_src[u] + s_dst[v]) over u's support; softmax per
// row; output row u = sum over neighbors v of alpha(u,v) * wh[v]. Valid nodes
// with an empty support copy their own mapped feature; invalid nodes emit
// zero rows.
Tensor gat_attend(const Tensor& wh, const Tensor& s_src, const Tensor& s_dst,
                  const IntegratedGraph& g, const std::vector<long long>& ids, double slope,
                  std::vector<double>* att_out) {
    const int m = g.nodes();
    const int f = wh.shape()[1];
    if (wh.shape()[0] != m || s_src.size() != m || s_dst.size() != m) {
        throw DimensionError("gat_attend: feature/score rows do not match node count");
    }
    const auto nbrs = std::make_shared<std::vector<std::vector<int>>>(canonical_neighbors(g, ids));
    const auto valid = node_mask_of(g);

    auto alphas = std::make_shared<std::vector<std::vector<double>>>(static_cast<std::size_t>(m));
    std::vector<double> out(static_cast<std::size_t>(m) * f, 0.0);
    if (att_out != nullptr) {
        att_out->assign(static_cast<std::size_t>(m) * m, 0.0);
    }

    const double* whd = wh.data();
    const double* src = s_src.data();
    const double* dst = s_dst.data();
    for (int u = 0; u < m; ++u) {
        if (!valid[static_cast<std::size_t>(u)]) {
            continue;
        }
        const auto& list = (*nbrs)[static_cast<std::size_t>(u)];
        double* orow = out.data() + static_cast<std::size_t>(u) * f;
        if (list.empty()) {
            const double* wrow = whd + static_cast<std::size_t>(u) * f;
            std::copy(wrow, wrow + f, orow);
            if (att_out != nullptr) {
                (*att_out)[static_cast<std::size_t>(u) * m + u] = 1.0;
            }
            continue;
        }
        auto& arow = (*alphas)[static_cast<std::size_t>(u)];
        arow.resize(list.size());
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < list.size(); ++j) {
            const double z = src[u] + dst[list[j]];
            const double l = z >= 0.0 ? z : slope * z;
            arow[j] = l;
            mx = std::max(mx, l);
        }
        double denom = 0.0;
        for (double& a : arow) {
            a = std::exp(a - mx);
            denom += a;
        }
        for (std::size_t j = 0; j < list.size(); ++j) {
            arow[j] /= denom;
            const double* wrow = whd + static_cast<std::size_t>(list[j]) * f;
            for (int k = 0; k < f; ++k) {
                orow[k] += arow[j] * wrow[k];
            }
            if (att_out != nullptr) {
                (*att_out)[static_cast<std::size_t>(u) * m + list[j]] = arow[j];
            }
        }
    }

    GradTape* tape = common_tape({&wh, &s_src, &s_dst});
    Tensor y = tape != nullptr ? tape->make_recorded({m, f}, std::move(out))
                               : Tensor({m, f}, std::move(out));
    if (tape != nullptr) {
        const int nwh = wh.node(), nsrc = s_src.node(), ndst = s_dst.node(), ny = y.node();
        auto whs = wh.storage();
        auto srcs = s_src.storage();
        auto dsts = s_dst.storage();
        auto validc = valid;
        tape->record([tape, nwh, nsrc, ndst, ny, whs, srcs, dsts, nbrs, alphas, validc, m, f,
                      slope] {
            const auto& go = tape->grad(ny);
            auto* gwh = nwh >= 0 ? &tape->grad(nwh) : nullptr;
            auto* gsrc = nsrc >= 0 ? &tape->grad(nsrc) : nullptr;
            auto* gdst = ndst >= 0 ? &tape->grad(ndst) : nullptr;
            for (int u = 0; u < m; ++u) {
                if (!validc[static_cast<std::size_t>(u)]) {
                    continue;
                }
                const auto& list = (*nbrs)[static_cast<std::size_t>(u)];
                const double* grow = go.data() + static_cast<std::size_t>(u) * f;
                if (list.empty()) {
                    if (gwh != nullptr) {
                        for (int k = 0; k < f; ++k) {
                            (*gwh)[static_cast<std::size_t>(u) * f + k] += grow[k];
                        }
                    }
                    continue;
                }
                const auto& arow = (*alphas)[static_cast<std::size_t>(u)];
                std::vector<double> dalpha(list.size(), 0.0);
                for (std::size_t j = 0; j < list.size(); ++j) {
                    const double* wrow = whs->data() + static_cast<std::size_t>(list[j]) * f;
                    double dot = 0.0;
                    for (int k = 0; k < f; ++k) {
                        dot += grow[k] * wrow[k];
                    }
                    dalpha[j] = dot;
                    if (gwh != nullptr) {
                        double* gw = gwh->data() + static_cast<std::size_t>(list[j]) * f;
                        for (int k = 0; k < f; ++k) {
                            gw[k] += arow[j] * grow[k];
                        }
                    }
                }
                double dsum = 0.0;
                for (std::size_t j = 0; j < list.size(); ++j) {
                    dsum += arow[j] * dalpha[j];
                }
                double dsrc_total = 0.0;
                for (std::size_t j = 0; j < list.size(); ++j) {
                    const double dl = arow[j] * (dalpha[j] - dsum);
                    const double z = (*srcs)[static_cast<std::size_t>(u)] +
                                     (*dsts)[static_cast<std::size_t>(list[j])];
                    const double dz = dl * (z >= 0.0 ? 1.0 : slope);
                    dsrc_total += dz;
                    if (gdst != nullptr) {
                        (*gdst)[static_cast<std::size_t>(list[j])] += dz;
                    }
                }
                if (gsrc != nullptr) {
                    (*gsrc)[static_cast<std::size_t>(u)] += dsrc_total;
                }
            }
        });
    }
    return y;
}

}  // namespace

Tensor graph_conv(const Tensor& x, const IntegratedGraph& g,
                  const std::vector<long long>& ids) {
    const int t = g.t, n = g.n;
    if (x.rank() != 2 || x.shape()[0] != t * n) {
        throw DimensionError("graph_conv: expected [" + std::to_string(t * n) + ", C], got " +
                             x.shape_str());
    }
    if (static_cast<int>(ids.size()) != n) {
        throw DimensionError("graph_conv: agent id list does not match graph width");
    }
    const int c = x.shape()[1];

    // Per-frame normalized coefficients and canonical neighbor lists
    // (self-loop included; invalid nodes stay fully detached).
    struct Hop {
        int v;         // flat node index within the frame slice
        double coeff;  // 1 / sqrt(deg_u * deg_v)
    };
    auto hops = std::make_shared<std::vector<std::vector<Hop>>>(
        static_cast<std::size_t>(t) * n);
    for (int ti = 0; ti < t; ++ti) {
        const std::uint8_t* a = g.spatial.data() + static_cast<std::size_t>(ti) * n * n;
        std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
        for (int u = 0; u < n; ++u) {
            if (!g.node_valid(ti, u)) {
                continue;
            }
            double d = 1.0;  // self loop
            for (int v = 0; v < n; ++v) {
                if (a[static_cast<std::size_t>(u) * n + v] && g.node_valid(ti, v)) {
                    d += 1.0;
                }
            }
            deg[static_cast<std::size_t>(u)] = d;
        }
        for (int u = 0; u < n; ++u) {
            if (!g.node_valid(ti, u)) {
                continue;
            }
            std::vector<int> vs;
            vs.push_back(u);
            for (int v = 0; v < n; ++v) {
                if (a[static_cast<std::size_t>(u) * n + v] && g.node_valid(ti, v)) {
                    vs.push_back(v);
                }
            }
            std::sort(vs.begin(), vs.end(), [&](int lhs, int rhs) {
                return ids[static_cast<std::size_t>(lhs)] < ids[static_cast<std::size_t>(rhs)];
            });
            auto& list = (*hops)[static_cast<std::size_t>(ti) * n + u];
            list.reserve(vs.size());
            for (int v : vs) {
                list.push_back(
                    {v, 1.0 / std::sqrt(deg[static_cast<std::size_t>(u)] *
                                        deg[static_cast<std::size_t>(v)])});
            }
        }
    }

    std::vector<double> out(static_cast<std::size_t>(t) * n * c, 0.0);
    const double* xd = x.data();
    for (int ti = 0; ti < t; ++ti) {
        for (int u = 0; u < n; ++u) {
            const auto& list = (*hops)[static_cast<std::size_t>(ti) * n + u];
            double* orow = out.data() + (static_cast<std::size_t>(ti) * n + u) * c;
            for (const Hop& h : list) {
                const double* xrow = xd + (static_cast<std::size_t>(ti) * n + h.v) * c;
                for (int k = 0; k < c; ++k) {
                    orow[k] += h.coeff * xrow[k];
                }
            }
        }
    }

    GradTape* tape = common_tape({&x});
    Tensor y = tape != nullptr ? tape->make_recorded({t * n, c}, std::move(out))
                               : Tensor({t * n, c}, std::move(out));
    if (tape != nullptr && x.node() >= 0) {
        const int nx = x.node(), ny = y.node();
        tape->record([tape, nx, ny, hops, t, n, c] {
            const auto& go = tape->grad(ny);
            auto& gx = tape->grad(nx);
            for (int ti = 0; ti < t; ++ti) {
                for (int u = 0; u < n; ++u) {
                    const auto& list = (*hops)[static_cast<std::size_t>(ti) * n + u];
                    const double* grow = go.data() + (static_cast<std::size_t>(ti) * n + u) * c;
                    for (const Hop& h : list) {
                        double* gxrow = gx.data() + (static_cast<std::size_t>(ti) * n + h.v) * c;
                        for (int k = 0; k < c; ++k) {
                            gxrow[k] += h.coeff * grow[k];
                        }
                    }
                }
            }
        });
    }
    return y;
}

StfModel::StfModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    auto init = [&rng](std::vector<int> shape, double bound) {
        long long count = 1;
        for (int d : shape) {
            count *= d;
        }
        std::vector<double> data(static_cast<std::size_t>(count));
        for (double& v : data) {
            v = rng.uniform(-bound, bound);
        }
        return data;
    };
    auto reg = [&](const std::string& name, std::vector<int> shape, double bound) {
        return tape_.parameter(name, shape, init(shape, bound));
    };

    const int f = cfg_.embed_width;
    embed_w1_ = reg("embed.fc1.w", {2, f}, 1.0 / std::sqrt(2.0));
    embed_b1_ = reg("embed.fc1.b", {f}, 1.0 / std::sqrt(2.0));
    embed_w2_ = reg("embed.fc2.w", {f, f}, 1.0 / std::sqrt(f));
    embed_b2_ = reg("embed.fc2.b", {f}, 1.0 / std::sqrt(f));

    const int fp = cfg_.gat_width;
    int gat_in = f;
    gat_.resize(static_cast<std::size_t>(cfg_.gat_layers));
    for (int l = 0; l < cfg_.gat_layers; ++l) {
        auto& heads = gat_[static_cast<std::size_t>(l)];
        heads.resize(static_cast<std::size_t>(cfg_.attention_heads));
        for (int h = 0; h < cfg_.attention_heads; ++h) {
            const std::string base = "gat" + std::to_string(l) + ".h" + std::to_string(h) + ".";
            heads[static_cast<std::size_t>(h)].w = reg(base + "w", {gat_in, fp},
                                                       1.0 / std::sqrt(gat_in));
            heads[static_cast<std::size_t>(h)].a_src = reg(base + "a_src", {fp, 1},
                                                           1.0 / std::sqrt(fp));
            heads[static_cast<std::size_t>(h)].a_dst = reg(base + "a_dst", {fp, 1},
                                                           1.0 / std::sqrt(fp));
        }
        gat_in = fp * cfg_.attention_heads;
    }

    const int ch = cfg_.stgcn_channels;
    const int k = cfg_.temporal_kernel;
    int cin = 2;
    stgcn_.resize(static_cast<std::size_t>(cfg_.stgcn_layers));
    for (int l = 0; l < cfg_.stgcn_layers; ++l) {
        const std::string base = "stgcn" + std::to_string(l) + ".";
        auto& layer = stgcn_[static_cast<std::size_t>(l)];
        layer.gw = reg(base + "gcn.w", {cin, ch}, 1.0 / std::sqrt(cin));
        layer.gb = reg(base + "gcn.b", {ch}, 1.0 / std::sqrt(cin));
        layer.kernel = reg(base + "tcn.k", {k, ch, ch}, 1.0 / std::sqrt(k * ch));
        layer.kb = reg(base + "tcn.b", {ch}, 1.0 / std::sqrt(k * ch));
        cin = ch;
    }

    const int cf = fused_width();
    const int hidden = cfg_.gru_hidden;
    auto reg_gru = [&](const std::string& prefix, int in, GruParams& p) {
        const double bi = 1.0 / std::sqrt(in);
        const double bh = 1.0 / std::sqrt(hidden);
        p.w_z = reg(prefix + "wz", {in, hidden}, bi);
        p.w_r = reg(prefix + "wr", {in, hidden}, bi);
        p.w_h = reg(prefix + "wh", {in, hidden}, bi);
        p.u_z = reg(prefix + "uz", {hidden, hidden}, bh);
        p.u_r = reg(prefix + "ur", {hidden, hidden}, bh);
        p.u_h = reg(prefix + "uh", {hidden, hidden}, bh);
        p.b_z = reg(prefix + "bz", {hidden}, bh);
        p.b_r = reg(prefix + "br", {hidden}, bh);
        p.b_h = reg(prefix + "bh", {hidden}, bh);
    };
    reg_gru("enc.", cf, enc_);
    reg_gru("dec.", 2, dec_);

    // Small head init: the first decoded displacements start near zero.
    head_w_ = reg("head.w", {hidden, 2}, 0.01);
    head_b_ = reg("head.b", {2}, 0.01);
}

Tensor StfModel::window_input(const SceneWindow& w) const {
    if (!w.normalized) {
        throw ContractError("model: window must be normalized first");
    }
    const int t = cfg_.t_his, n = w.n;
    std::vector<double> data(static_cast<std::size_t>(t) * n * 2, 0.0);
    for (int ti = 0; ti < t; ++ti) {
        for (int i = 0; i < n; ++i) {
            if (!w.valid(ti, i)) {
                continue;
            }
            data[(static_cast<std::size_t>(ti) * n + i) * 2] = w.px(ti, i);
            data[(static_cast<std::size_t>(ti) * n + i) * 2 + 1] = w.py(ti, i);
        }
    }
    return Tensor({t * n, 2}, std::move(data));
}

NodeFeatures StfModel::embed(const SceneWindow& w) {
    const int t = cfg_.t_his, n = w.n;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(t) * n);
    for (int ti = 0; ti < t; ++ti) {
        for (int i = 0; i < n; ++i) {
            mask[static_cast<std::size_t>(ti) * n + i] = w.valid(ti, i) ? 1 : 0;
        }
    }
    Tensor x = window_input(w);
    Tensor h = apply_mask(add_bias(matmul(x, embed_w1_), embed_b1_), mask);
    h = relu(h);
    h = apply_mask(add_bias(matmul(h, embed_w2_), embed_b2_), mask);
    return NodeFeatures{h, t, n, cfg_.embed_width, std::move(mask)};
}

NodeFeatures StfModel::gat_layer(int layer, const NodeFeatures& f, const IntegratedGraph& g,
                                 const std::vector<long long>& agent_ids,
                                 std::vector<std::vector<double>>* attention_out) {
    if (layer < 0 || layer >= cfg_.gat_layers) {
        throw ContractError("gat_layer: layer index out of range");
    }
    if (f.t != g.t || f.n != g.n) {
        throw DimensionError("gat_layer: feature grid does not match the graph");
    }
    const auto& heads = gat_[static_cast<std::size_t>(layer)];
    if (f.c != heads[0].w.shape()[0]) {
        throw DimensionError("gat_layer: feature width " + std::to_string(f.c) +
                             " does not match layer input width " +
                             std::to_string(heads[0].w.shape()[0]));
    }
    Tensor out;
    for (std::size_t h = 0; h < heads.size(); ++h) {
        Tensor wh = matmul(f.values, heads[h].w);
        Tensor s_src = matmul(wh, heads[h].a_src);
        Tensor s_dst = matmul(wh, heads[h].a_dst);
        std::vector<double>* att = nullptr;
        if (attention_out != nullptr) {
            attention_out->emplace_back();
            att = &attention_out->back();
        }
        Tensor head_out = gat_attend(wh, s_src, s_dst, g, agent_ids, cfg_.leaky_slope, att);
        out = h == 0 ? head_out : concat_cols(out, head_out);
    }
    return NodeFeatures{out, f.t, f.n, cfg_.gat_width * cfg_.attention_heads, f.mask};
}

NodeFeatures StfModel::stf_block(const SceneWindow& w, const IntegratedGraph& g,
                                 ForwardTrace* trace) {
    NodeFeatures f = embed(w);
    if (trace != nullptr) {
        trace->nodes = g.nodes();
    }
    for (int l = 0; l < cfg_.gat_layers; ++l) {
        f = gat_layer(l, f, g, w.agent_ids, trace != nullptr ? &trace->attention : nullptr);
        f.values = apply_mask(elu(f.values), f.mask);
    }
    return f;
}

NodeFeatures StfModel::stgcn_block(const SceneWindow& w, const IntegratedGraph& g) {
    const int t = cfg_.t_his, n = w.n;
    if (g.t != t || g.n != n) {
        throw DimensionError("stgcn_block: graph does not match the window");
    }
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(t) * n);
    for (int ti = 0; ti < t; ++ti) {
        for (int i = 0; i < n; ++i) {
            mask[static_cast<std::size_t>(ti) * n + i] = w.valid(ti, i) ? 1 : 0;
        }
    }
    Tensor x = window_input(w);
    int cin = 2;
    for (const auto& layer : stgcn_) {
        const int cout = layer.gw.shape()[1];
        Tensor gconv = graph_conv(x, g, w.agent_ids);
        Tensor h = apply_mask(add_bias(matmul(gconv, layer.gw), layer.gb), mask);
        Tensor c = conv_time(reshape(h, {t, n, cout}), layer.kernel);
        Tensor c2 = apply_mask(add_bias(reshape(c, {t * n, cout}), layer.kb), mask);
        Tensor a = relu(c2);
        x = cin == cout ? add(a, x) : a;
        cin = cout;
    }
    return NodeFeatures{x, t, n, cfg_.stgcn_channels, std::move(mask)};
}

NodeFeatures StfModel::fuse(const NodeFeatures& a, const NodeFeatures& b) {
    if (a.t != b.t || a.n != b.n) {
        throw DimensionError("fuse: feature grids disagree (" + std::to_string(a.t) + "x" +
                             std::to_string(a.n) + " vs " + std::to_string(b.t) + "x" +
                             std::to_string(b.n) + ")");
    }
    return NodeFeatures{concat_cols(a.values, b.values), a.t, a.n, a.c + b.c, a.mask};
}

PredictionSet StfModel::decode(const NodeFeatures& fused, const SceneWindow& w,
                               int t_pred_override) {
    if (fused.t != cfg_.t_his || fused.n != w.n) {
        throw DimensionError("decode: fused features do not cover the observation span");
    }
    const int t = cfg_.t_his, n = w.n;
    const int t_pred = t_pred_override > 0 ? t_pred_override : cfg_.t_pred;

    Tensor seq = reshape(fused.values, {t, n, fused.c});
    Tensor h = Tensor::zeros({n, cfg_.gru_hidden});
    for (int ti = 0; ti < t; ++ti) {
        h = gru_cell(time_slice(seq, ti), h, enc_);
    }

    // Seed displacement: the agent's last observed step, zero when only one
    // observation exists.
    std::vector<double> seed(static_cast<std::size_t>(n) * 2, 0.0);
    std::vector<double> last(static_cast<std::size_t>(n) * 2, 0.0);
    for (int i = 0; i < n; ++i) {
        if (!w.predicted(i)) {
            continue;
        }
        last[static_cast<std::size_t>(i) * 2] = w.px(t - 1, i);
        last[static_cast<std::size_t>(i) * 2 + 1] = w.py(t - 1, i);
        if (t >= 2 && w.valid(t - 2, i)) {
            seed[static_cast<std::size_t>(i) * 2] = w.px(t - 1, i) - w.px(t - 2, i);
            seed[static_cast<std::size_t>(i) * 2 + 1] = w.py(t - 1, i) - w.py(t - 2, i);
        }
    }

    PredictionSet out;
    out.t_pred = t_pred;
    out.n = n;
    out.predicted.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.predicted[static_cast<std::size_t>(i)] = w.predicted(i) ? 1 : 0;
    }

    Tensor d = Tensor({n, 2}, std::move(seed));
    Tensor pos = Tensor({n, 2}, std::move(last));
    for (int step = 0; step < t_pred; ++step) {
        h = gru_cell(d, h, dec_);
        Tensor disp = add_bias(matmul(h, head_w_), head_b_);
        pos = add(pos, disp);
        out.step_displacements.push_back(disp);
        out.step_positions.push_back(pos);
        d = disp;
    }

    std::vector<double> packed_pos(static_cast<std::size_t>(t_pred) * n * 2);
    std::vector<double> packed_disp(static_cast<std::size_t>(t_pred) * n * 2);
    for (int step = 0; step < t_pred; ++step) {
        const double* ps = out.step_positions[static_cast<std::size_t>(step)].data();
        const double* ds = out.step_displacements[static_cast<std::size_t>(step)].data();
        std::copy(ps, ps + static_cast<std::size_t>(n) * 2,
                  packed_pos.begin() + static_cast<std::size_t>(step) * n * 2);
        std::copy(ds, ds + static_cast<std::size_t>(n) * 2,
                  packed_disp.begin() + static_cast<std::size_t>(step) * n * 2);
    }
    out.positions = Tensor({t_pred, n, 2}, std::move(packed_pos));
    out.displacements = Tensor({t_pred, n, 2}, std::move(packed_disp));
    return out;
}

PredictionSet StfModel::forward(const SceneWindow& w, const IntegratedGraph& g,
                                ForwardTrace* trace) {
    if (g.t != cfg_.t_his || g.n != w.n) {
        throw DimensionError("forward: graph shape does not match window/config");
    }
    NodeFeatures a = stf_block(w, g, trace);
    NodeFeatures b = stgcn_block(w, g);
    NodeFeatures fused = fuse(a, b);
    return decode(fused, w);
}

}  // namespace stf
