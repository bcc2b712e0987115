#include "stf/graph.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "stf/errors.hpp"

namespace stf {

std::vector<std::uint8_t> spatial_adjacency(const std::vector<double>& positions,
                                            const std::vector<std::uint8_t>& valid, int n,
                                            double d_close) {
    if (positions.size() != static_cast<std::size_t>(n) * 2 ||
        valid.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("spatial_adjacency: buffer sizes do not match agent count");
    }
    if (!(d_close > 0.0)) {
        throw ConfigError("spatial_adjacency: d_close must be positive");
    }
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
    for (int u = 0; u < n; ++u) {
        if (!valid[static_cast<std::size_t>(u)]) {
            continue;
        }
        for (int v = u + 1; v < n; ++v) {
            if (!valid[static_cast<std::size_t>(v)]) {
                continue;
            }
            const double dx = positions[static_cast<std::size_t>(u) * 2] -
                              positions[static_cast<std::size_t>(v) * 2];
            const double dy = positions[static_cast<std::size_t>(u) * 2 + 1] -
                              positions[static_cast<std::size_t>(v) * 2 + 1];
            if (std::sqrt(dx * dx + dy * dy) < d_close) {
                adj[static_cast<std::size_t>(u) * n + v] = 1;
                adj[static_cast<std::size_t>(v) * n + u] = 1;
            }
        }
    }
    return adj;
}

IntegratedGraph integrate(const std::vector<std::uint8_t>& spatial,
                          const std::vector<std::uint8_t>& valid, int t, int n) {
    if (t <= 0 || n <= 0 || spatial.size() != static_cast<std::size_t>(t) * n * n ||
        valid.size() != static_cast<std::size_t>(t) * n) {
        throw DimensionError("integrate: buffer sizes do not match t/n");
    }
    for (int ti = 0; ti < t; ++ti) {
        const std::uint8_t* a = spatial.data() + static_cast<std::size_t>(ti) * n * n;
        for (int u = 0; u < n; ++u) {
            if (a[static_cast<std::size_t>(u) * n + u]) {
                throw ContractError("integrate: spatial diagonal must be zero (frame " +
                                    std::to_string(ti) + ")");
            }
            for (int v = u + 1; v < n; ++v) {
                if (a[static_cast<std::size_t>(u) * n + v] !=
                    a[static_cast<std::size_t>(v) * n + u]) {
                    throw ContractError("integrate: spatial adjacency asymmetric at frame " +
                                        std::to_string(ti));
                }
            }
        }
    }

    IntegratedGraph g;
    g.t = t;
    g.n = n;
    g.spatial = spatial;
    g.valid = valid;
    const int m = t * n;
    g.flat.assign(static_cast<std::size_t>(m) * m, 0);

    auto set_edge = [&](int a, int b) {
        g.flat[static_cast<std::size_t>(a) * m + b] = 1;
        g.flat[static_cast<std::size_t>(b) * m + a] = 1;
    };

    for (int ti = 0; ti < t; ++ti) {
        const std::uint8_t* a = spatial.data() + static_cast<std::size_t>(ti) * n * n;
        // Spatial block; invalid nodes are guaranteed isolated only if the
        // caller built the matrix that way, so re-apply the validity filter.
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                if (a[static_cast<std::size_t>(u) * n + v] && g.node_valid(ti, u) &&
                    g.node_valid(ti, v)) {
                    set_edge(ti * n + u, ti * n + v);
                }
            }
        }
        // Temporal block to the next slice: complete bipartite over valid
        // nodes, each node included against its own copy.
        if (ti + 1 < t) {
            for (int u = 0; u < n; ++u) {
                if (!g.node_valid(ti, u)) {
                    continue;
                }
                for (int v = 0; v < n; ++v) {
                    if (g.node_valid(ti + 1, v)) {
                        set_edge(ti * n + u, (ti + 1) * n + v);
                    }
                }
            }
        }
    }
    return g;
}

IntegratedGraph build_graph(const SceneWindow& w, const GraphConfig& cfg) {
    if (w.t_his != cfg.t_his) {
        throw ContractError("build_graph: window t_his does not match graph config");
    }
    const int t = cfg.t_his, n = w.n;
    std::vector<std::uint8_t> spatial(static_cast<std::size_t>(t) * n * n, 0);
    std::vector<std::uint8_t> valid(static_cast<std::size_t>(t) * n, 0);
    for (int ti = 0; ti < t; ++ti) {
        std::vector<double> pos(static_cast<std::size_t>(n) * 2);
        std::vector<std::uint8_t> frame_valid(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            pos[static_cast<std::size_t>(i) * 2] = w.px(ti, i);
            pos[static_cast<std::size_t>(i) * 2 + 1] = w.py(ti, i);
            frame_valid[static_cast<std::size_t>(i)] = w.valid(ti, i) ? 1 : 0;
            valid[static_cast<std::size_t>(ti) * n + i] = frame_valid[static_cast<std::size_t>(i)];
        }
        const auto adj = spatial_adjacency(pos, frame_valid, n, cfg.d_close);
        std::copy(adj.begin(), adj.end(),
                  spatial.begin() + static_cast<std::size_t>(ti) * n * n);
    }
    return integrate(spatial, valid, t, n);
}

std::vector<int> neighborhood(const IntegratedGraph& g, int t, int n) {
    if (t < 0 || t >= g.t || n < 0 || n >= g.n) {
        throw ContractError("neighborhood: node index out of range");
    }
    if (!g.node_valid(t, n)) {
        throw ContractError("neighborhood: node (" + std::to_string(t) + "," + std::to_string(n) +
                            ") is not valid");
    }
    const int m = g.nodes();
    const int u = t * g.n + n;
    std::vector<int> out;
    for (int v = 0; v < m; ++v) {
        if (g.flat[static_cast<std::size_t>(u) * m + v]) {
            out.push_back(v);
        }
    }
    return out;
}

void dump_graph(const IntegratedGraph& g, std::ostream& os) {
    os << g.t << " " << g.n << "\n";
    const int m = g.nodes();
    std::string row(static_cast<std::size_t>(m), '0');
    for (int u = 0; u < m; ++u) {
        for (int v = 0; v < m; ++v) {
            row[static_cast<std::size_t>(v)] =
                g.flat[static_cast<std::size_t>(u) * m + v] ? '1' : '0';
        }
        os << row << "\n";
    }
}

}  // namespace stf
