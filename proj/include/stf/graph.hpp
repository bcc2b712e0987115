#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "stf/data.hpp"

namespace stf {

struct GraphConfig {
    double d_close = 10.0;  // meters
    int t_his = 6;
};

/// One graph over all (agent, time) pairs of the observation span. Node flat
/// order is time-major: (t, n) -> t * N + n. The adjacency is symmetric with
/// a zero diagonal; spatial edges live in the block diagonal and temporal
/// edges are complete bipartite over valid nodes between adjacent slices
/// (including each node's own copy one frame away). Invalid nodes have no
/// incident edges.
struct IntegratedGraph {
    int t = 0;
    int n = 0;
    std::vector<std::uint8_t> flat;     // [t*n, t*n]
    std::vector<std::uint8_t> spatial;  // [t, n, n]
    std::vector<std::uint8_t> valid;    // [t, n]

    int nodes() const { return t * n; }
    bool adj(int a, int b) const {
        return flat[static_cast<std::size_t>(a) * nodes() + b] != 0;
    }
    bool node_valid(int ti, int ni) const {
        return valid[static_cast<std::size_t>(ti) * n + ni] != 0;
    }
};

/// Per-frame spatial adjacency: edge(u,v) iff u != v, both valid and their
/// Euclidean distance is strictly below d_close.
std::vector<std::uint8_t> spatial_adjacency(const std::vector<double>& positions,
                                            const std::vector<std::uint8_t>& valid, int n,
                                            double d_close);

/// Assemble the flat spatiotemporal adjacency from per-frame spatial
/// matrices. Asymmetric or nonzero-diagonal input is a contract violation.
IntegratedGraph integrate(const std::vector<std::uint8_t>& spatial,
                          const std::vector<std::uint8_t>& valid, int t, int n);

/// Spatial adjacency per observation frame of a window, then integrate.
IntegratedGraph build_graph(const SceneWindow& w, const GraphConfig& cfg);

/// All nodes adjacent to (t, n), in flat index order. This is the attention
/// support of the fusion block. Invalid nodes cannot be queried.
std::vector<int> neighborhood(const IntegratedGraph& g, int t, int n);

/// Text dump: header "T N", then one row of '0'/'1' characters per node.
void dump_graph(const IntegratedGraph& g, std::ostream& os);

}  // namespace stf
