#pragma once

// Undirected communication graphs, edge orientations, and the incidence /
// Laplacian algebra used to wire node plants to edge controllers. Matrices
// are dense integer arrays; graph sizes are small (tens of nodes), so exact
// arithmetic is kept throughout.

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nicons/common.hpp"

namespace nicons {

/// An undirected graph on nodes 0..n_nodes-1. Edges are stored canonically:
/// smaller endpoint first, list sorted lexicographically, duplicates removed.
struct UndirectedGraph {
    int n_nodes = 0;
    std::vector<std::pair<int, int>> edges;

    int n_edges() const { return static_cast<int>(edges.size()); }
    bool operator==(const UndirectedGraph&) const = default;
};

/// Incidence matrix of an oriented undirected graph: one row per edge with a
/// single +1 (initial node) and a single -1 (terminal node).
struct OrientedIncidence {
    int n_nodes = 0;
    int n_edges = 0;
    std::vector<std::vector<int>> entries;  // n_edges x n_nodes, values in {-1,0,+1}

    bool operator==(const OrientedIncidence&) const = default;
};

/// Dense N x N graph Laplacian (degree matrix minus adjacency).
struct LaplacianMatrix {
    std::vector<std::vector<int>> entries;

    bool operator==(const LaplacianMatrix&) const = default;
};

inline UndirectedGraph build_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
    if (n_nodes < 1) throw std::invalid_argument("build_graph: n_nodes must be >= 1");
    std::set<std::pair<int, int>> canon;
    for (const auto& [a, b] : edges) {
        if (a == b) {
            throw std::invalid_argument("build_graph: self-loop at node " + std::to_string(a));
        }
        if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes) {
            throw std::invalid_argument("build_graph: edge {" + std::to_string(a) + "," +
                                        std::to_string(b) + "} references a node out of range");
        }
        canon.insert({std::min(a, b), std::max(a, b)});
    }
    UndirectedGraph g;
    g.n_nodes = n_nodes;
    g.edges.assign(canon.begin(), canon.end());
    return g;
}

/// Breadth-first reachability from node 0.
inline bool is_connected(const UndirectedGraph& g) {
    if (g.n_nodes <= 1) return true;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.n_nodes));
    for (const auto& [a, b] : g.edges) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::vector<bool> seen(static_cast<std::size_t>(g.n_nodes), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int count = 1;
    while (!frontier.empty()) {
        int v = frontier.front();
        frontier.pop();
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = true;
                ++count;
                frontier.push(w);
            }
        }
    }
    return count == g.n_nodes;
}

/// Orient each edge. The default points edge k from its smaller-index node
/// (+1) to its larger-index node (-1); a true flag in `directions` flips the
/// corresponding row. An empty `directions` means all defaults. Row order
/// follows the graph's canonical edge order.
inline OrientedIncidence orient(const UndirectedGraph& g, const std::vector<bool>& directions = {}) {
    if (!directions.empty() && directions.size() != g.edges.size()) {
        throw std::invalid_argument("orient: directions has " + std::to_string(directions.size()) +
                                    " entries for " + std::to_string(g.edges.size()) + " edges");
    }
    OrientedIncidence q;
    q.n_nodes = g.n_nodes;
    q.n_edges = g.n_edges();
    q.entries.assign(static_cast<std::size_t>(q.n_edges),
                     std::vector<int>(static_cast<std::size_t>(q.n_nodes), 0));
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const auto& [a, b] = g.edges[k];
        const int sign = (!directions.empty() && directions[k]) ? -1 : 1;
        q.entries[k][static_cast<std::size_t>(a)] = sign;
        q.entries[k][static_cast<std::size_t>(b)] = -sign;
    }
    return q;
}

/// L = Q^T Q for any orientation; computed as degree minus adjacency.
inline LaplacianMatrix laplacian(const UndirectedGraph& g) {
    LaplacianMatrix lap;
    lap.entries.assign(static_cast<std::size_t>(g.n_nodes),
                       std::vector<int>(static_cast<std::size_t>(g.n_nodes), 0));
    for (const auto& [a, b] : g.edges) {
        lap.entries[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] += 1;
        lap.entries[static_cast<std::size_t>(b)][static_cast<std::size_t>(b)] += 1;
        lap.entries[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] -= 1;
        lap.entries[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] -= 1;
    }
    return lap;
}

/// Block product w = (Q kron I_m) v without materializing the Kronecker
/// matrix: output block k is the signed sum of the endpoint blocks of edge k.
inline Vec apply_incidence(const OrientedIncidence& q, int m, const Vec& v) {
    if (m < 1) throw std::invalid_argument("apply_incidence: block size must be positive");
    const std::size_t bm = static_cast<std::size_t>(m);
    if (v.size() != bm * static_cast<std::size_t>(q.n_nodes)) {
        throw std::invalid_argument("apply_incidence: expected vector of length " +
                                    std::to_string(q.n_nodes * m) + ", got " +
                                    std::to_string(v.size()));
    }
    Vec out(bm * static_cast<std::size_t>(q.n_edges), 0.0);
    for (std::size_t k = 0; k < static_cast<std::size_t>(q.n_edges); ++k) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(q.n_nodes); ++j) {
            const int s = q.entries[k][j];
            if (s == 0) continue;
            for (std::size_t c = 0; c < bm; ++c) out[k * bm + c] += s * v[j * bm + c];
        }
    }
    return out;
}

/// Block product v = (Q^T kron I_m) w: output block i sums the signed edge
/// blocks incident to node i.
inline Vec apply_incidence_transpose(const OrientedIncidence& q, int m, const Vec& w) {
    if (m < 1) throw std::invalid_argument("apply_incidence_transpose: block size must be positive");
    const std::size_t bm = static_cast<std::size_t>(m);
    if (w.size() != bm * static_cast<std::size_t>(q.n_edges)) {
        throw std::invalid_argument("apply_incidence_transpose: expected vector of length " +
                                    std::to_string(q.n_edges * m) + ", got " +
                                    std::to_string(w.size()));
    }
    Vec out(bm * static_cast<std::size_t>(q.n_nodes), 0.0);
    for (std::size_t k = 0; k < static_cast<std::size_t>(q.n_edges); ++k) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(q.n_nodes); ++j) {
            const int s = q.entries[k][j];
            if (s == 0) continue;
            for (std::size_t c = 0; c < bm; ++c) out[j * bm + c] += s * w[k * bm + c];
        }
    }
    return out;
}

/// Recover the undirected graph an incidence matrix was built from.
inline UndirectedGraph graph_from_incidence(const OrientedIncidence& q) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(static_cast<std::size_t>(q.n_edges));
    for (const auto& row : q.entries) {
        int a = -1, b = -1;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] == 1) a = static_cast<int>(j);
            if (row[j] == -1) b = static_cast<int>(j);
        }
        if (a < 0 || b < 0) throw std::invalid_argument("graph_from_incidence: malformed row");
        edges.emplace_back(a, b);
    }
    return build_graph(q.n_nodes, edges);
}

}  // namespace nicons
