#pragma once

// Shared helpers for the test binaries: seeded random graphs, exact integer
// Laplacian products, and canned driven trajectories.

#include <cmath>
#include <utility>
#include <vector>

#include "nicons/nicons.hpp"

namespace test_helpers {

// spanning tree plus random extra edges, so connectivity holds by construction
inline nicons::UndirectedGraph random_connected_graph(nicons::UniformSampler& rng, int max_nodes) {
    const int n = 2 + static_cast<int>(rng.unit() * (max_nodes - 1));
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) {
        edges.emplace_back(static_cast<int>(rng.unit() * v), v);
    }
    for (int v = 0; v < n; ++v) {
        for (int w = v + 1; w < n; ++w) {
            if (rng.unit() < 0.25) edges.emplace_back(v, w);
        }
    }
    return nicons::build_graph(n, edges);
}

inline std::vector<std::vector<int>> incidence_transpose_times_incidence(
    const nicons::OrientedIncidence& q) {
    std::vector<std::vector<int>> l(static_cast<std::size_t>(q.n_nodes),
                                    std::vector<int>(static_cast<std::size_t>(q.n_nodes), 0));
    for (int i = 0; i < q.n_nodes; ++i) {
        for (int j = 0; j < q.n_nodes; ++j) {
            for (int k = 0; k < q.n_edges; ++k) {
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                    q.entries[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                    q.entries[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            }
        }
    }
    return l;
}

inline nicons::InputSignal sinusoid(double amplitude, double omega, double phase = 0.0) {
    return [amplitude, omega, phase](double t) {
        return nicons::Vec{amplitude * std::sin(omega * t + phase)};
    };
}

inline nicons::Trajectory driven(const nicons::SystemModel& model, const nicons::Vec& x0,
                                 const nicons::InputSignal& u, double t_end = 2.0,
                                 double step = 1e-3) {
    nicons::IntegratorConfig cfg;
    cfg.step = step;
    cfg.t_end = t_end;
    return nicons::simulate(model, x0, u, cfg);
}

}  // namespace test_helpers
