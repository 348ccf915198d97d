#pragma once

// Parallel composition of plant/controller collections, incidence wiring of
// plant outputs to edge controllers, and the positive-feedback closed loop:
// each controller is driven by the output difference across its edge, each
// plant by the signed sum of its incident controllers' outputs.

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicons/dynamics.hpp"
#include "nicons/topology.hpp"

namespace nicons {

enum class NetworkRole { plants, controllers };

/// A bank of systems operating independently side by side. The stacked state
/// is the concatenation of member states; every member shares one io
/// dimension m. The composite storage is the sum of member storages and is
/// available only when every member has one.
struct ParallelNetwork {
    std::vector<SystemModel> members;
    NetworkRole role = NetworkRole::plants;
    int io_dim = 0;
    int state_dim = 0;
    std::vector<int> state_offsets;  // per-member start index into the stacked state
    bool has_storage = false;

    int count() const { return static_cast<int>(members.size()); }

    Vec member_state(const Vec& x, int i) const {
        return block(x, static_cast<std::size_t>(state_offsets[static_cast<std::size_t>(i)]),
                     static_cast<std::size_t>(members[static_cast<std::size_t>(i)].state_dim));
    }

    Vec member_input(const Vec& u, int i) const {
        return block(u, static_cast<std::size_t>(i) * static_cast<std::size_t>(io_dim),
                     static_cast<std::size_t>(io_dim));
    }

    /// Blockwise stacked vector field.
    Vec f_stacked(const Vec& x, const Vec& u) const {
        Vec out;
        out.reserve(static_cast<std::size_t>(state_dim));
        for (int i = 0; i < count(); ++i) {
            append(out, members[static_cast<std::size_t>(i)].f(member_state(x, i), member_input(u, i)));
        }
        return out;
    }

    /// Blockwise stacked output.
    Vec h_stacked(const Vec& x) const {
        Vec out;
        out.reserve(static_cast<std::size_t>(count() * io_dim));
        for (int i = 0; i < count(); ++i) {
            append(out, members[static_cast<std::size_t>(i)].h(member_state(x, i)));
        }
        return out;
    }

    /// Blockwise stacked output rates.
    Vec output_rates_stacked(const Vec& x, const Vec& u) const {
        Vec out;
        out.reserve(static_cast<std::size_t>(count() * io_dim));
        for (int i = 0; i < count(); ++i) {
            append(out, output_rate(members[static_cast<std::size_t>(i)], member_state(x, i),
                                    member_input(u, i)));
        }
        return out;
    }

    /// Sum of member storages.
    double total_storage(const Vec& x) const {
        if (!has_storage) {
            throw std::invalid_argument("ParallelNetwork: a member has no storage function");
        }
        double v = 0.0;
        for (int i = 0; i < count(); ++i) {
            v += members[static_cast<std::size_t>(i)].storage(member_state(x, i));
        }
        return v;
    }
};

inline ParallelNetwork parallel_compose(std::vector<SystemModel> models, NetworkRole role) {
    if (models.empty()) throw std::invalid_argument("parallel_compose: member list is empty");
    const int m = models.front().output_dim;
    ParallelNetwork net;
    net.role = role;
    net.io_dim = m;
    net.has_storage = true;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const SystemModel& sys = models[i];
        if (sys.state_dim < 1 || !sys.f || !sys.h) {
            throw std::invalid_argument("parallel_compose: member " + std::to_string(i) +
                                        " is not a complete system");
        }
        if (sys.input_dim != m || sys.output_dim != m) {
            throw std::invalid_argument("parallel_compose: member " + std::to_string(i) +
                                        " has io dimension " + std::to_string(sys.input_dim) + "/" +
                                        std::to_string(sys.output_dim) +
                                        ", expected common io dimension " + std::to_string(m));
        }
        net.state_offsets.push_back(net.state_dim);
        net.state_dim += sys.state_dim;
        if (!sys.storage) net.has_storage = false;
    }
    net.members = std::move(models);
    return net;
}

/// Controller inputs u_ck = sum_j q_kj y_pj: the output difference across
/// each edge.
inline Vec edge_inputs(const OrientedIncidence& q, int m, const Vec& plant_outputs) {
    return apply_incidence(q, m, plant_outputs);
}

/// Plant inputs u_pi = sum_k q_ki y_ck: the signed sum over incident edges,
/// fed back positively (no extra negation beyond the incidence signs).
inline Vec node_inputs(const OrientedIncidence& q, int m, const Vec& controller_outputs) {
    return apply_incidence_transpose(q, m, controller_outputs);
}

/// The autonomous closed loop: N node plants and l edge controllers wired
/// through an oriented incidence matrix. Stacked state = (plant states,
/// controller states) in member order.
struct ClosedLoopSystem {
    ParallelNetwork plants;
    ParallelNetwork controllers;
    OrientedIncidence incidence;
    int io_dim = 0;
    double eps_min = 0.0;  // minimum controller strictness level

    int state_dim() const { return plants.state_dim + controllers.state_dim; }

    Vec plant_block(const Vec& x) const {
        return block(x, 0, static_cast<std::size_t>(plants.state_dim));
    }
    Vec controller_block(const Vec& x) const {
        return block(x, static_cast<std::size_t>(plants.state_dim),
                     static_cast<std::size_t>(controllers.state_dim));
    }

    Vec plant_outputs(const Vec& x) const { return plants.h_stacked(plant_block(x)); }
    Vec controller_outputs(const Vec& x) const { return controllers.h_stacked(controller_block(x)); }

    /// (Q kron I_m) Y_p, equal to the controller input vector U_c.
    Vec edge_differences(const Vec& x) const {
        return edge_inputs(incidence, io_dim, plant_outputs(x));
    }

    /// (Q^T kron I_m) Y_c, equal to the plant input vector U_p.
    Vec plant_inputs(const Vec& x) const {
        return node_inputs(incidence, io_dim, controller_outputs(x));
    }

    Vec controller_output_rates(const Vec& x) const {
        return controllers.output_rates_stacked(controller_block(x), edge_differences(x));
    }

    /// Stacked closed-loop vector field.
    Vec field(const Vec& x) const {
        const Vec up = plant_inputs(x);
        const Vec uc = edge_differences(x);
        Vec out = plants.f_stacked(plant_block(x), up);
        append(out, controllers.f_stacked(controller_block(x), uc));
        return out;
    }

    /// Package as an input-free SystemModel whose output is the stacked
    /// plant output vector Y_p.
    SystemModel as_system_model() const {
        SystemModel m;
        m.state_dim = state_dim();
        m.input_dim = 0;
        m.output_dim = plants.count() * io_dim;
        const ClosedLoopSystem self = *this;
        m.f = [self](const Vec& x, const Vec&) { return self.field(x); };
        m.h = [self](const Vec& x) { return self.plant_outputs(x); };
        bool all_jac = true;
        for (const SystemModel& p : plants.members) {
            if (!p.output_jacobian) all_jac = false;
        }
        if (all_jac) {
            m.output_jacobian = [self](const Vec& x) {
                Mat jac(static_cast<std::size_t>(self.plants.count() * self.io_dim),
                        Vec(static_cast<std::size_t>(self.state_dim()), 0.0));
                for (int i = 0; i < self.plants.count(); ++i) {
                    const auto& member = self.plants.members[static_cast<std::size_t>(i)];
                    const Mat sub = member.output_jacobian(self.plants.member_state(self.plant_block(x), i));
                    const std::size_t row0 = static_cast<std::size_t>(i * self.io_dim);
                    const std::size_t col0 =
                        static_cast<std::size_t>(self.plants.state_offsets[static_cast<std::size_t>(i)]);
                    for (std::size_t r = 0; r < sub.size(); ++r) {
                        for (std::size_t c = 0; c < sub[r].size(); ++c) {
                            jac[row0 + r][col0 + c] = sub[r][c];
                        }
                    }
                }
                return jac;
            };
        }
        return m;
    }
};

inline ClosedLoopSystem close_loop(ParallelNetwork plant_net, ParallelNetwork controller_net,
                                   OrientedIncidence incidence) {
    if (plant_net.role != NetworkRole::plants || controller_net.role != NetworkRole::controllers) {
        throw std::invalid_argument("close_loop: networks must be tagged plants and controllers");
    }
    if (plant_net.count() != incidence.n_nodes) {
        throw std::invalid_argument("close_loop: " + std::to_string(plant_net.count()) +
                                    " plants for " + std::to_string(incidence.n_nodes) +
                                    " graph nodes");
    }
    if (controller_net.count() != incidence.n_edges) {
        throw std::invalid_argument("close_loop: " + std::to_string(controller_net.count()) +
                                    " controllers for " + std::to_string(incidence.n_edges) +
                                    " graph edges");
    }
    if (!is_connected(graph_from_incidence(incidence))) {
        throw std::invalid_argument(
            "close_loop: the communication graph is disconnected; consensus wiring requires a "
            "connected graph");
    }
    if (plant_net.io_dim != controller_net.io_dim) {
        throw std::invalid_argument("close_loop: plant io dimension " +
                                    std::to_string(plant_net.io_dim) +
                                    " does not match controller io dimension " +
                                    std::to_string(controller_net.io_dim));
    }
    double eps_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < controller_net.count(); ++k) {
        const auto& c = controller_net.members[static_cast<std::size_t>(k)];
        if (!c.strictness || !(*c.strictness > 0.0)) {
            throw std::invalid_argument("close_loop: controller " + std::to_string(k) +
                                        " declares no positive output-strictness level");
        }
        eps_min = std::min(eps_min, *c.strictness);
    }
    ClosedLoopSystem loop;
    loop.io_dim = plant_net.io_dim;
    loop.eps_min = eps_min;
    loop.plants = std::move(plant_net);
    loop.controllers = std::move(controller_net);
    loop.incidence = std::move(incidence);
    return loop;
}

/// A closed-loop trajectory with the wiring-level series alongside the
/// stacked base trajectory. Edge differences are recomputed from Y_p and the
/// incidence matrix at record time, never integrated separately.
struct NetworkTrajectory {
    Trajectory base;  // states are stacked; outputs are Y_p
    std::vector<Vec> plant_outputs;           // Y_p
    std::vector<Vec> edge_differences;        // (Q kron I_m) Y_p = U_c
    std::vector<Vec> controller_outputs;      // Y_c
    std::vector<Vec> controller_output_rates; // Y_c rates
    int n_plants = 0;
    int n_controllers = 0;
    int io_dim = 0;

    std::size_t size() const { return base.size(); }
};

inline NetworkTrajectory simulate_closed_loop(const ClosedLoopSystem& loop, const Vec& x0,
                                              const IntegratorConfig& cfg) {
    const SystemModel model = loop.as_system_model();
    const InputSignal no_input = [](double) { return Vec{}; };
    NetworkTrajectory out;
    out.base = simulate(model, x0, no_input, cfg);
    out.n_plants = loop.plants.count();
    out.n_controllers = loop.controllers.count();
    out.io_dim = loop.io_dim;
    out.plant_outputs.reserve(out.base.size());
    out.edge_differences.reserve(out.base.size());
    out.controller_outputs.reserve(out.base.size());
    out.controller_output_rates.reserve(out.base.size());
    for (std::size_t i = 0; i < out.base.size(); ++i) {
        const Vec& x = out.base.states[i];
        out.plant_outputs.push_back(out.base.outputs[i]);
        out.edge_differences.push_back(apply_incidence(loop.incidence, loop.io_dim, out.base.outputs[i]));
        out.controller_outputs.push_back(loop.controller_outputs(x));
        out.controller_output_rates.push_back(loop.controller_output_rates(x));
    }
    return out;
}

/// Rebuild plant i's own input/state/output series from a closed-loop run,
/// as if it had been simulated standalone under the wiring-induced input.
inline Trajectory plant_trajectory(const ClosedLoopSystem& loop, const NetworkTrajectory& ntraj,
                                   int i) {
    if (i < 0 || i >= loop.plants.count()) throw std::out_of_range("plant_trajectory: bad index");
    Trajectory t;
    t.times = ntraj.base.times;
    t.diverged = ntraj.base.diverged;
    t.divergence_time = ntraj.base.divergence_time;
    const auto& member = loop.plants.members[static_cast<std::size_t>(i)];
    for (std::size_t s = 0; s < ntraj.size(); ++s) {
        const Vec xp = loop.plants.member_state(loop.plant_block(ntraj.base.states[s]), i);
        const Vec up = loop.plants.member_input(
            node_inputs(loop.incidence, loop.io_dim, ntraj.controller_outputs[s]), i);
        t.states.push_back(xp);
        t.inputs.push_back(up);
        t.outputs.push_back(member.h(xp));
        t.output_rates.push_back(output_rate(member, xp, up));
    }
    return t;
}

/// Same extraction for controller k.
inline Trajectory controller_trajectory(const ClosedLoopSystem& loop, const NetworkTrajectory& ntraj,
                                        int k) {
    if (k < 0 || k >= loop.controllers.count()) {
        throw std::out_of_range("controller_trajectory: bad index");
    }
    Trajectory t;
    t.times = ntraj.base.times;
    t.diverged = ntraj.base.diverged;
    t.divergence_time = ntraj.base.divergence_time;
    const auto& member = loop.controllers.members[static_cast<std::size_t>(k)];
    for (std::size_t s = 0; s < ntraj.size(); ++s) {
        const Vec xc = loop.controllers.member_state(loop.controller_block(ntraj.base.states[s]), k);
        const Vec uc = loop.controllers.member_input(ntraj.edge_differences[s], k);
        t.states.push_back(xc);
        t.inputs.push_back(uc);
        t.outputs.push_back(member.h(xc));
        t.output_rates.push_back(output_rate(member, xc, uc));
    }
    return t;
}

}  // namespace nicons
