#pragma once

// Numerical certification along computed trajectories: dissipation
// inequality checks against supply rates, the closed-loop aggregate storage
// W and its decrease bound, consensus-error measurement, steady-state window
// detection, and sampled positive-definiteness checks.
//
// The Assumption-style inequality on constant inputs is never verified in
// general (it quantifies over all constant inputs); only its closed-loop
// steady-state consequence |mean Y_c| ~ 0 is checked, and reports say so.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicons/common.hpp"
#include "nicons/dynamics.hpp"
#include "nicons/network.hpp"

namespace nicons {

enum class DissipationKind { ni, osni };

/// Outcome of a trajectory dissipation check. The residual at a grid point
/// is Vdot - supply; max_violation is its largest value over the evaluated
/// grid, and the check passes iff max_violation <= tolerance.
struct DissipationReport {
    DissipationKind kind = DissipationKind::ni;
    double epsilon = 0.0;  // 0 for the plain (non-strict) supply rate
    double max_violation = -std::numeric_limits<double>::infinity();
    std::vector<double> violation_times;  // grid times where residual > tolerance
    double tolerance = 0.0;
    bool pass = false;
};

/// Aggregate closed-loop storage W = sum V_p + sum V_c - <(Q kron I_m) Y_p, Y_c>.
inline double total_storage(const ClosedLoopSystem& loop, const Vec& x) {
    if (!loop.plants.has_storage || !loop.controllers.has_storage) {
        throw std::invalid_argument("total_storage: every member needs a storage function");
    }
    const Vec yhat = loop.edge_differences(x);
    const Vec yc = loop.controller_outputs(x);
    double cross = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) cross += yhat[i] * yc[i];
    return loop.plants.total_storage(loop.plant_block(x)) +
           loop.controllers.total_storage(loop.controller_block(x)) - cross;
}

namespace detail {

// Vdot series: grad V . f where the gradient is available, else central
// finite differences of V along the recorded grid (interior points only).
// Returns the evaluated indices alongside the values.
inline void storage_rate_series(const SystemModel& model, const Trajectory& traj,
                                std::vector<std::size_t>& idx, std::vector<double>& vdot) {
    idx.clear();
    vdot.clear();
    if (model.storage_gradient) {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const Vec g = model.storage_gradient(traj.states[i]);
            const Vec dx = model.f(traj.states[i], traj.inputs[i]);
            double v = 0.0;
            for (std::size_t c = 0; c < g.size(); ++c) v += g[c] * dx[c];
            idx.push_back(i);
            vdot.push_back(v);
        }
        return;
    }
    if (traj.size() < 3) {
        throw std::invalid_argument("dissipation check: trajectory too short (< 3 points) for "
                                    "finite differences");
    }
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i - 1];
        idx.push_back(i);
        vdot.push_back((model.storage(traj.states[i + 1]) - model.storage(traj.states[i - 1])) / dt);
    }
}

inline double supply_rate(const Vec& u, const Vec& ydot, double epsilon) {
    double s = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) s += u[c] * ydot[c];
    if (epsilon != 0.0) {
        double r2 = 0.0;
        for (double v : ydot) r2 += v * v;
        s -= epsilon * r2;
    }
    return s;
}

inline DissipationReport dissipation_check(const SystemModel& model, const Trajectory& traj,
                                           DissipationKind kind, double epsilon, double tol) {
    if (!model.storage) {
        throw std::invalid_argument("dissipation check: model has no storage function");
    }
    std::vector<std::size_t> idx;
    std::vector<double> vdot;
    storage_rate_series(model, traj, idx, vdot);

    DissipationReport report;
    report.kind = kind;
    report.epsilon = epsilon;
    report.tolerance = tol;
    for (std::size_t n = 0; n < idx.size(); ++n) {
        const std::size_t i = idx[n];
        const double residual =
            vdot[n] - supply_rate(traj.inputs[i], traj.output_rates[i], epsilon);
        report.max_violation = std::max(report.max_violation, residual);
        if (residual > tol) report.violation_times.push_back(traj.times[i]);
    }
    report.pass = report.max_violation <= tol;
    return report;
}

}  // namespace detail

/// Check Vdot <= u . ydot along a recorded trajectory of `model`.
inline DissipationReport check_ni_dissipation(const SystemModel& model, const Trajectory& traj,
                                              double tol) {
    return detail::dissipation_check(model, traj, DissipationKind::ni, 0.0, tol);
}

/// Check Vdot <= u . ydot - epsilon |ydot|^2 along a recorded trajectory.
inline DissipationReport check_osni_dissipation(const SystemModel& model, const Trajectory& traj,
                                                double epsilon, double tol) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("check_osni_dissipation: epsilon must be positive");
    }
    return detail::dissipation_check(model, traj, DissipationKind::osni, epsilon, tol);
}

/// Default dissipation tolerance: 1e-6 + 1e-4 * max |supply| over the grid.
/// Absorbs the O(h^2) differencing and integrator error without masking a
/// genuine violation.
inline double default_dissipation_tolerance(const Trajectory& traj, double epsilon = 0.0) {
    double peak = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        peak = std::max(peak, std::abs(detail::supply_rate(traj.inputs[i], traj.output_rates[i],
                                                           epsilon)));
    }
    return 1e-6 + 1e-4 * peak;
}

/// W along a closed-loop trajectory, its differenced rate, and the decrease
/// bound -eps_min |Yc_dot|^2. margin = bound - dW/dt, so the inequality
/// holds (up to slack) where margin >= -tol.
struct LyapunovSeries {
    std::vector<double> times;
    std::vector<double> w;
    std::vector<double> dw_dt;   // central differences; one-sided at the ends
    std::vector<double> bound;   // -eps_min |Yc_dot|^2
    std::vector<double> margin;  // bound - dw_dt
    double eps_min = 0.0;
};

inline LyapunovSeries lyapunov_series(const ClosedLoopSystem& loop, const NetworkTrajectory& ntraj) {
    if (ntraj.size() < 3) {
        throw std::invalid_argument("lyapunov_series: trajectory too short (< 3 points)");
    }
    LyapunovSeries s;
    s.eps_min = loop.eps_min;
    s.times = ntraj.base.times;
    const std::size_t n = ntraj.size();
    s.w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = total_storage(loop, ntraj.base.states[i]);
        if (!std::isfinite(wi)) throw std::invalid_argument("lyapunov_series: non-finite W value");
        s.w.push_back(wi);
    }
    s.dw_dt.resize(n);
    s.dw_dt[0] = (s.w[1] - s.w[0]) / (s.times[1] - s.times[0]);
    s.dw_dt[n - 1] = (s.w[n - 1] - s.w[n - 2]) / (s.times[n - 1] - s.times[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        s.dw_dt[i] = (s.w[i + 1] - s.w[i - 1]) / (s.times[i + 1] - s.times[i - 1]);
    }
    s.bound.reserve(n);
    s.margin.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = norm(ntraj.controller_output_rates[i]);
        s.bound.push_back(-loop.eps_min * r * r);
        s.margin.push_back(s.bound[i] - s.dw_dt[i]);
    }
    return s;
}

struct LyapunovCheck {
    bool pass = false;
    double worst_margin = 0.0;  // min margin over interior grid points
};

/// True iff dW/dt <= -eps_min |Yc_dot|^2 + tol at every interior grid point.
inline LyapunovCheck check_lyapunov_decrease(const LyapunovSeries& s, double tol) {
    LyapunovCheck c;
    c.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < s.times.size(); ++i) {
        c.worst_margin = std::min(c.worst_margin, s.margin[i]);
    }
    c.pass = c.worst_margin >= -tol;
    return c;
}

/// Worst pairwise output disagreement over time, and whether it stays below
/// a threshold from some recorded time onward.
struct ConsensusReport {
    std::vector<double> times;
    std::vector<double> error;  // e(t) = max_{i<j} |y_pi - y_pj|
    double final_error = 0.0;
    bool settled = false;
    std::optional<double> settle_time;
    double threshold = 0.0;
};

inline ConsensusReport consensus_error(const NetworkTrajectory& ntraj, double threshold) {
    if (ntraj.n_plants < 2) {
        throw std::invalid_argument("consensus_error: needs at least two plants");
    }
    ConsensusReport r;
    r.times = ntraj.base.times;
    r.threshold = threshold;
    const int n = ntraj.n_plants;
    const std::size_t m = static_cast<std::size_t>(ntraj.io_dim);
    r.error.reserve(ntraj.size());
    for (std::size_t s = 0; s < ntraj.size(); ++s) {
        const Vec& y = ntraj.plant_outputs[s];
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double d2 = 0.0;
                for (std::size_t c = 0; c < m; ++c) {
                    const double d = y[static_cast<std::size_t>(i) * m + c] -
                                     y[static_cast<std::size_t>(j) * m + c];
                    d2 += d * d;
                }
                worst = std::max(worst, std::sqrt(d2));
            }
        }
        r.error.push_back(worst);
    }
    r.final_error = r.error.back();
    // settle time: earliest recorded t* with e(t) < threshold for all t >= t*
    std::size_t last_above = ntraj.size();
    for (std::size_t s = 0; s < ntraj.size(); ++s) {
        if (!(r.error[s] < threshold)) last_above = s;
    }
    if (last_above == ntraj.size()) {
        r.settled = true;
        r.settle_time = 0.0;
    } else if (last_above + 1 < ntraj.size()) {
        r.settled = true;
        r.settle_time = r.times[last_above + 1];
    }
    return r;
}

/// A maximal time window in which the controller outputs barely move.
struct SteadyStateWindow {
    double start = 0.0;
    double end = 0.0;
    Vec mean_controller_output;  // mean Y_c over the window
    Vec mean_controller_input;   // mean U_c over the window
    double max_output_rate = 0.0;
};

/// Maximal windows where |Yc_dot| < rate_tol for at least min_duration.
inline std::vector<SteadyStateWindow> detect_steady_state(const NetworkTrajectory& ntraj,
                                                          double rate_tol, double min_duration) {
    std::vector<SteadyStateWindow> windows;
    const std::size_t n = ntraj.size();
    std::size_t s = 0;
    while (s < n) {
        if (!(norm(ntraj.controller_output_rates[s]) < rate_tol)) {
            ++s;
            continue;
        }
        std::size_t e = s;
        while (e + 1 < n && norm(ntraj.controller_output_rates[e + 1]) < rate_tol) ++e;
        if (ntraj.base.times[e] - ntraj.base.times[s] >= min_duration) {
            SteadyStateWindow w;
            w.start = ntraj.base.times[s];
            w.end = ntraj.base.times[e];
            const std::size_t dim_c = ntraj.controller_outputs[s].size();
            const std::size_t count = e - s + 1;
            w.mean_controller_output.assign(dim_c, 0.0);
            w.mean_controller_input.assign(dim_c, 0.0);
            for (std::size_t i = s; i <= e; ++i) {
                for (std::size_t c = 0; c < dim_c; ++c) {
                    w.mean_controller_output[c] += ntraj.controller_outputs[i][c];
                    w.mean_controller_input[c] += ntraj.edge_differences[i][c];
                }
                w.max_output_rate = std::max(w.max_output_rate,
                                             norm(ntraj.controller_output_rates[i]));
            }
            for (std::size_t c = 0; c < dim_c; ++c) {
                w.mean_controller_output[c] /= static_cast<double>(count);
                w.mean_controller_input[c] /= static_cast<double>(count);
            }
            windows.push_back(std::move(w));
        }
        s = e + 1;
    }
    return windows;
}

/// Numerical witness that detected steady states are consensus states: true
/// iff every window's mean controller output satisfies |mean Y_c| <= tol.
/// Vacuously true with no windows.
inline bool check_steady_state_consequence(const std::vector<SteadyStateWindow>& windows,
                                           double tol) {
    for (const auto& w : windows) {
        if (norm(w.mean_controller_output) > tol) return false;
    }
    return true;
}

/// Result of a sampled positive-definiteness check of a scalar field.
struct PositiveDefiniteReport {
    bool pass = false;
    double value_at_zero = 0.0;
    std::optional<Vec> counterexample;
    std::optional<double> counterexample_value;
    double radius = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
};

/// Check fn(0) = 0 (within 1e-12) and fn(x) > 0 on n_samples seeded uniform
/// draws from the ball 0 < |x| <= radius. Counterexamples are reported, not
/// thrown.
inline PositiveDefiniteReport sample_positive_definite(const std::function<double(const Vec&)>& fn,
                                                       int dim, double radius, int n_samples,
                                                       std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("sample_positive_definite: n_samples must be >= 1");
    if (dim < 1) throw std::invalid_argument("sample_positive_definite: dim must be >= 1");
    PositiveDefiniteReport report;
    report.radius = radius;
    report.n_samples = n_samples;
    report.seed = seed;
    report.value_at_zero = fn(Vec(static_cast<std::size_t>(dim), 0.0));
    report.pass = std::abs(report.value_at_zero) <= 1e-12;

    UniformSampler sampler(seed);
    Vec x(static_cast<std::size_t>(dim));
    for (int s = 0; s < n_samples && report.pass; ++s) {
        // rejection-sample the ball from the enclosing cube
        double r;
        do {
            for (auto& xi : x) xi = sampler.range(-radius, radius);
            r = norm(x);
        } while (r > radius || r == 0.0);
        const double v = fn(x);
        if (!(v > 0.0)) {
            report.pass = false;
            report.counterexample = x;
            report.counterexample_value = v;
        }
    }
    return report;
}

}  // namespace nicons
