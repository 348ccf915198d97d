#pragma once

// Generic nonlinear state-space systems xdot = f(x,u), y = h(x), and a
// fixed-step RK4 integrator that records trajectories with outputs and
// output rates. Outputs never feed through the input: h takes the state
// only, which is what makes the closed-loop wiring free of algebraic loops.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nicons/common.hpp"

namespace nicons {

/// A nonlinear state-space system. `f` and `h` are required; the Jacobian,
/// storage function, and storage gradient are optional extras that enable
/// analytic output rates and dissipation certification. `strictness` is the
/// output-strictness level carried by output-strictly-dissipative models
/// (controllers); plants leave it empty.
struct SystemModel {
    int state_dim = 0;
    int input_dim = 0;
    int output_dim = 0;
    std::function<Vec(const Vec&, const Vec&)> f;
    std::function<Vec(const Vec&)> h;
    std::function<Mat(const Vec&)> output_jacobian;    // dh/dx, output_dim x state_dim
    std::function<double(const Vec&)> storage;         // V(x) >= 0, V(0) = 0
    std::function<Vec(const Vec&)> storage_gradient;   // grad V, length state_dim
    std::optional<double> strictness;
};

struct IntegratorConfig {
    double step = 1e-3;     // seconds
    double t_end = 1.0;     // seconds
    int record_every = 1;   // decimation factor for stored samples

    bool operator==(const IntegratorConfig&) const = default;
};

/// Number of RK4 steps covering [0, t_end] on the uniform grid.
inline long grid_steps(double t_end, double step) {
    return static_cast<long>(std::floor(t_end / step + 1e-9));
}

inline void validate(const IntegratorConfig& cfg) {
    if (!(cfg.step > 0.0)) throw std::invalid_argument("integrator: step must be positive");
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("integrator: t_end must be positive");
    if (cfg.step > cfg.t_end) throw std::invalid_argument("integrator: step must not exceed t_end");
    if (cfg.record_every < 1) throw std::invalid_argument("integrator: record_every must be >= 1");
}

/// Time-stamped samples of a simulated system. Outputs are recomputed from
/// the states via h at record time, never integrated separately.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> inputs;
    std::vector<Vec> outputs;
    std::vector<Vec> output_rates;
    bool diverged = false;
    std::optional<double> divergence_time;

    std::size_t size() const { return times.size(); }
};

/// ydot = (dh/dx) f(x,u). Uses the analytic Jacobian when the model carries
/// one; otherwise central-differences h along the state velocity with a
/// perturbation of 1e-6 * (1 + |x|) in state space.
inline Vec output_rate(const SystemModel& model, const Vec& x, const Vec& u) {
    if (static_cast<int>(x.size()) != model.state_dim) {
        throw std::invalid_argument("output_rate: state has length " + std::to_string(x.size()) +
                                    ", model expects " + std::to_string(model.state_dim));
    }
    if (static_cast<int>(u.size()) != model.input_dim) {
        throw std::invalid_argument("output_rate: input has length " + std::to_string(u.size()) +
                                    ", model expects " + std::to_string(model.input_dim));
    }
    const Vec dx = model.f(x, u);
    if (model.output_jacobian) {
        const Mat jac = model.output_jacobian(x);
        Vec out(static_cast<std::size_t>(model.output_dim), 0.0);
        for (std::size_t r = 0; r < out.size(); ++r) {
            for (std::size_t c = 0; c < dx.size(); ++c) out[r] += jac[r][c] * dx[c];
        }
        return out;
    }
    const double speed = norm(dx);
    if (speed == 0.0) return Vec(static_cast<std::size_t>(model.output_dim), 0.0);
    const double delta = 1e-6 * (1.0 + norm(x)) / speed;
    Vec xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += delta * dx[i];
        xm[i] -= delta * dx[i];
    }
    const Vec hp = model.h(xp), hm = model.h(xm);
    Vec out(static_cast<std::size_t>(model.output_dim));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (hp[i] - hm[i]) / (2.0 * delta);
    return out;
}

/// One classical RK4 step from (t, x), sampling the input at t, t+step/2,
/// and t+step as the tableau requires.
inline Vec rk4_step(const SystemModel& model, const Vec& x, const InputSignal& u_fn, double t,
                    double step) {
    if (!(step > 0.0)) throw std::invalid_argument("rk4_step: step must be positive");
    const Vec u0 = u_fn(t);
    const Vec um = u_fn(t + 0.5 * step);
    const Vec u1 = u_fn(t + step);

    const Vec k1 = model.f(x, u0);
    Vec x2 = x;
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] + 0.5 * step * k1[i];
    const Vec k2 = model.f(x2, um);
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] + 0.5 * step * k2[i];
    const Vec k3 = model.f(x2, um);
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] + step * k3[i];
    const Vec k4 = model.f(x2, u1);

    Vec out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

namespace detail {
constexpr double kDivergenceNorm = 1e9;
}

/// Integrate on the uniform grid t_i = i*step for i = 0..floor(t_end/step),
/// recording every record_every-th sample. Numerical blow-up (non-finite
/// state or |x| > 1e9) stops integration and flags the trajectory as
/// diverged; the samples recorded so far are kept.
inline Trajectory simulate(const SystemModel& model, const Vec& x0, const InputSignal& u_fn,
                           const IntegratorConfig& cfg) {
    validate(cfg);
    if (static_cast<int>(x0.size()) != model.state_dim) {
        throw std::invalid_argument("simulate: initial state has length " +
                                    std::to_string(x0.size()) + ", model expects " +
                                    std::to_string(model.state_dim));
    }
    const long n_steps = grid_steps(cfg.t_end, cfg.step);
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(n_steps / cfg.record_every + 2));

    Vec x = x0;
    for (long i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * cfg.step;
        if (i % cfg.record_every == 0) {
            const Vec u = u_fn(t);
            traj.times.push_back(t);
            traj.states.push_back(x);
            traj.inputs.push_back(u);
            traj.outputs.push_back(model.h(x));
            traj.output_rates.push_back(output_rate(model, x, u));
        }
        if (i == n_steps) break;
        x = rk4_step(model, x, u_fn, t, cfg.step);
        if (!all_finite(x) || norm(x) > detail::kDivergenceNorm) {
            traj.diverged = true;
            traj.divergence_time = t + cfg.step;
            break;
        }
    }
    return traj;
}

}  // namespace nicons
