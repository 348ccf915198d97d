#pragma once

// Concrete plant and controller templates packaged as SystemModels with
// their closed-form storage functions: the torsional-spring pendulum plant,
// and first/second-order output-strict controller families built from a
// linear + cubic + sine nonlinearity whose antiderivative is closed-form.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "nicons/dynamics.hpp"

namespace nicons {

/// Pendulum with a torsional spring at the pivot. State is (angle from the
/// downward vertical, angular velocity); input is a torque; output is the
/// angle.
struct PendulumParams {
    double mass = 1.0;      // kg
    double length = 1.0;    // m
    double spring = 1.0;    // N*m/rad
    double gravity = 9.8;   // m/s^2

    bool operator==(const PendulumParams&) const = default;
};

/// Scalar nonlinearity s(x) = linear*x + cubic*x^3 + sine*sin(x). The family
/// is closed under antidifferentiation, which keeps storage functions exact.
struct NonlinearitySpec {
    double linear = 0.0;
    double cubic = 0.0;
    double sine = 0.0;

    double operator()(double x) const { return linear * x + cubic * x * x * x + sine * std::sin(x); }

    /// Antiderivative with value 0 at x = 0.
    double antiderivative(double x) const {
        return 0.5 * linear * x * x + 0.25 * cubic * x * x * x * x + sine * (1.0 - std::cos(x));
    }

    bool operator==(const NonlinearitySpec&) const = default;
};

struct FirstOrderOsniParams {
    NonlinearitySpec rho;
    double alpha = 1.0;
    std::optional<double> epsilon;  // empty: defaults to the maximal 1/alpha

    double strictness() const { return epsilon.value_or(1.0 / alpha); }
    bool operator==(const FirstOrderOsniParams&) const = default;
};

struct SecondOrderOsniParams {
    NonlinearitySpec eta;
    double alpha = 1.0;
    double beta = 1.0;
    std::optional<double> epsilon;  // empty: defaults to the maximal beta/alpha

    double strictness() const { return epsilon.value_or(beta / alpha); }
    bool operator==(const SecondOrderOsniParams&) const = default;
};

namespace detail {

// Sufficient coefficient conditions for -antiderivative to be positive
// definite: a strictly stabilizing linear term, or a vanishing linear term
// with a strictly stabilizing cubic; a sine term is admitted only when
// dominated by the linear term (|sin x| <= |x| pointwise).
inline void require_storage_shape(const NonlinearitySpec& s, const std::string& where) {
    if (!std::isfinite(s.linear) || !std::isfinite(s.cubic) || !std::isfinite(s.sine)) {
        throw std::invalid_argument(where + ": coefficients must be finite");
    }
    const bool shape_ok = s.linear < 0.0 || (s.linear <= 0.0 && s.cubic < 0.0);
    if (!shape_ok) {
        throw std::invalid_argument(
            where + ": storage is not positive definite for these coefficients; "
                    "need linear < 0, or linear <= 0 with cubic < 0");
    }
    if (s.sine != 0.0 && std::abs(s.sine) > std::abs(s.linear)) {
        throw std::invalid_argument(where +
                                    ": sine coefficient must satisfy |sine| <= |linear| for a "
                                    "positive definite storage");
    }
    if (s.cubic > 0.0) {
        throw std::invalid_argument(where +
                                    ": positive cubic coefficient destroys storage positivity "
                                    "away from the origin");
    }
}

}  // namespace detail

inline SystemModel make_pendulum(const PendulumParams& p) {
    if (!(p.mass > 0.0) || !(p.length > 0.0) || !(p.spring > 0.0) || !(p.gravity > 0.0)) {
        throw std::invalid_argument("make_pendulum: mass, length, spring, gravity must be positive");
    }
    const double ml2 = p.mass * p.length * p.length;
    const double mgl = p.mass * p.gravity * p.length;
    const double kappa = p.spring;

    SystemModel m;
    m.state_dim = 2;
    m.input_dim = 1;
    m.output_dim = 1;
    m.f = [ml2, mgl, kappa](const Vec& x, const Vec& u) {
        return Vec{x[1], (-kappa * x[0] - mgl * std::sin(x[0]) + u[0]) / ml2};
    };
    m.h = [](const Vec& x) { return Vec{x[0]}; };
    m.output_jacobian = [](const Vec&) { return Mat{{1.0, 0.0}}; };
    // Spring + kinetic + gravitational potential energy; zero at the origin.
    m.storage = [ml2, mgl, kappa](const Vec& x) {
        return 0.5 * kappa * x[0] * x[0] + 0.5 * ml2 * x[1] * x[1] + mgl * (1.0 - std::cos(x[0]));
    };
    m.storage_gradient = [ml2, mgl, kappa](const Vec& x) {
        return Vec{kappa * x[0] + mgl * std::sin(x[0]), ml2 * x[1]};
    };
    return m;
}

/// First-order controller template: xdot = rho(x) + alpha*u, y = x, with
/// storage V(x) = -(1/alpha) * antiderivative(rho)(x). Admissible strictness
/// levels are (0, 1/alpha].
inline SystemModel make_first_order_osni(const FirstOrderOsniParams& p) {
    if (!(p.alpha > 0.0)) throw std::invalid_argument("first_order_osni: alpha must be positive");
    detail::require_storage_shape(p.rho, "first_order_osni.rho");
    const double eps = p.strictness();
    if (!(eps > 0.0) || eps > 1.0 / p.alpha) {
        throw std::invalid_argument("first_order_osni: epsilon must lie in (0, 1/alpha] = (0, " +
                                    std::to_string(1.0 / p.alpha) + "]");
    }
    const NonlinearitySpec rho = p.rho;
    const double alpha = p.alpha;

    SystemModel m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.output_dim = 1;
    m.f = [rho, alpha](const Vec& x, const Vec& u) { return Vec{rho(x[0]) + alpha * u[0]}; };
    m.h = [](const Vec& x) { return Vec{x[0]}; };
    m.output_jacobian = [](const Vec&) { return Mat{{1.0}}; };
    m.storage = [rho, alpha](const Vec& x) { return -rho.antiderivative(x[0]) / alpha; };
    m.storage_gradient = [rho, alpha](const Vec& x) { return Vec{-rho(x[0]) / alpha}; };
    m.strictness = eps;
    return m;
}

/// Second-order controller template: xdot = (x2, eta(x1) - beta*x2 +
/// alpha*u), y = x1, with storage V = -(1/alpha)*antiderivative(eta)(x1) +
/// x2^2/(2 alpha). Admissible strictness levels are (0, beta/alpha].
inline SystemModel make_second_order_osni(const SecondOrderOsniParams& p) {
    if (!(p.alpha > 0.0)) throw std::invalid_argument("second_order_osni: alpha must be positive");
    if (!(p.beta > 0.0)) throw std::invalid_argument("second_order_osni: beta must be positive");
    detail::require_storage_shape(p.eta, "second_order_osni.eta");
    const double eps = p.strictness();
    if (!(eps > 0.0) || eps > p.beta / p.alpha) {
        throw std::invalid_argument("second_order_osni: epsilon must lie in (0, beta/alpha] = (0, " +
                                    std::to_string(p.beta / p.alpha) + "]");
    }
    const NonlinearitySpec eta = p.eta;
    const double alpha = p.alpha;
    const double beta = p.beta;

    SystemModel m;
    m.state_dim = 2;
    m.input_dim = 1;
    m.output_dim = 1;
    m.f = [eta, alpha, beta](const Vec& x, const Vec& u) {
        return Vec{x[1], eta(x[0]) - beta * x[1] + alpha * u[0]};
    };
    m.h = [](const Vec& x) { return Vec{x[0]}; };
    m.output_jacobian = [](const Vec&) { return Mat{{1.0, 0.0}}; };
    m.storage = [eta, alpha](const Vec& x) {
        return -eta.antiderivative(x[0]) / alpha + 0.5 * x[1] * x[1] / alpha;
    };
    m.storage_gradient = [eta, alpha](const Vec& x) {
        return Vec{-eta(x[0]) / alpha, x[1] / alpha};
    };
    m.strictness = eps;
    return m;
}

/// Closed-form dissipation residual Vdot - (u*ydot - eps*ydot^2) of the
/// first-order template, which collapses to (eps - 1/alpha)(rho(x) +
/// alpha*u)^2. Nonpositive for every admissible strictness level.
inline double osni_residual_first_order(const FirstOrderOsniParams& p, double x, double u) {
    const double v = p.rho(x) + p.alpha * u;
    return (p.strictness() - 1.0 / p.alpha) * v * v;
}

/// Closed-form dissipation residual of the second-order template:
/// (eps - beta/alpha) * x2^2, independent of x1 and u.
inline double osni_residual_second_order(const SecondOrderOsniParams& p, double /*x1*/, double x2,
                                         double /*u*/) {
    return (p.strictness() - p.beta / p.alpha) * x2 * x2;
}

}  // namespace nicons
