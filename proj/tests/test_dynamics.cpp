#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "nicons/dynamics.hpp"
#include "nicons/ni_models.hpp"

using namespace nicons;
using Catch::Matchers::WithinAbs;

namespace {

SystemModel scalar_decay() {
    SystemModel m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.output_dim = 1;
    m.f = [](const Vec& x, const Vec&) { return Vec{-x[0]}; };
    m.h = [](const Vec& x) { return Vec{x[0]}; };
    return m;
}

const InputSignal zero_input = [](double) { return Vec{0.0}; };

}  // namespace

TEST_CASE("grid_steps floors with a drift guard") {
    REQUIRE(grid_steps(1.0, 0.1) == 10);
    REQUIRE(grid_steps(30.0, 1e-3) == 30000);
    REQUIRE(grid_steps(0.25, 0.1) == 2);
    REQUIRE(grid_steps(1e-3, 1e-3) == 1);
}

TEST_CASE("integrator config validation") {
    IntegratorConfig cfg;
    REQUIRE_NOTHROW(validate(cfg));
    cfg.step = 0.0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.step = 2.0;
    cfg.t_end = 1.0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.step = 0.1;
    cfg.record_every = 0;
    REQUIRE_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("rk4_step reproduces the hand-evaluated tableau on exponential decay") {
    const Vec x1 = rk4_step(scalar_decay(), {1.0}, zero_input, 0.0, 0.1);
    REQUIRE_THAT(x1[0], WithinAbs(0.9048375, 1e-15));
    REQUIRE_THAT(x1[0], WithinAbs(std::exp(-0.1), 1e-7));
}

TEST_CASE("rk4_step is exact for constant derivatives") {
    SystemModel m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.output_dim = 1;
    m.f = [](const Vec&, const Vec& u) { return Vec{u[0]}; };
    m.h = [](const Vec& x) { return Vec{x[0]}; };
    const InputSignal one = [](double) { return Vec{1.0}; };
    REQUIRE_THAT(rk4_step(m, {0.0}, one, 0.0, 0.5)[0], WithinAbs(0.5, 1e-15));

    m.f = [](const Vec&, const Vec&) { return Vec{0.0}; };
    REQUIRE(rk4_step(m, {0.7}, zero_input, 0.0, 0.25)[0] == 0.7);
}

TEST_CASE("rk4 converges at fourth order") {
    const SystemModel m = scalar_decay();
    const auto endpoint_error = [&](double step) {
        Vec x{1.0};
        const long n = grid_steps(1.0, step);
        for (long i = 0; i < n; ++i) {
            x = rk4_step(m, x, zero_input, static_cast<double>(i) * step, step);
        }
        return std::abs(x[0] - std::exp(-1.0));
    };
    const double ratio = endpoint_error(0.02) / endpoint_error(0.01);
    REQUIRE(ratio > 12.0);
    REQUIRE(ratio < 20.0);
}

TEST_CASE("simulate lands within 1e-9 of the exponential") {
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 1.0;
    const Trajectory traj = simulate(scalar_decay(), {1.0}, zero_input, cfg);
    REQUIRE(traj.size() == 1001);
    REQUIRE_THAT(traj.states.back()[0], WithinAbs(std::exp(-1.0), 1e-9));
    REQUIRE_FALSE(traj.diverged);
}

TEST_CASE("simulate records the uniform grid and decimates") {
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 1e-3;
    const Trajectory two = simulate(scalar_decay(), {1.0}, zero_input, cfg);
    REQUIRE(two.size() == 2);

    cfg.t_end = 1.0;
    cfg.record_every = 10;
    const Trajectory dec = simulate(scalar_decay(), {1.0}, zero_input, cfg);
    REQUIRE(dec.size() == 101);
    REQUIRE(dec.times.front() == 0.0);
    for (std::size_t i = 0; i < dec.size(); ++i) {
        REQUIRE_THAT(dec.times[i], WithinAbs(static_cast<double>(i) * 1e-2, 1e-12));
    }
    for (std::size_t i = 1; i + 1 < dec.size(); ++i) {
        const double lo = dec.times[i] - dec.times[i - 1];
        const double hi = dec.times[i + 1] - dec.times[i];
        REQUIRE_THAT(hi, WithinAbs(lo, 1e-9 * lo));
    }
}

TEST_CASE("trajectory outputs are recomputed through h") {
    const SystemModel m = make_pendulum({1.0, 0.5, 3.0, 9.8});
    const Trajectory traj =
        test_helpers::driven(m, {0.1, 0.0}, test_helpers::sinusoid(0.3, 2.0), 1.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        REQUIRE(traj.outputs[i] == m.h(traj.states[i]));
    }
}

TEST_CASE("undriven pendulum conserves its stored energy") {
    const SystemModel m = make_pendulum({1.0, 0.5, 3.0, 9.8});
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 10.0;
    const Trajectory traj = simulate(m, {0.1, 0.0}, zero_input, cfg);
    const double v0 = m.storage(traj.states.front());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        REQUIRE_THAT(m.storage(traj.states[i]), WithinAbs(v0, 1e-8));
    }
}

TEST_CASE("output_rate uses the analytic jacobian and matches finite differences") {
    SystemModel m = make_pendulum({1.0, 0.5, 3.0, 9.8});
    const Vec x{0.3, -0.7};
    const Vec u{0.2};
    const Vec analytic = output_rate(m, x, u);
    REQUIRE(analytic == Vec{-0.7});  // h = x1, so the rate is x2

    SystemModel no_jac = m;
    no_jac.output_jacobian = nullptr;
    const Vec fd = output_rate(no_jac, x, u);
    REQUIRE_THAT(fd[0], WithinAbs(analytic[0], 1e-5 * std::abs(analytic[0])));
}

TEST_CASE("output_rate of the first-order template is the state equation") {
    FirstOrderOsniParams p;
    p.rho = {-10.0, -15.0, 0.0};
    p.alpha = 20.0;
    const SystemModel m = make_first_order_osni(p);
    const Vec rate = output_rate(m, {0.1}, {0.05});
    REQUIRE_THAT(rate[0], WithinAbs(-0.015, 1e-12));

    // equilibrium: zero state, zero input
    REQUIRE(output_rate(m, {0.0}, {0.0}) == Vec{0.0});
}

TEST_CASE("shipped output jacobians match finite differences of h") {
    UniformSampler rng(31);
    FirstOrderOsniParams fo;
    fo.rho = {-2.0, -1.0, 1.5};
    SecondOrderOsniParams so;
    so.eta = {-3.0, -0.5, 0.0};
    so.beta = 2.0;
    const SystemModel models[] = {make_pendulum({1.2, 0.7, 2.0, 9.8}),
                                  make_first_order_osni(fo), make_second_order_osni(so)};
    for (const SystemModel& m : models) {
        for (int trial = 0; trial < 10; ++trial) {
            Vec x(static_cast<std::size_t>(m.state_dim));
            for (auto& xi : x) xi = rng.range(-1.0, 1.0);
            Vec u(static_cast<std::size_t>(m.input_dim));
            for (auto& ui : u) ui = rng.range(-1.0, 1.0);
            SystemModel fd = m;
            fd.output_jacobian = nullptr;
            const Vec a = output_rate(m, x, u);
            const Vec b = output_rate(fd, x, u);
            for (std::size_t c = 0; c < a.size(); ++c) {
                REQUIRE_THAT(b[c], WithinAbs(a[c], 1e-5 * (1.0 + std::abs(a[c]))));
            }
        }
    }
}

TEST_CASE("divergence is flagged with a time stamp and partial records") {
    SystemModel m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.output_dim = 1;
    m.f = [](const Vec& x, const Vec&) { return Vec{x[0] * x[0]}; };
    m.h = [](const Vec& x) { return Vec{x[0]}; };
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 2.0;
    // finite-time blow-up at t = 0.5
    const Trajectory traj = simulate(m, {2.0}, zero_input, cfg);
    REQUIRE(traj.diverged);
    REQUIRE(traj.divergence_time.has_value());
    REQUIRE(*traj.divergence_time < 0.6);
    REQUIRE(traj.size() >= 2);
    REQUIRE(traj.times.back() < *traj.divergence_time);
    for (const Vec& x : traj.states) REQUIRE(all_finite(x));
}

TEST_CASE("simulation is bit-reproducible") {
    const SystemModel m = make_pendulum({1.5, 0.3, 5.0, 9.8});
    const InputSignal u = test_helpers::sinusoid(0.5, 3.0, 0.2);
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 2.0;
    const Trajectory a = simulate(m, {0.2, -0.1}, u, cfg);
    const Trajectory b = simulate(m, {0.2, -0.1}, u, cfg);
    REQUIRE(a.states == b.states);
    REQUIRE(a.output_rates == b.output_rates);
    REQUIRE(a.times == b.times);
}
