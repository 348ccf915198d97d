#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "nicons/network.hpp"
#include "nicons/ni_models.hpp"

using namespace nicons;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<SystemModel> three_pendulums() {
    std::vector<SystemModel> plants;
    plants.push_back(make_pendulum({1.0, 0.5, 3.0, 9.8}));
    plants.push_back(make_pendulum({1.5, 0.3, 5.0, 9.8}));
    plants.push_back(make_pendulum({0.5, 0.8, 6.0, 9.8}));
    return plants;
}

std::vector<SystemModel> two_controllers() {
    FirstOrderOsniParams c1;
    c1.rho = {-10.0, -15.0, 0.0};
    c1.alpha = 20.0;
    FirstOrderOsniParams c2;
    c2.rho = {-20.0, -5.0, 0.0};
    c2.alpha = 30.0;
    std::vector<SystemModel> ctrls;
    ctrls.push_back(make_first_order_osni(c1));
    ctrls.push_back(make_first_order_osni(c2));
    return ctrls;
}

ClosedLoopSystem reference_loop() {
    const UndirectedGraph g = build_graph(3, {{0, 1}, {1, 2}});
    return close_loop(parallel_compose(three_pendulums(), NetworkRole::plants),
                      parallel_compose(two_controllers(), NetworkRole::controllers), orient(g));
}

const Vec reference_x0{0.6, 0.0, -0.4, 0.0, 0.9, 0.0, 0.0, 0.0};

}  // namespace

TEST_CASE("parallel composition stacks states and offsets") {
    const ParallelNetwork net = parallel_compose(three_pendulums(), NetworkRole::plants);
    REQUIRE(net.count() == 3);
    REQUIRE(net.io_dim == 1);
    REQUIRE(net.state_dim == 6);
    REQUIRE(net.state_offsets == std::vector<int>{0, 2, 4});
    REQUIRE(net.has_storage);

    const Vec x{0.6, 0.0, 0.4, -1.0, 0.9, 2.0};
    REQUIRE(net.member_state(x, 1) == Vec{0.4, -1.0});
    REQUIRE(net.member_input(Vec{5.0, 6.0, 7.0}, 2) == Vec{7.0});
    REQUIRE(net.h_stacked(x) == Vec{0.6, 0.4, 0.9});
}

TEST_CASE("composite storage is the sum of member storages") {
    const ParallelNetwork net = parallel_compose(three_pendulums(), NetworkRole::plants);
    const Vec x{0.6, 0.0, 0.4, 0.0, 0.9, 0.0};
    const double expected = (0.5 * 3.0 * 0.36 + 4.9 * (1.0 - std::cos(0.6))) +
                            (0.5 * 5.0 * 0.16 + 4.41 * (1.0 - std::cos(0.4))) +
                            (0.5 * 6.0 * 0.81 + 3.92 * (1.0 - std::cos(0.9)));
    REQUIRE_THAT(net.total_storage(x), WithinAbs(expected, 1e-12));
}

TEST_CASE("members without storage disable the composite storage") {
    SystemModel bare;
    bare.state_dim = 1;
    bare.input_dim = 1;
    bare.output_dim = 1;
    bare.f = [](const Vec& x, const Vec& u) { return Vec{u[0] - x[0]}; };
    bare.h = [](const Vec& x) { return x; };
    const ParallelNetwork net = parallel_compose({bare, bare}, NetworkRole::plants);
    REQUIRE_FALSE(net.has_storage);
    REQUIRE_THROWS_AS(net.total_storage(Vec{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("parallel composition rejects empty and mismatched banks") {
    REQUIRE_THROWS_AS(parallel_compose({}, NetworkRole::plants), std::invalid_argument);

    SystemModel two;
    two.state_dim = 2;
    two.input_dim = 2;
    two.output_dim = 2;
    two.f = [](const Vec& x, const Vec& u) { return Vec{u[0] - x[0], u[1] - x[1]}; };
    two.h = [](const Vec& x) { return x; };
    std::vector<SystemModel> mixed = three_pendulums();
    mixed.push_back(two);
    REQUIRE_THROWS_AS(parallel_compose(std::move(mixed), NetworkRole::plants),
                      std::invalid_argument);
}

TEST_CASE("edge and node input wiring on the three-node path") {
    const OrientedIncidence q = orient(build_graph(3, {{0, 1}, {1, 2}}));
    const Vec uc = edge_inputs(q, 1, {0.5, 0.2, -0.1});
    REQUIRE(uc.size() == 2);
    REQUIRE_THAT(uc[0], WithinAbs(0.3, 1e-15));
    REQUIRE_THAT(uc[1], WithinAbs(0.3, 1e-15));

    const Vec up = node_inputs(q, 1, {2.0, 5.0});
    REQUIRE(up == Vec{2.0, 3.0, -5.0});  // (a, b - a, -b)
}

TEST_CASE("node inputs across a single edge carry opposite signs") {
    const OrientedIncidence q = orient(build_graph(2, {{0, 1}}));
    REQUIRE(node_inputs(q, 1, {1.0}) == Vec{1.0, -1.0});
}

TEST_CASE("closing the loop records dimensions and the weakest strictness") {
    const ClosedLoopSystem loop = reference_loop();
    REQUIRE(loop.state_dim() == 8);
    REQUIRE(loop.io_dim == 1);
    REQUIRE(loop.eps_min == 1.0 / 30.0);
    REQUIRE(loop.plants.count() == 3);
    REQUIRE(loop.controllers.count() == 2);
}

TEST_CASE("close_loop rejects inconsistent assemblies") {
    const UndirectedGraph path3 = build_graph(3, {{0, 1}, {1, 2}});
    auto plants = [] { return parallel_compose(three_pendulums(), NetworkRole::plants); };
    auto ctrls = [] { return parallel_compose(two_controllers(), NetworkRole::controllers); };

    // roles must match the argument slots
    REQUIRE_THROWS_AS(close_loop(ctrls(), ctrls(), orient(path3)), std::invalid_argument);
    // plant count vs node count
    REQUIRE_THROWS_AS(
        close_loop(plants(), ctrls(), orient(build_graph(4, {{0, 1}, {1, 2}, {2, 3}}))),
        std::invalid_argument);
    // controller count vs edge count
    REQUIRE_THROWS_AS(
        close_loop(plants(), ctrls(), orient(build_graph(3, {{0, 1}, {1, 2}, {0, 2}}))),
        std::invalid_argument);
    // controllers must declare a positive strictness level
    REQUIRE_THROWS_AS(
        close_loop(plants(),
                   parallel_compose({make_pendulum({1.0, 0.5, 3.0, 9.8}),
                                     make_pendulum({1.0, 0.5, 3.0, 9.8})},
                                    NetworkRole::controllers),
                   orient(path3)),
        std::invalid_argument);
}

TEST_CASE("an edgeless graph is refused as disconnected") {
    ParallelNetwork empty_ctrls;
    empty_ctrls.role = NetworkRole::controllers;
    const auto plants = parallel_compose(three_pendulums(), NetworkRole::plants);
    REQUIRE_THROWS_WITH(close_loop(plants, empty_ctrls, orient(build_graph(3, {}))),
                        ContainsSubstring("disconnected"));
}

TEST_CASE("the origin is a fixed point of the closed loop") {
    const ClosedLoopSystem loop = reference_loop();
    const Vec zero(8, 0.0);
    for (double v : loop.field(zero)) REQUIRE(v == 0.0);
    REQUIRE(loop.plant_outputs(zero) == Vec{0.0, 0.0, 0.0});
    REQUIRE(norm(loop.edge_differences(zero)) == 0.0);
}

TEST_CASE("closed-loop controller block equals the open-loop bank under edge inputs") {
    const ClosedLoopSystem loop = reference_loop();
    UniformSampler rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Vec x(8);
        for (auto& xi : x) xi = rng.range(-1.0, 1.0);
        const Vec full = loop.field(x);
        const Vec ctrl_part = block(full, 6, 2);
        const Vec expected =
            loop.controllers.f_stacked(loop.controller_block(x), loop.edge_differences(x));
        REQUIRE(ctrl_part == expected);
    }
}

TEST_CASE("simulating from the origin stays at the origin") {
    const ClosedLoopSystem loop = reference_loop();
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 0.5;
    cfg.record_every = 50;
    const NetworkTrajectory tr = simulate_closed_loop(loop, Vec(8, 0.0), cfg);
    REQUIRE_FALSE(tr.base.diverged);
    for (const Vec& x : tr.base.states) {
        for (double v : x) REQUIRE(v == 0.0);
    }
}

TEST_CASE("network trajectory carries consistent wiring series") {
    const ClosedLoopSystem loop = reference_loop();
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 1.0;
    cfg.record_every = 100;
    const NetworkTrajectory tr = simulate_closed_loop(loop, reference_x0, cfg);
    REQUIRE(tr.size() == 11);
    REQUIRE(tr.n_plants == 3);
    REQUIRE(tr.n_controllers == 2);
    REQUIRE(tr.plant_outputs.size() == tr.size());
    REQUIRE(tr.edge_differences.size() == tr.size());
    REQUIRE(tr.controller_outputs.size() == tr.size());
    REQUIRE(tr.controller_output_rates.size() == tr.size());
    for (std::size_t s = 0; s < tr.size(); ++s) {
        REQUIRE(tr.edge_differences[s] ==
                apply_incidence(loop.incidence, loop.io_dim, tr.plant_outputs[s]));
        REQUIRE(tr.controller_outputs[s] == loop.controller_outputs(tr.base.states[s]));
    }
}

TEST_CASE("per-member trajectories reproduce the wiring-induced inputs") {
    const ClosedLoopSystem loop = reference_loop();
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 1.0;
    cfg.record_every = 100;
    const NetworkTrajectory tr = simulate_closed_loop(loop, reference_x0, cfg);

    for (int i = 0; i < 3; ++i) {
        const Trajectory pt = plant_trajectory(loop, tr, i);
        REQUIRE(pt.times == tr.base.times);
        for (std::size_t s = 0; s < tr.size(); ++s) {
            REQUIRE(pt.states[s] ==
                    loop.plants.member_state(loop.plant_block(tr.base.states[s]), i));
            const Vec up = node_inputs(loop.incidence, 1, tr.controller_outputs[s]);
            REQUIRE(pt.inputs[s] == Vec{up[static_cast<std::size_t>(i)]});
            REQUIRE(pt.outputs[s] == Vec{pt.states[s][0]});
        }
    }
    for (int k = 0; k < 2; ++k) {
        const Trajectory ct = controller_trajectory(loop, tr, k);
        for (std::size_t s = 0; s < tr.size(); ++s) {
            REQUIRE(ct.inputs[s] == Vec{tr.edge_differences[s][static_cast<std::size_t>(k)]});
            REQUIRE(ct.states[s] ==
                    loop.controllers.member_state(loop.controller_block(tr.base.states[s]), k));
        }
    }
    REQUIRE_THROWS_AS(plant_trajectory(loop, tr, 3), std::out_of_range);
    REQUIRE_THROWS_AS(controller_trajectory(loop, tr, -1), std::out_of_range);
}

TEST_CASE("mirror-symmetric assemblies evolve symmetrically") {
    // identical outer plants, identical edge controllers with odd dynamics:
    // swapping the path end to end maps xp1 <-> xp3 and xc1 <-> -xc2
    std::vector<SystemModel> plants;
    plants.push_back(make_pendulum({1.0, 0.5, 3.0, 9.8}));
    plants.push_back(make_pendulum({1.5, 0.3, 5.0, 9.8}));
    plants.push_back(make_pendulum({1.0, 0.5, 3.0, 9.8}));
    FirstOrderOsniParams c;
    c.rho = {-10.0, -15.0, 0.0};
    c.alpha = 20.0;
    const ClosedLoopSystem loop =
        close_loop(parallel_compose(std::move(plants), NetworkRole::plants),
                   parallel_compose({make_first_order_osni(c), make_first_order_osni(c)},
                                    NetworkRole::controllers),
                   orient(build_graph(3, {{0, 1}, {1, 2}})));

    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 2.0;
    cfg.record_every = 200;
    const NetworkTrajectory tr =
        simulate_closed_loop(loop, {0.7, 0.0, 0.2, 0.0, 0.7, 0.0, 0.0, 0.0}, cfg);
    for (const Vec& x : tr.base.states) {
        REQUIRE_THAT(x[0], WithinAbs(x[4], 1e-12));
        REQUIRE_THAT(x[1], WithinAbs(x[5], 1e-12));
        REQUIRE_THAT(x[6], WithinAbs(-x[7], 1e-12));
    }
}

TEST_CASE("the reference network reaches output consensus by t = 30") {
    const ClosedLoopSystem loop = reference_loop();
    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 30.0;
    cfg.record_every = 1000;
    const NetworkTrajectory tr = simulate_closed_loop(loop, reference_x0, cfg);
    REQUIRE_FALSE(tr.base.diverged);
    const Vec& yp = tr.plant_outputs.back();
    REQUIRE_THAT(yp[0], WithinAbs(yp[1], 0.05));
    REQUIRE_THAT(yp[1], WithinAbs(yp[2], 0.05));
    REQUIRE_THAT(yp[0], WithinAbs(yp[2], 0.05));
    // edge controllers settle along with the differences they are fed
    REQUIRE(norm(tr.edge_differences.back()) < 0.05);
}

TEST_CASE("the packaged model exposes the stacked plant-output jacobian") {
    const ClosedLoopSystem loop = reference_loop();
    const SystemModel m = loop.as_system_model();
    REQUIRE(m.state_dim == 8);
    REQUIRE(m.input_dim == 0);
    REQUIRE(m.output_dim == 3);
    const Mat jac = m.output_jacobian(reference_x0);
    REQUIRE(jac.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t col = 0; col < 8; ++col) {
            const double expected = (col == 2 * r) ? 1.0 : 0.0;
            REQUIRE(jac[r][col] == expected);
        }
    }
}
