#pragma once

// Declarative scenario documents: a strict JSON schema describing the graph,
// the per-node plant and per-edge controller parameter blocks, initial
// states, integrator settings, and analysis tolerances. parse/print round-
// trip exactly; build_scenario instantiates the closed loop.
//
// Node labels in documents are 1-based; everything internal is 0-based.
// Edges must be listed canonically (smaller label first, sorted, unique) so
// that controller k unambiguously attaches to edge k.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nicons/network.hpp"
#include "nicons/ni_models.hpp"
#include "nicons/serialize.hpp"
#include "nicons/topology.hpp"

namespace nicons {

struct GraphSpec {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges;  // 0-based, canonical order
    std::vector<bool> flips;                 // empty: default edge orientation

    bool operator==(const GraphSpec&) const = default;
};

/// Placeholder for a model supplied in code rather than by parameters.
struct CustomModelRef {
    std::string name;

    bool operator==(const CustomModelRef&) const = default;
};

using ModelSpec =
    std::variant<PendulumParams, FirstOrderOsniParams, SecondOrderOsniParams, CustomModelRef>;

/// Tolerances and thresholds for the post-simulation checks. Every field has
/// a working default; dissipation_tol empty means scale it from the observed
/// supply peak.
struct AnalysisConfig {
    double consensus_threshold = 0.05;
    std::optional<double> dissipation_tol;
    double lyapunov_tol = 1e-3;
    double rate_tol = 1e-4;
    double min_duration = 0.5;
    double steady_state_tol = 1e-2;

    bool operator==(const AnalysisConfig&) const = default;
};

struct Scenario {
    GraphSpec graph;
    std::vector<ModelSpec> plants;       // one per node, in node order
    std::vector<ModelSpec> controllers;  // one per edge, in edge order
    std::vector<Vec> plant_initial;
    std::vector<Vec> controller_initial;
    IntegratorConfig integrator;
    AnalysisConfig analysis;
    std::uint64_t seed = 42;

    bool operator==(const Scenario&) const = default;
};

using CustomModelFactory = std::function<SystemModel()>;

namespace detail {

inline std::map<std::string, CustomModelFactory>& custom_registry() {
    static std::map<std::string, CustomModelFactory> registry;
    return registry;
}

}  // namespace detail

/// Make `{"type": "custom", "name": <name>}` blocks resolvable. Registering
/// the same name again replaces the factory.
inline void register_custom_model(const std::string& name, CustomModelFactory factory) {
    if (name.empty()) throw std::invalid_argument("register_custom_model: empty name");
    if (!factory) throw std::invalid_argument("register_custom_model: empty factory");
    detail::custom_registry()[name] = std::move(factory);
}

inline SystemModel make_custom_model(const std::string& name) {
    const auto& registry = detail::custom_registry();
    const auto it = registry.find(name);
    if (it == registry.end()) {
        throw std::invalid_argument("custom model '" + name + "' is not registered");
    }
    return it->second();
}

inline SystemModel instantiate_model(const ModelSpec& spec) {
    if (const auto* p = std::get_if<PendulumParams>(&spec)) return make_pendulum(*p);
    if (const auto* p = std::get_if<FirstOrderOsniParams>(&spec)) return make_first_order_osni(*p);
    if (const auto* p = std::get_if<SecondOrderOsniParams>(&spec)) return make_second_order_osni(*p);
    return make_custom_model(std::get<CustomModelRef>(spec).name);
}

namespace detail {

// State dimension when it is fixed by the block type; custom models only
// reveal theirs once instantiated.
inline std::optional<int> declared_state_dim(const ModelSpec& spec) {
    if (std::holds_alternative<PendulumParams>(spec)) return 2;
    if (std::holds_alternative<FirstOrderOsniParams>(spec)) return 1;
    if (std::holds_alternative<SecondOrderOsniParams>(spec)) return 2;
    return std::nullopt;
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

inline void require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

inline void require_array(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
}

inline void check_keys(const Json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) known = true;
        }
        if (!known) fail(path + "." + it.key(), "unknown key");
    }
}

inline const Json* find(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline const Json& require(const Json& obj, const std::string& path, const char* key) {
    const Json* p = find(obj, key);
    if (!p) fail(path, std::string("missing required key '") + key + "'");
    return *p;
}

inline double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

inline std::uint64_t as_uint64(const Json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    fail(path, "expected a nonnegative integer");
}

inline bool as_bool(const Json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

inline std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline Vec as_vec(const Json& j, const std::string& path) {
    require_array(j, path);
    Vec out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline NonlinearitySpec parse_nonlinearity(const Json& j, const std::string& path) {
    require_object(j, path);
    check_keys(j, path, {"linear", "cubic", "sine"});
    NonlinearitySpec s;
    if (const Json* p = find(j, "linear")) s.linear = as_number(*p, path + ".linear");
    if (const Json* p = find(j, "cubic")) s.cubic = as_number(*p, path + ".cubic");
    if (const Json* p = find(j, "sine")) s.sine = as_number(*p, path + ".sine");
    return s;
}

inline ModelSpec parse_model(const Json& j, const std::string& path) {
    require_object(j, path);
    const std::string type = as_string(require(j, path, "type"), path + ".type");
    if (type == "pendulum") {
        check_keys(j, path, {"type", "mass", "length", "spring", "gravity"});
        PendulumParams p;
        p.mass = as_number(require(j, path, "mass"), path + ".mass");
        p.length = as_number(require(j, path, "length"), path + ".length");
        p.spring = as_number(require(j, path, "spring"), path + ".spring");
        if (const Json* g = find(j, "gravity")) p.gravity = as_number(*g, path + ".gravity");
        try {
            make_pendulum(p);
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        return p;
    }
    if (type == "first_order_osni") {
        check_keys(j, path, {"type", "rho", "alpha", "epsilon"});
        FirstOrderOsniParams p;
        if (const Json* r = find(j, "rho")) p.rho = parse_nonlinearity(*r, path + ".rho");
        p.alpha = as_number(require(j, path, "alpha"), path + ".alpha");
        if (const Json* e = find(j, "epsilon")) p.epsilon = as_number(*e, path + ".epsilon");
        try {
            make_first_order_osni(p);
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        return p;
    }
    if (type == "second_order_osni") {
        check_keys(j, path, {"type", "eta", "alpha", "beta", "epsilon"});
        SecondOrderOsniParams p;
        if (const Json* r = find(j, "eta")) p.eta = parse_nonlinearity(*r, path + ".eta");
        p.alpha = as_number(require(j, path, "alpha"), path + ".alpha");
        p.beta = as_number(require(j, path, "beta"), path + ".beta");
        if (const Json* e = find(j, "epsilon")) p.epsilon = as_number(*e, path + ".epsilon");
        try {
            make_second_order_osni(p);
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        return p;
    }
    if (type == "custom") {
        check_keys(j, path, {"type", "name"});
        CustomModelRef r;
        r.name = as_string(require(j, path, "name"), path + ".name");
        if (r.name.empty()) fail(path + ".name", "empty model name");
        return r;
    }
    fail(path + ".type", "unknown model type '" + type +
                             "' (expected pendulum, first_order_osni, second_order_osni, custom)");
}

inline GraphSpec parse_graph(const Json& j, const std::string& path) {
    require_object(j, path);
    check_keys(j, path, {"nodes", "edges", "flips"});
    GraphSpec g;
    g.nodes = as_int(require(j, path, "nodes"), path + ".nodes");
    if (g.nodes < 2) fail(path + ".nodes", "a consensus network needs at least 2 nodes");
    const Json& edges = require(j, path, "edges");
    require_array(edges, path + ".edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string epath = path + ".edges[" + std::to_string(k) + "]";
        require_array(edges[k], epath);
        if (edges[k].size() != 2) fail(epath, "expected a pair of node labels");
        const int a = as_int(edges[k][0], epath + "[0]");
        const int b = as_int(edges[k][1], epath + "[1]");
        if (a < 1 || a > g.nodes || b < 1 || b > g.nodes) {
            fail(epath, "node labels must lie in 1.." + std::to_string(g.nodes));
        }
        if (a >= b) {
            fail(epath,
                 "list each edge as [smaller, larger] label; orientation is controlled by 'flips'");
        }
        const std::pair<int, int> e{a - 1, b - 1};
        if (!g.edges.empty() && !(g.edges.back() < e)) {
            fail(epath, "edges must be sorted and unique so controller k attaches to edge k");
        }
        g.edges.push_back(e);
    }
    if (const Json* flips = find(j, "flips")) {
        require_array(*flips, path + ".flips");
        if (flips->size() != g.edges.size()) {
            fail(path + ".flips", "expected one flag per edge (" +
                                      std::to_string(g.edges.size()) + "), got " +
                                      std::to_string(flips->size()));
        }
        for (std::size_t k = 0; k < flips->size(); ++k) {
            g.flips.push_back(as_bool((*flips)[k], path + ".flips[" + std::to_string(k) + "]"));
        }
    }
    return g;
}

inline std::vector<ModelSpec> parse_model_list(const Json& j, const std::string& path) {
    require_array(j, path);
    std::vector<ModelSpec> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_model(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline AnalysisConfig parse_analysis(const Json& j, const std::string& path) {
    require_object(j, path);
    check_keys(j, path,
               {"consensus_threshold", "dissipation_tol", "lyapunov_tol", "rate_tol",
                "min_duration", "steady_state_tol"});
    AnalysisConfig a;
    const auto positive = [&](const char* key, double fallback) {
        const Json* p = find(j, key);
        if (!p) return fallback;
        const double v = as_number(*p, path + "." + key);
        if (!(v > 0.0)) fail(path + "." + key, "must be positive");
        return v;
    };
    a.consensus_threshold = positive("consensus_threshold", a.consensus_threshold);
    if (const Json* p = find(j, "dissipation_tol")) {
        const double v = as_number(*p, path + ".dissipation_tol");
        if (!(v > 0.0)) fail(path + ".dissipation_tol", "must be positive");
        a.dissipation_tol = v;
    }
    a.rate_tol = positive("rate_tol", a.rate_tol);
    a.steady_state_tol = positive("steady_state_tol", a.steady_state_tol);
    if (const Json* p = find(j, "lyapunov_tol")) {
        a.lyapunov_tol = as_number(*p, path + ".lyapunov_tol");
        if (a.lyapunov_tol < 0.0) fail(path + ".lyapunov_tol", "must be nonnegative");
    }
    if (const Json* p = find(j, "min_duration")) {
        a.min_duration = as_number(*p, path + ".min_duration");
        if (a.min_duration < 0.0) fail(path + ".min_duration", "must be nonnegative");
    }
    return a;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: malformed document: ") + e.what());
    }
    detail::require_object(doc, "scenario");
    detail::check_keys(doc, "scenario",
                       {"graph", "plants", "controllers", "initial_state", "integrator",
                        "analysis", "seed"});
    Scenario s;
    s.graph = detail::parse_graph(detail::require(doc, "scenario", "graph"), "graph");
    s.plants = detail::parse_model_list(detail::require(doc, "scenario", "plants"), "plants");
    if (static_cast<int>(s.plants.size()) != s.graph.nodes) {
        detail::fail("plants", "expected " + std::to_string(s.graph.nodes) +
                                   " plant blocks (one per graph node), got " +
                                   std::to_string(s.plants.size()));
    }
    s.controllers =
        detail::parse_model_list(detail::require(doc, "scenario", "controllers"), "controllers");
    if (s.controllers.size() != s.graph.edges.size()) {
        detail::fail("controllers", "expected " + std::to_string(s.graph.edges.size()) +
                                        " controller blocks (one per graph edge), got " +
                                        std::to_string(s.controllers.size()));
    }

    const Json& init = detail::require(doc, "scenario", "initial_state");
    detail::require_object(init, "initial_state");
    detail::check_keys(init, "initial_state", {"plants", "controllers"});
    const Json& pinit = detail::require(init, "initial_state", "plants");
    detail::require_array(pinit, "initial_state.plants");
    if (pinit.size() != s.plants.size()) {
        detail::fail("initial_state.plants", "expected " + std::to_string(s.plants.size()) +
                                                 " state vectors, got " +
                                                 std::to_string(pinit.size()));
    }
    for (std::size_t i = 0; i < pinit.size(); ++i) {
        const std::string path = "initial_state.plants[" + std::to_string(i) + "]";
        Vec x = detail::as_vec(pinit[i], path);
        if (const auto dim = detail::declared_state_dim(s.plants[i])) {
            if (static_cast<int>(x.size()) != *dim) {
                detail::fail(path, "expected " + std::to_string(*dim) + " state values, got " +
                                       std::to_string(x.size()));
            }
        }
        s.plant_initial.push_back(std::move(x));
    }
    if (const Json* cinit = detail::find(init, "controllers")) {
        detail::require_array(*cinit, "initial_state.controllers");
        if (cinit->size() != s.controllers.size()) {
            detail::fail("initial_state.controllers",
                         "expected " + std::to_string(s.controllers.size()) +
                             " state vectors, got " + std::to_string(cinit->size()));
        }
        for (std::size_t k = 0; k < cinit->size(); ++k) {
            const std::string path = "initial_state.controllers[" + std::to_string(k) + "]";
            Vec x = detail::as_vec((*cinit)[k], path);
            if (const auto dim = detail::declared_state_dim(s.controllers[k])) {
                if (static_cast<int>(x.size()) != *dim) {
                    detail::fail(path, "expected " + std::to_string(*dim) +
                                           " state values, got " + std::to_string(x.size()));
                }
            }
            s.controller_initial.push_back(std::move(x));
        }
    } else {
        for (std::size_t k = 0; k < s.controllers.size(); ++k) {
            const auto dim = detail::declared_state_dim(s.controllers[k]);
            if (!dim) {
                detail::fail("initial_state",
                             "key 'controllers' is required when a controller block is custom");
            }
            s.controller_initial.emplace_back(static_cast<std::size_t>(*dim), 0.0);
        }
    }

    const Json& integ = detail::require(doc, "scenario", "integrator");
    detail::require_object(integ, "integrator");
    detail::check_keys(integ, "integrator", {"step", "t_end", "record_every"});
    s.integrator.step = detail::as_number(detail::require(integ, "integrator", "step"),
                                          "integrator.step");
    s.integrator.t_end = detail::as_number(detail::require(integ, "integrator", "t_end"),
                                           "integrator.t_end");
    if (const Json* p = detail::find(integ, "record_every")) {
        s.integrator.record_every = detail::as_int(*p, "integrator.record_every");
    }
    try {
        validate(s.integrator);
    } catch (const std::invalid_argument& e) {
        detail::fail("integrator", e.what());
    }

    if (const Json* p = detail::find(doc, "analysis")) {
        s.analysis = detail::parse_analysis(*p, "analysis");
    }
    if (const Json* p = detail::find(doc, "seed")) s.seed = detail::as_uint64(*p, "seed");
    return s;
}

inline Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace detail {

inline Json nonlinearity_to_json(const NonlinearitySpec& s) {
    Json j;
    j["linear"] = s.linear;
    j["cubic"] = s.cubic;
    j["sine"] = s.sine;
    return j;
}

inline Json model_to_json(const ModelSpec& spec) {
    Json j;
    if (const auto* p = std::get_if<PendulumParams>(&spec)) {
        j["type"] = "pendulum";
        j["mass"] = p->mass;
        j["length"] = p->length;
        j["spring"] = p->spring;
        j["gravity"] = p->gravity;
    } else if (const auto* p = std::get_if<FirstOrderOsniParams>(&spec)) {
        j["type"] = "first_order_osni";
        j["rho"] = nonlinearity_to_json(p->rho);
        j["alpha"] = p->alpha;
        if (p->epsilon) j["epsilon"] = *p->epsilon;
    } else if (const auto* p = std::get_if<SecondOrderOsniParams>(&spec)) {
        j["type"] = "second_order_osni";
        j["eta"] = nonlinearity_to_json(p->eta);
        j["alpha"] = p->alpha;
        j["beta"] = p->beta;
        if (p->epsilon) j["epsilon"] = *p->epsilon;
    } else {
        j["type"] = "custom";
        j["name"] = std::get<CustomModelRef>(spec).name;
    }
    return j;
}

inline Json vectors_to_json(const std::vector<Vec>& vs) {
    Json j = Json::array();
    for (const Vec& v : vs) {
        Json row = Json::array();
        for (const double x : v) row.push_back(x);
        j.push_back(std::move(row));
    }
    return j;
}

}  // namespace detail

inline Json scenario_to_json(const Scenario& s) {
    Json doc;
    Json graph;
    graph["nodes"] = s.graph.nodes;
    Json edges = Json::array();
    for (const auto& [a, b] : s.graph.edges) edges.push_back(Json::array({a + 1, b + 1}));
    graph["edges"] = std::move(edges);
    if (!s.graph.flips.empty()) {
        Json flips = Json::array();
        for (const bool f : s.graph.flips) flips.push_back(f);
        graph["flips"] = std::move(flips);
    }
    doc["graph"] = std::move(graph);

    Json plants = Json::array();
    for (const ModelSpec& m : s.plants) plants.push_back(detail::model_to_json(m));
    doc["plants"] = std::move(plants);
    Json controllers = Json::array();
    for (const ModelSpec& m : s.controllers) controllers.push_back(detail::model_to_json(m));
    doc["controllers"] = std::move(controllers);

    Json init;
    init["plants"] = detail::vectors_to_json(s.plant_initial);
    init["controllers"] = detail::vectors_to_json(s.controller_initial);
    doc["initial_state"] = std::move(init);

    Json integ;
    integ["step"] = s.integrator.step;
    integ["t_end"] = s.integrator.t_end;
    integ["record_every"] = s.integrator.record_every;
    doc["integrator"] = std::move(integ);

    Json analysis;
    analysis["consensus_threshold"] = s.analysis.consensus_threshold;
    if (s.analysis.dissipation_tol) analysis["dissipation_tol"] = *s.analysis.dissipation_tol;
    analysis["lyapunov_tol"] = s.analysis.lyapunov_tol;
    analysis["rate_tol"] = s.analysis.rate_tol;
    analysis["min_duration"] = s.analysis.min_duration;
    analysis["steady_state_tol"] = s.analysis.steady_state_tol;
    doc["analysis"] = std::move(analysis);

    doc["seed"] = s.seed;
    return doc;
}

inline std::string print_scenario(const Scenario& s) { return dump_json(scenario_to_json(s)) + "\n"; }

/// Three torsional-spring pendulums on a path graph, coupled by two cubic
/// first-order controllers at their maximal strictness levels.
inline Scenario builtin_pendulum_preset() {
    Scenario s;
    s.graph.nodes = 3;
    s.graph.edges = {{0, 1}, {1, 2}};
    s.plants = {PendulumParams{1.0, 0.5, 3.0, 9.8}, PendulumParams{1.5, 0.3, 5.0, 9.8},
                PendulumParams{0.5, 0.8, 6.0, 9.8}};
    s.controllers = {FirstOrderOsniParams{NonlinearitySpec{-10.0, -15.0, 0.0}, 20.0, 1.0 / 20.0},
                     FirstOrderOsniParams{NonlinearitySpec{-20.0, -5.0, 0.0}, 30.0, 1.0 / 30.0}};
    s.plant_initial = {{0.6, 0.0}, {-0.4, 0.0}, {0.9, 0.0}};
    s.controller_initial = {{0.0}, {0.0}};
    s.integrator.step = 1e-3;
    s.integrator.t_end = 30.0;
    s.integrator.record_every = 1;
    // On this horizon the controller outputs creep toward zero but their
    // rates plateau near 0.12; the stock rate gate would find no window
    // before t = 30, so the preset widens it to capture the settled tail.
    s.analysis.rate_tol = 0.15;
    return s;
}

/// A scenario instantiated into a simulable closed loop.
struct BuiltScenario {
    ClosedLoopSystem loop;
    Vec initial_state;  // stacked plant states then controller states
};

inline BuiltScenario build_scenario(const Scenario& s) {
    std::vector<SystemModel> plant_models;
    for (std::size_t i = 0; i < s.plants.size(); ++i) {
        try {
            plant_models.push_back(instantiate_model(s.plants[i]));
        } catch (const std::invalid_argument& e) {
            detail::fail("plants[" + std::to_string(i) + "]", e.what());
        }
    }
    std::vector<SystemModel> controller_models;
    for (std::size_t k = 0; k < s.controllers.size(); ++k) {
        try {
            controller_models.push_back(instantiate_model(s.controllers[k]));
        } catch (const std::invalid_argument& e) {
            detail::fail("controllers[" + std::to_string(k) + "]", e.what());
        }
    }
    if (s.plant_initial.size() != plant_models.size()) {
        detail::fail("initial_state.plants", "expected " + std::to_string(plant_models.size()) +
                                                 " state vectors, got " +
                                                 std::to_string(s.plant_initial.size()));
    }
    if (s.controller_initial.size() != controller_models.size()) {
        detail::fail("initial_state.controllers",
                     "expected " + std::to_string(controller_models.size()) +
                         " state vectors, got " + std::to_string(s.controller_initial.size()));
    }
    for (std::size_t i = 0; i < plant_models.size(); ++i) {
        if (static_cast<int>(s.plant_initial[i].size()) != plant_models[i].state_dim) {
            detail::fail("initial_state.plants[" + std::to_string(i) + "]",
                         "expected " + std::to_string(plant_models[i].state_dim) +
                             " state values, got " + std::to_string(s.plant_initial[i].size()));
        }
    }
    for (std::size_t k = 0; k < controller_models.size(); ++k) {
        if (static_cast<int>(s.controller_initial[k].size()) != controller_models[k].state_dim) {
            detail::fail("initial_state.controllers[" + std::to_string(k) + "]",
                         "expected " + std::to_string(controller_models[k].state_dim) +
                             " state values, got " +
                             std::to_string(s.controller_initial[k].size()));
        }
    }

    const UndirectedGraph graph = build_graph(s.graph.nodes, s.graph.edges);
    if (graph.edges != s.graph.edges) {
        detail::fail("graph.edges",
                     "must be listed canonically (smaller node first, sorted, unique) so "
                     "controller k attaches to edge k");
    }
    if (!is_connected(graph)) {
        detail::fail("graph", "the communication graph is disconnected; consensus wiring "
                              "requires a connected graph");
    }
    ClosedLoopSystem loop =
        close_loop(parallel_compose(std::move(plant_models), NetworkRole::plants),
                   parallel_compose(std::move(controller_models), NetworkRole::controllers),
                   orient(graph, s.graph.flips));

    BuiltScenario built{std::move(loop), Vec{}};
    for (const Vec& x : s.plant_initial) append(built.initial_state, x);
    for (const Vec& x : s.controller_initial) append(built.initial_state, x);
    return built;
}

}  // namespace nicons
