#pragma once

// Scenario execution with on-disk artifacts: trajectory.csv, metrics.json,
// plot-ready series under plots/, and the perturbation sweep with sweep.json.
// The exit status is derived from the metrics tree alone, so identical
// metrics always yield the identical status.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nicons/analysis.hpp"
#include "nicons/scenario.hpp"
#include "nicons/serialize.hpp"

namespace nicons {

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// Component suffix is dropped in the common scalar-output case.
inline std::string signal_name(const std::string& stem, int index, int component, int io_dim) {
    std::string name = stem + std::to_string(index + 1);
    if (io_dim > 1) name += "_" + std::to_string(component + 1);
    return name;
}

}  // namespace detail

inline std::vector<std::string> trajectory_csv_header(const ClosedLoopSystem& loop) {
    std::vector<std::string> cols{"t"};
    for (int i = 0; i < loop.plants.count(); ++i) {
        const int dim = loop.plants.members[static_cast<std::size_t>(i)].state_dim;
        for (int j = 0; j < dim; ++j) {
            cols.push_back("x_p" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
        }
    }
    for (int k = 0; k < loop.controllers.count(); ++k) {
        const int dim = loop.controllers.members[static_cast<std::size_t>(k)].state_dim;
        for (int j = 0; j < dim; ++j) {
            cols.push_back("x_c" + std::to_string(k + 1) + "_" + std::to_string(j + 1));
        }
    }
    for (int i = 0; i < loop.plants.count(); ++i) {
        for (int c = 0; c < loop.io_dim; ++c) {
            cols.push_back(detail::signal_name("y_p", i, c, loop.io_dim));
        }
    }
    for (int k = 0; k < loop.controllers.count(); ++k) {
        for (int c = 0; c < loop.io_dim; ++c) {
            cols.push_back(detail::signal_name("y_c", k, c, loop.io_dim));
        }
    }
    for (int k = 0; k < loop.controllers.count(); ++k) {
        for (int c = 0; c < loop.io_dim; ++c) {
            cols.push_back(detail::signal_name("yhat_", k, c, loop.io_dim));
        }
    }
    return cols;
}

inline void write_trajectory_csv(const ClosedLoopSystem& loop, const NetworkTrajectory& traj,
                                 const std::filesystem::path& path) {
    std::string out;
    const std::vector<std::string> cols = trajectory_csv_header(loop);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ',';
        out += cols[c];
    }
    out += '\n';
    for (std::size_t s = 0; s < traj.size(); ++s) {
        out += format_sig17(traj.base.times[s]);
        for (const double v : traj.base.states[s]) out += ',' + format_sig17(v);
        for (const double v : traj.plant_outputs[s]) out += ',' + format_sig17(v);
        for (const double v : traj.controller_outputs[s]) out += ',' + format_sig17(v);
        for (const double v : traj.edge_differences[s]) out += ',' + format_sig17(v);
        out += '\n';
    }
    detail::write_text_file(path, out);
}

inline void write_series_csv(const std::filesystem::path& path, const std::string& value_name,
                             const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size()) {
        throw std::invalid_argument("write_series_csv: length mismatch");
    }
    std::string out = "t," + value_name + "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out += format_sig17(times[i]) + "," + format_sig17(values[i]) + "\n";
    }
    detail::write_text_file(path, out);
}

namespace detail {

inline Json dissipation_report_to_json(const DissipationReport& r) {
    Json j;
    j["kind"] = r.kind == DissipationKind::ni ? "ni" : "osni";
    j["epsilon"] = r.epsilon;
    j["tolerance"] = r.tolerance;
    j["max_violation"] = r.max_violation;
    j["violation_count"] = static_cast<std::uint64_t>(r.violation_times.size());
    Json head = Json::array();
    for (std::size_t i = 0; i < r.violation_times.size() && i < 20; ++i) {
        head.push_back(r.violation_times[i]);
    }
    j["violation_times_head"] = std::move(head);
    j["pass"] = r.pass;
    return j;
}

inline Json skipped_entry(const std::string& reason) {
    Json j;
    j["skipped"] = true;
    j["reason"] = reason;
    return j;
}

}  // namespace detail

/// The full metrics tree for one run. Checks that cannot execute (missing
/// storage functions, too few samples) are reported as skipped and do not
/// count toward the aggregate flag.
inline Json run_metrics(const Scenario& s, const ClosedLoopSystem& loop,
                        const NetworkTrajectory& traj) {
    Json m;
    {
        Json sc;
        sc["nodes"] = loop.plants.count();
        sc["edges"] = loop.controllers.count();
        sc["io_dim"] = loop.io_dim;
        sc["eps_min"] = loop.eps_min;
        sc["seed"] = s.seed;
        m["scenario"] = std::move(sc);
    }
    {
        Json integ;
        integ["step"] = s.integrator.step;
        integ["t_end"] = s.integrator.t_end;
        integ["record_every"] = s.integrator.record_every;
        integ["samples"] = static_cast<std::uint64_t>(traj.size());
        m["integrator"] = std::move(integ);
    }
    m["diverged"] = traj.base.diverged;
    if (traj.base.diverged && traj.base.divergence_time) {
        m["divergence_time"] = *traj.base.divergence_time;
    }

    Json checks;
    if (!traj.base.diverged) {
        // plants against the plain supply rate, controllers against their
        // strict one, each along its own extracted trajectory
        bool diss_pass = true;
        bool diss_ran = false;
        Json plant_reports = Json::array();
        for (int i = 0; i < loop.plants.count(); ++i) {
            const SystemModel& member = loop.plants.members[static_cast<std::size_t>(i)];
            if (!member.storage || (!member.storage_gradient && traj.size() < 3)) {
                plant_reports.push_back(detail::skipped_entry(
                    member.storage ? "too few samples for finite differences"
                                   : "no storage function"));
                continue;
            }
            const Trajectory pt = plant_trajectory(loop, traj, i);
            const double tol =
                s.analysis.dissipation_tol.value_or(default_dissipation_tolerance(pt));
            const DissipationReport rep = check_ni_dissipation(member, pt, tol);
            diss_ran = true;
            diss_pass = diss_pass && rep.pass;
            plant_reports.push_back(detail::dissipation_report_to_json(rep));
        }
        Json controller_reports = Json::array();
        for (int k = 0; k < loop.controllers.count(); ++k) {
            const SystemModel& member = loop.controllers.members[static_cast<std::size_t>(k)];
            if (!member.storage || (!member.storage_gradient && traj.size() < 3)) {
                controller_reports.push_back(detail::skipped_entry(
                    member.storage ? "too few samples for finite differences"
                                   : "no storage function"));
                continue;
            }
            const Trajectory ct = controller_trajectory(loop, traj, k);
            const double eps = member.strictness.value();
            const double tol =
                s.analysis.dissipation_tol.value_or(default_dissipation_tolerance(ct, eps));
            const DissipationReport rep = check_osni_dissipation(member, ct, eps, tol);
            diss_ran = true;
            diss_pass = diss_pass && rep.pass;
            controller_reports.push_back(detail::dissipation_report_to_json(rep));
        }
        Json diss;
        diss["plants"] = std::move(plant_reports);
        diss["controllers"] = std::move(controller_reports);
        if (diss_ran) {
            diss["pass"] = diss_pass;
            checks["dissipation"] = diss_pass;
        } else {
            diss["skipped"] = true;
        }
        m["dissipation"] = std::move(diss);

        if (loop.plants.has_storage && loop.controllers.has_storage && traj.size() >= 3) {
            const LyapunovSeries series = lyapunov_series(loop, traj);
            const LyapunovCheck lc = check_lyapunov_decrease(series, s.analysis.lyapunov_tol);
            const bool end_ok = series.w.back() <= series.w.front();
            const bool pass = lc.pass && end_ok;
            Json ly;
            ly["w0"] = series.w.front();
            ly["w_end"] = series.w.back();
            ly["worst_margin"] = lc.worst_margin;
            ly["eps_min"] = series.eps_min;
            ly["tolerance"] = s.analysis.lyapunov_tol;
            ly["decrease_pass"] = lc.pass;
            ly["end_not_above_start"] = end_ok;
            ly["pass"] = pass;
            m["lyapunov"] = std::move(ly);
            checks["lyapunov"] = pass;
        } else {
            m["lyapunov"] = detail::skipped_entry(traj.size() < 3
                                                      ? "too few samples"
                                                      : "a member has no storage function");
        }

        const ConsensusReport cr = consensus_error(traj, s.analysis.consensus_threshold);
        Json cons;
        cons["threshold"] = cr.threshold;
        cons["final_error"] = cr.final_error;
        cons["settled"] = cr.settled;
        if (cr.settle_time) cons["settle_time"] = *cr.settle_time;
        cons["pass"] = cr.settled;
        m["consensus"] = std::move(cons);
        checks["consensus"] = cr.settled;

        const std::vector<SteadyStateWindow> windows =
            detect_steady_state(traj, s.analysis.rate_tol, s.analysis.min_duration);
        const bool ss_pass = check_steady_state_consequence(windows, s.analysis.steady_state_tol);
        Json ss;
        ss["rate_tol"] = s.analysis.rate_tol;
        ss["min_duration"] = s.analysis.min_duration;
        ss["tolerance"] = s.analysis.steady_state_tol;
        ss["window_count"] = static_cast<std::uint64_t>(windows.size());
        Json warr = Json::array();
        for (const SteadyStateWindow& w : windows) {
            Json wj;
            wj["start"] = w.start;
            wj["end"] = w.end;
            Json yc = Json::array();
            for (const double v : w.mean_controller_output) yc.push_back(v);
            wj["mean_controller_output"] = std::move(yc);
            Json uc = Json::array();
            for (const double v : w.mean_controller_input) uc.push_back(v);
            wj["mean_controller_input"] = std::move(uc);
            wj["max_output_rate"] = w.max_output_rate;
            warr.push_back(std::move(wj));
        }
        ss["windows"] = std::move(warr);
        ss["pass"] = ss_pass;
        ss["note"] =
            "windows witness the settled-loop consequence |mean Y_c| <= tolerance; the "
            "constant-input premise behind it is not checkable from a single trajectory";
        m["steady_state"] = std::move(ss);
        checks["steady_state"] = ss_pass;
    }

    bool all = !traj.base.diverged;
    for (const auto& [key, value] : checks.items()) {
        (void)key;
        all = all && value.get<bool>();
    }
    checks["all"] = all;
    m["checks"] = std::move(checks);
    return m;
}

/// 0: every executed check passed. 1: some check failed. 2: divergence.
inline int status_from_metrics(const Json& metrics) {
    if (metrics.at("diverged").get<bool>()) return 2;
    return metrics.at("checks").at("all").get<bool>() ? 0 : 1;
}

struct RunResult {
    int status = 0;
    Json metrics;
    NetworkTrajectory trajectory;
};

inline RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
    BuiltScenario built = build_scenario(s);
    NetworkTrajectory traj = simulate_closed_loop(built.loop, built.initial_state, s.integrator);

    RunResult result;
    result.metrics = run_metrics(s, built.loop, traj);
    result.status = status_from_metrics(result.metrics);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "plots");
    write_trajectory_csv(built.loop, traj, out_dir / "trajectory.csv");
    detail::write_text_file(out_dir / "metrics.json", dump_json(result.metrics) + "\n");

    const ConsensusReport cr = consensus_error(traj, s.analysis.consensus_threshold);
    write_series_csv(out_dir / "plots" / "consensus.csv", "consensus_error", cr.times, cr.error);
    if (built.loop.plants.has_storage && built.loop.controllers.has_storage) {
        std::vector<double> w;
        w.reserve(traj.size());
        for (std::size_t i = 0; i < traj.size(); ++i) {
            w.push_back(total_storage(built.loop, traj.base.states[i]));
        }
        write_series_csv(out_dir / "plots" / "lyapunov.csv", "w", traj.base.times, w);
    }

    result.trajectory = std::move(traj);
    return result;
}

namespace detail {

// splitmix64 finalizer; decorrelates per-run streams drawn from one seed
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// One scale factor per physical parameter; the nonlinearity is scaled by one
// common factor so its coefficient sign pattern (hence storage shape) is
// preserved. Explicit strictness levels are clamped back into the admissible
// range when alpha or beta moves.
inline ModelSpec perturb_plant(const ModelSpec& spec, double p, UniformSampler& sampler,
                               std::vector<double>& factors) {
    factors.clear();
    const auto draw = [&] {
        const double f = sampler.range(1.0 - p, 1.0 + p);
        factors.push_back(f);
        return f;
    };
    if (const auto* pp = std::get_if<PendulumParams>(&spec)) {
        PendulumParams q = *pp;
        q.mass *= draw();
        q.length *= draw();
        q.spring *= draw();
        return q;
    }
    if (const auto* fo = std::get_if<FirstOrderOsniParams>(&spec)) {
        FirstOrderOsniParams q = *fo;
        q.alpha *= draw();
        const double f = draw();
        q.rho.linear *= f;
        q.rho.cubic *= f;
        q.rho.sine *= f;
        if (q.epsilon) q.epsilon = std::min(*q.epsilon, 1.0 / q.alpha);
        return q;
    }
    if (const auto* so = std::get_if<SecondOrderOsniParams>(&spec)) {
        SecondOrderOsniParams q = *so;
        q.alpha *= draw();
        q.beta *= draw();
        const double f = draw();
        q.eta.linear *= f;
        q.eta.cubic *= f;
        q.eta.sine *= f;
        if (q.epsilon) q.epsilon = std::min(*q.epsilon, q.beta / q.alpha);
        return q;
    }
    return spec;  // custom models have no declared parameters to scale
}

}  // namespace detail

struct SweepResult {
    int status = 0;
    Json summary;
};

/// n_runs copies of the scenario with plant parameters independently scaled
/// by seeded factors in [1-p, 1+p]; writes sweep.json under out_dir.
inline SweepResult sweep_scenario(const Scenario& base, double perturbation, int n_runs,
                                  std::uint64_t seed, const std::filesystem::path& out_dir) {
    if (!(perturbation >= 0.0 && perturbation <= 0.5)) {
        throw std::invalid_argument("sweep: perturbation must lie in [0, 0.5]");
    }
    if (n_runs < 1) throw std::invalid_argument("sweep: n_runs must be >= 1");

    Json runs = Json::array();
    int settled_runs = 0;
    bool any_diverged = false;
    for (int r = 0; r < n_runs; ++r) {
        const std::uint64_t run_seed = detail::mix_seed(seed, static_cast<std::uint64_t>(r));
        UniformSampler sampler(run_seed);
        Scenario s = base;
        Json factors = Json::array();
        for (ModelSpec& plant : s.plants) {
            std::vector<double> f;
            plant = detail::perturb_plant(plant, perturbation, sampler, f);
            Json fj = Json::array();
            for (const double v : f) fj.push_back(v);
            factors.push_back(std::move(fj));
        }
        const BuiltScenario built = build_scenario(s);
        const NetworkTrajectory traj =
            simulate_closed_loop(built.loop, built.initial_state, s.integrator);

        Json run;
        run["run"] = r + 1;
        run["seed"] = run_seed;
        run["factors"] = std::move(factors);
        run["diverged"] = traj.base.diverged;
        if (traj.base.diverged) {
            any_diverged = true;
            run["settled"] = false;
        } else {
            const ConsensusReport cr = consensus_error(traj, s.analysis.consensus_threshold);
            run["settled"] = cr.settled;
            if (cr.settle_time) run["settle_time"] = *cr.settle_time;
            run["final_error"] = cr.final_error;
            if (cr.settled) ++settled_runs;
        }
        runs.push_back(std::move(run));
    }

    Json summary;
    summary["perturbation"] = perturbation;
    summary["n_runs"] = n_runs;
    summary["seed"] = seed;
    summary["threshold"] = base.analysis.consensus_threshold;
    summary["runs"] = std::move(runs);
    Json agg;
    agg["settled_runs"] = settled_runs;
    agg["pass_rate"] = static_cast<double>(settled_runs) / static_cast<double>(n_runs);
    agg["all_settled"] = !any_diverged && settled_runs == n_runs;
    summary["aggregate"] = std::move(agg);

    SweepResult result;
    result.summary = std::move(summary);
    result.status = any_diverged ? 2 : (settled_runs == n_runs ? 0 : 1);
    std::filesystem::create_directories(out_dir);
    detail::write_text_file(out_dir / "sweep.json", dump_json(result.summary) + "\n");
    return result;
}

}  // namespace nicons
