// Command-line front end: run scenario files, run the built-in preset, do
// perturbation sweeps, or just validate a document. Exit codes: 0 all checks
// passed, 1 a check failed, 2 simulation diverged, 3 bad input or I/O error.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nicons/nicons.hpp"

namespace {

std::filesystem::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("NICONS_OUT"); env && *env) return env;
    return "out";
}

void print_run_summary(const nicons::Json& metrics) {
    const auto& checks = metrics.at("checks");
    if (metrics.at("diverged").get<bool>()) {
        std::cout << "diverged";
        if (metrics.contains("divergence_time")) {
            std::cout << " at t = " << metrics.at("divergence_time").get<double>();
        }
        std::cout << "\n";
        return;
    }
    for (const auto& [name, pass] : checks.items()) {
        if (name == "all") continue;
        std::cout << name << ": " << (pass.get<bool>() ? "pass" : "FAIL") << "\n";
    }
    std::cout << "overall: " << (checks.at("all").get<bool>() ? "pass" : "FAIL") << "\n";
}

int run_and_report(const nicons::Scenario& scenario, const std::filesystem::path& out_dir) {
    const nicons::RunResult result = nicons::run_scenario(scenario, out_dir);
    print_run_summary(result.metrics);
    std::cout << "artifacts in " << out_dir.string() << "\n";
    return result.status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Networked consensus simulation and certification"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_flag;
    std::string preset_name;
    double perturbation = 0.2;
    int n_runs = 20;
    std::uint64_t sweep_seed = 7;

    CLI::App* run_cmd = app.add_subcommand("run", "Simulate a scenario file and write artifacts");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    run_cmd->add_option("--out", out_flag, "Output directory (default: $NICONS_OUT, else ./out)");

    CLI::App* preset_cmd = app.add_subcommand("preset", "Run a built-in scenario");
    preset_cmd->add_option("name", preset_name, "Preset name (pendulum3)")->required();
    preset_cmd->add_option("--out", out_flag, "Output directory (default: $NICONS_OUT, else ./out)");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Re-run a scenario with randomly scaled plant parameters");
    sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep_cmd->add_option("--perturb", perturbation, "Scale range half-width in [0, 0.5]")
        ->capture_default_str();
    sweep_cmd->add_option("--runs", n_runs, "Number of runs")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep_seed, "Sweep seed")->capture_default_str();
    sweep_cmd->add_option("--out", out_flag, "Output directory (default: $NICONS_OUT, else ./out)");

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Parse and build a scenario without simulating");
    validate_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints help or the usage error
        return rc == 0 ? 0 : 3;
    }

    try {
        if (run_cmd->parsed()) {
            return run_and_report(nicons::parse_scenario_file(scenario_path),
                                  resolve_out_dir(out_flag));
        }
        if (preset_cmd->parsed()) {
            if (preset_name != "pendulum3") {
                std::cerr << "error: unknown preset '" << preset_name
                          << "' (available: pendulum3)\n";
                return 3;
            }
            const nicons::Scenario scenario = nicons::builtin_pendulum_preset();
            const std::filesystem::path out_dir = resolve_out_dir(out_flag);
            std::filesystem::create_directories(out_dir);
            nicons::detail::write_text_file(out_dir / "scenario.json",
                                            nicons::print_scenario(scenario));
            return run_and_report(scenario, out_dir);
        }
        if (sweep_cmd->parsed()) {
            const nicons::Scenario scenario = nicons::parse_scenario_file(scenario_path);
            const std::filesystem::path out_dir = resolve_out_dir(out_flag);
            const nicons::SweepResult result =
                nicons::sweep_scenario(scenario, perturbation, n_runs, sweep_seed, out_dir);
            const auto& agg = result.summary.at("aggregate");
            std::cout << "settled " << agg.at("settled_runs").get<int>() << "/" << n_runs
                      << " runs at threshold "
                      << result.summary.at("threshold").get<double>() << "\n";
            std::cout << "artifacts in " << out_dir.string() << "\n";
            return result.status;
        }
        const nicons::Scenario scenario = nicons::parse_scenario_file(scenario_path);
        const nicons::BuiltScenario built = nicons::build_scenario(scenario);
        std::cout << "ok: " << built.loop.plants.count() << " plants, "
                  << built.loop.controllers.count() << " controllers, state dimension "
                  << built.loop.state_dim() << ", eps_min " << built.loop.eps_min << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
