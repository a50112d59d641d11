#include "aeroloop/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

bool is_preset(const std::string& name) {
    const auto names = aeroloop::ScenarioSpec::preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop multirotor adaptation experiments"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Run one scenario and write its outputs");

    std::string scenario = "nominal";
    std::string policy = "rule";
    std::string risk;
    std::string out_dir = "out";
    bool no_tuning = false;
    bool plot = false;
    double duration = -1.0, dt = -1.0, decision_period = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    run->add_option("--scenario", scenario, "Preset name or path to a scenario JSON file")
        ->capture_default_str();
    run->add_option("--policy", policy, "rule | replay:<file> | remote | null")
        ->capture_default_str();
    run->add_flag("--no-tuning-apis", no_tuning, "Remove the tune_controller_* APIs from the prompt");
    run->add_option("--risk", risk, "Emergency emphasis: normal | strong");
    run->add_option("--duration", duration, "Override run duration [s]");
    run->add_option("--dt", dt, "Override simulation step [s]");
    run->add_option("--decision-period", decision_period, "Override decision period [s]");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--seed", seed, "Random seed recorded in the spec")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_flag("--plot", plot, "Also write per-axis SVG plots");

    CLI11_PARSE(app, argc, argv);

    try {
        aeroloop::ScenarioSpec spec = is_preset(scenario)
                                          ? aeroloop::ScenarioSpec::preset(scenario)
                                          : aeroloop::ScenarioSpec::load(scenario);

        if (policy == "rule") spec.policy.kind = aeroloop::PolicyKind::Rule;
        else if (policy == "remote") spec.policy.kind = aeroloop::PolicyKind::Remote;
        else if (policy == "null" || policy == "none") spec.policy.kind = aeroloop::PolicyKind::Null;
        else if (policy.rfind("replay:", 0) == 0) {
            spec.policy.kind = aeroloop::PolicyKind::Replay;
            spec.policy.replay_path = policy.substr(7);
        } else {
            std::cerr << "unknown policy: " << policy << "\n";
            return 1;
        }

        if (no_tuning) spec.prompt.include_tuning_apis = false;
        if (!risk.empty()) {
            if (risk == "strong") spec.prompt.risk_emphasis = aeroloop::PromptConfig::RiskEmphasis::Strong;
            else if (risk == "normal") spec.prompt.risk_emphasis = aeroloop::PromptConfig::RiskEmphasis::Normal;
            else {
                std::cerr << "unknown risk emphasis: " << risk << "\n";
                return 1;
            }
        }
        if (duration > 0.0) spec.duration = duration;
        if (dt > 0.0) {
            spec.dt = dt;
            spec.control_rate = 1.0 / dt;
        }
        if (decision_period > 0.0) spec.decision_period = decision_period;
        if (seed_set) spec.seed = seed;
        spec.validate();

        const aeroloop::RunResult result = aeroloop::run_experiment(spec);
        aeroloop::emit_outputs(result, spec, out_dir, plot);

        const auto& m = result.metrics;
        std::printf("scenario %s: %d decisions, final phase %s%s\n", spec.name.c_str(),
                    m.decisions_issued, std::string(aeroloop::to_string(result.final_phase)).c_str(),
                    result.mission_completed ? " (mission completed)" : "");
        std::printf("steady RMS error [m]: x %.3f  y %.3f  z %.3f\n", m.rms_error_x,
                    m.rms_error_y, m.rms_error_z);
        if (m.time_to_ez_030) std::printf("|e_z| < 0.30 m from t = %.2f s\n", *m.time_to_ez_030);
        if (m.time_to_ez_010) std::printf("|e_z| < 0.10 m from t = %.2f s\n", *m.time_to_ez_010);
        if (m.emergency_landing_time)
            std::printf("emergency landing at t = %.2f s\n", *m.emergency_landing_time);
        std::printf("outputs written to %s\n", out_dir.c_str());
        return 0;
    } catch (const aeroloop::SimulationError& err) {
        std::cerr << "simulation diverged: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
