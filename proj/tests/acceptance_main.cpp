// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include "aeroloop/harness.hpp"

#include "transcript_fixtures.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace aeroloop;

namespace {

struct Criterion {
    int id;
    const char* title;
    std::function<bool(std::string&)> check;
};

double spectral_radius(const Eigen::MatrixXd& m) {
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

double wall_seconds(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool held_below(const RunResult& result, double threshold, double window_start) {
    bool seen = false;
    for (const TelemetryRow& row : result.telemetry) {
        if (row.t < window_start) continue;
        seen = true;
        if (std::abs(row.errors.z()) >= threshold) return false;
    }
    return seen;
}

// --- criteria -------------------------------------------------------------

bool dare_scalar_oracle(std::string& detail) {
    const double expected = (1.0 + std::sqrt(5.0)) / 2.0; // root of p^2 - p - 1
    const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    GainSolution sol;
    // warm up, then time the solve itself
    sol = solve_dare(one, one, one, one);
    const double seconds = wall_seconds([&] { sol = solve_dare(one, one, one, one); });
    const double err = std::abs(sol.P(0, 0) - expected);
    std::ostringstream os;
    os << "p = " << sol.P(0, 0) << ", |p - phi| = " << err << ", " << seconds * 1e6 << " us";
    detail = os.str();
    return err < 1e-9 && seconds < 1e-3;
}

bool dare_random_systems(std::string& detail) {
    std::mt19937_64 rng(20240817);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.3, 1.3);

    double worst_residual = 0.0, worst_rho = 0.0;
    bool ok = true;
    const double seconds = wall_seconds([&] {
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::MatrixXd A(8, 8), B(8, 3);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) A(i, j) = gauss(rng);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 3; ++j) B(i, j) = gauss(rng);
            A *= radius(rng) / spectral_radius(A);

            const GainSolution sol = solve_dare(A, B, Eigen::MatrixXd::Identity(8, 8),
                                                Eigen::MatrixXd::Identity(3, 3));
            const double rho = spectral_radius(A + B * sol.K);
            worst_residual = std::max(worst_residual, sol.residual);
            worst_rho = std::max(worst_rho, rho);
            if (!(sol.residual < 1e-8) || !(rho < 1.0)) ok = false;
        }
    });
    std::ostringstream os;
    os << "100 systems, worst residual " << worst_residual << ", worst rho " << worst_rho << ", "
       << seconds << " s";
    detail = os.str();
    return ok && seconds < 5.0;
}

bool equilibrium_exact(std::string& detail) {
    const LinearModel model = build_hover_model(1.0, 9.81, 0.15, 0.01);
    const GainSolution gain = solve_dare(model, CostWeights::defaults());
    const HoverCommand hover{9.81};

    VehicleState state;
    state.position_w = {0.4, -0.2, 1.3};
    state.velocity_w = Vec3::Zero();
    ReferencePoint ref;
    ref.position_ref = state.position_w;

    const ControlCommand cmd = compute_control(state, ref, gain, hover, {}, ControlLimits{});
    detail = "roll " + std::to_string(cmd.roll_cmd) + ", pitch " + std::to_string(cmd.pitch_cmd) +
             ", thrust_delta " + std::to_string(cmd.thrust_delta);
    return cmd.roll_cmd == 0.0 && cmd.pitch_cmd == 0.0 && cmd.thrust_delta == 0.0;
}

bool mass_mismatch_adaptation(std::string& detail) {
    const ScenarioSpec spec = ScenarioSpec::preset("mass_mismatch");
    RunResult result;
    const double seconds = wall_seconds([&] { result = run_experiment(spec); });

    const bool reached = result.metrics.time_to_ez_030.has_value();
    const bool held = held_below(result, 0.30, spec.duration - 20.0);
    std::ostringstream os;
    os << "time to |e_z| < 0.30: "
       << (reached ? std::to_string(*result.metrics.time_to_ez_030) + " s" : "never")
       << ", held over the last 20 s: " << (held ? "yes" : "no") << ", wall " << seconds << " s";
    detail = os.str();
    return reached && held && seconds < 10.0;
}

bool tuned_adaptation(std::string& detail) {
    const ScenarioSpec spec = ScenarioSpec::preset("mass_mismatch_with_tuning");
    const RunResult result = run_experiment(spec);

    const bool held = held_below(result, 0.10, spec.duration - 20.0);
    int tuning_actions = 0;
    for (const auto& [name, count] : result.metrics.action_counts)
        if (name.rfind("tune_controller_", 0) == 0) tuning_actions += count;
    std::ostringstream os;
    os << "|e_z| < 0.10 held: " << (held ? "yes" : "no") << ", tuning actions " << tuning_actions;
    detail = os.str();
    return held && tuning_actions >= 1;
}

bool arm_mass_ratio(std::string& detail) {
    const ScenarioSpec spec = ScenarioSpec::preset("arm_mass");
    const RunResult ruled = run_experiment(spec);

    ScenarioSpec baseline = spec;
    baseline.policy.kind = PolicyKind::Null;
    const RunResult idle = run_experiment(baseline);

    const double rx = idle.metrics.rms_error_x / ruled.metrics.rms_error_x;
    const double ry = idle.metrics.rms_error_y / ruled.metrics.rms_error_y;
    const double rz = idle.metrics.rms_error_z / ruled.metrics.rms_error_z;
    std::ostringstream os;
    os << "RMS ratios do-nothing/rule: x " << rx << ", y " << ry << ", z " << rz;
    detail = os.str();
    return rx >= 2.0 && ry >= 2.0 && rz >= 2.0;
}

bool oscillation_measurement(std::string& detail) {
    std::vector<Vec3> buffer(256, Vec3::Zero());
    for (int i = 0; i < 256; ++i)
        buffer[i].y() = 0.19 * std::sin(2.0 * M_PI * 0.67 * (i / 20.0));
    const auto report = detect_oscillation(buffer, 0.05, {0.25, 2.0}, 0.1);
    if (!report) {
        detail = "no report";
        return false;
    }
    std::ostringstream os;
    os << "axis " << axis_label(report->axis) << ", f = " << report->frequency
       << " Hz, a = " << report->amplitude << " m";
    detail = os.str();
    return report->axis == Axis::Y && std::abs(report->frequency - 0.67) <= 0.1 &&
           std::abs(report->amplitude - 0.19) <= 0.1 * 0.19;
}

bool emergency_abort(std::string& detail) {
    const ScenarioSpec spec = ScenarioSpec::preset("oscillation_abort");
    const RunResult result = run_experiment(spec);

    double first_dangerous = -1.0;
    for (const ConversationEntry& entry : result.conversation) {
        if (entry.prompt.find("DANGEROUS") != std::string::npos) {
            first_dangerous = entry.t;
            break;
        }
    }
    double abort_issued = -1.0;
    for (const ConversationEntry& entry : result.conversation) {
        if (std::find(entry.actions.begin(), entry.actions.end(), ActionName::EmergencyLanding) !=
            entry.actions.end()) {
            abort_issued = entry.t;
            break;
        }
    }
    const double final_alt = result.telemetry.back().position.z();
    std::ostringstream os;
    os << "first warning t = " << first_dangerous << " s, abort issued t = " << abort_issued
       << " s, final phase " << std::string(to_string(result.final_phase)) << ", altitude "
       << final_alt << " m";
    detail = os.str();
    return first_dangerous >= 0.0 && abort_issued >= 0.0 &&
           abort_issued - first_dangerous <= 2.0 * spec.decision_period + 1e-9 &&
           result.final_phase == PhaseKind::Done && final_alt <= 0.05 + 1e-9;
}

bool transcript_fidelity(std::string& detail) {
    const Thresholds thresholds; // 0.10 m per axis
    const auto whitelist = action_whitelist(true);
    int checked = 0;

    for (const auto& cycle : fixtures::transcript_cycles()) {
        VehicleState state;
        state.position_w = {cycle.error_x, cycle.error_y, cycle.error_z};
        const ReferencePoint origin;
        const std::string extra =
            cycle.oscillation ? render_oscillation_message({Axis::Y, 0.67, 0.19}) : "";
        const FailureReport report = check_failures(state, origin, thresholds, extra);
        const std::string rendered = format_query(report);
        if (rendered != cycle.prompt) {
            detail = "prompt mismatch at t = " + std::to_string(cycle.t) + ": got " + rendered;
            return false;
        }
        const Decision decision = parse_decision(cycle.response, whitelist);
        if (decision.actions != cycle.actions) {
            detail = "action mismatch at t = " + std::to_string(cycle.t);
            return false;
        }
        ++checked;
    }

    // the clean-state query both sessions open with
    const FailureReport clean = check_failures(VehicleState{}, ReferencePoint{}, thresholds);
    if (format_query(clean) != "([0], '')") {
        detail = "clean query mismatch";
        return false;
    }
    const Decision no_issue = parse_decision(fixtures::kNoIssueResponse, whitelist);
    const Decision reasoned = parse_decision(fixtures::kNoIssueReasonResponse, whitelist);
    if (no_issue.actions != std::vector<ActionName>{ActionName::DoNothing} ||
        reasoned.actions != std::vector<ActionName>{ActionName::DoNothing}) {
        detail = "do_nothing replies did not parse";
        return false;
    }

    detail = std::to_string(checked) + " recorded cycles byte-exact, all replies parsed";
    return true;
}

bool prompt_ablation(std::string& detail) {
    PromptConfig config;
    config.include_tuning_apis = false;
    if (build_initial_prompt(config).find("tune_controller_by") != std::string::npos) {
        detail = "ablated prompt still mentions tuning";
        return false;
    }

    for (const std::string& name : ScenarioSpec::preset_names()) {
        ScenarioSpec spec = ScenarioSpec::preset(name);
        spec.prompt.include_tuning_apis = false;
        const RunResult result = run_experiment(spec);
        for (const auto& [action, count] : result.metrics.action_counts) {
            if (action.rfind("tune_controller_", 0) == 0) {
                detail = "preset " + name + " emitted " + action;
                return false;
            }
        }
    }
    detail = "no tuning text in the prompt, no tuning action across all presets";
    return true;
}

bool determinism(std::string& detail) {
    for (const char* name : {"mass_mismatch", "oscillation_abort"}) {
        const ScenarioSpec spec = ScenarioSpec::preset(name);
        const RunResult a = run_experiment(spec);
        const RunResult b = run_experiment(spec);
        if (telemetry_csv(a) != telemetry_csv(b) ||
            conversation_jsonl(a) != conversation_jsonl(b)) {
            detail = std::string("preset ") + name + " not reproducible";
            return false;
        }
    }
    detail = "repeated runs hash-identical (telemetry and conversation)";
    return true;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "DARE scalar oracle (golden ratio, < 1 ms)", dare_scalar_oracle},
        {2, "DARE residual/stability over 100 random systems (< 5 s)", dare_random_systems},
        {3, "feedback law equilibrium is exactly the hover command", equilibrium_exact},
        {4, "mass-mismatch adaptation: |e_z| < 0.30 m held (< 10 s wall)", mass_mismatch_adaptation},
        {5, "tuning-enabled adaptation: |e_z| < 0.10 m held, tuning used", tuned_adaptation},
        {6, "arm-mass scenario: >= 2x RMS improvement on every axis", arm_mass_ratio},
        {7, "oscillation measurement: 0.67 Hz / 0.19 m within tolerance", oscillation_measurement},
        {8, "emergency abort within two decision periods, landed in Done", emergency_abort},
        {9, "transcript fidelity: prompts byte-exact, replies parsed", transcript_fidelity},
        {10, "prompt ablation removes tuning everywhere", prompt_ablation},
        {11, "determinism: repeated preset runs are identical", determinism},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.check(detail);
        } catch (const std::exception& err) {
            detail = std::string("exception: ") + err.what();
        }
        if (!ok) ++failures;
        std::printf("[%s] %2d. %s%s%s\n", ok ? "PASS" : "FAIL", criterion.id, criterion.title,
                    detail.empty() ? "" : " -- ", detail.c_str());
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failures;
}
