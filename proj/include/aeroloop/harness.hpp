#pragma once

#include "aeroloop/advisor.hpp"
#include "aeroloop/executor.hpp"
#include "aeroloop/scenario.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aeroloop {

/// One control tick of telemetry.
struct TelemetryRow {
    double t = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 reference = Vec3::Zero();
    Vec3 errors = Vec3::Zero();
    double cmd_roll = 0.0;
    double cmd_pitch = 0.0;
    double cmd_thrust_delta = 0.0;
    double offset_roll = 0.0;
    double offset_pitch = 0.0;
    double offset_thrust = 0.0;
    std::vector<int> failure_codes;
    PhaseKind mission_phase = PhaseKind::Idle;
    double decision_latency = 0.0;
};

struct ConversationEntry {
    double t = 0.0;
    std::string prompt;   // rendered query
    std::string response; // raw reply
    std::vector<ActionName> actions;
    double latency = 0.0;
    bool failed = false; // policy error, logged and treated as do_nothing
};

struct RunMetrics {
    double rms_error_x = 0.0; // over the steady window (final 20 s)
    double rms_error_y = 0.0;
    double rms_error_z = 0.0;
    double final_altitude_error = 0.0; // signed e_z at the last tick
    std::optional<double> time_to_ez_030;
    std::optional<double> time_to_ez_010;
    std::optional<double> emergency_landing_time;
    std::map<std::string, int> action_counts;
    int decisions_issued = 0;
    double steady_window = 20.0; // s
};

struct RunResult {
    std::vector<TelemetryRow> telemetry;
    std::vector<ConversationEntry> conversation;
    RunMetrics metrics;
    PhaseKind final_phase = PhaseKind::Idle;
    bool mission_completed = false; // reached Done (normally or via emergency)
};

/// Runs the closed loop: reference generation, LQR control, plant step,
/// failure monitoring, periodic policy queries, action execution and
/// DARE re-solves. Deterministic for rule/replay/null policies: the same
/// spec always produces the same outputs.
RunResult run_experiment(const ScenarioSpec& spec);

/// Same loop with an injected policy (tests, pre-built remote drivers).
RunResult run_experiment(const ScenarioSpec& spec, DecisionPolicy& policy);

/// Writes telemetry.csv, conversation.log (the transcript format),
/// conversation.jsonl (replayable), metrics.json and, when requested,
/// plot_{x,y,z}.svg under out_dir.
void emit_outputs(const RunResult& result, const ScenarioSpec& spec,
                  const std::filesystem::path& out_dir, bool plot);

std::string telemetry_csv(const RunResult& result);
std::string conversation_log(const RunResult& result);
std::string conversation_jsonl(const RunResult& result);
nlohmann::json metrics_json(const RunResult& result);

} // namespace aeroloop
