#pragma once

#include "aeroloop/advisor.hpp"
#include "aeroloop/controller.hpp"
#include "aeroloop/dynamics.hpp"
#include "aeroloop/llm_client.hpp"
#include "aeroloop/mission.hpp"
#include "aeroloop/monitor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace aeroloop {

enum class PolicyKind { Rule, Replay, Remote, Null };

struct PolicySelection {
    PolicyKind kind = PolicyKind::Rule;
    std::string replay_path; // for PolicyKind::Replay
};

/// Full description of one experiment run. Serializable to/from JSON so
/// scenarios can be given as files as well as built-in presets.
struct ScenarioSpec {
    std::string name = "nominal";

    // fault injection
    double controller_mass_fraction = 1.0; // of the plant's true mass
    double arm_mass = 0.0;                 // kg added at an arm tip
    double arm_bias_roll = 0.0;            // rad of steady tilt it causes
    double arm_bias_pitch = 0.0;
    std::optional<PeriodicPull> rope_pull;

    PlantParams plant;
    MissionPlan plan;
    Thresholds thresholds;
    PromptConfig prompt;
    CostWeights weights = CostWeights::defaults();
    PolicySelection policy;
    ClientConfig client; // remote policy only

    double decision_period = 2.0; // s
    double control_rate = 100.0;  // Hz
    double dt = 0.01;             // s
    double duration = 120.0;      // s
    std::uint64_t seed = 0;

    // oscillation monitor
    int osc_buffer_size = 256;
    int osc_sample_stride = 8; // control ticks per monitor sample (12.5 Hz at 100 Hz)
    SpectralBand osc_band{0.2, 2.0};
    double osc_amp_threshold = 0.1; // m

    double decision_latency = 0.0; // s, simulated delay before a decision applies

    void validate() const;

    static ScenarioSpec preset(const std::string& name);
    static std::vector<std::string> preset_names();

    /// Load from a JSON file (schema mirrors this struct; missing fields
    /// keep their defaults, or the named preset's values when "preset"
    /// is given).
    static ScenarioSpec load(const std::string& path);
};

void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);

} // namespace aeroloop
