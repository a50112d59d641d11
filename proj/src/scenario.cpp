#include "aeroloop/scenario.hpp"

#include "aeroloop/fft.hpp"

#include <cmath>
#include <fstream>

namespace aeroloop {

using nlohmann::json;

void ScenarioSpec::validate() const {
    plant.validate();
    plan.validate();
    weights.validate();
    if (!(controller_mass_fraction > 0.0 && controller_mass_fraction <= 2.0))
        throw std::invalid_argument("ScenarioSpec: controller_mass_fraction must be in (0, 2]");
    if (arm_mass < 0.0) throw std::invalid_argument("ScenarioSpec: arm_mass must be >= 0");
    if (!(thresholds.x > 0.0 && thresholds.y > 0.0 && thresholds.z > 0.0))
        throw std::invalid_argument("ScenarioSpec: thresholds must be > 0");
    if (!(decision_period >= 1.0 && decision_period <= 10.0))
        throw std::invalid_argument("ScenarioSpec: decision_period must be in [1, 10] s");
    if (!(dt > 0.0 && duration > 0.0))
        throw std::invalid_argument("ScenarioSpec: dt and duration must be > 0");
    if (std::abs(control_rate * dt - 1.0) > 1e-9)
        throw std::invalid_argument("ScenarioSpec: control_rate and dt must satisfy rate*dt == 1");
    if (osc_buffer_size < 16 || !is_power_of_two(static_cast<std::size_t>(osc_buffer_size)))
        throw std::invalid_argument("ScenarioSpec: osc_buffer_size must be a power of two >= 16");
    if (osc_sample_stride < 1)
        throw std::invalid_argument("ScenarioSpec: osc_sample_stride must be >= 1");
    // the analysis window has to cover >= 3 periods of the band floor
    const double window_s = osc_buffer_size * osc_sample_stride * dt;
    if (window_s * osc_band.f_min < 3.0)
        throw std::invalid_argument("ScenarioSpec: oscillation window too short for the band floor");
    if (decision_latency < 0.0)
        throw std::invalid_argument("ScenarioSpec: decision_latency must be >= 0");
    if (policy.kind == PolicyKind::Replay && policy.replay_path.empty())
        throw std::invalid_argument("ScenarioSpec: replay policy needs a transcript path");
    if (rope_pull) {
        DisturbanceSpec probe;
        probe.periodic_pull = rope_pull;
        probe.validate();
    }
}

ScenarioSpec ScenarioSpec::preset(const std::string& name) {
    ScenarioSpec spec;
    spec.name = name;

    if (name == "nominal") {
        // clean baseline mission: take off, hold a setpoint, land
        spec.plan.trajectory.kind = TrajectoryKind::HoverSetpoint;
        spec.duration = 120.0;
    } else if (name == "mass_mismatch") {
        spec.controller_mass_fraction = 0.85;
        spec.prompt.include_tuning_apis = false;
        spec.duration = 100.0;
    } else if (name == "mass_mismatch_with_tuning") {
        spec.controller_mass_fraction = 0.85;
        spec.prompt.include_tuning_apis = true;
        spec.duration = 100.0;
    } else if (name == "mass_mismatch_015") {
        // literal reading of "mass parameter is about 15% of the true
        // mass"; far outside what the action steps can compensate, kept
        // as a demonstration only
        spec.controller_mass_fraction = 0.15;
        spec.prompt.include_tuning_apis = true;
        spec.duration = 100.0;
    } else if (name == "arm_mass") {
        spec.arm_mass = 0.210;
        spec.arm_bias_roll = -0.05; // drifts +y
        spec.arm_bias_pitch = 0.05; // drifts +x
        spec.duration = 100.0;
    } else if (name == "oscillation_abort") {
        spec.controller_mass_fraction = 0.85;
        spec.prompt.include_tuning_apis = false;
        PeriodicPull pull;
        pull.axis = 1;
        pull.frequency = 0.67;
        pull.force_amplitude = 2.7; // calibrated for ~0.19 m of sway
        pull.t_start = 40.0;
        pull.t_end = 100.0;
        spec.rope_pull = pull;
        spec.duration = 100.0;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name);
    }
    spec.validate();
    return spec;
}

std::vector<std::string> ScenarioSpec::preset_names() {
    return {"nominal", "mass_mismatch", "mass_mismatch_with_tuning", "mass_mismatch_015",
            "arm_mass", "oscillation_abort"};
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

void to_json(json& j, const ScenarioSpec& spec) {
    j = json{
        {"name", spec.name},
        {"controller_mass_fraction", spec.controller_mass_fraction},
        {"arm_mass", spec.arm_mass},
        {"arm_bias_roll", spec.arm_bias_roll},
        {"arm_bias_pitch", spec.arm_bias_pitch},
        {"plant",
         {{"true_mass", spec.plant.true_mass},
          {"gravity", spec.plant.gravity},
          {"attitude_tau", spec.plant.attitude_tau},
          {"thrust_min", spec.plant.thrust_min},
          {"thrust_max", spec.plant.thrust_max},
          {"max_tilt", spec.plant.max_tilt},
          {"linear_drag", spec.plant.linear_drag}}},
        {"plan",
         {{"takeoff_altitude", spec.plan.takeoff_altitude},
          {"idle_duration", spec.plan.idle_duration},
          {"takeoff_duration", spec.plan.takeoff_duration},
          {"trajectory_duration", spec.plan.trajectory_duration},
          {"hover_duration", spec.plan.hover_duration},
          {"climb_rate", spec.plan.climb_rate},
          {"descent_rate", spec.plan.descent_rate},
          {"ground_threshold", spec.plan.ground_threshold},
          {"trajectory",
           {{"kind", spec.plan.trajectory.kind == TrajectoryKind::FigureEight ? "figure_eight"
                                                                              : "hover_setpoint"},
            {"center", {spec.plan.trajectory.center.x(), spec.plan.trajectory.center.y(),
                        spec.plan.trajectory.center.z()}},
            {"semi_axis_a", spec.plan.trajectory.semi_axis_a},
            {"semi_axis_b", spec.plan.trajectory.semi_axis_b},
            {"average_speed", spec.plan.trajectory.average_speed}}}}},
        {"thresholds", {{"x", spec.thresholds.x}, {"y", spec.thresholds.y}, {"z", spec.thresholds.z}}},
        {"prompt",
         {{"include_tuning_apis", spec.prompt.include_tuning_apis},
          {"risk_emphasis",
           spec.prompt.risk_emphasis == PromptConfig::RiskEmphasis::Strong ? "strong" : "normal"},
          {"platform_noun", spec.prompt.platform_noun}}},
        {"weights",
         {{"q_diag", std::vector<double>(spec.weights.q_diag.data(), spec.weights.q_diag.data() + kStateDim)},
          {"r_diag", std::vector<double>(spec.weights.r_diag.data(), spec.weights.r_diag.data() + kInputDim)}}},
        {"policy",
         {{"kind", spec.policy.kind == PolicyKind::Rule     ? "rule"
                   : spec.policy.kind == PolicyKind::Replay ? "replay"
                   : spec.policy.kind == PolicyKind::Remote ? "remote"
                                                            : "null"},
          {"replay_path", spec.policy.replay_path}}},
        {"decision_period", spec.decision_period},
        {"control_rate", spec.control_rate},
        {"dt", spec.dt},
        {"duration", spec.duration},
        {"seed", spec.seed},
        {"osc_buffer_size", spec.osc_buffer_size},
        {"osc_sample_stride", spec.osc_sample_stride},
        {"osc_band", {{"f_min", spec.osc_band.f_min}, {"f_max", spec.osc_band.f_max}}},
        {"osc_amp_threshold", spec.osc_amp_threshold},
        {"decision_latency", spec.decision_latency},
    };
    if (spec.rope_pull) {
        j["rope_pull"] = {{"axis", spec.rope_pull->axis},
                          {"force_amplitude", spec.rope_pull->force_amplitude},
                          {"frequency", spec.rope_pull->frequency},
                          {"t_start", spec.rope_pull->t_start},
                          {"t_end", spec.rope_pull->t_end}};
    }
}

void from_json(const json& j, ScenarioSpec& spec) {
    maybe(j, "name", spec.name);
    maybe(j, "controller_mass_fraction", spec.controller_mass_fraction);
    maybe(j, "arm_mass", spec.arm_mass);
    maybe(j, "arm_bias_roll", spec.arm_bias_roll);
    maybe(j, "arm_bias_pitch", spec.arm_bias_pitch);
    if (j.contains("plant")) {
        const json& p = j.at("plant");
        maybe(p, "true_mass", spec.plant.true_mass);
        maybe(p, "gravity", spec.plant.gravity);
        maybe(p, "attitude_tau", spec.plant.attitude_tau);
        maybe(p, "thrust_min", spec.plant.thrust_min);
        maybe(p, "thrust_max", spec.plant.thrust_max);
        maybe(p, "max_tilt", spec.plant.max_tilt);
        maybe(p, "linear_drag", spec.plant.linear_drag);
    }
    if (j.contains("plan")) {
        const json& p = j.at("plan");
        maybe(p, "takeoff_altitude", spec.plan.takeoff_altitude);
        maybe(p, "idle_duration", spec.plan.idle_duration);
        maybe(p, "takeoff_duration", spec.plan.takeoff_duration);
        maybe(p, "trajectory_duration", spec.plan.trajectory_duration);
        maybe(p, "hover_duration", spec.plan.hover_duration);
        maybe(p, "climb_rate", spec.plan.climb_rate);
        maybe(p, "descent_rate", spec.plan.descent_rate);
        maybe(p, "ground_threshold", spec.plan.ground_threshold);
        if (p.contains("trajectory")) {
            const json& t = p.at("trajectory");
            if (t.contains("kind"))
                spec.plan.trajectory.kind = t.at("kind").get<std::string>() == "figure_eight"
                                                ? TrajectoryKind::FigureEight
                                                : TrajectoryKind::HoverSetpoint;
            if (t.contains("center")) {
                const auto c = t.at("center").get<std::vector<double>>();
                if (c.size() != 3)
                    throw std::invalid_argument("scenario: trajectory center needs 3 entries");
                spec.plan.trajectory.center = Vec3(c[0], c[1], c[2]);
            }
            maybe(t, "semi_axis_a", spec.plan.trajectory.semi_axis_a);
            maybe(t, "semi_axis_b", spec.plan.trajectory.semi_axis_b);
            maybe(t, "average_speed", spec.plan.trajectory.average_speed);
        }
    }
    if (j.contains("thresholds")) {
        const json& t = j.at("thresholds");
        maybe(t, "x", spec.thresholds.x);
        maybe(t, "y", spec.thresholds.y);
        maybe(t, "z", spec.thresholds.z);
    }
    if (j.contains("prompt")) {
        const json& p = j.at("prompt");
        maybe(p, "include_tuning_apis", spec.prompt.include_tuning_apis);
        if (p.contains("risk_emphasis"))
            spec.prompt.risk_emphasis = p.at("risk_emphasis").get<std::string>() == "strong"
                                            ? PromptConfig::RiskEmphasis::Strong
                                            : PromptConfig::RiskEmphasis::Normal;
        maybe(p, "platform_noun", spec.prompt.platform_noun);
    }
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        if (w.contains("q_diag")) {
            const auto q = w.at("q_diag").get<std::vector<double>>();
            if (q.size() != kStateDim) throw std::invalid_argument("scenario: q_diag needs 8 entries");
            for (int i = 0; i < kStateDim; ++i) spec.weights.q_diag(i) = q[i];
        }
        if (w.contains("r_diag")) {
            const auto r = w.at("r_diag").get<std::vector<double>>();
            if (r.size() != kInputDim) throw std::invalid_argument("scenario: r_diag needs 3 entries");
            for (int i = 0; i < kInputDim; ++i) spec.weights.r_diag(i) = r[i];
        }
    }
    if (j.contains("policy")) {
        const json& p = j.at("policy");
        if (p.contains("kind")) {
            const auto kind = p.at("kind").get<std::string>();
            if (kind == "rule") spec.policy.kind = PolicyKind::Rule;
            else if (kind == "replay") spec.policy.kind = PolicyKind::Replay;
            else if (kind == "remote") spec.policy.kind = PolicyKind::Remote;
            else if (kind == "null" || kind == "none") spec.policy.kind = PolicyKind::Null;
            else throw std::invalid_argument("scenario: unknown policy kind " + kind);
        }
        maybe(p, "replay_path", spec.policy.replay_path);
    }
    if (j.contains("rope_pull")) {
        const json& r = j.at("rope_pull");
        PeriodicPull pull;
        maybe(r, "axis", pull.axis);
        maybe(r, "force_amplitude", pull.force_amplitude);
        maybe(r, "frequency", pull.frequency);
        maybe(r, "t_start", pull.t_start);
        maybe(r, "t_end", pull.t_end);
        spec.rope_pull = pull;
    }
    maybe(j, "decision_period", spec.decision_period);
    maybe(j, "control_rate", spec.control_rate);
    maybe(j, "dt", spec.dt);
    maybe(j, "duration", spec.duration);
    maybe(j, "seed", spec.seed);
    maybe(j, "osc_buffer_size", spec.osc_buffer_size);
    maybe(j, "osc_sample_stride", spec.osc_sample_stride);
    if (j.contains("osc_band")) {
        const json& b = j.at("osc_band");
        maybe(b, "f_min", spec.osc_band.f_min);
        maybe(b, "f_max", spec.osc_band.f_max);
    }
    maybe(j, "osc_amp_threshold", spec.osc_amp_threshold);
    maybe(j, "decision_latency", spec.decision_latency);
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file " + path);
    json j;
    in >> j;
    ScenarioSpec spec;
    if (j.contains("preset")) spec = preset(j.at("preset").get<std::string>());
    from_json(j, spec);
    spec.validate();
    return spec;
}

} // namespace aeroloop
