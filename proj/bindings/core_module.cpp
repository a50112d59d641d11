#include "aeroloop/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace aeroloop;

namespace {

PromptConfig make_prompt_config(bool include_tuning_apis, const std::string& risk,
                                const std::string& platform) {
    PromptConfig config;
    config.include_tuning_apis = include_tuning_apis;
    if (risk == "strong") config.risk_emphasis = PromptConfig::RiskEmphasis::Strong;
    else if (risk == "normal") config.risk_emphasis = PromptConfig::RiskEmphasis::Normal;
    else throw std::invalid_argument("risk must be 'normal' or 'strong'");
    config.platform_noun = platform;
    return config;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Closed-loop multirotor adaptation stack: simulated plant, DARE-based "
              "LQR control, mission FSM, failure monitoring, decision policies and "
              "the experiment harness.";

    // ---- plant ----
    py::class_<VehicleState>(m, "VehicleState")
        .def(py::init<>())
        .def_readwrite("position_w", &VehicleState::position_w)
        .def_readwrite("velocity_w", &VehicleState::velocity_w)
        .def_readwrite("roll_i", &VehicleState::roll_i)
        .def_readwrite("pitch_i", &VehicleState::pitch_i);

    py::class_<ControlCommand>(m, "ControlCommand")
        .def(py::init<>())
        .def_readwrite("roll_cmd", &ControlCommand::roll_cmd)
        .def_readwrite("pitch_cmd", &ControlCommand::pitch_cmd)
        .def_readwrite("thrust_delta", &ControlCommand::thrust_delta);

    py::class_<PlantParams>(m, "PlantParams")
        .def(py::init<>())
        .def_readwrite("true_mass", &PlantParams::true_mass)
        .def_readwrite("gravity", &PlantParams::gravity)
        .def_readwrite("attitude_tau", &PlantParams::attitude_tau)
        .def_readwrite("thrust_min", &PlantParams::thrust_min)
        .def_readwrite("thrust_max", &PlantParams::thrust_max)
        .def_readwrite("max_tilt", &PlantParams::max_tilt)
        .def_readwrite("linear_drag", &PlantParams::linear_drag)
        .def_readwrite("ground_altitude", &PlantParams::ground_altitude);

    py::class_<PeriodicPull>(m, "PeriodicPull")
        .def(py::init<>())
        .def_readwrite("axis", &PeriodicPull::axis)
        .def_readwrite("force_amplitude", &PeriodicPull::force_amplitude)
        .def_readwrite("frequency", &PeriodicPull::frequency)
        .def_readwrite("t_start", &PeriodicPull::t_start)
        .def_readwrite("t_end", &PeriodicPull::t_end);

    py::class_<DisturbanceSpec>(m, "DisturbanceSpec")
        .def(py::init<>())
        .def_readwrite("constant_force_w", &DisturbanceSpec::constant_force_w)
        .def_readwrite("attitude_bias_roll", &DisturbanceSpec::attitude_bias_roll)
        .def_readwrite("attitude_bias_pitch", &DisturbanceSpec::attitude_bias_pitch)
        .def_readwrite("added_mass", &DisturbanceSpec::added_mass)
        .def_readwrite("periodic_pull", &DisturbanceSpec::periodic_pull);

    m.def("step_plant", &step_plant, py::arg("state"), py::arg("cmd"), py::arg("params"),
          py::arg("dist") = DisturbanceSpec{}, py::arg("t") = 0.0, py::arg("dt") = 0.01,
          "One semi-implicit Euler step of the simulated plant.");

    // ---- controller ----
    py::class_<LinearModel>(m, "LinearModel")
        .def_readonly("A", &LinearModel::A)
        .def_readonly("B", &LinearModel::B)
        .def_readonly("dt", &LinearModel::dt)
        .def_readonly("mass_param", &LinearModel::mass_param);

    py::class_<CostWeights>(m, "CostWeights")
        .def(py::init(&CostWeights::defaults))
        .def_static("defaults", &CostWeights::defaults)
        .def_property(
            "q_diag", [](const CostWeights& w) { return w.q_diag.matrix().eval(); },
            [](CostWeights& w, const Eigen::Matrix<double, kStateDim, 1>& v) { w.q_diag = v.array(); })
        .def_property(
            "r_diag", [](const CostWeights& w) { return w.r_diag.matrix().eval(); },
            [](CostWeights& w, const Eigen::Matrix<double, kInputDim, 1>& v) { w.r_diag = v.array(); });

    py::class_<GainSolution>(m, "GainSolution")
        .def_readonly("P", &GainSolution::P)
        .def_readonly("K", &GainSolution::K)
        .def_readonly("residual", &GainSolution::residual)
        .def_readonly("iterations", &GainSolution::iterations);

    py::class_<AdaptiveState>(m, "AdaptiveState")
        .def(py::init<>())
        .def_readwrite("roll_offset", &AdaptiveState::roll_offset)
        .def_readwrite("pitch_offset", &AdaptiveState::pitch_offset)
        .def_readwrite("thrust_offset", &AdaptiveState::thrust_offset);

    py::class_<HoverCommand>(m, "HoverCommand")
        .def(py::init([](double f_hover) { return HoverCommand{f_hover}; }), py::arg("f_hover"))
        .def_readwrite("f_hover", &HoverCommand::f_hover);

    py::class_<ControlLimits>(m, "ControlLimits")
        .def(py::init<>())
        .def_readwrite("max_tilt", &ControlLimits::max_tilt)
        .def_readwrite("thrust_min", &ControlLimits::thrust_min)
        .def_readwrite("thrust_max", &ControlLimits::thrust_max);

    m.def("build_hover_model", &build_hover_model, py::arg("mass_param"), py::arg("gravity") = 9.81,
          py::arg("attitude_tau") = 0.15, py::arg("dt") = 0.01,
          "ZOH-discretized hover-linearized model.");

    m.def(
        "solve_dare",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
           const Eigen::MatrixXd& R, double residual_tol, int max_iter) {
            DareOptions opts;
            opts.residual_tol = residual_tol;
            opts.max_iter = max_iter;
            return solve_dare(A, B, Q, R, opts);
        },
        py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"), py::arg("residual_tol") = 1e-8,
        py::arg("max_iter") = 200,
        "Stabilizing DARE solution by the structure-preserving doubling iteration.");

    m.def(
        "solve_dare_for_model",
        [](const LinearModel& model, const CostWeights& weights) { return solve_dare(model, weights); },
        py::arg("model"), py::arg("weights"));

    m.def(
        "compute_control",
        [](const VehicleState& state, const ReferencePoint& ref, const GainSolution& gain,
           const HoverCommand& hover, const AdaptiveState& adapt, const ControlLimits& limits) {
            return compute_control(state, ref, gain, hover, adapt, limits);
        },
        py::arg("state"), py::arg("ref"), py::arg("gain"), py::arg("hover"),
        py::arg("adapt") = AdaptiveState{}, py::arg("limits") = ControlLimits{},
        "u = u_safe + K (x - x_ref) + delta_u, saturated to the command limits.");

    py::enum_<RetuneTarget>(m, "RetuneTarget")
        .value("Q_POSITION", RetuneTarget::QPosition)
        .value("R_ALL", RetuneTarget::RAll);
    m.def("retune", &retune, py::arg("weights"), py::arg("which"), py::arg("factor"));

    // ---- mission ----
    py::class_<ReferencePoint>(m, "ReferencePoint")
        .def(py::init<>())
        .def_readwrite("position_ref", &ReferencePoint::position_ref)
        .def_readwrite("velocity_ref", &ReferencePoint::velocity_ref);

    // ---- monitor ----
    py::enum_<FailureCode>(m, "FailureCode")
        .value("NO_ISSUE", FailureCode::NoIssue)
        .value("FLYING_TOO_HIGH", FailureCode::FlyingTooHigh)
        .value("FLYING_TOO_LOW", FailureCode::FlyingTooLow)
        .value("POS_ERROR_POSITIVE_Y", FailureCode::PosErrorPositiveY)
        .value("POS_ERROR_NEGATIVE_Y", FailureCode::PosErrorNegativeY)
        .value("POS_ERROR_POSITIVE_X", FailureCode::PosErrorPositiveX)
        .value("POS_ERROR_NEGATIVE_X", FailureCode::PosErrorNegativeX);

    py::class_<FailureReport>(m, "FailureReport")
        .def(py::init<>())
        .def_readwrite("codes", &FailureReport::codes)
        .def_readwrite("info", &FailureReport::info);

    py::class_<Thresholds>(m, "Thresholds")
        .def(py::init<>())
        .def_readwrite("x", &Thresholds::x)
        .def_readwrite("y", &Thresholds::y)
        .def_readwrite("z", &Thresholds::z);

    py::enum_<Axis>(m, "Axis").value("X", Axis::X).value("Y", Axis::Y).value("Z", Axis::Z);

    py::class_<OscillationReport>(m, "OscillationReport")
        .def(py::init<>())
        .def_readwrite("axis", &OscillationReport::axis)
        .def_readwrite("frequency", &OscillationReport::frequency)
        .def_readwrite("amplitude", &OscillationReport::amplitude);

    m.def("check_failures",
          [](const VehicleState& state, const ReferencePoint& ref, const Thresholds& thresholds,
             const std::string& extra) { return check_failures(state, ref, thresholds, extra); },
          py::arg("state"), py::arg("ref") = ReferencePoint{}, py::arg("thresholds") = Thresholds{},
          py::arg("extra") = std::string{},
          "Tracking-error failure codes plus the rendered info string.");

    m.def(
        "detect_oscillation",
        [](const Eigen::MatrixXd& samples, double sample_dt, std::pair<double, double> band,
           double amp_threshold) -> std::optional<OscillationReport> {
            if (samples.cols() != 3)
                throw std::invalid_argument("samples must be an (n, 3) array");
            std::vector<Vec3> buffer(samples.rows());
            for (Eigen::Index i = 0; i < samples.rows(); ++i) buffer[i] = samples.row(i);
            return detect_oscillation(buffer, sample_dt, {band.first, band.second}, amp_threshold);
        },
        py::arg("samples"), py::arg("sample_dt"), py::arg("band") = std::pair<double, double>{0.2, 2.0},
        py::arg("amp_threshold") = 0.1,
        "FFT spectral peak scan over an (n, 3) buffer of position samples.");

    // ---- advisor ----
    py::class_<Decision>(m, "Decision")
        .def(py::init<>())
        .def_property_readonly("actions",
                               [](const Decision& d) {
                                   std::vector<std::string> names;
                                   for (const ActionName a : d.actions)
                                       names.emplace_back(to_string(a));
                                   return names;
                               })
        .def_readonly("short_label", &Decision::short_label)
        .def_readonly("explanation", &Decision::explanation)
        .def_readonly("raw", &Decision::raw)
        .def_readonly("had_unknown", &Decision::had_unknown);

    m.def(
        "build_initial_prompt",
        [](bool include_tuning_apis, const std::string& risk, const std::string& platform) {
            return build_initial_prompt(make_prompt_config(include_tuning_apis, risk, platform));
        },
        py::arg("include_tuning_apis") = true, py::arg("risk") = "normal",
        py::arg("platform") = "multirotor");

    m.def("format_query", &format_query, py::arg("report"));
    m.def("render_oscillation_message", &render_oscillation_message, py::arg("report"));

    m.def(
        "parse_decision",
        [](const std::string& raw, bool include_tuning_apis) {
            const auto valid = action_whitelist(include_tuning_apis);
            return parse_decision(raw, valid);
        },
        py::arg("raw"), py::arg("include_tuning_apis") = true,
        "Extract and validate the action list from a reply.");

    m.def("action_names", [](bool include_tuning_apis) {
        std::vector<std::string> names;
        for (const ActionName a : action_whitelist(include_tuning_apis))
            names.emplace_back(to_string(a));
        return names;
    }, py::arg("include_tuning_apis") = true);

    // ---- harness ----
    m.def("scenario_presets", &ScenarioSpec::preset_names);

    m.def(
        "run_scenario",
        [](const std::string& scenario, const std::string& policy, std::optional<double> duration,
           bool no_tuning_apis, const std::string& risk, std::optional<std::string> out_dir,
           bool plot, std::optional<double> decision_period) {
            const auto presets = ScenarioSpec::preset_names();
            ScenarioSpec spec = std::find(presets.begin(), presets.end(), scenario) != presets.end()
                                    ? ScenarioSpec::preset(scenario)
                                    : ScenarioSpec::load(scenario);
            if (policy == "rule") spec.policy.kind = PolicyKind::Rule;
            else if (policy == "remote") spec.policy.kind = PolicyKind::Remote;
            else if (policy == "null" || policy == "none") spec.policy.kind = PolicyKind::Null;
            else if (policy.rfind("replay:", 0) == 0) {
                spec.policy.kind = PolicyKind::Replay;
                spec.policy.replay_path = policy.substr(7);
            } else {
                throw std::invalid_argument("policy must be rule | replay:<file> | remote | null");
            }
            if (duration) spec.duration = *duration;
            if (no_tuning_apis) spec.prompt.include_tuning_apis = false;
            if (!risk.empty())
                spec.prompt.risk_emphasis = risk == "strong" ? PromptConfig::RiskEmphasis::Strong
                                                             : PromptConfig::RiskEmphasis::Normal;
            if (decision_period) spec.decision_period = *decision_period;
            spec.validate();

            RunResult result;
            {
                py::gil_scoped_release release;
                result = run_experiment(spec);
                if (out_dir) emit_outputs(result, spec, *out_dir, plot);
            }
            nlohmann::json metrics = metrics_json(result);
            metrics["scenario"] = spec.name;
            return json_to_py(metrics);
        },
        py::arg("scenario"), py::arg("policy") = "rule", py::arg("duration") = std::nullopt,
        py::arg("no_tuning_apis") = false, py::arg("risk") = std::string{},
        py::arg("out_dir") = std::nullopt, py::arg("plot") = false,
        py::arg("decision_period") = std::nullopt,
        "Run a preset or scenario file through the closed loop; returns the metrics dict.");

    py::register_exception<SimulationError>(m, "SimulationError");
    py::register_exception<DareError>(m, "DareError");
    py::register_exception<ParseError>(m, "ParseDecisionError");
}
