"""Closed-loop multirotor adaptation stack.

The compiled extension carries the numerical core: the simulated plant,
DARE-based LQR synthesis, the mission FSM reference generator, failure
monitoring with FFT oscillation detection, the prompt/decision protocol
and the experiment harness. ``run_scenario`` is the one-call entry point.
"""

from aeroloop._core import (
    AdaptiveState,
    Axis,
    ControlCommand,
    ControlLimits,
    CostWeights,
    DareError,
    Decision,
    DisturbanceSpec,
    FailureCode,
    FailureReport,
    GainSolution,
    HoverCommand,
    LinearModel,
    OscillationReport,
    ParseDecisionError,
    PeriodicPull,
    PlantParams,
    ReferencePoint,
    RetuneTarget,
    SimulationError,
    Thresholds,
    VehicleState,
    action_names,
    build_hover_model,
    build_initial_prompt,
    check_failures,
    compute_control,
    detect_oscillation,
    format_query,
    parse_decision,
    render_oscillation_message,
    retune,
    run_scenario,
    scenario_presets,
    solve_dare,
    solve_dare_for_model,
    step_plant,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveState",
    "Axis",
    "ControlCommand",
    "ControlLimits",
    "CostWeights",
    "DareError",
    "Decision",
    "DisturbanceSpec",
    "FailureCode",
    "FailureReport",
    "GainSolution",
    "HoverCommand",
    "LinearModel",
    "OscillationReport",
    "ParseDecisionError",
    "PeriodicPull",
    "PlantParams",
    "ReferencePoint",
    "RetuneTarget",
    "SimulationError",
    "Thresholds",
    "VehicleState",
    "action_names",
    "build_hover_model",
    "build_initial_prompt",
    "check_failures",
    "compute_control",
    "detect_oscillation",
    "format_query",
    "parse_decision",
    "render_oscillation_message",
    "retune",
    "run_scenario",
    "scenario_presets",
    "solve_dare",
    "solve_dare_for_model",
    "step_plant",
]
