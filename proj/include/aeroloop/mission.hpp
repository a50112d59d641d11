#pragma once

#include "aeroloop/dynamics.hpp"

#include <string_view>

namespace aeroloop {

enum class PhaseKind {
    Idle,
    Takeoff,
    FollowTrajectory,
    Hover,
    Land,
    EmergencyLanding,
    Done,
};

std::string_view to_string(PhaseKind kind);

/// FSM state: which phase is active and when it was entered.
struct MissionPhase {
    PhaseKind kind = PhaseKind::Idle;
    double entered_at = 0.0;
};

enum class TrajectoryKind { HoverSetpoint, FigureEight };

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::FigureEight;
    Vec3 center = {0.0, 0.0, 1.0};
    double semi_axis_a = 1.0;    // m, x amplitude
    double semi_axis_b = 0.5;    // m, y amplitude
    double average_speed = 0.25; // m/s, mean path speed over one lap

    void validate() const;
};

/// Parameter rate ds/dt that makes the mean path speed of the Gerono
/// lemniscate (a*sin s, b*sin 2s) equal the configured average speed.
double lemniscate_phase_rate(const TrajectorySpec& traj);

struct MissionPlan {
    double takeoff_altitude = 1.0;   // m
    TrajectorySpec trajectory;
    double idle_duration = 0.0;      // s
    double takeoff_duration = 5.0;   // s
    double trajectory_duration = 100.0; // s
    double hover_duration = 5.0;     // s
    double climb_rate = 0.3;         // m/s
    double descent_rate = 0.3;       // m/s
    double ground_threshold = 0.05;  // m

    void validate() const;
};

struct ReferencePoint {
    Vec3 position_ref = Vec3::Zero();
    Vec3 velocity_ref = Vec3::Zero();
};

/// Pure transition function. The emergency flag wins from every phase
/// except Done, which is absorbing. Land and EmergencyLanding finish
/// when the vehicle is at or below the ground threshold; the remaining
/// transitions are timed.
MissionPhase fsm_step(const MissionPhase& phase, const MissionPlan& plan,
                      double t, const VehicleState& state, bool emergency);

/// Reference position/velocity for the active phase. Takeoff, Done and
/// EmergencyLanding anchor to the state captured at phase entry (the
/// emergency ramp descends straight down from wherever the vehicle is);
/// Hover and Land anchor to the trajectory endpoint so the reference
/// stream stays continuous across timed transitions.
ReferencePoint generate_reference(const MissionPhase& phase, const MissionPlan& plan,
                                  double t, const VehicleState& state_at_phase_entry);

} // namespace aeroloop
