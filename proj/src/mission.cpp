#include "aeroloop/mission.hpp"

#include <cmath>

namespace aeroloop {

namespace {

// Reference on the active trajectory at time-into-phase `elapsed`.
ReferencePoint trajectory_reference(const MissionPlan& plan, double elapsed) {
    const TrajectorySpec& traj = plan.trajectory;
    ReferencePoint ref;
    switch (traj.kind) {
        case TrajectoryKind::HoverSetpoint:
            ref.position_ref = traj.center;
            break;
        case TrajectoryKind::FigureEight: {
            const double rate = lemniscate_phase_rate(traj);
            const double s = rate * elapsed;
            ref.position_ref = traj.center +
                Vec3(traj.semi_axis_a * std::sin(s), traj.semi_axis_b * std::sin(2.0 * s), 0.0);
            ref.velocity_ref = rate *
                Vec3(traj.semi_axis_a * std::cos(s), 2.0 * traj.semi_axis_b * std::cos(2.0 * s), 0.0);
            break;
        }
    }
    return ref;
}

// Where the trajectory phase hands over; Hover and Land hold these
// coordinates so the reference has no jump at the timed transitions.
ReferencePoint trajectory_end_reference(const MissionPlan& plan) {
    ReferencePoint ref = trajectory_reference(plan, plan.trajectory_duration);
    ref.velocity_ref.setZero();
    return ref;
}

ReferencePoint descent_reference(const Vec3& anchor, double elapsed, double rate) {
    ReferencePoint ref;
    const double z = anchor.z() - rate * elapsed;
    ref.position_ref = {anchor.x(), anchor.y(), std::max(z, 0.0)};
    if (z > 0.0) ref.velocity_ref.z() = -rate;
    return ref;
}

} // namespace

std::string_view to_string(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::Idle: return "Idle";
        case PhaseKind::Takeoff: return "Takeoff";
        case PhaseKind::FollowTrajectory: return "FollowTrajectory";
        case PhaseKind::Hover: return "Hover";
        case PhaseKind::Land: return "Land";
        case PhaseKind::EmergencyLanding: return "EmergencyLanding";
        case PhaseKind::Done: return "Done";
    }
    return "?";
}

void TrajectorySpec::validate() const {
    if (!(semi_axis_a > 0.0 && semi_axis_b > 0.0))
        throw std::invalid_argument("TrajectorySpec: semi-axes must be > 0");
    if (!(average_speed > 0.0))
        throw std::invalid_argument("TrajectorySpec: average_speed must be > 0");
}

void MissionPlan::validate() const {
    trajectory.validate();
    if (!(takeoff_duration > 0.0 && trajectory_duration > 0.0 && hover_duration > 0.0))
        throw std::invalid_argument("MissionPlan: phase durations must be > 0");
    if (idle_duration < 0.0)
        throw std::invalid_argument("MissionPlan: idle_duration must be >= 0");
    if (!(climb_rate > 0.0 && descent_rate > 0.0))
        throw std::invalid_argument("MissionPlan: climb/descent rates must be > 0");
    if (!(takeoff_altitude > 0.0))
        throw std::invalid_argument("MissionPlan: takeoff_altitude must be > 0");
}

double lemniscate_phase_rate(const TrajectorySpec& traj) {
    // mean |dp/ds| over one parameter period, by trapezoid rule
    // (integrand is smooth and 2*pi periodic, so this converges fast).
    constexpr int kSamples = 2048;
    double sum = 0.0;
    for (int i = 0; i < kSamples; ++i) {
        const double s = 2.0 * M_PI * i / kSamples;
        const double dx = traj.semi_axis_a * std::cos(s);
        const double dy = 2.0 * traj.semi_axis_b * std::cos(2.0 * s);
        sum += std::hypot(dx, dy);
    }
    const double mean_speed_per_rate = sum / kSamples;
    return traj.average_speed / mean_speed_per_rate;
}

MissionPhase fsm_step(const MissionPhase& phase, const MissionPlan& plan,
                      double t, const VehicleState& state, bool emergency) {
    if (phase.kind == PhaseKind::Done) return phase;
    if (emergency && phase.kind != PhaseKind::EmergencyLanding)
        return {PhaseKind::EmergencyLanding, t};

    const double elapsed = t - phase.entered_at;
    switch (phase.kind) {
        case PhaseKind::Idle:
            if (elapsed >= plan.idle_duration) return {PhaseKind::Takeoff, t};
            break;
        case PhaseKind::Takeoff:
            if (elapsed >= plan.takeoff_duration) return {PhaseKind::FollowTrajectory, t};
            break;
        case PhaseKind::FollowTrajectory:
            if (elapsed >= plan.trajectory_duration) return {PhaseKind::Hover, t};
            break;
        case PhaseKind::Hover:
            if (elapsed >= plan.hover_duration) return {PhaseKind::Land, t};
            break;
        case PhaseKind::Land:
        case PhaseKind::EmergencyLanding:
            if (state.position_w.z() <= plan.ground_threshold) return {PhaseKind::Done, t};
            break;
        case PhaseKind::Done:
            break;
    }
    return phase;
}

ReferencePoint generate_reference(const MissionPhase& phase, const MissionPlan& plan,
                                  double t, const VehicleState& state_at_phase_entry) {
    const double elapsed = t - phase.entered_at;
    const Vec3& entry = state_at_phase_entry.position_w;

    switch (phase.kind) {
        case PhaseKind::Idle: {
            ReferencePoint ref;
            ref.position_ref = entry;
            return ref;
        }
        case PhaseKind::Takeoff: {
            ReferencePoint ref;
            const double z = entry.z() + plan.climb_rate * elapsed;
            ref.position_ref = {entry.x(), entry.y(), std::min(z, plan.takeoff_altitude)};
            if (z < plan.takeoff_altitude) ref.velocity_ref.z() = plan.climb_rate;
            return ref;
        }
        case PhaseKind::FollowTrajectory:
            return trajectory_reference(plan, elapsed);
        case PhaseKind::Hover:
            return trajectory_end_reference(plan);
        case PhaseKind::Land:
            return descent_reference(trajectory_end_reference(plan).position_ref,
                                     elapsed, plan.descent_rate);
        case PhaseKind::EmergencyLanding:
        case PhaseKind::Done:
            // Done finishes the last few centimetres of the ramp, then
            // holds the touchdown point
            return descent_reference(entry, elapsed, plan.descent_rate);
    }
    return {};
}

} // namespace aeroloop
