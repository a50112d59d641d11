#include "aeroloop/dynamics.hpp"

#include <cmath>

namespace aeroloop {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

bool state_valid(const VehicleState& s) {
    return s.position_w.allFinite() && s.velocity_w.allFinite() &&
           std::isfinite(s.roll_i) && std::isfinite(s.pitch_i) &&
           std::abs(s.roll_i) < kHalfPi && std::abs(s.pitch_i) < kHalfPi;
}

// Body z-axis in world coordinates for ZYX Euler angles with yaw = 0.
Vec3 thrust_direction(double roll, double pitch) {
    return {std::sin(pitch) * std::cos(roll), -std::sin(roll),
            std::cos(pitch) * std::cos(roll)};
}

} // namespace

void PlantParams::validate() const {
    if (!(true_mass > 0.0)) throw std::invalid_argument("PlantParams: true_mass must be > 0");
    if (!(attitude_tau > 0.0)) throw std::invalid_argument("PlantParams: attitude_tau must be > 0");
    if (!(gravity > 0.0)) throw std::invalid_argument("PlantParams: gravity must be > 0");
    const double hover = true_mass * gravity;
    if (!(thrust_min < hover && hover < thrust_max))
        throw std::invalid_argument("PlantParams: thrust limits must bracket hover thrust");
    if (!(max_tilt > 0.0)) throw std::invalid_argument("PlantParams: max_tilt must be > 0");
    if (linear_drag < 0.0) throw std::invalid_argument("PlantParams: linear_drag must be >= 0");
}

void DisturbanceSpec::validate() const {
    if (added_mass < 0.0) throw std::invalid_argument("DisturbanceSpec: added_mass must be >= 0");
    if (periodic_pull) {
        const auto& p = *periodic_pull;
        if (p.axis < 0 || p.axis > 2) throw std::invalid_argument("DisturbanceSpec: pull axis must be 0..2");
        if (!(p.frequency > 0.0)) throw std::invalid_argument("DisturbanceSpec: pull frequency must be > 0");
        if (!(p.t_start < p.t_end)) throw std::invalid_argument("DisturbanceSpec: pull window must satisfy t_start < t_end");
    }
}

Vec3 DisturbanceSpec::force_at(double t) const {
    Vec3 f = constant_force_w;
    if (periodic_pull && t >= periodic_pull->t_start && t < periodic_pull->t_end) {
        const auto& p = *periodic_pull;
        f[p.axis] += p.force_amplitude *
                     std::sin(2.0 * M_PI * p.frequency * (t - p.t_start));
    }
    return f;
}

VehicleState step_plant(const VehicleState& state, const ControlCommand& cmd,
                        const PlantParams& params, const DisturbanceSpec& dist,
                        double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_plant: dt must be > 0");

    VehicleState next = state;

    const double roll_target = cmd.roll_cmd + dist.attitude_bias_roll;
    const double pitch_target = cmd.pitch_cmd + dist.attitude_bias_pitch;
    next.roll_i += dt * (roll_target - state.roll_i) / params.attitude_tau;
    next.pitch_i += dt * (pitch_target - state.pitch_i) / params.attitude_tau;

    const double mass = params.true_mass + dist.added_mass;
    const double f_hover_true = params.true_mass * params.gravity;
    double thrust = f_hover_true + cmd.thrust_delta;
    thrust = std::clamp(thrust, params.thrust_min, params.thrust_max);

    Vec3 accel = thrust_direction(next.roll_i, next.pitch_i) * (thrust / mass);
    accel.z() -= params.gravity;
    accel += dist.force_at(t) / mass;
    accel -= params.linear_drag * state.velocity_w;

    next.velocity_w += dt * accel;
    next.position_w += dt * next.velocity_w;

    if (params.ground_altitude && next.position_w.z() < *params.ground_altitude) {
        next.position_w.z() = *params.ground_altitude;
        if (next.velocity_w.z() < 0.0) next.velocity_w.z() = 0.0;
    }

    if (!state_valid(next)) throw SimulationError("step_plant: state left validity envelope");
    return next;
}

} // namespace aeroloop
