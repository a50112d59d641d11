#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>

namespace aeroloop {

using Vec3 = Eigen::Vector3d;

/// Thrown when integration leaves the plant's validity envelope
/// (non-finite state or |roll|, |pitch| >= pi/2).
class SimulationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Translational state in the world frame W plus roll/pitch in the
/// gravity-aligned, yaw-fixed frame I. Yaw is held at zero, so I and W
/// share their heading.
struct VehicleState {
    Vec3 position_w = Vec3::Zero();
    Vec3 velocity_w = Vec3::Zero();
    double roll_i = 0.0;
    double pitch_i = 0.0;
};

/// Attitude setpoints plus thrust measured as a delta about the hover
/// thrust of whoever interprets the command. The controller fills it
/// relative to its own (possibly wrong) hover estimate; the plant reads
/// it relative to true hover. The closed-loop harness bridges the two
/// frames explicitly.
struct ControlCommand {
    double roll_cmd = 0.0;
    double pitch_cmd = 0.0;
    double thrust_delta = 0.0;
};

struct PlantParams {
    double true_mass = 1.0;     // kg
    double gravity = 9.81;      // m/s^2
    double attitude_tau = 0.15; // s, first-order attitude response
    double thrust_min = 0.0;    // N
    double thrust_max = 20.0;   // N
    double max_tilt = 0.35;     // rad
    double linear_drag = 0.0;   // 1/s

    /// Altitude of a hard ground plane (position and downward velocity
    /// clamp). Disable for free-space unit tests.
    std::optional<double> ground_altitude = 0.0;

    void validate() const;
};

/// Sinusoidal lateral force window, e.g. a rope pulled at a fixed beat.
struct PeriodicPull {
    int axis = 1; // 0=x, 1=y, 2=z
    double force_amplitude = 0.0; // N
    double frequency = 0.67;      // Hz
    double t_start = 0.0;         // s
    double t_end = 0.0;           // s
};

struct DisturbanceSpec {
    Vec3 constant_force_w = Vec3::Zero(); // N
    double attitude_bias_roll = 0.0;      // rad, steady tilt (e.g. arm-mounted mass)
    double attitude_bias_pitch = 0.0;     // rad
    double added_mass = 0.0;              // kg
    std::optional<PeriodicPull> periodic_pull;

    void validate() const;
    Vec3 force_at(double t) const;
};

/// One integration step of the simulated plant (semi-implicit Euler).
/// Attitude relaxes toward cmd + bias with time constant attitude_tau;
/// thrust acts along the tilted body axis; thrust_delta is taken about
/// true hover (true_mass * gravity). Pure function of its arguments.
VehicleState step_plant(const VehicleState& state, const ControlCommand& cmd,
                        const PlantParams& params, const DisturbanceSpec& dist,
                        double t, double dt);

} // namespace aeroloop
