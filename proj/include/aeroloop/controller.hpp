#pragma once

#include "aeroloop/dynamics.hpp"
#include "aeroloop/mission.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <mutex>
#include <stdexcept>

namespace aeroloop {

class DareError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kStateDim = 3 + 3 + 2; // position, velocity, roll, pitch
inline constexpr int kInputDim = 3;         // roll_cmd, pitch_cmd, thrust_delta

// State vector layout. The input layout matches ControlCommand:
// u = [roll_cmd, pitch_cmd, thrust_delta].
inline constexpr int kIdxPos = 0;
inline constexpr int kIdxVel = 3;
inline constexpr int kIdxRoll = 6;
inline constexpr int kIdxPitch = 7;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMat = Eigen::Matrix<double, kStateDim, kInputDim>;
using GainMat = Eigen::Matrix<double, kInputDim, kStateDim>;

/// Discrete hover-linearized model x(t+1) = A x(t) + B u(t), with the
/// thrust input measured as a delta about mass_param * gravity.
struct LinearModel {
    StateMat A = StateMat::Identity();
    InputMat B = InputMat::Zero();
    double dt = 0.01;
    double mass_param = 1.0; // kg, controller's believed mass
};

/// Diagonal LQR weights with named blocks: Q over {position, velocity,
/// attitude}, R over {attitude commands, thrust}.
struct CostWeights {
    Eigen::Array<double, kStateDim, 1> q_diag;
    Eigen::Array<double, kInputDim, 1> r_diag;

    static constexpr double kMinEntry = 1e-6;
    static constexpr double kMaxEntry = 1e6;

    static CostWeights defaults();
    Eigen::MatrixXd Q() const { return q_diag.matrix().asDiagonal(); }
    Eigen::MatrixXd R() const { return r_diag.matrix().asDiagonal(); }
    void validate() const;
};

enum class RetuneTarget { QPosition, RAll };

/// DARE solution P and the feedback gain, stored pre-negated so that
/// u = u_safe + K (x - x_ref) + delta_u is literal.
struct GainSolution {
    Eigen::MatrixXd P;
    Eigen::MatrixXd K;
    double residual = 0.0;
    int iterations = 0;
};

/// Offsets added to the control input by the decision policy.
struct AdaptiveState {
    double roll_offset = 0.0;   // rad
    double pitch_offset = 0.0;  // rad
    double thrust_offset = 0.0; // N
};

/// Nominal command at hover: zero attitude and the believed hover thrust.
struct HoverCommand {
    double f_hover = 9.81; // N, mass_param * gravity
};

struct ControlLimits {
    double max_tilt = 0.35;   // rad
    double thrust_min = 0.0;  // N, bound on f_hover + thrust_delta
    double thrust_max = 20.0; // N
};

struct DareOptions {
    double convergence_tol = 1e-12; // Frobenius test on the doubling iterates
    double residual_tol = 1e-8;     // bound on the returned equation residual
    int max_iter = 200;
};

/// ZOH discretization of the hover-linearized continuous model
///   pdot = v,  vdot_x = g*pitch,  vdot_y = -g*roll,  vdot_z = df/m,
///   rolldot = (roll_cmd - roll)/tau,  pitchdot = (pitch_cmd - pitch)/tau.
LinearModel build_hover_model(double mass_param, double gravity,
                              double attitude_tau, double dt);

/// Solves A'PA - P - A'PB (R + B'PB)^-1 B'PA + Q = 0 by the
/// structure-preserving doubling iteration; returns the stabilizing P
/// and K = -(R + B'PB)^-1 B'PA. Throws DareError on non-convergence or
/// when the residual bound cannot be met (non-stabilizable model or
/// pathological weights).
GainSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        const DareOptions& opts = {});
GainSolution solve_dare(const LinearModel& model, const CostWeights& weights,
                        const DareOptions& opts = {});

/// u = u_safe + K (x - x_ref) + delta_u, saturated to the command limits.
/// x_ref carries the reference position/velocity with zero attitude.
/// The returned thrust_delta is relative to hover.f_hover. If `saturated`
/// is given it reports whether any axis was clamped.
ControlCommand compute_control(const VehicleState& state, const ReferencePoint& ref,
                               const GainSolution& gain, const HoverCommand& hover,
                               const AdaptiveState& adapt, const ControlLimits& limits,
                               bool* saturated = nullptr);

/// Scales the selected diagonal block by `factor` (> 0), clamping entries
/// to [kMinEntry, kMaxEntry]. The caller re-runs solve_dare and swaps the
/// gain between control ticks.
CostWeights retune(const CostWeights& weights, RetuneTarget which, double factor);

/// Everything a control tick consumes, swapped as one unit so a tick can
/// never observe a half-updated (K, Q, R, offsets) combination.
struct ControlBundle {
    GainSolution gain;
    CostWeights weights = CostWeights::defaults();
    HoverCommand hover;
    AdaptiveState adapt;
    std::uint64_t generation = 0;
};

class BundleSlot {
public:
    void store(ControlBundle bundle) {
        std::lock_guard lock(mutex_);
        current_ = std::move(bundle);
    }
    ControlBundle load() const {
        std::lock_guard lock(mutex_);
        return current_;
    }

private:
    mutable std::mutex mutex_;
    ControlBundle current_;
};

} // namespace aeroloop
