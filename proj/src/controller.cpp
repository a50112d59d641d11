#include "aeroloop/controller.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace aeroloop {

CostWeights CostWeights::defaults() {
    CostWeights w;
    w.q_diag << 10.0, 10.0, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0;
    w.r_diag << 5.0, 5.0, 1.0;
    return w;
}

void CostWeights::validate() const {
    if ((q_diag < 0.0).any() || !q_diag.isFinite().all())
        throw std::invalid_argument("CostWeights: Q diagonal must be finite and >= 0");
    if ((r_diag <= 0.0).any() || !r_diag.isFinite().all())
        throw std::invalid_argument("CostWeights: R diagonal must be finite and > 0");
    if ((q_diag > kMaxEntry).any() || (r_diag > kMaxEntry).any() || (r_diag < kMinEntry).any())
        throw std::invalid_argument("CostWeights: entries outside [1e-6, 1e6]");
}

LinearModel build_hover_model(double mass_param, double gravity,
                              double attitude_tau, double dt) {
    if (!(mass_param > 0.0 && gravity > 0.0 && attitude_tau > 0.0 && dt > 0.0))
        throw std::invalid_argument("build_hover_model: all parameters must be > 0");

    Eigen::Matrix<double, kStateDim, kStateDim> Ac = Eigen::Matrix<double, kStateDim, kStateDim>::Zero();
    Eigen::Matrix<double, kStateDim, kInputDim> Bc = Eigen::Matrix<double, kStateDim, kInputDim>::Zero();

    Ac.block<3, 3>(kIdxPos, kIdxVel).setIdentity();
    Ac(kIdxVel + 0, kIdxPitch) = gravity;
    Ac(kIdxVel + 1, kIdxRoll) = -gravity;
    Ac(kIdxRoll, kIdxRoll) = -1.0 / attitude_tau;
    Ac(kIdxPitch, kIdxPitch) = -1.0 / attitude_tau;

    Bc(kIdxVel + 2, 2) = 1.0 / mass_param;
    Bc(kIdxRoll, 0) = 1.0 / attitude_tau;
    Bc(kIdxPitch, 1) = 1.0 / attitude_tau;

    // ZOH via the exponential of the augmented [[Ac, Bc], [0, 0]] block.
    constexpr int n = kStateDim, m = kInputDim;
    Eigen::Matrix<double, n + m, n + m> aug = Eigen::Matrix<double, n + m, n + m>::Zero();
    aug.topLeftCorner(n, n) = Ac;
    aug.topRightCorner(n, m) = Bc;
    const Eigen::Matrix<double, n + m, n + m> exp_aug = (aug * dt).exp();

    LinearModel model;
    model.A = exp_aug.topLeftCorner(n, n);
    model.B = exp_aug.topRightCorner(n, m);
    model.dt = dt;
    model.mass_param = mass_param;
    return model;
}

GainSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        const DareOptions& opts) {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
        R.rows() != B.cols() || R.cols() != B.cols())
        throw std::invalid_argument("solve_dare: inconsistent dimensions");

    // Doubling iteration: Ak -> Ak (I + Gk Hk)^-1 Ak with companion
    // updates for Gk and Hk; Hk converges quadratically to P.
    Eigen::MatrixXd Ak = A;
    Eigen::MatrixXd Gk = B * R.llt().solve(B.transpose());
    Eigen::MatrixXd Hk = Q;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(I + Gk * Hk);
        const Eigen::MatrixXd W = lu.solve(Ak);        // (I + G H)^-1 A
        const Eigen::MatrixXd WG = lu.solve(Gk);       // (I + G H)^-1 G

        const Eigen::MatrixXd Anext = Ak * W;
        const Eigen::MatrixXd Gnext = Gk + Ak * WG * Ak.transpose();
        Eigen::MatrixXd Hnext = Hk + W.transpose() * Hk * Ak;
        Hnext = 0.5 * (Hnext + Hnext.transpose().eval());

        const double diff = (Hnext - Hk).norm();
        Ak = Anext;
        Gk = Gnext;
        Hk = Hnext;
        if (diff <= opts.convergence_tol * std::max(1.0, Hk.norm())) {
            ++iter;
            break;
        }
    }
    if (iter >= opts.max_iter)
        throw DareError("solve_dare: no convergence within max_iter (model may not be stabilizable)");

    GainSolution sol;
    sol.P = Hk;
    const Eigen::MatrixXd BtP = B.transpose() * sol.P;
    sol.K = -(R + BtP * B).llt().solve(BtP * A);
    sol.iterations = iter;

    const Eigen::MatrixXd residual_mat =
        A.transpose() * sol.P * A - sol.P + A.transpose() * sol.P * B * sol.K + Q;
    sol.residual = residual_mat.norm();
    if (!(sol.residual < opts.residual_tol))
        throw DareError("solve_dare: residual " + std::to_string(sol.residual) +
                        " exceeds tolerance");
    return sol;
}

GainSolution solve_dare(const LinearModel& model, const CostWeights& weights,
                        const DareOptions& opts) {
    weights.validate();
    return solve_dare(model.A, model.B, weights.Q(), weights.R(), opts);
}

ControlCommand compute_control(const VehicleState& state, const ReferencePoint& ref,
                               const GainSolution& gain, const HoverCommand& hover,
                               const AdaptiveState& adapt, const ControlLimits& limits,
                               bool* saturated) {
    StateVec error;
    error.segment<3>(kIdxPos) = state.position_w - ref.position_ref;
    error.segment<3>(kIdxVel) = state.velocity_w - ref.velocity_ref;
    error(kIdxRoll) = state.roll_i;   // reference attitude is zero
    error(kIdxPitch) = state.pitch_i;

    const Eigen::Vector3d feedback = gain.K * error;
    ControlCommand cmd;
    cmd.roll_cmd = feedback(0) + adapt.roll_offset;
    cmd.pitch_cmd = feedback(1) + adapt.pitch_offset;
    cmd.thrust_delta = feedback(2) + adapt.thrust_offset;

    const double delta_min = limits.thrust_min - hover.f_hover;
    const double delta_max = limits.thrust_max - hover.f_hover;
    ControlCommand sat = cmd;
    sat.roll_cmd = std::clamp(cmd.roll_cmd, -limits.max_tilt, limits.max_tilt);
    sat.pitch_cmd = std::clamp(cmd.pitch_cmd, -limits.max_tilt, limits.max_tilt);
    sat.thrust_delta = std::clamp(cmd.thrust_delta, delta_min, delta_max);
    if (saturated)
        *saturated = sat.roll_cmd != cmd.roll_cmd || sat.pitch_cmd != cmd.pitch_cmd ||
                     sat.thrust_delta != cmd.thrust_delta;
    return sat;
}

CostWeights retune(const CostWeights& weights, RetuneTarget which, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("retune: factor must be > 0");
    CostWeights next = weights;
    auto clamp_entry = [](double v) {
        return std::clamp(v, CostWeights::kMinEntry, CostWeights::kMaxEntry);
    };
    switch (which) {
        case RetuneTarget::QPosition:
            for (int i = kIdxPos; i < kIdxPos + 3; ++i)
                next.q_diag(i) = clamp_entry(next.q_diag(i) * factor);
            break;
        case RetuneTarget::RAll:
            for (int i = 0; i < kInputDim; ++i)
                next.r_diag(i) = clamp_entry(next.r_diag(i) * factor);
            break;
    }
    return next;
}

} // namespace aeroloop
