#pragma once

#include "aeroloop/advisor.hpp"
#include "aeroloop/controller.hpp"

namespace aeroloop {

/// Step sizes and clamps for the action APIs ("pre-specified amounts").
struct ActionEffects {
    double thrust_step = 0.1962;       // N per increase/decrease_thrust call
    double tilt_step = 0.0175;         // rad per accel_* call, about 1 degree
    double tune_factor = 2.0;          // weight scale per tune_controller_* call
    double thrust_offset_limit = 4.905; // N, |thrust_offset| clamp
    double tilt_offset_limit = 0.2;     // rad, |roll/pitch offset| clamp

    /// Defaults derived from a hover command: 2% of hover thrust per
    /// step, clamp at half the hover thrust.
    static ActionEffects for_hover(const HoverCommand& hover);
    void validate() const;
};

struct ActionOutcome {
    AdaptiveState adapt;
    CostWeights weights = CostWeights::defaults();
    bool emergency = false;     // emergency_landing was requested
    bool needs_resolve = false; // a tuning action changed the weights
};

/// Applies a validated decision to the adaptive offsets and the cost
/// weights, in list order. Offsets are clamped to the configured limits;
/// emergency latching is the caller's job (a later decision can never
/// un-land).
ActionOutcome apply_actions(const Decision& decision, const AdaptiveState& adapt,
                            const CostWeights& weights, const ActionEffects& effects);

} // namespace aeroloop
