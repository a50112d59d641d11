#include "aeroloop/executor.hpp"

#include <algorithm>

namespace aeroloop {

ActionEffects ActionEffects::for_hover(const HoverCommand& hover) {
    ActionEffects effects;
    effects.thrust_step = 0.02 * hover.f_hover;
    effects.thrust_offset_limit = 0.5 * hover.f_hover;
    return effects;
}

void ActionEffects::validate() const {
    if (!(thrust_step > 0.0 && tilt_step > 0.0))
        throw std::invalid_argument("ActionEffects: steps must be > 0");
    if (!(tune_factor > 1.0))
        throw std::invalid_argument("ActionEffects: tune_factor must be > 1");
    if (!(thrust_offset_limit > 0.0 && tilt_offset_limit > 0.0))
        throw std::invalid_argument("ActionEffects: offset limits must be > 0");
}

ActionOutcome apply_actions(const Decision& decision, const AdaptiveState& adapt,
                            const CostWeights& weights, const ActionEffects& effects) {
    ActionOutcome out;
    out.adapt = adapt;
    out.weights = weights;

    auto clamp_thrust = [&](double v) {
        return std::clamp(v, -effects.thrust_offset_limit, effects.thrust_offset_limit);
    };
    auto clamp_tilt = [&](double v) {
        return std::clamp(v, -effects.tilt_offset_limit, effects.tilt_offset_limit);
    };

    for (const ActionName action : decision.actions) {
        switch (action) {
            case ActionName::IncreaseThrust:
                out.adapt.thrust_offset = clamp_thrust(out.adapt.thrust_offset + effects.thrust_step);
                break;
            case ActionName::DecreaseThrust:
                out.adapt.thrust_offset = clamp_thrust(out.adapt.thrust_offset - effects.thrust_step);
                break;
            // v_x responds to +pitch, v_y to -roll (hover-linearized model)
            case ActionName::AccelPositiveX:
                out.adapt.pitch_offset = clamp_tilt(out.adapt.pitch_offset + effects.tilt_step);
                break;
            case ActionName::AccelNegativeX:
                out.adapt.pitch_offset = clamp_tilt(out.adapt.pitch_offset - effects.tilt_step);
                break;
            case ActionName::AccelPositiveY:
                out.adapt.roll_offset = clamp_tilt(out.adapt.roll_offset - effects.tilt_step);
                break;
            case ActionName::AccelNegativeY:
                out.adapt.roll_offset = clamp_tilt(out.adapt.roll_offset + effects.tilt_step);
                break;
            case ActionName::TuneIncreasePositionPenalty:
                out.weights = retune(out.weights, RetuneTarget::QPosition, effects.tune_factor);
                out.needs_resolve = true;
                break;
            case ActionName::TuneDecreasePositionPenalty:
                out.weights = retune(out.weights, RetuneTarget::QPosition, 1.0 / effects.tune_factor);
                out.needs_resolve = true;
                break;
            case ActionName::TuneIncreaseActuationCost:
                out.weights = retune(out.weights, RetuneTarget::RAll, effects.tune_factor);
                out.needs_resolve = true;
                break;
            case ActionName::TuneDecreaseActuationCost:
                out.weights = retune(out.weights, RetuneTarget::RAll, 1.0 / effects.tune_factor);
                out.needs_resolve = true;
                break;
            case ActionName::EmergencyLanding:
                out.emergency = true;
                break;
            case ActionName::DoNothing:
                break;
        }
    }
    return out;
}

} // namespace aeroloop
