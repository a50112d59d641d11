#include "aeroloop/harness.hpp"

#include "aeroloop/textfmt.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace aeroloop {

namespace {

std::unique_ptr<DecisionPolicy> make_policy(const ScenarioSpec& spec) {
    switch (spec.policy.kind) {
        case PolicyKind::Rule:
            return std::make_unique<RuleBasedPolicy>(spec.prompt.include_tuning_apis);
        case PolicyKind::Replay:
            return std::make_unique<ReplayPolicy>(spec.policy.replay_path);
        case PolicyKind::Remote:
            return std::make_unique<RemotePolicy>(spec.client, spec.prompt);
        case PolicyKind::Null:
            return std::make_unique<NullPolicy>();
    }
    throw std::logic_error("make_policy: unreachable");
}

bool decisions_active(PhaseKind kind) {
    // query while flying the mission; once an abort is in progress the
    // policy has nothing left to decide
    return kind == PhaseKind::FollowTrajectory || kind == PhaseKind::Hover ||
           kind == PhaseKind::Land;
}

struct DriverResult {
    QueryRecord query;
    std::optional<Decision> decision; // empty on policy/parse failure
    std::string error;
    bool transport = false;
};

DriverResult run_policy(DecisionPolicy& policy, QueryRecord query,
                        const std::vector<Exchange>& history) {
    DriverResult result;
    result.query = std::move(query);
    try {
        result.decision = policy.decide(result.query, history);
    } catch (const PolicyError& err) {
        result.error = err.what();
        result.transport = err.transport;
    } catch (const ParseError& err) {
        result.error = err.what();
    }
    return result;
}

/// Hands queries to the policy and reports replies at tick boundaries.
/// Guarantees at most one request in flight.
class DecisionDriver {
public:
    virtual ~DecisionDriver() = default;
    virtual bool idle() const = 0;
    virtual void submit(QueryRecord query, std::vector<Exchange> history) = 0;
    virtual std::optional<DriverResult> poll() = 0;
};

/// Decides inline; used for the deterministic rule/replay/null policies
/// where latency is simulated rather than real.
class SyncDriver : public DecisionDriver {
public:
    explicit SyncDriver(DecisionPolicy& policy) : policy_(policy) {}
    bool idle() const override { return !ready_.has_value(); }
    void submit(QueryRecord query, std::vector<Exchange> history) override {
        ready_ = run_policy(policy_, std::move(query), history);
    }
    std::optional<DriverResult> poll() override {
        auto out = std::move(ready_);
        ready_.reset();
        return out;
    }

private:
    DecisionPolicy& policy_;
    std::optional<DriverResult> ready_;
};

/// Runs the policy on a worker thread so the stepping context never
/// blocks on the transport; the reply is picked up at a later tick.
class AsyncDriver : public DecisionDriver {
public:
    explicit AsyncDriver(DecisionPolicy& policy) : policy_(policy) {
        worker_ = std::thread([this] { run(); });
    }
    ~AsyncDriver() override {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        worker_.join();
    }

    bool idle() const override {
        std::lock_guard lock(mutex_);
        return !job_ && !done_;
    }
    void submit(QueryRecord query, std::vector<Exchange> history) override {
        {
            std::lock_guard lock(mutex_);
            job_.emplace(Job{std::move(query), std::move(history)});
        }
        cv_.notify_all();
    }
    std::optional<DriverResult> poll() override {
        std::lock_guard lock(mutex_);
        auto out = std::move(done_);
        done_.reset();
        return out;
    }

private:
    struct Job {
        QueryRecord query;
        std::vector<Exchange> history;
    };

    void run() {
        std::unique_lock lock(mutex_);
        while (true) {
            cv_.wait(lock, [this] { return stop_ || job_.has_value(); });
            if (stop_) return;
            Job job = std::move(*job_);
            lock.unlock();
            DriverResult result = run_policy(policy_, std::move(job.query), job.history);
            lock.lock();
            done_ = std::move(result);
            job_.reset();
        }
    }

    DecisionPolicy& policy_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::optional<Job> job_;
    std::optional<DriverResult> done_;
    bool stop_ = false;
    std::thread worker_;
};

std::string stable_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void compute_metrics(RunResult& result, const ScenarioSpec& spec) {
    RunMetrics& m = result.metrics;
    m.steady_window = std::min(20.0, spec.duration);
    const double window_start = spec.duration - m.steady_window;

    double sum_sq[3] = {0.0, 0.0, 0.0};
    std::size_t count = 0;
    for (const TelemetryRow& row : result.telemetry) {
        if (row.t < window_start) continue;
        for (int axis = 0; axis < 3; ++axis) sum_sq[axis] += row.errors[axis] * row.errors[axis];
        ++count;
    }
    if (count > 0) {
        m.rms_error_x = std::sqrt(sum_sq[0] / count);
        m.rms_error_y = std::sqrt(sum_sq[1] / count);
        m.rms_error_z = std::sqrt(sum_sq[2] / count);
    }
    if (!result.telemetry.empty()) m.final_altitude_error = result.telemetry.back().errors.z();

    // earliest time after which |e_z| stays below the threshold
    auto entry_time = [&](double threshold) -> std::optional<double> {
        std::optional<double> t;
        for (auto it = result.telemetry.rbegin(); it != result.telemetry.rend(); ++it) {
            if (std::abs(it->errors.z()) >= threshold) break;
            t = it->t;
        }
        return t;
    };
    m.time_to_ez_030 = entry_time(0.30);
    m.time_to_ez_010 = entry_time(0.10);

    for (const TelemetryRow& row : result.telemetry) {
        if (row.mission_phase == PhaseKind::EmergencyLanding) {
            m.emergency_landing_time = row.t;
            break;
        }
    }

    m.decisions_issued = static_cast<int>(result.conversation.size());
    for (const ConversationEntry& entry : result.conversation)
        for (const ActionName action : entry.actions)
            ++m.action_counts[std::string(to_string(action))];
}

RunResult run_with_driver(const ScenarioSpec& spec, DecisionDriver& driver) {
    spec.validate();

    PlantParams plant = spec.plant;
    DisturbanceSpec disturbance;
    disturbance.added_mass = spec.arm_mass;
    disturbance.attitude_bias_roll = spec.arm_bias_roll;
    disturbance.attitude_bias_pitch = spec.arm_bias_pitch;
    disturbance.periodic_pull = spec.rope_pull;
    disturbance.validate();

    const double mass_param = spec.controller_mass_fraction * plant.true_mass;
    const LinearModel model =
        build_hover_model(mass_param, plant.gravity, plant.attitude_tau, spec.dt);
    const HoverCommand hover{mass_param * plant.gravity};
    const ControlLimits limits{plant.max_tilt, plant.thrust_min, plant.thrust_max};
    ActionEffects effects = ActionEffects::for_hover(hover);
    effects.validate();

    CostWeights weights = spec.weights;
    GainSolution gain = solve_dare(model, weights);
    AdaptiveState adapt;

    // The controller expresses thrust about its own hover estimate; the
    // plant reads it about true hover. A wrong mass_param therefore
    // shows up as a thrust bias, which is the point of the fault.
    const double thrust_frame_shift = hover.f_hover - plant.true_mass * plant.gravity;

    VehicleState state;
    MissionPhase phase{PhaseKind::Idle, 0.0};
    VehicleState phase_entry_state = state;
    bool emergency_latched = false;

    SampleBuffer osc_buffer(static_cast<std::size_t>(spec.osc_buffer_size));
    const double osc_dt = spec.osc_sample_stride * spec.dt;

    std::vector<Exchange> history;
    int transport_failures = 0;
    double next_decision_t = spec.decision_period;
    const long latency_ticks = std::lround(spec.decision_latency / spec.dt);
    struct PendingDecision {
        long apply_tick;
        Decision decision;
    };
    std::optional<PendingDecision> pending;
    double last_latency = 0.0;

    RunResult result;
    const long n_ticks = std::lround(spec.duration / spec.dt);
    result.telemetry.reserve(n_ticks + 1);

    auto accept_result = [&](DriverResult&& arrived, long tick) {
        Decision decision;
        ConversationEntry entry;
        entry.t = arrived.query.t;
        entry.prompt = arrived.query.rendered;
        if (arrived.decision) {
            decision = std::move(*arrived.decision);
            transport_failures = 0;
        } else {
            if (arrived.transport) ++transport_failures;
            // failed cycle: hold course, or abort after repeated
            // transport losses (safety default)
            decision.actions = {arrived.transport && transport_failures >= 3
                                    ? ActionName::EmergencyLanding
                                    : ActionName::DoNothing};
            decision.short_label = arrived.transport ? "transport_error" : "parse_error";
            decision.explanation = arrived.error;
            decision.raw = render_decision(decision);
            entry.failed = true;
        }
        entry.response = decision.raw;
        entry.actions = decision.actions;
        entry.latency = decision.latency;
        result.conversation.push_back(entry);
        history.push_back({std::move(arrived.query), decision});
        // a reply that arrives after an emergency latched is logged but
        // no longer applied
        if (!emergency_latched || std::find(decision.actions.begin(), decision.actions.end(),
                                            ActionName::EmergencyLanding) != decision.actions.end())
            pending = PendingDecision{tick + std::max<long>(latency_ticks, 1), std::move(decision)};
    };

    for (long tick = 0; tick <= n_ticks; ++tick) {
        const double t = tick * spec.dt;

        // drain the decision mailbox at the tick boundary
        if (pending && tick >= pending->apply_tick) {
            const ActionOutcome outcome = apply_actions(pending->decision, adapt, weights, effects);
            adapt = outcome.adapt;
            weights = outcome.weights;
            if (outcome.emergency) emergency_latched = true;
            if (outcome.needs_resolve) gain = solve_dare(model, weights);
            last_latency = pending->decision.latency;
            pending.reset();
        }

        const MissionPhase next_phase = fsm_step(phase, spec.plan, t, state, emergency_latched);
        if (next_phase.kind != phase.kind) phase_entry_state = state;
        phase = next_phase;

        const ReferencePoint ref = generate_reference(phase, spec.plan, t, phase_entry_state);
        const ControlCommand cmd = compute_control(state, ref, gain, hover, adapt, limits);

        const FailureReport tick_report = check_failures(state, ref, spec.thresholds);
        TelemetryRow row;
        row.t = t;
        row.position = state.position_w;
        row.reference = ref.position_ref;
        row.errors = state.position_w - ref.position_ref;
        row.cmd_roll = cmd.roll_cmd;
        row.cmd_pitch = cmd.pitch_cmd;
        row.cmd_thrust_delta = cmd.thrust_delta;
        row.offset_roll = adapt.roll_offset;
        row.offset_pitch = adapt.pitch_offset;
        row.offset_thrust = adapt.thrust_offset;
        for (const FailureCode code : tick_report.codes)
            row.failure_codes.push_back(static_cast<int>(code));
        row.mission_phase = phase.kind;
        row.decision_latency = last_latency;
        result.telemetry.push_back(std::move(row));

        if (tick % spec.osc_sample_stride == 0)
            osc_buffer.push(state.position_w - ref.position_ref);

        if (auto arrived = driver.poll()) accept_result(std::move(*arrived), tick);

        if (driver.idle() && !pending && !emergency_latched && t + 1e-9 >= next_decision_t &&
            decisions_active(phase.kind)) {
            next_decision_t = t + spec.decision_period;

            std::string extra;
            if (osc_buffer.full()) {
                const auto snapshot = osc_buffer.snapshot();
                if (const auto osc = detect_oscillation(snapshot, osc_dt, spec.osc_band,
                                                        spec.osc_amp_threshold))
                    extra = render_oscillation_message(*osc);
            }

            QueryRecord query;
            query.t = t;
            query.report = check_failures(state, ref, spec.thresholds, extra);
            query.rendered = format_query(query.report);
            driver.submit(std::move(query), history);

            if (auto arrived = driver.poll()) accept_result(std::move(*arrived), tick);
        }

        if (tick < n_ticks) {
            // controller-frame delta -> plant-frame delta
            ControlCommand plant_cmd = cmd;
            plant_cmd.thrust_delta += thrust_frame_shift;
            state = step_plant(state, plant_cmd, plant, disturbance, t, spec.dt);
        }
    }

    result.final_phase = phase.kind;
    result.mission_completed = phase.kind == PhaseKind::Done;
    compute_metrics(result, spec);
    return result;
}

} // namespace

RunResult run_experiment(const ScenarioSpec& spec) {
    auto policy = make_policy(spec);
    if (spec.policy.kind == PolicyKind::Remote) {
        AsyncDriver driver(*policy);
        return run_with_driver(spec, driver);
    }
    return run_experiment(spec, *policy);
}

RunResult run_experiment(const ScenarioSpec& spec, DecisionPolicy& policy) {
    SyncDriver driver(policy);
    return run_with_driver(spec, driver);
}

std::string telemetry_csv(const RunResult& result) {
    std::string out =
        "t,position_x,position_y,position_z,reference_x,reference_y,reference_z,"
        "error_x,error_y,error_z,cmd_roll,cmd_pitch,cmd_thrust_delta,"
        "offset_roll,offset_pitch,offset_thrust,failure_codes,mission_phase,decision_latency\n";
    for (const TelemetryRow& row : result.telemetry) {
        out += stable_number(row.t);
        for (int axis = 0; axis < 3; ++axis) out += "," + stable_number(row.position[axis]);
        for (int axis = 0; axis < 3; ++axis) out += "," + stable_number(row.reference[axis]);
        for (int axis = 0; axis < 3; ++axis) out += "," + stable_number(row.errors[axis]);
        out += "," + stable_number(row.cmd_roll);
        out += "," + stable_number(row.cmd_pitch);
        out += "," + stable_number(row.cmd_thrust_delta);
        out += "," + stable_number(row.offset_roll);
        out += "," + stable_number(row.offset_pitch);
        out += "," + stable_number(row.offset_thrust);
        out += ",";
        for (std::size_t i = 0; i < row.failure_codes.size(); ++i) {
            if (i) out += ';';
            out += std::to_string(row.failure_codes[i]);
        }
        out += ",";
        out += to_string(row.mission_phase);
        out += "," + stable_number(row.decision_latency);
        out += "\n";
    }
    return out;
}

std::string conversation_log(const RunResult& result) {
    std::string out;
    for (const ConversationEntry& entry : result.conversation) {
        out += "t = " + fixed(entry.t, 2) + "s: Prompt " + entry.prompt + "\n";
        out += "t = " + fixed(entry.t, 2) + "s: Response " + entry.response + "\n";
    }
    return out;
}

std::string conversation_jsonl(const RunResult& result) {
    std::string out;
    for (const ConversationEntry& entry : result.conversation) {
        nlohmann::json j;
        j["t"] = entry.t;
        j["prompt"] = entry.prompt;
        j["response"] = entry.response;
        nlohmann::json actions = nlohmann::json::array();
        for (const ActionName action : entry.actions) actions.push_back(std::string(to_string(action)));
        j["actions"] = std::move(actions);
        j["latency"] = entry.latency;
        j["failed"] = entry.failed;
        out += j.dump() + "\n";
    }
    return out;
}

nlohmann::json metrics_json(const RunResult& result) {
    const RunMetrics& m = result.metrics;
    nlohmann::json j;
    j["rms_error_x"] = m.rms_error_x;
    j["rms_error_y"] = m.rms_error_y;
    j["rms_error_z"] = m.rms_error_z;
    j["final_altitude_error"] = m.final_altitude_error;
    j["steady_window"] = m.steady_window;
    if (m.time_to_ez_030) j["time_to_ez_030"] = *m.time_to_ez_030;
    if (m.time_to_ez_010) j["time_to_ez_010"] = *m.time_to_ez_010;
    if (m.emergency_landing_time) j["emergency_landing_time"] = *m.emergency_landing_time;
    j["action_counts"] = m.action_counts;
    j["decisions_issued"] = m.decisions_issued;
    j["final_phase"] = std::string(to_string(result.final_phase));
    j["mission_completed"] = result.mission_completed;
    return j;
}

namespace {

// minimal static line plot: reference vs actual for one axis
std::string svg_axis_plot(const RunResult& result, int axis, const std::string& label) {
    constexpr double kW = 860.0, kH = 300.0, kMargin = 45.0;
    double lo = 1e300, hi = -1e300;
    for (const TelemetryRow& row : result.telemetry) {
        lo = std::min({lo, row.position[axis], row.reference[axis]});
        hi = std::max({hi, row.position[axis], row.reference[axis]});
    }
    if (!(hi > lo)) {
        hi = lo + 1.0;
        lo -= 1.0;
    }
    const double t_max = result.telemetry.empty() ? 1.0 : result.telemetry.back().t;
    auto px = [&](double t) { return kMargin + (kW - 2 * kMargin) * t / t_max; };
    auto py = [&](double v) { return kH - kMargin - (kH - 2 * kMargin) * (v - lo) / (hi - lo); };

    auto polyline = [&](auto getter, const char* color, const char* dash) {
        std::ostringstream pts;
        const std::size_t stride = std::max<std::size_t>(1, result.telemetry.size() / 2000);
        for (std::size_t i = 0; i < result.telemetry.size(); i += stride)
            pts << px(result.telemetry[i].t) << "," << py(getter(result.telemetry[i])) << " ";
        return "  <polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\"" +
               (dash && *dash ? " stroke-dasharray=\"" + std::string(dash) + "\"" : "") +
               " points=\"" + pts.str() + "\"/>\n";
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "  <line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin << "\" x2=\"" << kW - kMargin
        << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\"/>\n"
        << "  <line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
        << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\"/>\n"
        << "  <text x=\"" << kW / 2 << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">"
        << label << " position vs reference</text>\n"
        << "  <text x=\"" << kW / 2 << "\" y=\"" << kH - 8
        << "\" text-anchor=\"middle\" font-size=\"11\">t [s] (0 to " << stable_number(t_max)
        << "), range [" << stable_number(lo) << ", " << stable_number(hi) << "] m</text>\n"
        << polyline([axis](const TelemetryRow& r) { return r.reference[axis]; }, "#888888", "5,4")
        << polyline([axis](const TelemetryRow& r) { return r.position[axis]; }, "#1f5fbf", "")
        << "</svg>\n";
    return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_outputs: cannot write " + path.string());
    out << content;
}

} // namespace

void emit_outputs(const RunResult& result, const ScenarioSpec& spec,
                  const std::filesystem::path& out_dir, bool plot) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "telemetry.csv", telemetry_csv(result));
    write_file(out_dir / "conversation.log", conversation_log(result));
    write_file(out_dir / "conversation.jsonl", conversation_jsonl(result));

    nlohmann::json metrics = metrics_json(result);
    metrics["scenario"] = spec.name;
    write_file(out_dir / "metrics.json", metrics.dump(2) + "\n");

    if (plot) {
        const char* labels[3] = {"x", "y", "z"};
        for (int axis = 0; axis < 3; ++axis)
            write_file(out_dir / ("plot_" + std::string(labels[axis]) + ".svg"),
                       svg_axis_plot(result, axis, labels[axis]));
    }
}

} // namespace aeroloop
