#include "aeroloop/advisor.hpp"

#include "aeroloop/textfmt.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

namespace aeroloop {

namespace {

constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "increase_thrust",
    "decrease_thrust",
    "accel_positive_x",
    "accel_negative_x",
    "accel_positive_y",
    "accel_negative_y",
    "emergency_landing",
    "do_nothing",
    "tune_controller_by_decreasing_the_cost_of_actuation_usage",
    "tune_controller_by_increasing_the_cost_of_actuation_usage",
    "tune_controller_by_increasing_penalty_on_position_errors",
    "tune_controller_by_decreasing_penalty_on_position_errors",
};

} // namespace

std::string_view to_string(ActionName action) {
    return kActionNames[static_cast<int>(action)];
}

std::optional<ActionName> action_from_string(std::string_view name) {
    for (int i = 0; i < kActionCount; ++i)
        if (kActionNames[i] == name) return static_cast<ActionName>(i);
    return std::nullopt;
}

bool is_tuning_action(ActionName action) {
    switch (action) {
        case ActionName::TuneDecreaseActuationCost:
        case ActionName::TuneIncreaseActuationCost:
        case ActionName::TuneIncreasePositionPenalty:
        case ActionName::TuneDecreasePositionPenalty:
            return true;
        default:
            return false;
    }
}

std::vector<ActionName> action_whitelist(bool include_tuning_apis) {
    std::vector<ActionName> out;
    for (int i = 0; i < kActionCount; ++i) {
        const auto action = static_cast<ActionName>(i);
        if (!include_tuning_apis && is_tuning_action(action)) continue;
        out.push_back(action);
    }
    return out;
}

std::string build_initial_prompt(const PromptConfig& config) {
    std::string part1 = "# Inside the codebase of my " + config.platform_noun +
                        " I found the following python code:";

    const std::string part2 =
        "# list of possible issues/failures in mission planner/controller:\n"
        "NO_ISSUE = 0\n"
        "FLYING_TOO_HIGH = 3\n"
        "FLYING_TOO_LOW= 4\n"
        "FLYING_TOO_LARGE_POSITIVE_POSITION_ERROR_X = 7\n"
        "FLYING_TOO_LARGE_NEGATIVE_POSITION_ERROR_X = 8\n"
        "FLYING_TOO_LARGE_POSITIVE_POSITION_ERROR_Y = 5\n"
        "FLYING_TOO_LARGE_NEGATIVE_POSITION_ERROR_Y = 6";

    const std::string part3 =
        "# check current failure using check_failure. outputs a list of possible failures, for example [2, 3],\n"
        "# and a string with additional information. The string may be empty.\n"
        "# Example current_failure: ([2, 3], 'position error = [0.1, -0.1, 1.5]')\n"
        "current_failures = check_failures()";

    std::string part4 =
        "# possible failure mitigation strategies\n"
        "from controller import (\n"
        "  # modify control input\n"
        "  increase_thrust, decrease_thrust, accel_positive_x, accel_negative_x, accel_positive_y, accel_negative_y,\n"
        "  # Mission-level decisions\n"
        "  emergency_landing, do_nothing,\n";
    if (config.include_tuning_apis) {
        part4 +=
            "  # Controller tuning -- we use a LQR\n"
            "  tune_controller_by_decreasing_the_cost_of_actuation_usage,\n"
            "  tune_controller_by_increasing_the_cost_of_actuation_usage,\n"
            "  tune_controller_by_increasing_penalty_on_position_errors,\n"
            "  tune_controller_by_decreasing_penalty_on_position_errors,\n";
    }
    part4 += ")";

    const std::string part5 =
        "From now on, I provide you with the value of the variable \"current_failure\",\n"
        "and your output needs to be your best guess of the function names in the python list\n"
        "\"list_of_function_names_to_be_executed_right_now\".\n"
        "For instance, your output: [\"emergency_landing\"],\"low_battery_voltage\",\n"
        "\"because the drone can hardly move it is safer to land\"\n"
        "Try to think like a drone control engineer.";

    const std::string part6 =
        "DO NOT output function names to be called in the future, but account for past problems to come up\n"
        "with your guess of the functions in \"list_of_function_names_to_be_executed_right_now\".";

    const char* must = config.risk_emphasis == PromptConfig::RiskEmphasis::Strong ? "MUST" : "must";
    const std::string part7 =
        std::string("If problems persist, do not hesitate to emergency land.\n"
                    "if your actions do not take the desired effect, you ") +
        must + " perform an emergency landing.";

    return part1 + "\n\n" + part2 + "\n\n" + part3 + "\n\n" + part4 + "\n\n" +
           part5 + "\n\n" + part6 + "\n\n" + part7;
}

std::string format_query(const FailureReport& report) {
    std::string out = "([";
    for (std::size_t i = 0; i < report.codes.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(static_cast<int>(report.codes[i]));
    }
    out += "], '" + report.info + "')";
    return out;
}

std::string render_oscillation_message(const OscillationReport& report) {
    std::string out = "VERY DANGEROUS oscillations on ";
    out += axis_label(report.axis);
    out += "-axis. Frequency is " + fixed(report.frequency, 2) +
           " [Hz], amplitude is " + fixed(report.amplitude, 2) + " [m].";
    return out;
}

namespace {

bool is_quote(char c) { return c == '"' || c == '\''; }

// quoted tokens within [begin, end)
std::vector<std::string> quoted_tokens(const std::string& text, std::size_t begin, std::size_t end) {
    std::vector<std::string> tokens;
    std::size_t i = begin;
    while (i < end) {
        if (is_quote(text[i])) {
            const char quote = text[i];
            const std::size_t close = text.find(quote, i + 1);
            if (close == std::string::npos || close >= end) break;
            tokens.push_back(text.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            ++i;
        }
    }
    return tokens;
}

std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n,";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

} // namespace

Decision parse_decision(const std::string& raw, std::span<const ActionName> valid) {
    Decision decision;
    decision.raw = raw;

    // first bracketed list that actually contains quoted identifiers
    // (replies may echo the numeric code list from the query first)
    std::size_t list_end = std::string::npos;
    std::vector<std::string> tokens;
    for (std::size_t open = raw.find('['); open != std::string::npos; open = raw.find('[', open + 1)) {
        const std::size_t close = raw.find(']', open);
        if (close == std::string::npos) break;
        tokens = quoted_tokens(raw, open + 1, close);
        if (!tokens.empty()) {
            list_end = close;
            break;
        }
    }
    if (list_end == std::string::npos)
        throw ParseError("parse_decision: no bracketed list of quoted identifiers");

    for (const std::string& token : tokens) {
        const auto action = action_from_string(token);
        if (!action || std::find(valid.begin(), valid.end(), *action) == valid.end()) {
            decision.had_unknown = true;
            continue;
        }
        if (std::find(decision.actions.begin(), decision.actions.end(), *action) ==
            decision.actions.end())
            decision.actions.push_back(*action);
    }
    if (decision.actions.empty())
        throw ParseError("parse_decision: no identifier in the list is a valid action");

    // optional quoted short label right after the list, then free prose
    std::size_t i = list_end + 1;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == ',' || raw[i] == '\n' || raw[i] == '\r' || raw[i] == '\t'))
        ++i;
    if (i < raw.size() && is_quote(raw[i])) {
        const std::size_t close = raw.find(raw[i], i + 1);
        if (close != std::string::npos) {
            decision.short_label = raw.substr(i + 1, close - i - 1);
            i = close + 1;
        }
    }
    decision.explanation = trim(std::string_view(raw).substr(std::min(i, raw.size())));
    return decision;
}

std::string render_decision(const Decision& decision) {
    std::string out = "list_of_function_names_to_be_executed_right_now: [";
    for (std::size_t i = 0; i < decision.actions.size(); ++i) {
        if (i) out += ", ";
        out += '"';
        out += to_string(decision.actions[i]);
        out += '"';
    }
    out += "], \"" + decision.short_label + "\", \"" + decision.explanation + "\"";
    return out;
}

namespace {

struct CodeRule {
    FailureCode code;
    ActionName action;
    std::string_view label;
};

constexpr std::array<CodeRule, 6> kCodeRules = {{
    {FailureCode::FlyingTooHigh, ActionName::DecreaseThrust, "flying_too_high"},
    {FailureCode::FlyingTooLow, ActionName::IncreaseThrust, "flying_too_low"},
    {FailureCode::PosErrorPositiveY, ActionName::AccelNegativeY, "positive_y_error"},
    {FailureCode::PosErrorNegativeY, ActionName::AccelPositiveY, "negative_y_error"},
    {FailureCode::PosErrorPositiveX, ActionName::AccelNegativeX, "positive_x_error"},
    {FailureCode::PosErrorNegativeX, ActionName::AccelPositiveX, "negative_x_error"},
}};

bool report_has_code(const FailureReport& report, FailureCode code) {
    return std::find(report.codes.begin(), report.codes.end(), code) != report.codes.end();
}

// how many consecutive queries, ending with the current one, carry `code`
int consecutive_cycles(FailureCode code, std::span<const Exchange> history) {
    int count = 1;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (!report_has_code(it->query.report, code)) break;
        ++count;
    }
    return count;
}

} // namespace

Decision RuleBasedPolicy::decide(const QueryRecord& query, std::span<const Exchange> history) {
    Decision decision;

    if (query.report.info.find("DANGEROUS") != std::string::npos) {
        decision.actions = {ActionName::EmergencyLanding};
        decision.short_label = "dangerous_oscillations";
        decision.explanation =
            "The reported oscillations indicate unstable flight; aborting the mission.";
    } else if (report_has_code(query.report, FailureCode::NoIssue)) {
        decision.actions = {ActionName::DoNothing};
        decision.short_label = "no_issue";
        decision.explanation = "No failure codes are active; no corrective action is needed.";
    } else {
        std::string label;
        bool persistent = false;
        for (const CodeRule& rule : kCodeRules) {
            if (!report_has_code(query.report, rule.code)) continue;
            decision.actions.push_back(rule.action);
            if (!label.empty()) label += "_and_";
            label += rule.label;
            if (consecutive_cycles(rule.code, history) >= kPersistenceCycles) persistent = true;
        }
        if (persistent && include_tuning_apis_)
            decision.actions.push_back(ActionName::TuneIncreasePositionPenalty);
        decision.short_label = label;
        decision.explanation = persistent && include_tuning_apis_
            ? "Errors persist across several cycles; correcting the offsets and penalizing position errors harder."
            : "Applying the corrective command for each active failure code.";
    }

    decision.raw = render_decision(decision);
    return decision;
}

ReplayPolicy::ReplayPolicy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PolicyError("ReplayPolicy: cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto entry = nlohmann::json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.contains("response"))
            throw PolicyError("ReplayPolicy: bad record in " + path);
        responses_.push_back(entry.at("response").get<std::string>());
    }
}

Decision ReplayPolicy::decide(const QueryRecord& query, std::span<const Exchange> history) {
    (void)query;
    (void)history;
    if (next_ >= responses_.size()) throw PolicyError("ReplayPolicy: transcript exhausted");
    static const std::vector<ActionName> all = action_whitelist(true);
    return parse_decision(responses_[next_++], all);
}

RemotePolicy::RemotePolicy(ClientConfig client, PromptConfig prompt,
                           std::size_t history_char_budget)
    : client_(std::move(client)),
      prompt_config_(std::move(prompt)),
      initial_prompt_(build_initial_prompt(prompt_config_)),
      whitelist_(action_whitelist(prompt_config_.include_tuning_apis)),
      history_char_budget_(history_char_budget) {}

Decision RemotePolicy::decide(const QueryRecord& query, std::span<const Exchange> history) {
    // evict oldest exchanges first; the initial prompt always stays
    std::size_t budget = initial_prompt_.size() + query.rendered.size();
    std::size_t first = history.size();
    while (first > 0) {
        const Exchange& ex = history[first - 1];
        const std::size_t cost = ex.query.rendered.size() + ex.decision.raw.size();
        if (budget + cost > history_char_budget_) break;
        budget += cost;
        --first;
    }

    std::vector<ChatMessage> messages;
    messages.push_back({ChatRole::User, initial_prompt_});
    for (std::size_t i = first; i < history.size(); ++i) {
        messages.push_back({ChatRole::User, history[i].query.rendered});
        messages.push_back({ChatRole::Assistant, history[i].decision.raw});
    }
    messages.push_back({ChatRole::User, query.rendered});

    const auto start = std::chrono::steady_clock::now();
    std::string reply;
    try {
        reply = complete(messages, client_);
    } catch (const ClientError& err) {
        throw PolicyError(std::string("remote policy transport failure: ") + err.what(), true);
    }
    Decision decision = parse_decision(reply, whitelist_);
    decision.latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return decision;
}

Decision NullPolicy::decide(const QueryRecord& query, std::span<const Exchange> history) {
    (void)query;
    (void)history;
    Decision decision;
    decision.actions = {ActionName::DoNothing};
    decision.short_label = "baseline";
    decision.explanation = "Null policy baseline; never intervenes.";
    decision.raw = render_decision(decision);
    return decision;
}

} // namespace aeroloop
