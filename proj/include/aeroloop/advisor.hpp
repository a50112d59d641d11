#pragma once

#include "aeroloop/llm_client.hpp"
#include "aeroloop/monitor.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aeroloop {

class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Decision backend failure (transport, replay exhaustion). `transport`
/// marks errors that count toward the harness's consecutive-failure
/// escalation.
class PolicyError : public std::runtime_error {
public:
    PolicyError(const std::string& what, bool transport_failure = false)
        : std::runtime_error(what), transport(transport_failure) {}
    bool transport = false;
};

/// The whitelisted action APIs. The textual names are wire format: they
/// appear verbatim in the prompt and in replies.
enum class ActionName {
    IncreaseThrust,
    DecreaseThrust,
    AccelPositiveX,
    AccelNegativeX,
    AccelPositiveY,
    AccelNegativeY,
    EmergencyLanding,
    DoNothing,
    TuneDecreaseActuationCost,
    TuneIncreaseActuationCost,
    TuneIncreasePositionPenalty,
    TuneDecreasePositionPenalty,
};

inline constexpr int kActionCount = 12;

std::string_view to_string(ActionName action);
std::optional<ActionName> action_from_string(std::string_view name);
bool is_tuning_action(ActionName action);

/// All actions, or only the non-tuning ones.
std::vector<ActionName> action_whitelist(bool include_tuning_apis);

struct PromptConfig {
    bool include_tuning_apis = true;
    enum class RiskEmphasis { Normal, Strong } risk_emphasis = RiskEmphasis::Normal;
    std::string platform_noun = "multirotor";
};

struct Decision {
    std::vector<ActionName> actions; // non-empty, no duplicates
    std::string short_label;
    std::string explanation;
    std::string raw;
    double latency = 0.0;     // s
    bool had_unknown = false; // reply contained identifiers outside the whitelist
};

/// One query cycle: what was asked, when, and the exact rendered text.
struct QueryRecord {
    double t = 0.0;
    FailureReport report;
    std::string rendered; // "([codes], '{info}')"
};

struct Exchange {
    QueryRecord query;
    Decision decision;
};

/// The hand-written initial prompt (failure-code list, check_failures
/// contract, action API imports, output-format instruction, emergency
/// emphasis). Pure function of the config; byte-identical across calls.
std::string build_initial_prompt(const PromptConfig& config);

/// Renders a failure report as "([c1, c2], '{info}')".
std::string format_query(const FailureReport& report);

/// "VERY DANGEROUS oscillations on {axis}-axis. Frequency is {f:.2f}
/// [Hz], amplitude is {a:.2f} [m]."
std::string render_oscillation_message(const OscillationReport& report);

/// Extracts the first bracketed list of quoted identifiers from a reply,
/// validating each against `valid`. A quoted string following the list
/// becomes the short label; the remaining prose is the explanation.
/// Unknown identifiers are dropped (had_unknown is set). Throws
/// ParseError when no list is found or nothing in it validates.
Decision parse_decision(const std::string& raw, std::span<const ActionName> valid);

/// Renders a decision in the output style the prompt asks for, e.g.
/// list_of_function_names_to_be_executed_right_now: ["a", "b"], "label", "explanation"
std::string render_decision(const Decision& decision);

class DecisionPolicy {
public:
    virtual ~DecisionPolicy() = default;
    virtual Decision decide(const QueryRecord& query, std::span<const Exchange> history) = 0;
};

/// Deterministic code-to-action mapping that mirrors the remote
/// behaviour seen in recorded sessions: DANGEROUS info aborts, each code
/// maps to its counteracting command, and a code persisting for three
/// consecutive queries escalates to position-penalty tuning (when the
/// tuning APIs are in the prompt).
class RuleBasedPolicy : public DecisionPolicy {
public:
    explicit RuleBasedPolicy(bool include_tuning_apis = true)
        : include_tuning_apis_(include_tuning_apis) {}
    Decision decide(const QueryRecord& query, std::span<const Exchange> history) override;

    static constexpr int kPersistenceCycles = 3;

private:
    bool include_tuning_apis_ = true;
};

/// Replays decisions from a recorded conversation (one JSON object per
/// line with a "response" field). Ignores the query content; throws
/// PolicyError on exhaustion.
class ReplayPolicy : public DecisionPolicy {
public:
    explicit ReplayPolicy(const std::string& path);
    Decision decide(const QueryRecord& query, std::span<const Exchange> history) override;
    std::size_t remaining() const { return responses_.size() - next_; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

/// Queries a chat-completion endpoint: initial prompt as the first user
/// message, then the past exchanges, then the current query. History is
/// truncated oldest-pair-first to a character budget, always keeping the
/// initial prompt.
class RemotePolicy : public DecisionPolicy {
public:
    RemotePolicy(ClientConfig client, PromptConfig prompt,
                 std::size_t history_char_budget = 48000);
    Decision decide(const QueryRecord& query, std::span<const Exchange> history) override;

private:
    ClientConfig client_;
    PromptConfig prompt_config_;
    std::string initial_prompt_;
    std::vector<ActionName> whitelist_;
    std::size_t history_char_budget_;
};

/// Always answers do_nothing; the experiment baseline.
class NullPolicy : public DecisionPolicy {
public:
    Decision decide(const QueryRecord& query, std::span<const Exchange> history) override;
};

} // namespace aeroloop
