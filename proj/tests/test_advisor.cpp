#include "aeroloop/advisor.hpp"

#include "transcript_fixtures.hpp"

#include <doctest.h>

#include <fstream>

using namespace aeroloop;

namespace {

QueryRecord make_query(const FailureReport& report, double t = 0.0) {
    return {t, report, format_query(report)};
}

FailureReport report_for(std::vector<FailureCode> codes, std::string info = {}) {
    return {std::move(codes), std::move(info)};
}

} // namespace

TEST_CASE("initial prompt carries the expected phrasing") {
    const PromptConfig config;
    const std::string prompt = build_initial_prompt(config);

    CHECK(prompt.find("Try to think like a drone control engineer.") != std::string::npos);
    CHECK(prompt.find("# Inside the codebase of my multirotor") == 0);
    CHECK(prompt.find("NO_ISSUE = 0") != std::string::npos);
    CHECK(prompt.find("FLYING_TOO_LARGE_NEGATIVE_POSITION_ERROR_Y = 6") != std::string::npos);
    CHECK(prompt.find("current_failures = check_failures()") != std::string::npos);
    CHECK(prompt.find("DO NOT output function names to be called in the future") != std::string::npos);
    CHECK(prompt.find("emergency_landing, do_nothing,") != std::string::npos);
    CHECK(prompt.find("tune_controller_by_decreasing_penalty_on_position_errors") != std::string::npos);
    CHECK(prompt.find("you must perform an emergency landing.") != std::string::npos);
    CHECK(prompt.find("MUST") == std::string::npos);
}

TEST_CASE("prompt ablation removes every tuning mention") {
    PromptConfig config;
    config.include_tuning_apis = false;
    const std::string prompt = build_initial_prompt(config);
    CHECK(prompt.find("tune_controller_by") == std::string::npos);
    CHECK(prompt.find("increase_thrust") != std::string::npos);
}

TEST_CASE("risk emphasis switches the casing of must") {
    PromptConfig config;
    config.risk_emphasis = PromptConfig::RiskEmphasis::Strong;
    const std::string prompt = build_initial_prompt(config);
    CHECK(prompt.find("you MUST perform an emergency landing.") != std::string::npos);
}

TEST_CASE("prompt is a pure function of its config") {
    const PromptConfig config;
    CHECK(build_initial_prompt(config) == build_initial_prompt(config));

    PromptConfig other;
    other.platform_noun = "hexacopter";
    CHECK(build_initial_prompt(other).find("my hexacopter") != std::string::npos);
}

TEST_CASE("format_query renders the recorded byte format") {
    CHECK(format_query(report_for({FailureCode::NoIssue})) == "([0], '')");
    CHECK(format_query(report_for({FailureCode::FlyingTooLow, FailureCode::PosErrorNegativeY},
                                  "z error is -0.14, y error is -0.44, ")) ==
          "([4, 6], 'z error is -0.14, y error is -0.44, ')");
}

TEST_CASE("oscillation message template") {
    CHECK(render_oscillation_message({Axis::Y, 0.67, 0.19}) ==
          "VERY DANGEROUS oscillations on y-axis. Frequency is 0.67 [Hz], amplitude is 0.19 [m].");
    CHECK(render_oscillation_message({Axis::X, 1.0, 0.5}) ==
          "VERY DANGEROUS oscillations on x-axis. Frequency is 1.00 [Hz], amplitude is 0.50 [m].");
    // formatting oracle: printf-style rounding at two decimals
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", 0.666);
    const std::string rendered = render_oscillation_message({Axis::X, 0.666, 0.1});
    CHECK(rendered.find(std::string("Frequency is ") + buf) != std::string::npos);
    CHECK(rendered.find("0.67") != std::string::npos);
}

TEST_CASE("parse_decision recovers every recorded action list") {
    const auto all = action_whitelist(true);
    for (const auto& cycle : fixtures::transcript_cycles()) {
        const Decision decision = parse_decision(cycle.response, all);
        CHECK(decision.actions == cycle.actions);
        CHECK(!decision.had_unknown);
    }

    const Decision plain = parse_decision(fixtures::kNoIssueResponse, all);
    CHECK(plain.actions == std::vector<ActionName>{ActionName::DoNothing});
    CHECK(plain.short_label == "no_issue");
    CHECK(plain.explanation.find("Since there are currently no issues") == 1); // after the quote

    const Decision reasoned = parse_decision(fixtures::kNoIssueReasonResponse, all);
    CHECK(reasoned.actions == std::vector<ActionName>{ActionName::DoNothing});
    CHECK(reasoned.short_label.empty());
    CHECK(reasoned.explanation.rfind("reason:", 0) == 0);
}

TEST_CASE("parse_decision edge cases") {
    const auto all = action_whitelist(true);

    SUBCASE("unknown-only list is an error") {
        CHECK_THROWS_AS(parse_decision("[\"fly_away\"]", all), ParseError);
    }
    SUBCASE("no list at all is an error") {
        CHECK_THROWS_AS(parse_decision("I would increase thrust.", all), ParseError);
    }
    SUBCASE("numeric echo lists are skipped") {
        const Decision decision =
            parse_decision("current_failure was ([4, 6], '...'), so [\"increase_thrust\"]", all);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::IncreaseThrust});
    }
    SUBCASE("unknown identifiers are dropped with a warning") {
        const Decision decision =
            parse_decision("[\"increase_thrust\", \"retract_gear\"]", all);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::IncreaseThrust});
        CHECK(decision.had_unknown);
    }
    SUBCASE("duplicates collapse") {
        const Decision decision =
            parse_decision("[\"do_nothing\", \"do_nothing\"]", all);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::DoNothing});
    }
    SUBCASE("tuning actions are invalid when ablated") {
        const auto no_tuning = action_whitelist(false);
        const Decision decision = parse_decision(
            "[\"increase_thrust\", \"tune_controller_by_increasing_penalty_on_position_errors\"]",
            no_tuning);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::IncreaseThrust});
        CHECK(decision.had_unknown);
    }
    SUBCASE("single quotes are accepted") {
        const Decision decision = parse_decision("['decrease_thrust']", all);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::DecreaseThrust});
    }
}

TEST_CASE("rule decisions round-trip through their rendered form") {
    RuleBasedPolicy policy(true);
    const auto all = action_whitelist(true);
    const std::vector<FailureReport> reports = {
        report_for({FailureCode::NoIssue}),
        report_for({FailureCode::FlyingTooLow, FailureCode::PosErrorNegativeY}, "z error is -0.2, "),
        report_for({FailureCode::FlyingTooHigh, FailureCode::PosErrorPositiveX}, "x error is 0.2, "),
        report_for({FailureCode::NoIssue}, "VERY DANGEROUS oscillations on y-axis. ..."),
    };
    std::vector<Exchange> history;
    for (const auto& report : reports) {
        const Decision decision = policy.decide(make_query(report), history);
        const Decision reparsed = parse_decision(decision.raw, all);
        CHECK(reparsed.actions == decision.actions);
    }
}

TEST_CASE("rule policy mirrors the recorded choices") {
    RuleBasedPolicy policy(true);
    std::vector<Exchange> history;

    SUBCASE("codes [4, 6] map to thrust and +y acceleration") {
        const Decision decision = policy.decide(
            make_query(report_for({FailureCode::FlyingTooLow, FailureCode::PosErrorNegativeY},
                                  "z error is -0.14, y error is -0.44, ")),
            history);
        CHECK(decision.actions ==
              std::vector<ActionName>{ActionName::IncreaseThrust, ActionName::AccelPositiveY});
    }
    SUBCASE("DANGEROUS info aborts regardless of codes") {
        const Decision decision = policy.decide(
            make_query(report_for({FailureCode::PosErrorNegativeY, FailureCode::PosErrorNegativeX},
                                  "y error is -0.65, x error is -0.28, VERY DANGEROUS oscillations "
                                  "on y-axis. Frequency is 0.67 [Hz], amplitude is 0.19 [m].")),
            history);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::EmergencyLanding});
    }
    SUBCASE("clean reports do nothing") {
        const Decision decision = policy.decide(make_query(report_for({FailureCode::NoIssue})), history);
        CHECK(decision.actions == std::vector<ActionName>{ActionName::DoNothing});
    }
}

TEST_CASE("rule policy escalates to tuning after three consecutive cycles") {
    RuleBasedPolicy policy(true);
    const FailureReport low = report_for({FailureCode::FlyingTooLow}, "z error is -0.40, ");

    std::vector<Exchange> history;
    for (int cycle = 0; cycle < 3; ++cycle) {
        const QueryRecord query = make_query(low, 2.0 * cycle);
        const Decision decision = policy.decide(query, history);
        const bool tuned =
            std::find(decision.actions.begin(), decision.actions.end(),
                      ActionName::TuneIncreasePositionPenalty) != decision.actions.end();
        CHECK(tuned == (cycle >= 2));
        history.push_back({query, decision});
    }

    // never with the tuning APIs removed from the prompt
    RuleBasedPolicy ablated(false);
    std::vector<Exchange> long_history;
    for (int cycle = 0; cycle < 6; ++cycle) {
        const QueryRecord query = make_query(low, 2.0 * cycle);
        const Decision decision = ablated.decide(query, long_history);
        for (const ActionName action : decision.actions) CHECK(!is_tuning_action(action));
        long_history.push_back({query, decision});
    }
}

TEST_CASE("rule policy is deterministic given query and history") {
    RuleBasedPolicy a(true), b(true);
    std::vector<Exchange> history;
    const QueryRecord query = make_query(report_for({FailureCode::FlyingTooLow}, "z error is -0.2, "));
    const Decision da = a.decide(query, history);
    const Decision db = b.decide(query, history);
    CHECK(da.actions == db.actions);
    CHECK(da.raw == db.raw);
}

TEST_CASE("replay policy returns recorded decisions in order, then exhausts") {
    const std::string path = "replay_fixture_test.jsonl";
    {
        std::ofstream out(path);
        out << R"x({"t": 1.0, "prompt": "([0], '')", "response": "[\"do_nothing\"]"})x" << "\n";
        out << R"x({"t": 3.0, "prompt": "([4], '...')", "response": "[\"increase_thrust\"]"})x" << "\n";
    }
    ReplayPolicy policy(path);
    std::vector<Exchange> history;
    CHECK(policy.decide(make_query(report_for({FailureCode::NoIssue})), history).actions ==
          std::vector<ActionName>{ActionName::DoNothing});
    CHECK(policy.decide(make_query(report_for({FailureCode::NoIssue})), history).actions ==
          std::vector<ActionName>{ActionName::IncreaseThrust});
    CHECK_THROWS_AS(policy.decide(make_query(report_for({FailureCode::NoIssue})), history),
                    PolicyError);
    std::remove(path.c_str());
}

TEST_CASE("whitelist respects the prompt ablation flag") {
    CHECK(action_whitelist(true).size() == kActionCount);
    const auto ablated = action_whitelist(false);
    CHECK(ablated.size() == kActionCount - 4);
    for (const ActionName action : ablated) CHECK(!is_tuning_action(action));
}
