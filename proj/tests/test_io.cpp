// SPDX-License-Identifier: Apache-2.0
// Scenario files, report tables and error-to-exit-code mapping.
#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "xtalk/errors.hpp"
#include "xtalk/report.hpp"
#include "xtalk/scenario.hpp"

using namespace xtalk;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no xtalk::Error thrown");
    return ErrorCode::InvalidParams;
}

Scenario random_scenario(test::Gen& g) {
    Scenario s;
    s.channel.seed = static_cast<std::uint64_t>(g.integer(1, 1 << 30));
    s.channel.werner.p = g.integer(2, 12);
    s.channel.werner.loop_length_m = g.uniform(100.0, 1500.0);
    s.channel.grid.f_end = g.uniform(1e6, 30e6);
    s.channel.decimate = static_cast<std::size_t>(g.integer(1, 8));
    s.budget.psd_dbm_hz = {g.uniform(-70.0, -40.0)};
    s.budget.noise_psd_dbm_hz = g.uniform(-150.0, -120.0);
    s.budget.gamma_gap_db = g.uniform(0.0, 12.0);
    s.perturbation.d_bits = g.integer(4, 24);
    s.trials.n_trials = g.integer(1, 5000);
    s.trials.statistic = Statistic::Quantile;
    s.trials.quantile = g.uniform(0.5, 0.999);
    s.curve = {g.integer(1, 8), g.integer(9, 30)};
    if (g.uniform(0, 1) < 0.5) s.design.target_tone = g.log_uniform(1e-4, 1.0);
    if (g.uniform(0, 1) < 0.5) s.design.target_relative = g.log_uniform(1e-4, 0.5);
    s.design.lengths = {300.0, g.uniform(400.0, 2000.0)};
    if (g.uniform(0, 1) < 0.5) s.werner_fit = WernerFit{g.uniform(1e-4, 1e-2), g.uniform(0.0, 1.0), 1e-8};
    return s;
}

bool same(const Scenario& a, const Scenario& b) {
    return a.channel == b.channel && a.budget == b.budget && a.perturbation == b.perturbation &&
           a.trials == b.trials && a.curve == b.curve && a.design == b.design && a.werner_fit == b.werner_fit;
}

}  // namespace

TEST_CASE("scenario survives format and parse unchanged", "[scenario][property]") {
    test::Gen g(801);
    for (int n = 0; n < 200; ++n) {
        const Scenario s = random_scenario(g);
        const std::string text = format_scenario(s);
        const Scenario back = parse_scenario(text);
        REQUIRE(same(s, back));
        REQUIRE(format_scenario(back) == text);
        REQUIRE(scenario_hash(back) == scenario_hash(s));
    }
}

TEST_CASE("scenario hash separates scenarios and ignores key order", "[scenario]") {
    Scenario a;
    Scenario b = a;
    b.budget.gamma_gap_db = 10.8;
    CHECK(scenario_hash(a) != scenario_hash(b));

    // Same content, keys in a different order and partial (defaults filled in).
    const Scenario c = parse_scenario(R"({"curve": {"d_max": 20, "d_min": 8}, "format": "xtalk-scenario"})");
    CHECK(scenario_hash(c) == scenario_hash(a));
}

TEST_CASE("scenario parser rejects malformed documents", "[scenario]") {
    CHECK(code_of([] { parse_scenario("{not json"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_scenario(R"({"budgte": {}})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_scenario(R"({"budget": {"gap_db": 3}})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_scenario(R"({"format": "something-else"})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_scenario(R"({"format_version": 99})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_scenario(R"({"trials": {"statistic": "median"}})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_scenario(R"({"curve": {"d_min": "eight"}})"); }) == ErrorCode::ParseError);
}

TEST_CASE("scenario validation catches bad values", "[scenario]") {
    Scenario s;
    s.curve = {12, 8};
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidParams);
    s = Scenario{};
    s.trials.quantile = 1.5;
    s.trials.statistic = Statistic::Quantile;
    CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidParams);
    CHECK_NOTHROW(Scenario{}.validate());

    // The PSD list length is only known once the channel is built.
    s = Scenario{};
    s.channel.werner.p = 3;
    s.channel.grid = ToneGrid::with_count(0.0, 1e6, 4);
    s.budget.psd_dbm_hz = {-60.0, -61.0};
    const auto e = build_ensemble(s);
    CHECK(code_of([&] { bind_budget(s, e); }) == ErrorCode::InvalidBudget);
}

// Synthesis draws phases per tone index, so only the grid and the
// deterministic direct paths carry over from the full grid.
TEST_CASE("decimation keeps every n-th tone of the grid", "[scenario]") {
    Scenario s;
    s.channel.werner.p = 3;
    s.channel.grid = ToneGrid::with_count(0.0, 1e6, 40);
    const auto full = build_ensemble(s);
    s.channel.decimate = 4;
    const auto sparse = build_ensemble(s);
    REQUIRE(sparse.tones() == 10);
    for (std::size_t k = 0; k < sparse.tones(); ++k) {
        CHECK(sparse.snapshots[k].freq == full.snapshots[4 * k].freq);
        CHECK(sparse.snapshots[k].h.diagonal() == full.snapshots[4 * k].h.diagonal());
    }
}

TEST_CASE("numbers print round-trip exact", "[report][property]") {
    test::Gen g(802);
    for (int n = 0; n < 2000; ++n) {
        const double v = g.log_uniform(1e-300, 1e300) * (n % 2 ? -1.0 : 1.0);
        REQUIRE(std::stod(num(v)) == v);
    }
    CHECK(num(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(num(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(num(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(num(42) == "42");
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("report tables carry the header and reject ragged rows", "[report]") {
    Table t;
    t.kind = "demo";
    t.meta = {{"tau", "0.01"}};
    t.columns = {"row_type", "x"};
    t.add({"point", "1"});
    CHECK(code_of([&] { t.add({"point"}); }) == ErrorCode::InvalidParams);
    CHECK(format_table(t, 0x1234) ==
          "# format: xtalk-report\n# format_version: 1\n# tool_version: " + std::string(kToolVersion) +
              "\n# kind: demo\n# scenario_hash: 0000000000001234\n# tau: 0.01\nrow_type,x\npoint,1\n");
}

TEST_CASE("loss table has a row per tone and a band row per user", "[report]") {
    Scenario s;
    s.channel.werner.p = 3;
    s.channel.grid = ToneGrid::with_count(0.0, 1e6, 5);
    const auto e = build_ensemble(s);
    const auto b = bind_budget(s, e);
    const LossReport r = analyze_losses(b, e, std::vector<CMatrix>(e.tones(), CMatrix::Zero(3, 3)));
    const Table t = loss_table(r, e, {0, 1, 2});
    REQUIRE(t.rows.size() == 3 * (5 + 1));
    CHECK(t.rows[5][0] == "band");
    CHECK(t.rows[5][5] == "0");
    CHECK(t.rows[0][0] == "tone");
}

TEST_CASE("error codes map to the documented exit statuses", "[errors]") {
    for (auto c : {ErrorCode::InvalidParams, ErrorCode::DominanceViolation, ErrorCode::ParseError,
                   ErrorCode::InvalidBudget})
        CHECK(exit_code(c) == 2);
    for (auto c : {ErrorCode::SingularDiagonal, ErrorCode::InsufficientData, ErrorCode::SingularChannel,
                   ErrorCode::RangeError, ErrorCode::NumericalError})
        CHECK(exit_code(c) == 3);
    for (auto c : {ErrorCode::RelativeLossUndefined, ErrorCode::BoundInapplicable, ErrorCode::BitDepthTooSmall,
                   ErrorCode::FloorNonpositive, ErrorCode::TargetUnreachable})
        CHECK(exit_code(c) == 4);
}
