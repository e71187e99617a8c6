#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edcim/metrics.hpp"
#include "edcim/parse.hpp"

#include "support/testgen.hpp"

#include <random>

using namespace edcim;

namespace {

EquationSystem sys(const std::string& text) {
    ParseResult r = parse_system(text);
    REQUIRE_MESSAGE(parse_ok(r), parse_error(r).describe());
    return parsed_system(r);
}

SolveOutcome unique_outcome(std::map<std::string, Rational> values) {
    SolveOutcome s;
    s.tag = SolveOutcome::Tag::Unique;
    s.assignment = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("identity distance is zero in normalized mode") {
    EquationSystem x = sys("a + b = 10\na - b = 2");
    SolveOutcome sx = solve(x);
    EqDReport r = eqd(x, sx, x, sx);
    CHECK(r.solution_dist == 0.0);
    CHECK(r.structural_dist == 0.0);
    CHECK(r.complexity_dist == 0.0);
    CHECK(r.eqd == 0.0);
}

TEST_CASE("component formulas match hand-computed values") {
    // the spec's worked example: N 9 vs 12, O 4 vs 4, matching solutions
    CHECK(structural_component(9, 12, EqdMode::Normalized) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(complexity_component(4, 4) == 0.0);
    double combined = (0.0 + 0.25 + 0.0) / 3.0;
    CHECK(combined == doctest::Approx(1.0 / 12).epsilon(1e-12));

    CHECK(structural_component(10, 5, EqdMode::Normalized) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(structural_component(10, 5, EqdMode::PaperLiteral) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(structural_component(0, 0, EqdMode::Normalized) == 0.0);
    CHECK(complexity_component(0, 0) == 0.0);
}

TEST_CASE("whole-report fixture") {
    // X: two equations, 10 nodes, 2 operators; Y: one equation, 5 nodes,
    // 1 operator; both unique with different value sets.
    EquationSystem x = sys("a + b = 10\na - b = 2");  // unique {6, 4}
    EquationSystem y = sys("a + b = 10");             // underdetermined
    SolveOutcome sx = solve(x);
    SolveOutcome sy = solve(y);
    EqDReport r = eqd(x, sx, y, sy);
    CHECK(r.solution_dist == 1.0);  // y is not unique
    CHECK(r.structural_dist == doctest::Approx(0.5).epsilon(1e-12));   // |10-5|/10
    CHECK(r.complexity_dist == doctest::Approx(0.5).epsilon(1e-12));   // |2-1|/2
    CHECK(r.eqd == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("paper literal mode flips the structural term") {
    EquationSystem x = sys("a + b = 10");
    SolveOutcome sx = solve(x);
    EqdOptions options;
    options.mode = EqdMode::PaperLiteral;
    EqDReport r = eqd(x, sx, x, sx, options);
    CHECK(r.structural_dist == 1.0);  // similarity form on identical systems
    CHECK(r.eqd == doctest::Approx(1.0 / 3).epsilon(1e-12));

    nlohmann::json j = r.to_json();
    CHECK(j["structural_formula"] == "1 - |N1-N2|/max(N1,N2)");
    EqDReport n = eqd(x, sx, x, sx);
    CHECK(n.to_json()["structural_formula"] == "|N1-N2|/max(N1,N2)");
}

TEST_CASE("solution distance details") {
    SolveOutcome a = unique_outcome({{"x", Rational(2)}, {"y", Rational(3)}});
    SolveOutcome b = unique_outcome({{"u", Rational(3)}, {"v", Rational(2)}});
    // sorted value vectors match regardless of names
    CHECK(solution_component(a, b, 1e-9) == 0.0);

    SolveOutcome c = unique_outcome({{"x", Rational(2)}});
    // padded: {2,3} vs {0,2}: L1 = 2 + 1 = 3, /2 = 1.5 -> clamped to 1
    CHECK(solution_component(a, c, 1e-9) == 1.0);

    SolveOutcome d = unique_outcome({{"x", Rational(2)}, {"y", Rational(4)}});
    CHECK(solution_component(a, d, 1e-9) == doctest::Approx(0.5).epsilon(1e-12));

    SolveOutcome under;
    under.tag = SolveOutcome::Tag::Underdetermined;
    CHECK(solution_component(a, under, 1e-9) == 1.0);

    SolveOutcome empty_a = unique_outcome({});
    SolveOutcome empty_b = unique_outcome({});
    CHECK(solution_component(empty_a, empty_b, 1e-9) == 0.0);
}

TEST_CASE("normalized structural distance is scale free") {
    std::mt19937 rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        long n1 = testgen::uniform(rng, 0, 50);
        long n2 = testgen::uniform(rng, 0, 50);
        long k = testgen::uniform(rng, 1, 9);
        CHECK(structural_component(n1, n2, EqdMode::Normalized) ==
              doctest::Approx(structural_component(k * n1, k * n2, EqdMode::Normalized))
                  .epsilon(1e-12));
    }
}

TEST_CASE("all components stay in the unit interval on random pairs") {
    std::mt19937 rng(73);
    for (int trial = 0; trial < 250; ++trial) {
        EquationSystem x = testgen::random_system(rng);
        EquationSystem y = testgen::random_system(rng);
        EqDReport r = eqd(x, solve(x), y, solve(y));
        for (double v : {r.solution_dist, r.structural_dist, r.complexity_dist, r.eqd}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        EqDReport self = eqd(x, solve(x), x, solve(x));
        CHECK(self.eqd == 0.0);
        EqDReport sym = eqd(y, solve(y), x, solve(x));
        CHECK(sym.eqd == doctest::Approx(r.eqd).epsilon(1e-12));
    }
}

TEST_CASE("delta eqd signs") {
    EquationSystem star = sys("x + y = 10\nx - y = 2");
    EquationSystem wrong = sys("x + y = 11");
    SolveOutcome solve_star = solve(star);
    SolveOutcome solve_wrong = solve(wrong);

    // corrected to the reference: strictly negative delta
    double before = eqd(wrong, solve_wrong, star, solve_star).eqd;
    double after = eqd(star, solve_star, star, solve_star).eqd;
    CHECK(after == 0.0);
    CHECK(after - before < 0.0);

    // unchanged system: exactly zero
    CHECK(eqd(wrong, solve_wrong, star, solve_star).eqd -
              eqd(wrong, solve_wrong, star, solve_star).eqd ==
          0.0);
}

TEST_CASE("improvement report fractions") {
    std::vector<ImprovementInput> inputs = {
        {"F2T", true, -0.5}, {"F2T", true, -0.1}, {"F2F", true, 0.2},
        {"F2F", true, 0.0},  {"T2T", false, {}},  {"T2F", true, 0.3},
    };
    ImprovementReport report = improvement_report(inputs);
    CHECK(report.categories.at("F2T").count == 2);
    CHECK(report.categories.at("F2T").frac_improved == 1.0);
    CHECK(report.categories.at("F2T").median == doctest::Approx(-0.3));
    CHECK(report.categories.at("F2F").count == 2);
    CHECK(report.categories.at("F2F").frac_improved == 0.0);
    CHECK(report.categories.at("F2F").frac_unchanged == 0.5);
    CHECK(report.categories.at("F2F").frac_degraded == 0.5);
    CHECK(report.categories.at("T2T").count == 0);  // no delta available
    CHECK(report.categories.at("T2F").count == 1);
    CHECK(report.categories.at("all_detected").count == 5);

    nlohmann::json j = report.to_json();
    CHECK(j["T2T"]["count"] == 0);
    CHECK_FALSE(j["T2T"].contains("median"));
    CHECK(j["F2T"]["frac_improved"] == 1.0);
}
