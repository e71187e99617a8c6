#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edcim/canonical.hpp"
#include "edcim/pipeline.hpp"

#include <map>

using namespace edcim;

namespace {

EquationSystem sys(const std::string& text) {
    ParseResult r = parse_system(text);
    REQUIRE_MESSAGE(parse_ok(r), parse_error(r).describe());
    return parsed_system(r);
}

GroundTruth gt_values(std::vector<double> values) {
    GroundTruth gt;
    gt.values = std::move(values);
    return gt;
}

ResponseSet responses(std::vector<std::string> texts) {
    return ResponseSet::from_texts("p", std::move(texts));
}

const TemplateCatalog& catalog() {
    static TemplateCatalog c = TemplateCatalog::load(EDCIM_DATA_DIR);
    return c;
}

// Question text doubles as the script: "<gen>|<gen>|...@<correction>",
// generation entries cycle per call index.
class ScriptBackend : public CompletionBackend {
public:
    CompletionResult complete(const PromptBundle& bundle, int index) override {
        const std::string& user = bundle.user_message;
        size_t q = user.rfind("Question: ");
        REQUIRE(q != std::string::npos);
        size_t end = user.find('\n', q);
        std::string script = user.substr(q + 10, end - q - 10);
        std::string gen_part = script.substr(0, script.find('@'));
        std::string corr_part = script.substr(script.find('@') + 1);
        if (bundle.user_message.ends_with("Corrected Equations:")) {
            return {corr_part, {10, 5}};
        }
        std::vector<std::string> options;
        size_t start = 0;
        while (true) {
            size_t bar = gen_part.find('|', start);
            options.push_back(gen_part.substr(start, bar == std::string::npos ? std::string::npos
                                                                              : bar - start));
            if (bar == std::string::npos) break;
            start = bar + 1;
        }
        return {options[index % options.size()], {10, 5}};
    }
};

// Equations use ';' in the script and are expanded here.
Problem script_problem(const std::string& id, const std::string& script,
                       std::vector<double> answers, const std::string& reference = "") {
    Problem p;
    p.id = id;
    std::string expanded = script;
    for (auto& c : expanded) {
        if (c == ';') c = '\n';
    }
    p.question = expanded;
    p.answers = std::move(answers);
    if (!reference.empty()) p.reference_equations = sys(reference);
    return p;
}

struct Harness {
    LlmClient generator;
    LlmClient corrector;
    RuleSet rules;
    Pipeline pipeline;

    explicit Harness(RunOptions options, RuleSet rule_set = {})
        : generator(ProviderConfig{}, std::make_unique<ScriptBackend>()),
          corrector(ProviderConfig{}, std::make_unique<ScriptBackend>()),
          rules(std::move(rule_set)),
          pipeline(catalog(), generator, corrector, &rules, options) {}
};

RunOptions options_with(DetectorType detector, int generations = 4) {
    RunOptions o;
    o.detector = detector;
    o.generations = generations;
    o.workers = 2;
    return o;
}

}  // namespace

TEST_CASE("judge on unique outcomes matches values, not names") {
    SolveOutcome s;
    s.tag = SolveOutcome::Tag::Unique;
    s.assignment = {{"x", Rational(18)}, {"y", Rational(9)}};
    CHECK(judge(s, nullptr, gt_values({18, 9}), 1e-4));
    CHECK(judge(s, nullptr, gt_values({9, 18}), 1e-4));
    CHECK(judge(s, nullptr, gt_values({18}), 1e-4));  // subset matching
    CHECK_FALSE(judge(s, nullptr, gt_values({19}), 1e-4));
    CHECK_FALSE(judge(s, nullptr, gt_values({18, 18}), 1e-4));  // multiset: one 18 available
    CHECK_FALSE(judge(s, nullptr, gt_values({}), 1e-4));
}

TEST_CASE("judge rejects inconsistent and ill-formed outcomes") {
    SolveOutcome inconsistent;
    inconsistent.tag = SolveOutcome::Tag::Inconsistent;
    CHECK_FALSE(judge(inconsistent, nullptr, gt_values({1}), 1e-4));
    SolveOutcome ill;
    ill.tag = SolveOutcome::Tag::IllFormed;
    CHECK_FALSE(judge(ill, nullptr, gt_values({1}), 1e-4));
}

TEST_CASE("judge searches underdetermined systems for the ground truth") {
    EquationSystem s = sys("x + y = 1");
    SolveOutcome outcome = solve(s);
    REQUIRE(outcome.tag == SolveOutcome::Tag::Underdetermined);
    CHECK(judge(outcome, &s, gt_values({0.3, 0.7}), 1e-6));
    CHECK_FALSE(judge(outcome, &s, gt_values({0.3, 0.8}), 1e-6));
    // a single value always fits a one-dimensional solution space
    CHECK(judge(outcome, &s, gt_values({5}), 1e-6));
    // more values than variables cannot be placed
    CHECK_FALSE(judge(outcome, &s, gt_values({0.3, 0.3, 0.4}), 1e-6));

    // determined variables participate in the match
    EquationSystem mixed = sys("x = 4\ny + z = 1");
    SolveOutcome m = solve(mixed);
    REQUIRE(m.tag == SolveOutcome::Tag::Underdetermined);
    CHECK(judge(m, &mixed, gt_values({4, 0.25, 0.75}), 1e-6));
    CHECK_FALSE(judge(m, &mixed, gt_values({5, 0.25, 0.75}), 1e-6));
}

TEST_CASE("outcome classification partition") {
    CHECK(classify_outcome(false, true) == Outcome4::F2T);
    CHECK(classify_outcome(true, false) == Outcome4::T2F);
    CHECK(classify_outcome(true, true) == Outcome4::T2T);
    CHECK(classify_outcome(false, false) == Outcome4::F2F);
}

TEST_CASE("self-consistency vote picks the plurality class") {
    std::vector<std::string> texts(6, "a + b = 10");
    texts.insert(texts.end(), 4, "a - b = 2");
    auto vote = sc_vote(responses(texts), false);
    REQUIRE(vote.has_value());
    CHECK(render_canonical(*vote) == render_canonical(sys("a + b = 10")));
}

TEST_CASE("solvable-only vote filters unsolvable majorities") {
    std::vector<std::string> texts(6, "x = x + 1");  // inconsistent majority
    texts.insert(texts.end(), 4, "x = 2");
    auto unfiltered = sc_vote(responses(texts), false);
    REQUIRE(unfiltered.has_value());
    CHECK(render_canonical(*unfiltered) == render_canonical(sys("x = x + 1")));
    auto filtered = sc_vote(responses(texts), true);
    REQUIRE(filtered.has_value());
    CHECK(render_canonical(*filtered) == render_canonical(sys("x = 2")));
}

TEST_CASE("vote ties break on the earliest response") {
    auto vote = sc_vote(responses({"x = 2", "x = 1", "x = 1", "x = 2"}), false);
    REQUIRE(vote.has_value());
    CHECK(render_canonical(*vote) == "x = 2");
}

TEST_CASE("all-unparsable responses yield no vote") {
    CHECK_FALSE(sc_vote(responses({"nope", "nothing"}), false).has_value());
    CHECK_FALSE(sc_vote(responses({"x = x + 1"}), true).has_value());
}

TEST_CASE("unflagged samples keep the initial system") {
    Harness h(options_with(DetectorType::Edr));  // empty rule set: flags nothing
    Problem p = script_problem("s1", "x = 4@x = 5", {4});
    SampleResult r = h.pipeline.run_sample(p);
    CHECK_FALSE(r.failed);
    CHECK_FALSE(r.flagged);
    CHECK(r.corrector_calls == 0);
    CHECK(r.generator_calls == 4);
    REQUIRE(r.x1.has_value());
    REQUIRE(r.x2.has_value());
    CHECK(canonical_equal(*r.x1, *r.x2));
    CHECK(r.correct1 == r.correct2);
    CHECK(r.outcome == Outcome4::T2T);
    CHECK(r.delta_skip_reason == "no ground-truth equations");
}

TEST_CASE("detector all flags every sample and corrects") {
    Harness h(options_with(DetectorType::All));
    Problem p = script_problem("s2", "x = 5@x = 4", {4}, "x = 4");
    SampleResult r = h.pipeline.run_sample(p);
    CHECK(r.flagged);
    CHECK(r.corrector_calls == 1);
    CHECK_FALSE(r.correct1);
    CHECK(r.correct2);
    CHECK(r.outcome == Outcome4::F2T);
    REQUIRE(r.delta_eqd.has_value());
    CHECK(*r.delta_eqd < 0.0);  // moved onto the reference
    REQUIRE(r.correction_prompt.has_value());
    CHECK(r.correction_prompt->ends_with("Corrected Equations:"));
}

TEST_CASE("oracle detector flags exactly the incorrect samples") {
    std::vector<Problem> problems = {
        script_problem("ok", "x = 4@x = 9", {4}),
        script_problem("bad", "x = 5@x = 4", {4}),
    };
    Harness h(options_with(DetectorType::Oracle));
    auto results = h.pipeline.run_dataset(problems);
    REQUIRE(results.size() == 2);
    CHECK_FALSE(results[0].flagged);
    CHECK(results[0].outcome == Outcome4::T2T);
    CHECK(results[1].flagged);
    CHECK(results[1].outcome == Outcome4::F2T);
    // oracle never flags correct samples, so T2F is structurally impossible
    AggregateReport report = h.pipeline.aggregate(results, problems);
    CHECK(report.outcomes.at("T2F") == 0);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
}

TEST_CASE("solvability detector reacts to unsolvable primaries") {
    Harness h(options_with(DetectorType::Solvability));
    Problem bad = script_problem("s3", "x = x + 1@x = 2", {2});
    SampleResult r = h.pipeline.run_sample(bad);
    CHECK(r.flagged);
    CHECK(r.unsolvable_feedback);
    REQUIRE(r.correction_prompt.has_value());
    CHECK(r.correction_prompt->find("The system is unsolvable") != std::string::npos);
    CHECK(r.outcome == Outcome4::F2T);

    Problem good = script_problem("s4", "x = 2@x = 3", {2});
    SampleResult ok = h.pipeline.run_sample(good);
    CHECK_FALSE(ok.flagged);
}

TEST_CASE("unparsable corrections are judged incorrect") {
    Harness h(options_with(DetectorType::All));
    Problem p = script_problem("s5", "x = 5@I refuse to answer.", {4}, "x = 4");
    SampleResult r = h.pipeline.run_sample(p);
    CHECK(r.flagged);
    CHECK_FALSE(r.x2.has_value());
    CHECK(r.solve2.tag == SolveOutcome::Tag::IllFormed);
    CHECK_FALSE(r.correct2);
    CHECK(r.outcome == Outcome4::F2F);
    CHECK(r.delta_skip_reason == "initial or corrected system unparsable");
}

TEST_CASE("corrector calls equal flagged count across a dataset") {
    std::vector<Problem> problems;
    for (int i = 0; i < 12; ++i) {
        std::string value = std::to_string(i % 3);
        // first response wrong on every third problem
        std::string first = (i % 3 == 0) ? "x = 99" : "x = " + value;
        problems.push_back(script_problem("d" + std::to_string(i),
                                          first + "|x = " + value + "@x = " + value,
                                          {double(i % 3)}));
    }
    Harness h(options_with(DetectorType::Oracle));
    auto results = h.pipeline.run_dataset(problems);
    AggregateReport report = h.pipeline.aggregate(results, problems);
    int flagged = 0, corrector_calls = 0;
    for (const auto& r : results) {
        flagged += r.flagged ? 1 : 0;
        corrector_calls += r.corrector_calls;
    }
    CHECK(flagged == corrector_calls);
    CHECK(report.flagged == flagged);
    CHECK(h.corrector.ledger().calls.load() == corrector_calls);
    CHECK(h.generator.ledger().calls.load() == 12 * 4);

    // outcome partition and the accuracy delta identity
    int outcome_total = 0;
    for (const auto& [name, count] : report.outcomes) outcome_total += count;
    CHECK(outcome_total == report.samples);
    double delta = static_cast<double>(report.outcomes.at("F2T") - report.outcomes.at("T2F")) /
                   report.samples;
    CHECK(report.accuracy_after - report.accuracy_before == doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("edr detector uses learned conditions and renders feedback") {
    // one condition: entropy >= 0.9 flags diverse responses
    RuleSet rules;
    Condition c;
    c.key = FeatureKey::ShannonEntropy;
    c.dir = Direction::High;
    c.lo = 0.9;
    c.violation = catalog().find(FeatureKey::ShannonEntropy, Direction::High)->violation;
    c.suggestion = catalog().find(FeatureKey::ShannonEntropy, Direction::High)->suggestion;
    rules.conditions.push_back(c);

    Harness h(options_with(DetectorType::Edr), rules);
    Problem diverse = script_problem("s6", "x = 1|x = 2|x = 3|x = 4@x = 1", {1});
    SampleResult r = h.pipeline.run_sample(diverse);
    CHECK(r.flagged);
    REQUIRE(r.fired.size() == 1);
    REQUIRE(r.correction_prompt.has_value());
    CHECK(r.correction_prompt->find("The responses are highly diverse") != std::string::npos);
    CHECK(r.correction_prompt->find("Focus on extracting more consistent equations") !=
          std::string::npos);

    Problem uniform = script_problem("s7", "x = 1@x = 2", {1});
    CHECK_FALSE(h.pipeline.run_sample(uniform).flagged);
}

TEST_CASE("sample results serialize with stable fields") {
    Harness h(options_with(DetectorType::All));
    Problem p = script_problem("s8", "x = 5@x = 4", {4}, "x = 4");
    SampleResult r = h.pipeline.run_sample(p);
    nlohmann::json j = r.to_json();
    CHECK(j["id"] == "s8");
    CHECK(j["flagged"] == true);
    CHECK(j["outcome"] == "F2T");
    CHECK(j["x1"] == "x = 5");
    CHECK(j["x2"] == "x = 4");
    CHECK(j["solve1"] == "unique");
    CHECK(j["features"]["problem_id"] == "s8");
    CHECK(j.contains("delta_eqd"));
}
