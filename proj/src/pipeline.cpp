#include "edcim/pipeline.hpp"

#include "edcim/canonical.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace edcim {

std::string_view detector_name(DetectorType detector) {
    switch (detector) {
        case DetectorType::All: return "all";
        case DetectorType::Oracle: return "oracle";
        case DetectorType::Solvability: return "solvability";
        case DetectorType::Edr: return "edr";
        case DetectorType::EdrSolvability: return "edr_solvability";
    }
    return "edr_solvability";
}

std::optional<DetectorType> detector_from_name(std::string_view name) {
    if (name == "all") return DetectorType::All;
    if (name == "oracle") return DetectorType::Oracle;
    if (name == "solvability") return DetectorType::Solvability;
    if (name == "edr") return DetectorType::Edr;
    if (name == "edr_solvability") return DetectorType::EdrSolvability;
    return std::nullopt;
}

GroundTruth ground_truth_of(const Problem& problem) {
    GroundTruth gt;
    gt.problem_id = problem.id;
    gt.values = problem.answers;
    if (gt.values.empty() && problem.reference_equations) {
        SolveOutcome ref = solve(*problem.reference_equations);
        if (ref.unique()) {
            for (const auto& [name, value] : ref.assignment) gt.values.push_back(to_double(value));
        }
    }
    if (problem.reference_equations) gt.reference = &*problem.reference_equations;
    return gt;
}

namespace {

// Greedy interval matching over sorted values: every ground-truth value must
// find a distinct assignment value within tol.
bool values_subset(std::vector<double> gt, std::vector<double> vals, double tol) {
    std::sort(gt.begin(), gt.end());
    std::sort(vals.begin(), vals.end());
    size_t j = 0;
    for (double g : gt) {
        while (j < vals.size() && vals[j] < g - tol) ++j;
        if (j >= vals.size() || vals[j] > g + tol) return false;
        ++j;
    }
    return true;
}

constexpr long kMaxPlacements = 200000;

bool place_values(const EquationSystem& system, const std::vector<std::string>& vars,
                  const std::map<std::string, Rational>& determined,
                  const std::vector<double>& values, size_t value_idx,
                  std::map<std::string, Rational>& assignment, std::vector<bool>& used,
                  double tol, long& budget) {
    if (value_idx == values.size()) {
        return check_solution(system, assignment, tol);
    }
    for (size_t v = 0; v < vars.size(); ++v) {
        if (used[v]) continue;
        if (--budget < 0) return false;
        const std::string& name = vars[v];
        auto det = determined.find(name);
        if (det != determined.end()) {
            if (std::abs(to_double(det->second) - values[value_idx]) > tol) continue;
            used[v] = true;
            if (place_values(system, vars, determined, values, value_idx + 1, assignment, used,
                             tol, budget)) {
                return true;
            }
            used[v] = false;
            continue;
        }
        used[v] = true;
        assignment[name] = rational_from_double(values[value_idx]);
        if (place_values(system, vars, determined, values, value_idx + 1, assignment, used, tol,
                         budget)) {
            return true;
        }
        assignment.erase(name);
        used[v] = false;
    }
    return false;
}

}  // namespace

bool judge(const SolveOutcome& outcome, const EquationSystem* system, const GroundTruth& gt,
           double tol) {
    if (gt.values.empty()) return false;
    switch (outcome.tag) {
        case SolveOutcome::Tag::Inconsistent:
        case SolveOutcome::Tag::IllFormed:
            return false;
        case SolveOutcome::Tag::Unique: {
            std::vector<double> vals;
            vals.reserve(outcome.assignment.size());
            for (const auto& [name, value] : outcome.assignment) vals.push_back(to_double(value));
            return values_subset(gt.values, std::move(vals), tol);
        }
        case SolveOutcome::Tag::Underdetermined: {
            if (!system) return false;
            std::vector<std::string> vars(system->variables.begin(), system->variables.end());
            if (gt.values.size() > vars.size()) return false;
            std::map<std::string, Rational> assignment = outcome.assignment;
            std::vector<bool> used(vars.size(), false);
            long budget = kMaxPlacements;
            return place_values(*system, vars, outcome.assignment, gt.values, 0, assignment,
                                used, tol, budget);
        }
    }
    return false;
}

std::string_view outcome_name(Outcome4 outcome) {
    switch (outcome) {
        case Outcome4::F2T: return "F2T";
        case Outcome4::T2F: return "T2F";
        case Outcome4::T2T: return "T2T";
        case Outcome4::F2F: return "F2F";
    }
    return "F2F";
}

Outcome4 classify_outcome(bool correct_before, bool correct_after) {
    if (correct_before) return correct_after ? Outcome4::T2T : Outcome4::T2F;
    return correct_after ? Outcome4::F2T : Outcome4::F2F;
}

std::optional<EquationSystem> sc_vote(const ResponseSet& rs, bool solvable_only) {
    struct Bucket {
        int count = 0;
        int first_index = 0;
    };
    std::map<std::string, Bucket> buckets;
    for (int i = 0; i < rs.size(); ++i) {
        if (!parse_ok(rs.parsed[i])) continue;
        const EquationSystem& system = parsed_system(rs.parsed[i]);
        if (solvable_only && !is_solvable(system)) continue;
        std::string key = render_canonical(system);
        auto [it, inserted] = buckets.try_emplace(std::move(key), Bucket{0, i});
        it->second.count += 1;
    }
    int best_index = -1, best_count = 0;
    for (const auto& [key, bucket] : buckets) {
        if (bucket.count > best_count ||
            (bucket.count == best_count && bucket.first_index < best_index)) {
            best_count = bucket.count;
            best_index = bucket.first_index;
        }
    }
    if (best_index < 0) return std::nullopt;
    return parsed_system(rs.parsed[best_index]);
}

Pipeline::Pipeline(const TemplateCatalog& catalog, LlmClient& generator, LlmClient& corrector,
                   const RuleSet* rules, RunOptions options)
    : catalog_(catalog),
      builder_(catalog),
      generator_(generator),
      corrector_(corrector),
      rules_(rules),
      options_(std::move(options)) {}

SampleResult Pipeline::run_sample(const Problem& problem) const {
    SampleResult r;
    r.id = problem.id;
    GroundTruth gt = ground_truth_of(problem);

    PromptBundle generation =
        builder_.build_generation_prompt(problem.id, problem.question, options_.prompt);
    std::vector<std::string> texts;
    try {
        texts = generator_.complete(generation, options_.generations);
    } catch (const LlmError& e) {
        r.failed = true;
        r.fail_reason = std::string("generation: ") + e.what();
        return r;
    }
    r.generator_calls = options_.generations;
    r.responses = ResponseSet::from_texts(problem.id, std::move(texts));
    r.features = extract_features(r.responses);

    if (auto idx = r.responses.primary_index()) {
        r.x1 = parsed_system(r.responses.parsed[*idx]);
        r.x1_raw = r.responses.raw_texts[*idx];
    } else {
        r.x1_raw = r.responses.raw_texts.empty() ? "" : r.responses.raw_texts.front();
        r.solve1.reason = "unparsable response";
    }
    if (r.x1) r.solve1 = solve(*r.x1);
    r.correct1 = judge(r.solve1, r.x1 ? &*r.x1 : nullptr, gt, options_.judge_tol);

    const bool unsolvable = !r.solve1.solvable();
    switch (options_.detector) {
        case DetectorType::All:
            r.flagged = true;
            break;
        case DetectorType::Oracle:
            r.flagged = !r.correct1;
            break;
        case DetectorType::Solvability:
            r.unsolvable_feedback = unsolvable;
            r.flagged = unsolvable;
            break;
        case DetectorType::Edr: {
            Detection d = rules_ ? detect(*rules_, r.features) : Detection{};
            r.flagged = d.flagged;
            r.fired = std::move(d.fired);
            break;
        }
        case DetectorType::EdrSolvability: {
            Detection d = rules_ ? detect(*rules_, r.features) : Detection{};
            r.fired = std::move(d.fired);
            r.unsolvable_feedback = unsolvable;
            r.flagged = d.flagged || unsolvable;
            break;
        }
    }

    if (!r.flagged) {
        // No corrector call: the corrected system is the initial one.
        r.x2 = r.x1;
        r.x2_raw = r.x1_raw;
        r.solve2 = r.solve1;
        r.correct2 = r.correct1;
    } else {
        std::string current = r.x1 ? render_canonical(*r.x1) : r.x1_raw;
        r.x2 = r.x1;
        r.x2_raw = r.x1_raw;
        for (int round = 0; round < options_.correction_rounds; ++round) {
            PromptBundle correction = builder_.build_correction_prompt(
                problem.id, problem.question, current, r.fired, r.unsolvable_feedback,
                options_.prompt);
            std::vector<std::string> corrected;
            try {
                corrected = corrector_.complete(correction, 1);
            } catch (const LlmError& e) {
                r.failed = true;
                r.fail_reason = std::string("correction: ") + e.what();
                return r;
            }
            r.corrector_calls += 1;
            r.correction_prompt = correction.user_message;
            r.correction_response = corrected.front();
            ParseResult parsed = parse_system(corrected.front());
            if (parse_ok(parsed)) {
                r.x2 = parsed_system(parsed);
                current = render_canonical(*r.x2);
            } else {
                r.x2.reset();
                current = corrected.front();
            }
            r.x2_raw = corrected.front();
        }
        if (r.x2) {
            r.solve2 = solve(*r.x2);
        } else {
            r.solve2 = SolveOutcome{};
            r.solve2.reason = "unparsable response";
        }
        r.correct2 = judge(r.solve2, r.x2 ? &*r.x2 : nullptr, gt, options_.judge_tol);
    }
    r.outcome = classify_outcome(r.correct1, r.correct2);

    if (!gt.reference) {
        r.delta_skip_reason = "no ground-truth equations";
    } else if (!r.x1 || !r.x2) {
        r.delta_skip_reason = "initial or corrected system unparsable";
    } else {
        SolveOutcome solve_star = solve(*gt.reference);
        r.eqd1 = eqd(*r.x1, r.solve1, *gt.reference, solve_star, options_.eqd);
        r.eqd2 = eqd(*r.x2, r.solve2, *gt.reference, solve_star, options_.eqd);
        r.delta_eqd = r.eqd2->eqd - r.eqd1->eqd;
    }
    return r;
}

std::vector<SampleResult> Pipeline::run_dataset(std::span<const Problem> problems) const {
    std::vector<SampleResult> results(problems.size());
    const int workers = std::max(1, std::min<int>(options_.workers,
                                                  static_cast<int>(problems.size())));
    if (workers == 1) {
        for (size_t i = 0; i < problems.size(); ++i) results[i] = run_sample(problems[i]);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= problems.size()) return;
                try {
                    results[i] = run_sample(problems[i]);
                } catch (const std::exception& e) {
                    results[i] = SampleResult{};
                    results[i].id = problems[i].id;
                    results[i].failed = true;
                    results[i].fail_reason = e.what();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

AggregateReport Pipeline::aggregate(std::span<const SampleResult> results,
                                    std::span<const Problem> problems) const {
    std::map<std::string, const Problem*> by_id;
    for (const auto& p : problems) by_id[p.id] = &p;

    AggregateReport report;
    for (const char* name : {"F2T", "T2F", "T2T", "F2F"}) report.outcomes[name] = 0;
    int correct1 = 0, correct2 = 0, corrector_calls = 0;
    int sc_correct = 0, sc_solv_correct = 0;
    for (const auto& r : results) {
        if (r.failed) {
            ++report.failed;
            report.failures.push_back(r.id + ": " + r.fail_reason);
            continue;
        }
        ++report.samples;
        if (r.correct1) ++correct1;
        if (r.correct2) ++correct2;
        corrector_calls += r.corrector_calls;
        if (r.flagged) ++report.flagged;
        if (r.flagged && !r.correct1) ++report.tp;
        if (r.flagged && r.correct1) ++report.fp;
        if (!r.flagged && !r.correct1) ++report.fn;
        if (!r.flagged && r.correct1) ++report.tn;
        report.outcomes[std::string(outcome_name(r.outcome))] += 1;

        auto pit = by_id.find(r.id);
        if (pit != by_id.end()) {
            GroundTruth gt = ground_truth_of(*pit->second);
            if (auto vote = sc_vote(r.responses, false)) {
                if (judge(solve(*vote), &*vote, gt, options_.judge_tol)) ++sc_correct;
            }
            if (auto vote = sc_vote(r.responses, true)) {
                if (judge(solve(*vote), &*vote, gt, options_.judge_tol)) ++sc_solv_correct;
            }
        }
    }
    if (report.samples > 0) {
        double n = report.samples;
        report.accuracy_before = correct1 / n;
        report.accuracy_after = correct2 / n;
        report.reprompt_rate = corrector_calls / n;
        report.sc_accuracy = sc_correct / n;
        report.sc_solvable_accuracy = sc_solv_correct / n;
    }
    report.precision = report.tp + report.fp > 0
                           ? static_cast<double>(report.tp) / (report.tp + report.fp)
                           : 0.0;
    report.recall = report.tp + report.fn > 0
                        ? static_cast<double>(report.tp) / (report.tp + report.fn)
                        : 0.0;
    report.f1 = report.precision + report.recall > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
    report.generator_ledger = generator_.ledger().snapshot(false);
    report.corrector_ledger = corrector_.ledger().snapshot(false);
    return report;
}

nlohmann::json SampleResult::to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["failed"] = failed;
    if (failed) {
        j["fail_reason"] = fail_reason;
        return j;
    }
    j["features"] = features.to_json();
    j["flagged"] = flagged;
    nlohmann::json fired_json = nlohmann::json::array();
    for (const auto& c : fired) fired_json.push_back(c.describe());
    j["fired"] = std::move(fired_json);
    j["unsolvable_feedback"] = unsolvable_feedback;
    j["x1"] = x1 ? nlohmann::json(render_canonical(*x1)) : nlohmann::json();
    j["x2"] = x2 ? nlohmann::json(render_canonical(*x2)) : nlohmann::json();
    j["solve1"] = solve_tag_name(solve1.tag);
    j["solve2"] = solve_tag_name(solve2.tag);
    j["correct1"] = correct1;
    j["correct2"] = correct2;
    j["outcome"] = std::string(outcome_name(outcome));
    j["generator_calls"] = generator_calls;
    j["corrector_calls"] = corrector_calls;
    if (eqd1) j["eqd1"] = eqd1->to_json();
    if (eqd2) j["eqd2"] = eqd2->to_json();
    j["delta_eqd"] = delta_eqd ? nlohmann::json(*delta_eqd) : nlohmann::json();
    if (!delta_skip_reason.empty()) j["delta_skip_reason"] = delta_skip_reason;
    return j;
}

nlohmann::json AggregateReport::to_json() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["failed"] = failed;
    j["accuracy_before"] = accuracy_before;
    j["accuracy_after"] = accuracy_after;
    j["reprompt_rate"] = reprompt_rate;
    j["flagged"] = flagged;
    j["detector"] = {{"tp", tp},       {"fp", fp},           {"fn", fn}, {"tn", tn},
                     {"precision", precision}, {"recall", recall}, {"f1", f1}};
    j["outcomes"] = outcomes;
    j["sc_accuracy"] = sc_accuracy;
    j["sc_solvable_accuracy"] = sc_solvable_accuracy;
    j["ledger"] = {{"generator", generator_ledger}, {"corrector", corrector_ledger}};
    j["failures"] = failures;
    return j;
}

}  // namespace edcim
