// Regenerates the committed replay fixture: 50 synthetic word problems plus
// a transcript covering every detector / prompt-setting / rule-group / epsilon
// configuration the test suites replay. The stand-in model is a pure function
// of (problem, phase, call index), so recording is reproducible.

#include "edcim/runner.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <set>

using namespace edcim;

namespace {

struct FixtureProblem {
    Problem problem;
    std::string correct_a;   // reference rendering
    std::string correct_b;   // same system, different variable names
    std::string wrong_a;     // off-by-a-bit constant
    std::string wrong_b;     // structurally wrong
    std::string redundant;   // correct plus one consistent extra equation
    std::string unsolvable;  // inconsistent system
    std::string garbage;     // unparsable text
    int difficulty = 0;      // 0 easy, 1 medium, 2 hard, 3 broken
};

std::string num(long v) { return std::to_string(v); }

std::vector<FixtureProblem> make_problems() {
    // easy x4, medium x3, hard x2, broken x1 per block of ten
    const int pattern[10] = {0, 0, 1, 0, 2, 1, 0, 3, 1, 2};
    std::vector<FixtureProblem> out;
    for (int i = 0; i < 50; ++i) {
        const int kind = i % 5;
        const long j = i / 5;
        FixtureProblem f;
        f.difficulty = pattern[i % 10];
        char id[16];
        std::snprintf(id, sizeof(id), "fx-%03d", i);
        f.problem.id = id;
        switch (kind) {
            case 0: {
                long x = 11 + 3 * j, y = 3 + j, s = x + y, d = x - y;
                f.problem.question = "The sum of two numbers is " + num(s) +
                                     " and their difference is " + num(d) +
                                     ". What are the two numbers?";
                f.problem.answers = {double(x), double(y)};
                f.correct_a = "number_a + number_b = " + num(s) + "\nnumber_a - number_b = " + num(d);
                f.correct_b = "first + second = " + num(s) + "\nfirst - second = " + num(d);
                f.wrong_a = "number_a + number_b = " + num(s + 1) + "\nnumber_a - number_b = " + num(d);
                f.wrong_b = "number_a + number_b = " + num(s) + "\nnumber_a - number_b = " + num(s);
                f.redundant = f.correct_a + "\n2 * number_a = " + num(2 * x);
                f.unsolvable = "number_a = number_a + 1";
                f.garbage = "To solve this problem we note that the numbers differ.";
                break;
            }
            case 1: {
                long sam = 5 + j, k = 2 + (j % 3), alex = k * sam, t = alex + sam;
                f.problem.question = "Alex is " + num(k) +
                                     " times as old as Sam. The sum of their ages is " + num(t) +
                                     ". How old are Alex and Sam?";
                f.problem.answers = {double(alex), double(sam)};
                f.correct_a = "age_alex = " + num(k) + " * age_sam\nage_alex + age_sam = " + num(t);
                f.correct_b = "alex = " + num(k) + " * sam\nalex + sam = " + num(t);
                f.wrong_a = "age_alex = " + num(k + 1) + " * age_sam\nage_alex + age_sam = " + num(t);
                f.wrong_b = "age_alex + age_sam = " + num(t + 2) + "\nage_alex - age_sam = 1";
                f.redundant = f.correct_a + "\nage_alex - age_sam = " + num(alex - sam);
                f.unsolvable = "age_alex + age_sam = " + num(t) + "\nage_alex + age_sam = " + num(t + 1);
                f.garbage = "The ages cannot be determined without more information.";
                break;
            }
            case 2: {
                long a = 50 + 10 * j, c = 30 + 3 * j, pa = 8 + (j % 4), pc = 3 + (j % 2);
                long n = a + c, r = pa * a + pc * c;
                f.problem.question = "A theater sold " + num(n) + " tickets for a total of " +
                                     num(r) + " dollars. Adult tickets cost " + num(pa) +
                                     " dollars and child tickets cost " + num(pc) +
                                     " dollars. How many adult and child tickets were sold?";
                f.problem.answers = {double(a), double(c)};
                f.correct_a = "adult + child = " + num(n) + "\n" + num(pa) + " * adult + " +
                              num(pc) + " * child = " + num(r);
                f.correct_b = "adult_tickets + child_tickets = " + num(n) + "\n" + num(pa) +
                              " * adult_tickets + " + num(pc) + " * child_tickets = " + num(r);
                f.wrong_a = "adult + child = " + num(n) + "\n" + num(pa) + " * adult + " +
                            num(pc) + " * child = " + num(r + 10);
                f.wrong_b = "adult + child = " + num(n) + "\n" + num(pc) + " * adult + " +
                            num(pa) + " * child = " + num(r);
                f.redundant = f.correct_a + "\nadult = " + num(a);
                f.unsolvable = "adult + child = " + num(n) + "\nadult + child = " + num(n + 5);
                f.garbage = "```\nThe ticket count is the solution of a linear system.\n```";
                break;
            }
            case 3: {
                long w = 4 + j, e = 2 + (j % 5), l = w + e, p = 2 * l + 2 * w;
                f.problem.question = "A rectangle has a perimeter of " + num(p) +
                                     " meters. Its length is " + num(e) +
                                     " meters longer than its width. What are the length and the width?";
                f.problem.answers = {double(l), double(w)};
                f.correct_a = "2 * length + 2 * width = " + num(p) + "\nlength = width + " + num(e);
                f.correct_b = "2 * len + 2 * wid = " + num(p) + "\nlen = wid + " + num(e);
                f.wrong_a = "2 * length + 2 * width = " + num(p + 2) + "\nlength = width + " + num(e);
                f.wrong_b = "length + width = " + num(p) + "\nlength = width + " + num(e);
                f.redundant = f.correct_a + "\nlength + width = " + num(l + w);
                f.unsolvable = "length = width + " + num(e) + "\nwidth = length + " + num(e);
                f.garbage = "Let me think about this rectangle problem step by step.";
                break;
            }
            default: {
                long s0 = 30 + 5 * j, t = 2 + (j % 3), dist = s0 * t;
                f.problem.question = "A car travels " + num(dist) + " miles in " + num(t) +
                                     " hours at a constant speed. What is its speed in miles per hour?";
                f.problem.answers = {double(s0)};
                f.correct_a = "speed * " + num(t) + " = " + num(dist);
                f.correct_b = "speed_mph * " + num(t) + " = " + num(dist);
                f.wrong_a = "speed * " + num(t) + " = " + num(dist + t);
                f.wrong_b = "speed = " + num(t) + " * " + num(dist);
                f.redundant = f.correct_a + "\nspeed = " + num(s0);
                f.unsolvable = "speed * " + num(t) + " = " + num(dist) + "\nspeed * " + num(t) +
                               " = " + num(dist + 1);
                f.garbage = "speed ^ 1 = unknown";
                break;
            }
        }
        {
            ParseResult ref = parse_system(f.correct_a);
            if (!parse_ok(ref)) {
                throw std::runtime_error(f.problem.id + ": reference does not parse");
            }
            f.problem.reference_equations = parsed_system(ref);
        }
        out.push_back(std::move(f));
    }
    return out;
}

uint64_t fnv(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class ScriptedBackend : public CompletionBackend {
public:
    explicit ScriptedBackend(const std::vector<FixtureProblem>& problems) {
        for (const auto& f : problems) by_question_.emplace(f.problem.question, &f);
    }

    CompletionResult complete(const PromptBundle& bundle, int index) override {
        const std::string& user = bundle.user_message;
        const bool correction = user.ends_with("Corrected Equations:");
        size_t q_pos = user.rfind("Question: ");
        if (q_pos == std::string::npos) throw std::runtime_error("scripted: no question found");
        size_t q_end = user.find('\n', q_pos);
        std::string question = user.substr(q_pos + 10, q_end - q_pos - 10);
        auto it = by_question_.find(question);
        if (it == by_question_.end()) {
            throw std::runtime_error("scripted: unknown question: " + question);
        }
        const FixtureProblem& f = *it->second;

        std::string text = correction ? correction_response(f) : generation_response(f, index);
        CompletionResult result;
        result.usage.prompt_tokens = static_cast<long>(user.size() / 4);
        result.usage.completion_tokens = static_cast<long>(text.size() / 4);
        result.text = std::move(text);
        return result;
    }

private:
    static std::string generation_response(const FixtureProblem& f, int index) {
        const std::string& A = f.correct_a;
        const std::string& B = f.correct_b;
        const std::string& WA = f.wrong_a;
        const std::string& WB = f.wrong_b;
        const std::string& R = f.redundant;
        const std::string& U = f.unsolvable;
        const std::string& G = f.garbage;
        switch (f.difficulty) {
            case 0: {
                const std::string* table[10] = {&A, &A, &A, &A, &A, &A, &A, &A, &A, &B};
                return *table[index % 10];
            }
            case 1: {
                const std::string* table[10] = {&A, &B, &A, &A, &WA, &A, &R, &B, &A, &A};
                return *table[index % 10];
            }
            case 2: {
                const std::string* table[10] = {&WA, &WB, &A, &WA, &G, &WB, &R, &WA, &B, &WA};
                return *table[index % 10];
            }
            default: {
                const std::string* table[10] = {&G, &G, &U, &G, &U, &G, &G, &G, &U, &G};
                return *table[index % 10];
            }
        }
    }

    static std::string correction_response(const FixtureProblem& f) {
        uint64_t h = fnv(f.problem.id + "#correct") % 10;
        if (h < 7) return f.correct_a;
        if (h < 9) return f.wrong_b;
        return f.garbage;
    }

    std::map<std::string, const FixtureProblem*> by_question_;
};

void write_problems(const std::vector<FixtureProblem>& problems,
                    const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& f : problems) {
        nlohmann::json j;
        j["id"] = f.problem.id;
        j["question"] = f.problem.question;
        j["answers"] = f.problem.answers;
        nlohmann::json eqs = nlohmann::json::array();
        size_t start = 0;
        while (start <= f.correct_a.size()) {
            size_t end = f.correct_a.find('\n', start);
            eqs.push_back(f.correct_a.substr(start, end == std::string::npos ? std::string::npos
                                                                             : end - start));
            if (end == std::string::npos) break;
            start = end + 1;
        }
        j["equations"] = std::move(eqs);
        out << j.dump() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path out_dir = argc > 1 ? argv[1] : "tests/fixtures";
    std::filesystem::path data_dir = argc > 2 ? argv[2] : "data";
    std::filesystem::create_directories(out_dir);

    std::vector<FixtureProblem> problems = make_problems();
    {
        std::set<std::string> questions;
        for (const auto& f : problems) {
            if (!questions.insert(f.problem.question).second) {
                std::cerr << "duplicate question: " << f.problem.question << "\n";
                return 1;
            }
        }
    }
    write_problems(problems, out_dir / "fixture_problems.jsonl");

    std::filesystem::path transcript_path = out_dir / "fixture_transcript.jsonl";
    std::filesystem::remove(transcript_path);
    auto recorder = std::make_shared<TranscriptWriter>(transcript_path, "fixture-v1");

    TemplateCatalog catalog = TemplateCatalog::load(data_dir);

    ExperimentConfig base = default_config();
    base.dataset_path = (out_dir / "fixture_problems.jsonl").string();
    base.dataset_format = DatasetFormat::Generic;
    base.data_dir = data_dir.string();
    base.workers = 1;

    Dataset dataset = load_dataset(base.dataset_path, base.dataset_format);
    auto [train, test] = split_dataset(dataset.problems, base.split_ratio, base.split_seed);

    // Sanity: the train split must mix correct and incorrect initial answers
    // or the learner has nothing to learn.
    {
        std::map<std::string, int> difficulty_by_id;
        for (const auto& f : problems) difficulty_by_id[f.problem.id] = f.difficulty;
        int errors = 0;
        for (const auto& p : train) {
            if (difficulty_by_id[p.id] >= 2) ++errors;
        }
        std::cout << "train split: " << train.size() << " problems, " << errors
                  << " with incorrect initial answers\n";
        if (errors == 0 || errors == static_cast<int>(train.size())) {
            std::cerr << "degenerate train split; adjust the fixture pattern or seed\n";
            return 1;
        }
    }

    std::vector<ExperimentConfig> configs;
    for (const char* det : {"all", "oracle", "solvability", "edr", "edr_solvability"}) {
        ExperimentConfig cfg = base;
        cfg.detector = *detector_from_name(det);
        configs.push_back(cfg);
    }
    for (int setting = 1; setting <= 7; ++setting) {
        ExperimentConfig cfg = base;
        cfg.prompt_setting = setting;
        configs.push_back(cfg);
    }
    for (int mask = 1; mask < 8; ++mask) {
        ExperimentConfig cfg = base;
        cfg.group_symbols = mask & 1;
        cfg.group_complexity = mask & 2;
        cfg.group_diversity = mask & 4;
        configs.push_back(cfg);
    }
    for (double epsilon : kEpsilonSweepGrid) {
        ExperimentConfig cfg = base;
        cfg.epsilon = epsilon;
        configs.push_back(cfg);
    }

    LlmClient generator(base.generator, std::make_unique<ScriptedBackend>(problems));
    LlmClient corrector(base.corrector, std::make_unique<ScriptedBackend>(problems));
    generator.set_recorder(recorder);
    corrector.set_recorder(recorder);

    for (const auto& cfg : configs) {
        RunOutput out = execute_run(cfg, catalog, generator, corrector, train, test);
        std::cout << detector_name(cfg.detector) << " setting=" << cfg.prompt_setting
                  << " eps=" << cfg.epsilon << " groups=" << cfg.group_symbols
                  << cfg.group_complexity << cfg.group_diversity << ": acc "
                  << out.report.accuracy_before << " -> " << out.report.accuracy_after
                  << ", reprompt " << out.report.reprompt_rate << ", flagged "
                  << out.report.flagged << "\n";
    }

    std::cout << "fixture written to " << out_dir.string() << "\n";
    return 0;
}
