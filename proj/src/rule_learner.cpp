#include "edcim/rule_learner.hpp"

#include <cassert>
#include <fstream>
#include <stdexcept>

namespace edcim {

std::string_view neg_definition_name(NegDefinition def) {
    return def == NegDefinition::FalsePositives ? "false_positives" : "paper_literal";
}

namespace {

// Fire masks as packed bits over the sample index.
using Bits = std::vector<uint64_t>;

Bits make_bits(size_t n) { return Bits((n + 63) / 64, 0); }

void set_bit(Bits& b, size_t i) { b[i / 64] |= uint64_t{1} << (i % 64); }

int count_and(const Bits& a, const Bits& b) {
    int total = 0;
    for (size_t i = 0; i < a.size(); ++i) total += __builtin_popcountll(a[i] & b[i]);
    return total;
}

struct Masks {
    std::vector<Bits> fires;  // per candidate
    Bits errors;
    Bits correct;
    size_t n = 0;
};

Masks build_masks(std::span<const Condition> candidates, std::span<const TrainingSample> data) {
    Masks m;
    m.n = data.size();
    m.errors = make_bits(m.n);
    m.correct = make_bits(m.n);
    for (size_t i = 0; i < data.size(); ++i) {
        set_bit(data[i].is_error ? m.errors : m.correct, i);
    }
    m.fires.reserve(candidates.size());
    for (const auto& c : candidates) {
        Bits b = make_bits(m.n);
        for (size_t i = 0; i < data.size(); ++i) {
            if (c.evaluate(data[i].features)) set_bit(b, i);
        }
        m.fires.push_back(std::move(b));
    }
    return m;
}

PosNeg counts_for(const Bits& fired_union, const Masks& m, NegDefinition def) {
    PosNeg pn;
    pn.pos = count_and(fired_union, m.errors);
    if (def == NegDefinition::FalsePositives) {
        pn.neg = count_and(fired_union, m.correct);
    } else {
        pn.neg = static_cast<int>(m.n) - pn.pos;
    }
    return pn;
}

}  // namespace

PosNeg pos_neg(std::span<const Condition> conditions, std::span<const TrainingSample> data,
               NegDefinition def) {
    PosNeg pn;
    int fired_total = 0;
    for (const auto& sample : data) {
        bool fired = false;
        for (const auto& c : conditions) {
            if (c.evaluate(sample.features)) {
                fired = true;
                break;
            }
        }
        if (!fired) continue;
        ++fired_total;
        if (sample.is_error) ++pn.pos;
    }
    if (def == NegDefinition::FalsePositives) {
        pn.neg = fired_total - pn.pos;
    } else {
        pn.neg = static_cast<int>(data.size()) - pn.pos;
    }
    return pn;
}

RuleSet det_rule_learn(std::span<const TrainingSample> data,
                       std::span<const Condition> candidates, double epsilon,
                       NegDefinition def) {
    RuleSet out;
    out.epsilon = epsilon;
    out.neg_definition = def;
    out.train_size = static_cast<int>(data.size());
    if (data.empty() || candidates.empty()) return out;

    Masks masks = build_masks(candidates, data);
    const double budget = epsilon * static_cast<double>(data.size());

    Bits current = make_bits(masks.n);
    std::vector<bool> chosen(candidates.size(), false);
    std::vector<size_t> selection;

    while (true) {
        int best = -1;
        PosNeg best_pn;
        for (size_t i = 0; i < candidates.size(); ++i) {
            if (chosen[i]) continue;
            Bits merged = current;
            for (size_t w = 0; w < merged.size(); ++w) merged[w] |= masks.fires[i][w];
            PosNeg pn = counts_for(merged, masks, def);
            if (static_cast<double>(pn.neg) > budget) continue;
            if (best < 0 || pn.pos > best_pn.pos ||
                (pn.pos == best_pn.pos && pn.neg < best_pn.neg)) {
                best = static_cast<int>(i);
                best_pn = pn;
            }
        }
        if (best < 0) break;
        chosen[best] = true;
        selection.push_back(static_cast<size_t>(best));
        for (size_t w = 0; w < current.size(); ++w) current[w] |= masks.fires[best][w];
        assert(static_cast<double>(counts_for(current, masks, def).neg) <= budget);
    }

    for (size_t idx : selection) out.conditions.push_back(candidates[idx]);
    PosNeg final_pn = counts_for(current, masks, def);
    out.train_pos = final_pn.pos;
    out.train_neg = final_pn.neg;
    int flagged = 0;
    for (size_t i = 0; i < masks.n; ++i) {
        if (current[i / 64] >> (i % 64) & 1) ++flagged;
    }
    out.train_flagged = flagged;
    return out;
}

Detection detect(const RuleSet& rules, const FeatureVector& fv) {
    Detection d;
    for (const auto& c : rules.conditions) {
        if (c.evaluate(fv)) d.fired.push_back(c);
    }
    d.flagged = !d.fired.empty();
    return d;
}

nlohmann::json RuleSet::to_json() const {
    nlohmann::json j;
    j["epsilon"] = epsilon;
    j["neg_definition"] = std::string(neg_definition_name(neg_definition));
    j["training"] = {{"pos", train_pos},
                     {"neg", train_neg},
                     {"size", train_size},
                     {"flagged", train_flagged}};
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : conditions) j["conditions"].push_back(c.to_json());
    return j;
}

RuleSet RuleSet::from_json(const nlohmann::json& j) {
    RuleSet rs;
    rs.epsilon = j.at("epsilon").get<double>();
    rs.neg_definition = j.value("neg_definition", "false_positives") == "paper_literal"
                            ? NegDefinition::PaperLiteral
                            : NegDefinition::FalsePositives;
    if (j.contains("training")) {
        rs.train_pos = j["training"].value("pos", 0);
        rs.train_neg = j["training"].value("neg", 0);
        rs.train_size = j["training"].value("size", 0);
        rs.train_flagged = j["training"].value("flagged", 0);
    }
    for (const auto& cj : j.at("conditions")) rs.conditions.push_back(Condition::from_json(cj));
    return rs;
}

void RuleSet::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write rule set: " + path.string());
    out << to_json().dump(2) << "\n";
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read rule set: " + path.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace edcim
