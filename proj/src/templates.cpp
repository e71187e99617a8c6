#include "edcim/templates.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edcim {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

// Prompt blocks are newline-joined without a trailing newline so byte
// stability does not depend on how the files were saved.
std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

TemplateCatalog TemplateCatalog::load(const std::filesystem::path& data_dir) {
    TemplateCatalog catalog;
    catalog.system_instruction_ = strip_trailing_newlines(read_file(data_dir / "system_instruction.txt"));
    catalog.correction_example_ = strip_trailing_newlines(read_file(data_dir / "correction_one_shot.txt"));

    nlohmann::json templates = read_json(data_dir / "templates.json");
    catalog.solvability_ = templates.at("solvability").get<std::string>();
    for (const auto& entry : templates.at("meta_rules")) {
        MetaRule rule;
        auto key = feature_from_name(entry.at("feature").get<std::string>());
        if (!key) {
            throw std::runtime_error("templates.json: unknown feature " +
                                     entry.at("feature").get<std::string>());
        }
        rule.key = *key;
        rule.dir = entry.at("direction").get<std::string>() == "low" ? Direction::Low
                                                                     : Direction::High;
        rule.violation = entry.at("violation").get<std::string>();
        rule.suggestion = entry.at("suggestion").get<std::string>();
        if (rule.violation.empty() || rule.suggestion.empty()) {
            throw std::runtime_error("templates.json: empty template for " +
                                     std::string(feature_name(rule.key)));
        }
        catalog.meta_rules_.push_back(std::move(rule));
    }
    for (FeatureKey key : kAllFeatures) {
        if (!catalog.find(key, Direction::Low) || !catalog.find(key, Direction::High)) {
            throw std::runtime_error("templates.json: missing direction for " +
                                     std::string(feature_name(key)));
        }
    }

    nlohmann::json few_shots = read_json(data_dir / "few_shot_generation.json");
    for (const auto& entry : few_shots) {
        FewShotExample ex;
        ex.category = entry.value("category", "");
        ex.question = entry.at("question").get<std::string>();
        for (const auto& eq : entry.at("equations")) ex.equations.push_back(eq.get<std::string>());
        catalog.generation_examples_.push_back(std::move(ex));
    }
    return catalog;
}

const MetaRule* TemplateCatalog::find(FeatureKey key, Direction dir) const {
    for (const auto& rule : meta_rules_) {
        if (rule.key == key && rule.dir == dir) return &rule;
    }
    return nullptr;
}

}  // namespace edcim
