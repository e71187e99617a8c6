#pragma once

#include "edcim/conditions.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edcim {

struct FewShotExample {
    std::string category;
    std::string question;
    std::vector<std::string> equations;
};

// The prompt assets: system instruction, meta-rule NL templates, the
// solvability sentence, the generation few-shots and the correction
// one-shot. All live in versioned data files so catalog edits do not
// require a rebuild.
class TemplateCatalog {
public:
    // Expects system_instruction.txt, templates.json, few_shot_generation.json
    // and correction_one_shot.txt under data_dir. Throws on missing files or
    // a meta-rule missing one of its two directions.
    static TemplateCatalog load(const std::filesystem::path& data_dir);

    std::span<const MetaRule> meta_rules() const { return meta_rules_; }
    const MetaRule* find(FeatureKey key, Direction dir) const;

    const std::string& solvability_sentence() const { return solvability_; }
    const std::string& system_instruction() const { return system_instruction_; }
    std::span<const FewShotExample> generation_examples() const { return generation_examples_; }
    const std::string& correction_example() const { return correction_example_; }

private:
    std::vector<MetaRule> meta_rules_;
    std::string solvability_;
    std::string system_instruction_;
    std::vector<FewShotExample> generation_examples_;
    std::string correction_example_;
};

}  // namespace edcim
