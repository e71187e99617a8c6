#pragma once

#include "edcim/expr.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edcim {

struct Problem {
    std::string id;
    std::string question;
    std::vector<double> answers;
    std::optional<EquationSystem> reference_equations;
};

struct LoadReport {
    int total = 0;
    int loaded = 0;
    int skipped = 0;
    std::vector<std::string> skip_reasons;
};

enum class DatasetFormat { Draw1k, Gsm8k, Generic };

std::optional<DatasetFormat> dataset_format_from_name(std::string_view name);
std::string_view dataset_format_name(DatasetFormat format);

struct Dataset {
    std::vector<Problem> problems;
    LoadReport report;
};

// draw1k: JSON array with iIndex / sQuestion / lEquations / lSolutions.
// gsm8k: JSONL with question / answer, final value after "####".
// generic: JSONL with id / question / answers[] / optional equations[].
// Structural problems throw with the record index; records missing an
// extractable answer are skipped and counted.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

// Deterministic shuffle by seed; first ceil(ratio * N) problems to train.
std::pair<std::vector<Problem>, std::vector<Problem>> split_dataset(
    std::vector<Problem> problems, double ratio, uint64_t seed);

// Content hash recorded in run manifests (FNV-1a 64 over the file bytes).
std::string file_hash(const std::filesystem::path& path);

}  // namespace edcim
