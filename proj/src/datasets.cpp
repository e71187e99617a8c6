#include "edcim/datasets.hpp"

#include "edcim/parse.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace edcim {

std::optional<DatasetFormat> dataset_format_from_name(std::string_view name) {
    if (name == "draw1k") return DatasetFormat::Draw1k;
    if (name == "gsm8k") return DatasetFormat::Gsm8k;
    if (name == "generic") return DatasetFormat::Generic;
    return std::nullopt;
}

std::string_view dataset_format_name(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::Draw1k: return "draw1k";
        case DatasetFormat::Gsm8k: return "gsm8k";
        case DatasetFormat::Generic: return "generic";
    }
    return "generic";
}

namespace {

[[noreturn]] void format_error(const std::string& what, int record) {
    throw std::runtime_error("dataset record " + std::to_string(record) + ": " + what);
}

std::optional<EquationSystem> parse_reference(const std::vector<std::string>& lines) {
    std::string joined;
    for (const auto& line : lines) {
        joined += line;
        joined.push_back('\n');
    }
    ParseResult result = parse_system(joined);
    if (!parse_ok(result)) return std::nullopt;
    return parsed_system(result);
}

// Numbers possibly wrapped in strings, possibly space-separated lists.
void collect_numbers(const nlohmann::json& j, std::vector<double>& out) {
    if (j.is_number()) {
        out.push_back(j.get<double>());
        return;
    }
    if (j.is_string()) {
        std::istringstream in(j.get<std::string>());
        std::string tok;
        while (in >> tok) {
            try {
                size_t used = 0;
                double v = std::stod(tok, &used);
                if (used == tok.size() && std::isfinite(v)) out.push_back(v);
            } catch (...) {
            }
        }
        return;
    }
    if (j.is_array()) {
        for (const auto& item : j) collect_numbers(item, out);
    }
}

std::optional<double> gsm8k_final_answer(const std::string& answer_text) {
    auto pos = answer_text.rfind("####");
    if (pos == std::string::npos) return std::nullopt;
    std::string tail = answer_text.substr(pos + 4);
    std::string cleaned;
    for (char c : tail) {
        if ((c >= '0' && c <= '9') || c == '.' || c == '-') cleaned.push_back(c);
        else if (c == ',' || c == ' ' || c == '$' || c == '\n' || c == '\r' || c == '\t') continue;
        else break;
    }
    if (cleaned.empty() || cleaned == "-") return std::nullopt;
    try {
        size_t used = 0;
        double v = std::stod(cleaned, &used);
        if (used != cleaned.size() || !std::isfinite(v)) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

std::vector<nlohmann::json> read_records(const std::filesystem::path& path, bool json_array) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read dataset: " + path.string());
    std::vector<nlohmann::json> records;
    if (json_array) {
        nlohmann::json j;
        in >> j;
        if (!j.is_array()) throw std::runtime_error("expected a JSON array: " + path.string());
        for (auto& item : j) records.push_back(std::move(item));
    } else {
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                records.push_back(nlohmann::json::parse(line));
            } catch (const std::exception& e) {
                format_error(std::string("invalid JSON: ") + e.what(), line_no);
            }
        }
    }
    return records;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    Dataset ds;
    std::vector<nlohmann::json> records = read_records(path, format == DatasetFormat::Draw1k);
    ds.report.total = static_cast<int>(records.size());

    int index = 0;
    for (const auto& rec : records) {
        ++index;
        if (!rec.is_object()) format_error("expected an object", index);
        Problem p;
        switch (format) {
            case DatasetFormat::Draw1k: {
                if (!rec.contains("sQuestion") || !rec.contains("lSolutions")) {
                    format_error("draw1k records need sQuestion and lSolutions", index);
                }
                p.id = rec.contains("iIndex") ? (rec["iIndex"].is_string()
                                                     ? rec["iIndex"].get<std::string>()
                                                     : std::to_string(rec["iIndex"].get<long>()))
                                              : std::to_string(index);
                p.question = rec["sQuestion"].get<std::string>();
                collect_numbers(rec["lSolutions"], p.answers);
                if (rec.contains("lEquations") && rec["lEquations"].is_array()) {
                    std::vector<std::string> lines;
                    for (const auto& eq : rec["lEquations"]) lines.push_back(eq.get<std::string>());
                    p.reference_equations = parse_reference(lines);
                }
                break;
            }
            case DatasetFormat::Gsm8k: {
                if (!rec.contains("question") || !rec.contains("answer")) {
                    format_error("gsm8k records need question and answer", index);
                }
                p.id = rec.value("id", "gsm8k-" + std::to_string(index));
                p.question = rec["question"].get<std::string>();
                auto value = gsm8k_final_answer(rec["answer"].get<std::string>());
                if (value) p.answers.push_back(*value);
                break;
            }
            case DatasetFormat::Generic: {
                if (!rec.contains("question")) format_error("generic records need question", index);
                p.id = rec.contains("id") ? (rec["id"].is_string()
                                                 ? rec["id"].get<std::string>()
                                                 : std::to_string(rec["id"].get<long>()))
                                          : std::to_string(index);
                p.question = rec["question"].get<std::string>();
                if (rec.contains("answers")) collect_numbers(rec["answers"], p.answers);
                if (rec.contains("equations") && rec["equations"].is_array()) {
                    std::vector<std::string> lines;
                    for (const auto& eq : rec["equations"]) lines.push_back(eq.get<std::string>());
                    p.reference_equations = parse_reference(lines);
                }
                break;
            }
        }
        if (p.question.empty()) {
            ++ds.report.skipped;
            ds.report.skip_reasons.push_back("record " + std::to_string(index) + ": empty question");
            continue;
        }
        if (p.answers.empty() && !p.reference_equations) {
            ++ds.report.skipped;
            ds.report.skip_reasons.push_back("record " + std::to_string(index) +
                                             ": no extractable answer");
            continue;
        }
        ++ds.report.loaded;
        ds.problems.push_back(std::move(p));
    }
    return ds;
}

std::pair<std::vector<Problem>, std::vector<Problem>> split_dataset(
    std::vector<Problem> problems, double ratio, uint64_t seed) {
    if (ratio <= 0.0 || ratio >= 1.0) throw std::invalid_argument("split ratio must be in (0,1)");
    // Hand-rolled Fisher-Yates: std::shuffle's distribution is
    // implementation-defined, this stays stable across toolchains.
    std::mt19937_64 rng(seed);
    auto bounded = [&rng](uint64_t n) {
        uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % n;
        uint64_t v;
        do {
            v = rng();
        } while (v >= limit);
        return v % n;
    };
    for (size_t i = problems.size(); i > 1; --i) {
        std::swap(problems[i - 1], problems[bounded(i)]);
    }
    size_t train_size = static_cast<size_t>(
        std::ceil(ratio * static_cast<double>(problems.size())));
    std::vector<Problem> train(problems.begin(), problems.begin() + train_size);
    std::vector<Problem> test(problems.begin() + train_size, problems.end());
    return {std::move(train), std::move(test)};
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash file: " + path.string());
    uint64_t h = 1469598103934665603ull;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char out[24];
    std::snprintf(out, sizeof(out), "fnv64:%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace edcim
