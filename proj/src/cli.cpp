#include "edcim/cli.hpp"

#include "edcim/canonical.hpp"
#include "edcim/config.hpp"
#include "edcim/runner.hpp"
#include "edcim/version.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace edcim {

namespace {

std::string read_stream(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command) {
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["version"] = std::string(kVersion);
    manifest["config"] = cfg.to_json();
    if (!cfg.dataset_path.empty() && std::filesystem::exists(cfg.dataset_path)) {
        manifest["dataset_hash"] = file_hash(cfg.dataset_path);
    }
    write_text(std::filesystem::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_solve() {
    std::string input = read_stream(std::cin);
    ParseResult parsed = parse_system(input);
    if (!parse_ok(parsed)) {
        std::cerr << "parse error: " << parse_error(parsed).describe() << "\n";
        return 2;
    }
    SolveOutcome outcome = solve(parsed_system(parsed));
    switch (outcome.tag) {
        case SolveOutcome::Tag::Unique:
            for (const auto& [name, value] : outcome.assignment) {
                std::cout << name << " = " << to_string(value) << "\n";
            }
            break;
        case SolveOutcome::Tag::Underdetermined: {
            std::cout << "underdetermined: rank " << outcome.rank << ", free:";
            for (const auto& v : outcome.free_variables) std::cout << " " << v;
            std::cout << "\n";
            for (const auto& [name, value] : outcome.assignment) {
                std::cout << name << " = " << to_string(value) << "\n";
            }
            break;
        }
        case SolveOutcome::Tag::Inconsistent:
            std::cout << "inconsistent\n";
            break;
        case SolveOutcome::Tag::IllFormed:
            std::cout << "ill-formed: " << outcome.reason << "\n";
            break;
    }
    return 0;
}

int cmd_eqd(const std::string& path_a, const std::string& path_b, const std::string& mode_name) {
    auto mode = eqd_mode_from_name(mode_name);
    if (!mode) {
        std::cerr << "unknown eqd mode: " << mode_name << "\n";
        return 2;
    }
    auto load_system = [](const std::string& path) -> EquationSystem {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read " + path);
        ParseResult parsed = parse_system(read_stream(in));
        if (!parse_ok(parsed)) {
            throw std::invalid_argument(path + ": " + parse_error(parsed).describe());
        }
        return parsed_system(parsed);
    };
    EquationSystem a = load_system(path_a);
    EquationSystem b = load_system(path_b);
    EqdOptions options;
    options.mode = *mode;
    EqDReport report = eqd(a, solve(a), b, solve(b), options);
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
}

int cmd_generate(const ExperimentConfig& cfg, const std::string& which_split,
                 const std::string& record_path) {
    TemplateCatalog catalog = TemplateCatalog::load(cfg.data_dir);
    Dataset dataset = load_dataset(cfg.dataset_path, cfg.dataset_format);
    auto [train, test] = split_dataset(dataset.problems, cfg.split_ratio, cfg.split_seed);
    const std::vector<Problem>* problems = nullptr;
    std::vector<Problem> all;
    if (which_split == "train") {
        problems = &train;
    } else if (which_split == "test") {
        problems = &test;
    } else {
        all = dataset.problems;
        problems = &all;
    }

    LlmClient generator(cfg.generator);
    if (!record_path.empty()) {
        generator.set_recorder(std::make_shared<TranscriptWriter>(
            record_path, "generate:" + file_hash(cfg.dataset_path)));
    }
    PromptBuilder builder(catalog);
    PromptSettings settings = PromptSettings::table_setting(cfg.prompt_setting);

    std::string lines;
    int failures = 0;
    for (const Problem& problem : *problems) {
        nlohmann::json row;
        row["id"] = problem.id;
        row["question"] = problem.question;
        PromptBundle bundle = builder.build_generation_prompt(problem.id, problem.question, settings);
        try {
            std::vector<std::string> texts = generator.complete(bundle, cfg.generations);
            ResponseSet responses = ResponseSet::from_texts(problem.id, std::move(texts));
            row["responses"] = responses.raw_texts;
            nlohmann::json ok = nlohmann::json::array();
            for (const auto& p : responses.parsed) ok.push_back(parse_ok(p));
            row["parse_ok"] = std::move(ok);
        } catch (const LlmError& e) {
            row["failed"] = true;
            row["fail_reason"] = e.what();
            ++failures;
        }
        lines += row.dump();
        lines.push_back('\n');
    }
    write_text(std::filesystem::path(cfg.out_dir) / "responses.jsonl", lines);
    write_manifest(cfg, "generate");
    std::cout << "generated responses for " << problems->size() << " problems ("
              << failures << " failed), ledger: "
              << generator.ledger().snapshot().dump() << "\n";
    return failures == 0 ? 0 : 3;
}

int cmd_learn_rules(const ExperimentConfig& cfg) {
    TemplateCatalog catalog = TemplateCatalog::load(cfg.data_dir);
    Dataset dataset = load_dataset(cfg.dataset_path, cfg.dataset_format);
    auto [train, test] = split_dataset(dataset.problems, cfg.split_ratio, cfg.split_seed);
    LlmClient generator(cfg.generator);
    TrainingBuild build = build_training_samples(cfg, catalog, generator, train);
    RuleSet rules = learn_rule_set(cfg, catalog, build.samples);

    std::filesystem::create_directories(cfg.out_dir);
    rules.save(std::filesystem::path(cfg.out_dir) / "rules.json");
    std::string feature_lines;
    for (const auto& row : build.feature_rows) {
        feature_lines += row.dump();
        feature_lines.push_back('\n');
    }
    write_text(std::filesystem::path(cfg.out_dir) / "train_features.jsonl", feature_lines);
    write_manifest(cfg, "learn-rules");
    std::cout << "learned " << rules.conditions.size() << " conditions on " << train.size()
              << " samples (POS " << rules.train_pos << ", NEG " << rules.train_neg
              << ", flagged " << rules.train_flagged << ")\n";
    return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
    TemplateCatalog catalog = TemplateCatalog::load(cfg.data_dir);
    Dataset dataset = load_dataset(cfg.dataset_path, cfg.dataset_format);
    auto [train, test] = split_dataset(dataset.problems, cfg.split_ratio, cfg.split_seed);
    LlmClient generator(cfg.generator);
    LlmClient corrector(cfg.corrector);

    RunOutput out = execute_run(cfg, catalog, generator, corrector, train, test);

    nlohmann::json aggregate = out.report.to_json();
    aggregate["config"] = cfg.to_json();
    if (out.rules_used) {
        aggregate["rules"] = {{"conditions", out.rules.conditions.size()},
                              {"epsilon", out.rules.epsilon},
                              {"train_pos", out.rules.train_pos},
                              {"train_neg", out.rules.train_neg},
                              {"train_flagged", out.rules.train_flagged},
                              {"train_size", out.rules.train_size}};
    }
    write_text(std::filesystem::path(cfg.out_dir) / "results.jsonl",
               results_to_jsonl(out.results));
    write_text(std::filesystem::path(cfg.out_dir) / "aggregate.json", aggregate.dump(2) + "\n");
    write_manifest(cfg, "run");
    std::cout << "samples " << out.report.samples << " (failed " << out.report.failed
              << "), accuracy " << out.report.accuracy_before << " -> "
              << out.report.accuracy_after << ", re-prompt rate " << out.report.reprompt_rate
              << "\n";
    return 0;
}

int cmd_sweep(const ExperimentConfig& base_cfg) {
    TemplateCatalog catalog = TemplateCatalog::load(base_cfg.data_dir);
    Dataset dataset = load_dataset(base_cfg.dataset_path, base_cfg.dataset_format);
    auto [train, test] = split_dataset(dataset.problems, base_cfg.split_ratio, base_cfg.split_seed);
    LlmClient generator(base_cfg.generator);
    LlmClient corrector(base_cfg.corrector);

    TrainingBuild build = build_training_samples(base_cfg, catalog, generator, train);

    nlohmann::json rows = nlohmann::json::array();
    for (double epsilon : kEpsilonSweepGrid) {
        ExperimentConfig cfg = base_cfg;
        cfg.epsilon = epsilon;
        RuleSet rules = learn_rule_set(cfg, catalog, build.samples);
        Pipeline pipeline(catalog, generator, corrector, &rules, cfg.run_options());
        std::vector<SampleResult> results = pipeline.run_dataset(test);
        AggregateReport report = pipeline.aggregate(results, test);
        nlohmann::json row;
        row["epsilon"] = epsilon;
        row["rules"] = rules.conditions.size();
        row["train_flag_rate"] = rules.train_size > 0
                                     ? static_cast<double>(rules.train_flagged) / rules.train_size
                                     : 0.0;
        row["reprompt_rate"] = report.reprompt_rate;
        row["precision"] = report.precision;
        row["recall"] = report.recall;
        row["f1"] = report.f1;
        row["accuracy_before"] = report.accuracy_before;
        row["accuracy_after"] = report.accuracy_after;
        rows.push_back(std::move(row));
    }
    nlohmann::json sweep;
    sweep["config"] = base_cfg.to_json();
    sweep["rows"] = std::move(rows);
    write_text(std::filesystem::path(base_cfg.out_dir) / "sweep.json", sweep.dump(2) + "\n");
    write_manifest(base_cfg, "sweep-epsilon");
    std::cout << "swept " << kEpsilonSweepGrid.size() << " epsilon values over " << test.size()
              << " test problems\n";
    return 0;
}

int cmd_report(const ExperimentConfig& cfg, const std::string& results_path) {
    std::ifstream in(results_path);
    if (!in) throw std::runtime_error("cannot read results: " + results_path);
    std::vector<ImprovementInput> inputs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("results line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.value("failed", false)) continue;
        ImprovementInput input;
        input.outcome = j.value("outcome", "");
        input.flagged = j.value("flagged", false);
        if (j.contains("delta_eqd") && !j["delta_eqd"].is_null()) {
            input.delta_eqd = j["delta_eqd"].get<double>();
        }
        inputs.push_back(std::move(input));
    }
    ImprovementReport report = improvement_report(inputs);
    std::cout << report.to_json().dump(2) << "\n";
    write_text(std::filesystem::path(cfg.out_dir) / "improvement.json",
               report.to_json().dump(2) + "\n");
    write_manifest(cfg, "report");
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"EDCIM: equation extraction with symbolic error detection and correction"};
    app.fallthrough(true);
    app.set_version_flag("--version", std::string(kVersion));

    std::string config_path;
    app.add_option("--config", config_path, "experiment config JSON");

    // Flag overrides applied on top of the config file.
    std::optional<std::string> dataset_path, dataset_format, detector, out_dir, data_dir,
        rules_path, eqd_mode, neg_def;
    std::optional<double> epsilon, ratio, judge_tol;
    std::optional<uint64_t> seed;
    std::optional<int> prompt_setting, generations, workers;
    std::optional<std::string> rule_groups;
    app.add_option("--dataset", dataset_path, "dataset file");
    app.add_option("--format", dataset_format, "dataset format: draw1k|gsm8k|generic");
    app.add_option("--detector", detector, "all|oracle|solvability|edr|edr_solvability");
    app.add_option("--epsilon", epsilon, "recall reduction threshold in (0,1]");
    app.add_option("--ratio", ratio, "train split ratio in (0,1)");
    app.add_option("--seed", seed, "split seed");
    app.add_option("--prompt-setting", prompt_setting, "prompt setting 1..7");
    app.add_option("--generations", generations, "samples per problem");
    app.add_option("--workers", workers, "worker threads");
    app.add_option("--judge-tol", judge_tol, "value-match tolerance");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--data-dir", data_dir, "prompt data directory");
    app.add_option("--rules", rules_path, "pre-learned rule set JSON");
    app.add_option("--eqd-mode", eqd_mode, "normalized|paper_literal");
    app.add_option("--neg-def", neg_def, "false_positives|paper_literal");
    app.add_option("--rule-groups", rule_groups,
                   "comma list of enabled groups: symbols,complexity,diversity");

    auto* solve_cmd = app.add_subcommand("solve", "parse and solve equations from stdin");
    auto* eqd_cmd = app.add_subcommand("eqd", "equation distance between two systems");
    std::string eqd_a, eqd_b;
    std::string eqd_mode_arg = "normalized";
    eqd_cmd->add_option("a", eqd_a, "first system file")->required();
    eqd_cmd->add_option("b", eqd_b, "second system file")->required();
    eqd_cmd->add_option("--mode", eqd_mode_arg, "normalized|paper_literal");

    auto* generate_cmd = app.add_subcommand("generate", "run generations, write responses");
    std::string generate_split = "all";
    std::string record_path;
    generate_cmd->add_option("--split", generate_split, "all|train|test");
    generate_cmd->add_option("--record", record_path, "record transcript to this path");

    auto* learn_cmd = app.add_subcommand("learn-rules", "learn the detector on the train split");
    auto* run_cmd = app.add_subcommand("run", "full pipeline on the test split");
    auto* sweep_cmd = app.add_subcommand("sweep-epsilon", "epsilon grid sweep");
    auto* report_cmd = app.add_subcommand("report", "improvement analysis of a results file");
    std::string results_path = "out/results.jsonl";
    report_cmd->add_option("--results", results_path, "results.jsonl path");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        ExperimentConfig cfg =
            config_path.empty() ? default_config() : ExperimentConfig::load(config_path);
        if (dataset_path) cfg.dataset_path = *dataset_path;
        if (dataset_format) {
            auto f = dataset_format_from_name(*dataset_format);
            if (!f) throw std::invalid_argument("unknown dataset format: " + *dataset_format);
            cfg.dataset_format = *f;
        }
        if (detector) {
            auto d = detector_from_name(*detector);
            if (!d) throw std::invalid_argument("unknown detector: " + *detector);
            cfg.detector = *d;
        }
        if (epsilon) cfg.epsilon = *epsilon;
        if (ratio) cfg.split_ratio = *ratio;
        if (seed) cfg.split_seed = *seed;
        if (prompt_setting) cfg.prompt_setting = *prompt_setting;
        if (generations) cfg.generations = *generations;
        if (workers) cfg.workers = *workers;
        if (judge_tol) cfg.judge_tol = *judge_tol;
        if (out_dir) cfg.out_dir = *out_dir;
        if (data_dir) cfg.data_dir = *data_dir;
        if (rules_path) cfg.rules_path = *rules_path;
        if (eqd_mode) {
            auto m = eqd_mode_from_name(*eqd_mode);
            if (!m) throw std::invalid_argument("unknown eqd mode: " + *eqd_mode);
            cfg.eqd_mode = *m;
        }
        if (neg_def) {
            cfg.neg_definition = *neg_def == "paper_literal" ? NegDefinition::PaperLiteral
                                                             : NegDefinition::FalsePositives;
        }
        if (rule_groups) {
            cfg.group_symbols = rule_groups->find("symbols") != std::string::npos;
            cfg.group_complexity = rule_groups->find("complexity") != std::string::npos;
            cfg.group_diversity = rule_groups->find("diversity") != std::string::npos;
        }

        if (solve_cmd->parsed()) return cmd_solve();
        if (eqd_cmd->parsed()) return cmd_eqd(eqd_a, eqd_b, eqd_mode_arg);

        cfg.validate();
        if (generate_cmd->parsed()) return cmd_generate(cfg, generate_split, record_path);
        if (learn_cmd->parsed()) return cmd_learn_rules(cfg);
        if (run_cmd->parsed()) return cmd_run(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg);
        if (report_cmd->parsed()) return cmd_report(cfg, results_path);

        std::cerr << app.help() << "\n";
        return 1;
    } catch (const LlmError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace edcim
