#pragma once

#include "edcim/prompt_builder.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace edcim {

struct ProviderConfig {
    enum class Kind { HttpChat, Replay };

    Kind kind = Kind::Replay;
    std::string endpoint;  // e.g. "https://api.openai.com/v1"
    std::string model;
    std::string api_key_env = "EDCIM_API_KEY";  // key read from env, never from files
    double temperature = 0.7;
    int max_tokens = 512;
    int max_concurrent = 4;
    int retry_count = 3;
    int retry_backoff_ms = 250;
    std::string transcript;  // replay transcript path

    nlohmann::json to_json() const;
    static ProviderConfig from_json(const nlohmann::json& j);
    void validate() const;  // replay needs transcript, http needs endpoint+model
};

class LlmError : public std::runtime_error {
public:
    enum class Kind { Http, ReplayMiss, Transport };

    LlmError(Kind kind, std::string message, int status = 0)
        : std::runtime_error(std::move(message)), kind_(kind), status_(status) {}

    Kind kind() const { return kind_; }
    int status() const { return status_; }

private:
    Kind kind_;
    int status_;
};

struct CallLedger {
    std::atomic<long> calls{0};
    std::atomic<long> prompt_tokens{0};
    std::atomic<long> completion_tokens{0};
    std::atomic<long> wall_ms{0};

    // Reports omit wall time so replayed runs stay byte-identical.
    nlohmann::json snapshot(bool include_wall = true) const;
};

struct CompletionUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct CompletionResult {
    std::string text;
    CompletionUsage usage;
};

// 64-bit FNV-1a over the prompt bytes (system \x1e user), hex encoded.
// Template changes therefore invalidate stale transcript entries.
std::string prompt_hash(const PromptBundle& bundle);

// Line-delimited transcript: one JSON record per (prompt hash, call index).
class TranscriptWriter {
public:
    TranscriptWriter(std::filesystem::path path, std::string session);

    // Identical re-records are dropped; a conflicting record for an existing
    // key throws (it would make replay ambiguous).
    void record(const std::string& hash, int index, const CompletionResult& result);

private:
    std::filesystem::path path_;
    std::string session_;
    std::mutex mutex_;
    std::map<std::pair<std::string, int>, std::string> seen_;
};

class TranscriptStore {
public:
    static TranscriptStore load(const std::filesystem::path& path);

    std::optional<CompletionResult> find(const std::string& hash, int index) const;
    size_t size() const { return entries_.size(); }
    const std::vector<std::string>& sessions() const { return sessions_; }

private:
    std::map<std::pair<std::string, int>, CompletionResult> entries_;
    std::vector<std::string> sessions_;
};

// One request for one sampled completion. Implementations must be safe to
// call from multiple threads.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual CompletionResult complete(const PromptBundle& bundle, int index) = 0;
};

class LlmClient {
public:
    explicit LlmClient(ProviderConfig config);
    LlmClient(ProviderConfig config, std::unique_ptr<CompletionBackend> backend);

    // n sampled completions for one prompt, at most max_concurrent in
    // flight. Throws LlmError; the pipeline turns that into a failed sample.
    std::vector<std::string> complete(const PromptBundle& bundle, int n);

    void set_recorder(std::shared_ptr<TranscriptWriter> recorder) { recorder_ = std::move(recorder); }
    CallLedger& ledger() { return ledger_; }
    const ProviderConfig& config() const { return config_; }

private:
    ProviderConfig config_;
    std::unique_ptr<CompletionBackend> backend_;
    std::shared_ptr<TranscriptWriter> recorder_;
    CallLedger ledger_;
};

}  // namespace edcim
