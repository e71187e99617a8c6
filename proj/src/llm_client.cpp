#include "edcim/llm_client.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace edcim {

nlohmann::json ProviderConfig::to_json() const {
    nlohmann::json j;
    j["kind"] = kind == Kind::HttpChat ? "http_chat" : "replay";
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["api_key_env"] = api_key_env;
    j["temperature"] = temperature;
    j["max_tokens"] = max_tokens;
    j["max_concurrent"] = max_concurrent;
    j["retry_count"] = retry_count;
    j["retry_backoff_ms"] = retry_backoff_ms;
    j["transcript"] = transcript;
    return j;
}

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j) {
    ProviderConfig c;
    c.kind = j.value("kind", "replay") == "http_chat" ? Kind::HttpChat : Kind::Replay;
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    c.api_key_env = j.value("api_key_env", "EDCIM_API_KEY");
    c.temperature = j.value("temperature", 0.7);
    c.max_tokens = j.value("max_tokens", 512);
    c.max_concurrent = j.value("max_concurrent", 4);
    c.retry_count = j.value("retry_count", 3);
    c.retry_backoff_ms = j.value("retry_backoff_ms", 250);
    c.transcript = j.value("transcript", "");
    return c;
}

void ProviderConfig::validate() const {
    if (kind == Kind::Replay && transcript.empty()) {
        throw std::invalid_argument("replay provider requires a transcript path");
    }
    if (kind == Kind::HttpChat && (endpoint.empty() || model.empty())) {
        throw std::invalid_argument("http provider requires endpoint and model");
    }
    if (max_concurrent < 1) throw std::invalid_argument("max_concurrent must be >= 1");
}

nlohmann::json CallLedger::snapshot(bool include_wall) const {
    nlohmann::json j = {{"calls", calls.load()},
                        {"prompt_tokens", prompt_tokens.load()},
                        {"completion_tokens", completion_tokens.load()}};
    if (include_wall) j["wall_ms"] = wall_ms.load();
    return j;
}

std::string prompt_hash(const PromptBundle& bundle) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    mix(bundle.system_instruction);
    mix("\x1e");
    mix(bundle.user_message);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

TranscriptWriter::TranscriptWriter(std::filesystem::path path, std::string session)
    : path_(std::move(path)), session_(std::move(session)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void TranscriptWriter::record(const std::string& hash, int index,
                              const CompletionResult& result) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(hash, index);
    auto it = seen_.find(key);
    if (it != seen_.end()) {
        if (it->second != result.text) {
            throw std::runtime_error("transcript conflict for key " + hash + ":" +
                                     std::to_string(index));
        }
        return;
    }
    seen_.emplace(key, result.text);
    nlohmann::json j;
    j["session"] = session_;
    j["key"] = hash;
    j["index"] = index;
    j["response"] = result.text;
    j["prompt_tokens"] = result.usage.prompt_tokens;
    j["completion_tokens"] = result.usage.completion_tokens;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot append transcript: " + path_.string());
    out << j.dump() << "\n";
}

TranscriptStore TranscriptStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read transcript: " + path.string());
    TranscriptStore store;
    std::string line;
    int line_no = 0;
    std::map<std::string, bool> session_seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            CompletionResult result;
            result.text = j.at("response").get<std::string>();
            result.usage.prompt_tokens = j.value("prompt_tokens", 0L);
            result.usage.completion_tokens = j.value("completion_tokens", 0L);
            auto key = std::make_pair(j.at("key").get<std::string>(), j.at("index").get<int>());
            auto [it, inserted] = store.entries_.emplace(key, result);
            if (!inserted && it->second.text != result.text) {
                throw std::runtime_error("conflicting duplicate key " + key.first + ":" +
                                         std::to_string(key.second));
            }
            std::string session = j.value("session", "");
            if (!session_seen.count(session)) {
                session_seen[session] = true;
                store.sessions_.push_back(session);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("transcript " + path.string() + " line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
    return store;
}

std::optional<CompletionResult> TranscriptStore::find(const std::string& hash,
                                                      int index) const {
    auto it = entries_.find({hash, index});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

namespace {

class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(const ProviderConfig& config)
        : store_(TranscriptStore::load(config.transcript)) {}

    CompletionResult complete(const PromptBundle& bundle, int index) override {
        std::string hash = prompt_hash(bundle);
        auto hit = store_.find(hash, index);
        if (!hit) {
            throw LlmError(LlmError::Kind::ReplayMiss,
                           "replay miss for prompt " + hash + " index " +
                               std::to_string(index));
        }
        return *hit;
    }

private:
    TranscriptStore store_;
};

class HttpChatBackend : public CompletionBackend {
public:
    explicit HttpChatBackend(const ProviderConfig& config) : config_(config) {
        // "scheme://host[:port][/path]" -> httplib base + path prefix
        auto scheme_end = config_.endpoint.find("://");
        size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto path_start = config_.endpoint.find('/', host_start);
        if (path_start == std::string::npos) {
            base_ = config_.endpoint;
        } else {
            base_ = config_.endpoint.substr(0, path_start);
            path_prefix_ = config_.endpoint.substr(path_start);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
        if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }

    CompletionResult complete(const PromptBundle& bundle, int) override {
        nlohmann::json body;
        body["model"] = config_.model;
        body["messages"] = {{{"role", "system"}, {"content", bundle.system_instruction}},
                            {{"role", "user"}, {"content", bundle.user_message}}};
        body["temperature"] = config_.temperature;
        body["max_tokens"] = config_.max_tokens;
        std::string payload = body.dump();

        std::string last_error = "no attempt made";
        int last_status = 0;
        for (int attempt = 0; attempt <= config_.retry_count; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    config_.retry_backoff_ms << (attempt - 1)));
            }
            httplib::Client client(base_);
            client.set_connection_timeout(30);
            client.set_read_timeout(120);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                                   "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                last_status = 0;
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = res->body;
                last_status = res->status;
                continue;
            }
            if (res->status != 200) {
                throw LlmError(LlmError::Kind::Http,
                               "http " + std::to_string(res->status) + ": " + res->body,
                               res->status);
            }
            try {
                nlohmann::json j = nlohmann::json::parse(res->body);
                CompletionResult result;
                result.text = j.at("choices").at(0).at("message").at("content")
                                  .get<std::string>();
                if (j.contains("usage")) {
                    result.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
                    result.usage.completion_tokens = j["usage"].value("completion_tokens", 0L);
                }
                return result;
            } catch (const nlohmann::json::exception& e) {
                throw LlmError(LlmError::Kind::Http,
                               std::string("malformed completion response: ") + e.what(),
                               res->status);
            }
        }
        if (last_status > 0) {
            throw LlmError(LlmError::Kind::Http,
                           "http " + std::to_string(last_status) + " after retries: " +
                               last_error,
                           last_status);
        }
        throw LlmError(LlmError::Kind::Transport, last_error);
    }

private:
    ProviderConfig config_;
    std::string base_;
    std::string path_prefix_;
    std::string api_key_;
};

std::unique_ptr<CompletionBackend> make_backend(const ProviderConfig& config) {
    config.validate();
    if (config.kind == ProviderConfig::Kind::Replay) {
        return std::make_unique<ReplayBackend>(config);
    }
    return std::make_unique<HttpChatBackend>(config);
}

}  // namespace

LlmClient::LlmClient(ProviderConfig config)
    : config_(std::move(config)), backend_(make_backend(config_)) {}

LlmClient::LlmClient(ProviderConfig config, std::unique_ptr<CompletionBackend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {}

std::vector<std::string> LlmClient::complete(const PromptBundle& bundle, int n) {
    if (n < 1) throw std::invalid_argument("complete requires n >= 1");
    auto started = std::chrono::steady_clock::now();
    std::vector<CompletionResult> results(n);

    const int workers = std::min(config_.max_concurrent, n);
    std::exception_ptr failure;
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) results[i] = backend_->complete(bundle, i);
    } else {
        std::atomic<int> next{0};
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    int i = next.fetch_add(1);
                    if (i >= n) return;
                    try {
                        results[i] = backend_->complete(bundle, i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    ledger_.calls += n;
    ledger_.wall_ms += elapsed;
    std::string hash = recorder_ ? prompt_hash(bundle) : std::string();
    std::vector<std::string> texts;
    texts.reserve(n);
    for (int i = 0; i < n; ++i) {
        ledger_.prompt_tokens += results[i].usage.prompt_tokens;
        ledger_.completion_tokens += results[i].usage.completion_tokens;
        if (recorder_) recorder_->record(hash, i, results[i]);
        texts.push_back(std::move(results[i].text));
    }
    return texts;
}

}  // namespace edcim
