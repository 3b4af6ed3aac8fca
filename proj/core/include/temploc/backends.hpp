#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>

#include "temploc/chat.hpp"
#include "temploc/response_cache.hpp"

namespace temploc {

// Identity backend: the response text is the request text. Handy for
// plumbing tests and dry runs.
class EchoBackend : public ChatBackend {
public:
    Capabilities capabilities() const override { return {true, true, true}; }
    std::string name() const override { return "echo"; }
    ChatResponse complete(const ChatRequest& request) override;
};

// Answers requests from a directory of recorded (digest -> response) entries;
// unknown digests throw UnknownDigest, which signals fixture drift instead of
// silently going live.
class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(std::filesystem::path dir);
    Capabilities capabilities() const override { return {true, true, true}; }
    std::string name() const override { return "replay"; }
    ChatResponse complete(const ChatRequest& request) override;

private:
    ResponseCache store_;
};

// Read-through cache over any backend. Running a live session with this
// wrapper *is* the replay recorder: the populated directory can be handed to
// ReplayBackend as-is.
class CachingBackend : public ChatBackend {
public:
    CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path cache_dir);
    Capabilities capabilities() const override { return inner_->capabilities(); }
    std::string name() const override { return inner_->name(); }
    ChatResponse complete(const ChatRequest& request) override;

    const ResponseCache& cache() const { return cache_; }

private:
    std::shared_ptr<ChatBackend> inner_;
    ResponseCache cache_;
};

// Records a live session into out_dir; replaying it later is just
// ReplayBackend{out_dir}.
std::shared_ptr<ChatBackend> record_replay_session(std::shared_ptr<ChatBackend> live_backend,
                                                   const std::filesystem::path& out_dir);

// Counts calls that reach the wrapped backend. Wrap the live backend inside a
// CachingBackend with this to assert cache soundness.
class CountingBackend : public ChatBackend {
public:
    explicit CountingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}
    Capabilities capabilities() const override { return inner_->capabilities(); }
    std::string name() const override { return inner_->name(); }
    ChatResponse complete(const ChatRequest& request) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_->complete(request);
    }
    std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

private:
    std::shared_ptr<ChatBackend> inner_;
    std::atomic<std::size_t> calls_{0};
};

// Retries TransientError with exponential backoff; throws BackendUnavailable
// once attempts are exhausted. Permanent errors pass straight through.
class RetryingBackend : public ChatBackend {
public:
    RetryingBackend(std::shared_ptr<ChatBackend> inner, RetryPolicy policy)
        : inner_(std::move(inner)), policy_(policy) {}
    Capabilities capabilities() const override { return inner_->capabilities(); }
    std::string name() const override { return inner_->name(); }
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatBackend> inner_;
    RetryPolicy policy_;
};

struct HttpBackendConfig {
    std::string endpoint_url;  // e.g. https://api.example.com/v1
    std::string model_id;
    std::string api_key_env;  // name of the env var holding the key
    int max_attempts = 3;
    int initial_delay_ms = 500;
    double backoff_multiplier = 2.0;
    int timeout_sec = 120;
    bool vision = false;
    int max_tokens = 512;
    double temperature = 0.0;
    int max_in_flight = 0;  // 0 = caller decides

    static HttpBackendConfig from_file(const std::filesystem::path& file);
};

// OpenAI-compatible /chat/completions client. Images go as base64 data URLs
// in the message content. 429 and 5xx are transient; other 4xx are permanent;
// context-length rejections surface as ContextOverflow.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    Capabilities capabilities() const override { return {true, config_.vision, false}; }
    std::string name() const override { return config_.model_id; }
    ChatResponse complete(const ChatRequest& request) override;

private:
    HttpBackendConfig config_;
};

// HttpBackend wrapped in the config's retry policy.
std::shared_ptr<ChatBackend> make_http_backend(const HttpBackendConfig& config);

// Resolves a CLI backend spec: "echo", "replay:<dir>" or "http:<config.json>".
std::shared_ptr<ChatBackend> make_backend(const std::string& spec);

}  // namespace temploc
