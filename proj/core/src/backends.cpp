#include "temploc/backends.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

// httplib must see the OpenSSL macro before inclusion for https endpoints.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"

namespace temploc {

namespace {

using nlohmann::json;

std::string base64_encode(const std::vector<unsigned char>& data) {
    static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < data.size()) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        const unsigned v = data[i] << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == data.size()) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading path, no trailing slash
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL must include a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.base = url;
    } else {
        parsed.base = url.substr(0, path_start);
        parsed.path = url.substr(path_start);
        while (!parsed.path.empty() && parsed.path.back() == '/') parsed.path.pop_back();
    }
    return parsed;
}

bool looks_like_context_overflow(const std::string& body) {
    static const char* needles[] = {"context_length_exceeded", "maximum context length",
                                    "context length", "too many tokens"};
    for (const char* n : needles) {
        if (body.find(n) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

ChatResponse EchoBackend::complete(const ChatRequest& request) {
    return ChatResponse{request.text, request.model_id, 0, false};
}

ReplayBackend::ReplayBackend(std::filesystem::path dir) : store_(std::move(dir)) {}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
    const auto key = CacheKey::for_request(request);
    if (auto hit = store_.get(key)) return *hit;
    throw UnknownDigest(key.digest);
}

CachingBackend::CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_(std::move(cache_dir)) {}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
    const auto key = CacheKey::for_request(request);
    if (auto hit = cache_.get(key)) return *hit;
    ChatResponse response = inner_->complete(request);
    cache_.put(key, request, response);
    return response;
}

std::shared_ptr<ChatBackend> record_replay_session(std::shared_ptr<ChatBackend> live_backend,
                                                   const std::filesystem::path& out_dir) {
    return std::make_shared<CachingBackend>(std::move(live_backend), out_dir);
}

ChatResponse RetryingBackend::complete(const ChatRequest& request) {
    std::string last_error;
    for (int attempt = 0; attempt < policy_.max_attempts; ++attempt) {
        try {
            return inner_->complete(request);
        } catch (const TransientError& e) {
            last_error = e.what();
            if (attempt + 1 < policy_.max_attempts) {
                std::this_thread::sleep_for(policy_.delay_for_attempt(attempt));
            }
        }
    }
    throw BackendUnavailable(policy_.max_attempts, last_error);
}

HttpBackendConfig HttpBackendConfig::from_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open backend config: " + file.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("backend config is not valid JSON: " + file.string());
    HttpBackendConfig config;
    config.endpoint_url = j.value("endpoint_url", std::string{});
    config.model_id = j.value("model_id", std::string{});
    config.api_key_env = j.value("api_key_env", std::string{});
    config.max_attempts = j.value("max_attempts", config.max_attempts);
    config.initial_delay_ms = j.value("initial_delay_ms", config.initial_delay_ms);
    config.backoff_multiplier = j.value("backoff_multiplier", config.backoff_multiplier);
    config.timeout_sec = j.value("timeout_sec", config.timeout_sec);
    config.vision = j.value("vision", config.vision);
    config.max_tokens = j.value("max_tokens", config.max_tokens);
    config.temperature = j.value("temperature", config.temperature);
    config.max_in_flight = j.value("max_in_flight", config.max_in_flight);
    if (config.endpoint_url.empty()) throw ConfigError("backend config needs endpoint_url");
    if (config.model_id.empty()) throw ConfigError("backend config needs model_id");
    return config;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    if (request.image && request.image->is_video()) {
        throw CapabilityMismatch("OpenAI-compatible chat endpoint cannot take raw video payloads");
    }

    json content;
    if (request.image) {
        content = json::array();
        content.push_back({{"type", "text"}, {"text", request.text}});
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:" + request.image->mime + ";base64," +
                           base64_encode(request.image->bytes)}}}});
    } else {
        content = request.text;
    }
    const std::string model = request.model_id.empty() ? config_.model_id : request.model_id;
    json body{{"model", model},
              {"max_tokens", request.max_tokens},
              {"temperature", request.temperature},
              {"messages", json::array({{{"role", "user"}, {"content", content}}})}};

    const ParsedUrl url = parse_url(config_.endpoint_url);
    httplib::Client client(url.base);
    client.set_connection_timeout(config_.timeout_sec, 0);
    client.set_read_timeout(config_.timeout_sec, 0);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(url.path + "/chat/completions", headers, body.dump(),
                              "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    if (!result) {
        throw TransientError("connection to " + url.base + " failed: " +
                             httplib::to_string(result.error()));
    }
    const int status = result->status;
    if (status == 429 || status >= 500) {
        throw TransientError("endpoint returned status " + std::to_string(status));
    }
    if (status >= 400) {
        if (looks_like_context_overflow(result->body)) {
            throw ContextOverflow(request.text.size(), "endpoint rejected prompt length");
        }
        throw ChatError("endpoint returned status " + std::to_string(status) + ": " +
                        result->body.substr(0, 500));
    }

    json parsed = json::parse(result->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
        throw ChatError("endpoint returned an unexpected payload: " + result->body.substr(0, 500));
    }
    const auto& message = parsed["choices"][0]["message"];
    ChatResponse response;
    response.text = message.value("content", std::string{});
    response.model_id = parsed.value("model", model);
    response.latency_ms = static_cast<long>(elapsed);
    response.cached = false;
    return response;
}

std::shared_ptr<ChatBackend> make_http_backend(const HttpBackendConfig& config) {
    RetryPolicy policy;
    policy.max_attempts = config.max_attempts;
    policy.initial_delay_ms = config.initial_delay_ms;
    policy.multiplier = config.backoff_multiplier;
    return std::make_shared<RetryingBackend>(std::make_shared<HttpBackend>(config), policy);
}

std::shared_ptr<ChatBackend> make_backend(const std::string& spec) {
    if (spec == "echo") return std::make_shared<EchoBackend>();
    if (spec.rfind("replay:", 0) == 0) {
        return std::make_shared<ReplayBackend>(std::filesystem::path(spec.substr(7)));
    }
    if (spec.rfind("http:", 0) == 0) {
        return make_http_backend(HttpBackendConfig::from_file(spec.substr(5)));
    }
    throw ConfigError("unknown backend spec '" + spec +
                      "' (expected echo, replay:<dir> or http:<config.json>)");
}

}  // namespace temploc
