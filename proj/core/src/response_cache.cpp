#include "temploc/response_cache.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"
#include "temploc/sha256.hpp"

namespace temploc {

namespace {

std::string format_temperature(double t) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t);
    if (ec != std::errc{}) return "0";
    return std::string(buf, ptr);
}

std::string unique_suffix() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    return std::to_string(rd()) + "." + std::to_string(counter.fetch_add(1));
}

}  // namespace

CacheKey CacheKey::for_request(const ChatRequest& request) {
    Sha256 h;
    h.update("temploc.chatreq.v1");
    h.update_u64(request.model_id.size()).update(request.model_id);
    h.update_u64(request.text.size()).update(request.text);
    if (request.image) {
        h.update_u64(1);
        h.update_u64(request.image->mime.size()).update(request.image->mime);
        h.update_u64(request.image->bytes.size()).update(request.image->bytes);
    } else {
        h.update_u64(0);
    }
    h.update_u64(static_cast<std::uint64_t>(request.max_tokens));
    const std::string temp = format_temperature(request.temperature);
    h.update_u64(temp.size()).update(temp);
    return CacheKey{h.hex_digest()};
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::entry_path(const CacheKey& key) const {
    return dir_ / (key.digest + ".json");
}

std::optional<ChatResponse> ResponseCache::get(const CacheKey& key) const {
    const auto path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json entry = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (entry.is_discarded()) throw CacheCorrupt(key.digest, "entry is not valid JSON");
    if (!entry.contains("digest") || entry["digest"] != key.digest) {
        throw CacheCorrupt(key.digest, "stored digest does not match entry filename");
    }
    if (!entry.contains("response") || !entry["response"].contains("text")) {
        throw CacheCorrupt(key.digest, "entry has no response payload");
    }
    ChatResponse response;
    response.text = entry["response"]["text"].get<std::string>();
    response.latency_ms = entry["response"].value("latency_ms", 0L);
    response.model_id = entry["request"].value("model_id", std::string{});
    response.cached = true;
    return response;
}

void ResponseCache::put(const CacheKey& key, const ChatRequest& request,
                        const ChatResponse& response) {
    nlohmann::json req{{"model_id", request.model_id},
                       {"text", request.text},
                       {"max_tokens", request.max_tokens},
                       {"temperature", request.temperature}};
    if (request.image) req["image_sha256"] = sha256_hex(request.image->bytes);
    nlohmann::json entry{{"digest", key.digest},
                         {"request", std::move(req)},
                         {"response", {{"text", response.text}, {"latency_ms", response.latency_ms}}}};

    const auto final_path = entry_path(key);
    const auto tmp_path = dir_ / (key.digest + ".tmp." + unique_suffix());
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write cache entry: " + tmp_path.string());
        out << entry.dump(2) << '\n';
    }
    // Atomic within one filesystem: concurrent writers of the same key
    // converge on one durable record.
    std::filesystem::rename(tmp_path, final_path);
}

bool ResponseCache::contains(const CacheKey& key) const {
    return std::filesystem::exists(entry_path(key));
}

std::size_t ResponseCache::size() const {
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") ++n;
    }
    return n;
}

}  // namespace temploc
