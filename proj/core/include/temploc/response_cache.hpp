#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "temploc/chat.hpp"

namespace temploc {

// Content-addressed request digest: SHA-256 over (model_id, text, prepared
// image bytes if any, max_tokens, temperature), length-framed so field
// boundaries cannot collide. Identical requests hash identically; any field
// change produces a new digest.
struct CacheKey {
    std::string digest;

    static CacheKey for_request(const ChatRequest& request);

    bool operator==(const CacheKey&) const = default;
};

// One JSON file per entry, named <digest>.json, written via write-to-temp
// then atomic rename so concurrent writers of the same key converge to one
// durable record. The same directory doubles as a replay fixture set.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    // Throws CacheCorrupt when the stored payload does not match its digest.
    std::optional<ChatResponse> get(const CacheKey& key) const;

    void put(const CacheKey& key, const ChatRequest& request, const ChatResponse& response);

    bool contains(const CacheKey& key) const;
    std::size_t size() const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const CacheKey& key) const;
    std::filesystem::path dir_;
};

}  // namespace temploc
