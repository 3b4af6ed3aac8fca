#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace temploc {

// Image (or backend-opaque video) attachment. `bytes` holds the prepared
// payload; `path` is kept for provenance and for mocks that key on it.
struct MediaPayload {
    std::filesystem::path path;
    std::string mime = "image/jpeg";
    std::vector<unsigned char> bytes;

    bool is_video() const { return mime.rfind("video/", 0) == 0; }
};

struct ChatRequest {
    std::string model_id;
    std::string text;
    std::optional<MediaPayload> image;
    int max_tokens = 512;
    double temperature = 0.0;
};

struct ChatResponse {
    std::string text;
    std::string model_id;
    long latency_ms = 0;
    bool cached = false;
};

struct Capabilities {
    bool text = true;
    bool vision = false;
    bool video = false;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual Capabilities capabilities() const = 0;
    virtual std::string name() const = 0;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Validates the request against the backend's capability set
// (CapabilityMismatch otherwise) and dispatches.
ChatResponse complete(ChatBackend& backend, const ChatRequest& request);

// One slot of a batch: either a response or the error that killed the item.
struct ChatResult {
    std::optional<ChatResponse> response;
    std::string error;

    bool ok() const { return response.has_value(); }
};

// Order-preserving bounded-concurrency fan-out: responses align
// index-for-index with requests, at most max_in_flight outstanding, partial
// failures land in their own slots instead of aborting the batch.
std::vector<ChatResult> complete_batch(ChatBackend& backend,
                                       const std::vector<ChatRequest>& requests,
                                       int max_in_flight);

struct RetryPolicy {
    int max_attempts = 3;
    int initial_delay_ms = 250;
    double multiplier = 2.0;
    int max_delay_ms = 8000;

    // Monotonically non-decreasing: initial * multiplier^attempt, capped.
    std::chrono::milliseconds delay_for_attempt(int attempt) const;
};

}  // namespace temploc
