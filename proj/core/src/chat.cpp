#include "temploc/chat.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "temploc/errors.hpp"

namespace temploc {

ChatResponse complete(ChatBackend& backend, const ChatRequest& request) {
    const auto caps = backend.capabilities();
    if (request.image) {
        if (request.image->is_video()) {
            if (!caps.video) {
                throw CapabilityMismatch("video payload sent to backend '" + backend.name() +
                                         "' without video capability");
            }
        } else if (!caps.vision) {
            throw CapabilityMismatch("image payload sent to text-only backend '" +
                                     backend.name() + "'");
        }
    }
    return backend.complete(request);
}

std::vector<ChatResult> complete_batch(ChatBackend& backend,
                                       const std::vector<ChatRequest>& requests,
                                       int max_in_flight) {
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    std::vector<ChatResult> results(requests.size());
    if (requests.empty()) return results;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= requests.size()) return;
            try {
                results[i].response = complete(backend, requests[i]);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), requests.size());
    if (n_workers == 1) {
        worker();
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

std::chrono::milliseconds RetryPolicy::delay_for_attempt(int attempt) const {
    // Multipliers below 1 would shrink the delay; non-decreasing backoff is
    // part of the contract.
    const double factor = std::max(1.0, multiplier);
    double delay = initial_delay_ms * std::pow(factor, std::max(0, attempt));
    delay = std::min(delay, static_cast<double>(max_delay_ms));
    if (delay < 0) delay = 0;
    return std::chrono::milliseconds(static_cast<long>(delay));
}

}  // namespace temploc
