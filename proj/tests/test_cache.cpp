#include <doctest.h>

#include <fstream>
#include <thread>

#include "temploc/backends.hpp"
#include "temploc/errors.hpp"
#include "temploc/response_cache.hpp"
#include "temploc/sha256.hpp"
#include "support/temp_dir.hpp"
#include "support/test_backends.hpp"

using namespace temploc;
using temploc::testing::ScriptedBackend;

TEST_SUITE_BEGIN("llm_backends");

TEST_CASE("sha256 matches the reference vector") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

namespace {

ChatRequest base_request() {
    ChatRequest req;
    req.model_id = "model-a";
    req.text = "prompt text";
    req.max_tokens = 256;
    req.temperature = 0.0;
    return req;
}

}  // namespace

TEST_CASE("identical requests share a digest; any field change produces a new one") {
    const auto key = CacheKey::for_request(base_request());
    CHECK(key == CacheKey::for_request(base_request()));
    CHECK(key.digest.size() == 64);

    auto changed = base_request();
    changed.model_id = "model-b";
    CHECK(CacheKey::for_request(changed) != key);

    changed = base_request();
    changed.text += "!";
    CHECK(CacheKey::for_request(changed) != key);

    changed = base_request();
    changed.max_tokens = 257;
    CHECK(CacheKey::for_request(changed) != key);

    changed = base_request();
    changed.temperature = 0.5;
    CHECK(CacheKey::for_request(changed) != key);

    changed = base_request();
    changed.image = MediaPayload{"f.jpg", "image/jpeg", {1, 2, 3}};
    const auto with_image = CacheKey::for_request(changed);
    CHECK(with_image != key);
    changed.image->bytes = {1, 2, 4};
    CHECK(CacheKey::for_request(changed) != with_image);
}

TEST_CASE("field framing cannot collide across boundaries") {
    auto a = base_request();
    a.model_id = "ab";
    a.text = "c";
    auto b = base_request();
    b.model_id = "a";
    b.text = "bc";
    CHECK(CacheKey::for_request(a) != CacheKey::for_request(b));
}

TEST_CASE("put then get round-trips exactly") {
    testing::TempDir dir("cache");
    ResponseCache cache(dir.path());
    const auto req = base_request();
    const auto key = CacheKey::for_request(req);
    CHECK_FALSE(cache.get(key).has_value());

    cache.put(key, req, ChatResponse{"the answer", "model-a", 123, false});
    const auto hit = cache.get(key);
    REQUIRE(hit.has_value());
    CHECK(hit->text == "the answer");
    CHECK(hit->latency_ms == 123);
    CHECK(hit->cached);
    CHECK(cache.size() == 1);
}

TEST_CASE("corrupt entries are reported, not silently served") {
    testing::TempDir dir("cache");
    ResponseCache cache(dir.path());
    const auto req = base_request();
    const auto key = CacheKey::for_request(req);

    std::ofstream(dir.path() / (key.digest + ".json")) << "{not json";
    CHECK_THROWS_AS(cache.get(key), CacheCorrupt);

    std::ofstream(dir.path() / (key.digest + ".json"), std::ios::trunc)
        << R"({"digest": "deadbeef", "response": {"text": "x", "latency_ms": 0}})";
    CHECK_THROWS_AS(cache.get(key), CacheCorrupt);
}

TEST_CASE("concurrent writers of one key converge to a single durable record") {
    testing::TempDir dir("cache");
    ResponseCache cache(dir.path());
    const auto req = base_request();
    const auto key = CacheKey::for_request(req);

    std::vector<std::thread> writers;
    for (int i = 0; i < 8; ++i) {
        writers.emplace_back([&] {
            cache.put(key, req, ChatResponse{"same value", "model-a", 1, false});
        });
    }
    for (auto& t : writers) t.join();

    CHECK(cache.size() == 1);
    const auto hit = cache.get(key);
    REQUIRE(hit.has_value());
    CHECK(hit->text == "same value");
}

TEST_CASE("caching backend answers repeats without touching the live backend") {
    testing::TempDir dir("cache");
    auto counting = std::make_shared<CountingBackend>(std::make_shared<EchoBackend>());
    CachingBackend cached(counting, dir.path());

    const auto req = base_request();
    const auto first = cached.complete(req);
    CHECK_FALSE(first.cached);
    CHECK(counting->calls() == 1);

    const auto second = cached.complete(req);
    CHECK(second.cached);
    CHECK(second.text == first.text);
    CHECK(counting->calls() == 1);
}

TEST_CASE("recorded sessions replay byte-identically and reject unknown digests") {
    testing::TempDir dir("replay");
    auto live = std::make_shared<ScriptedBackend>(
        "live", [](const ChatRequest& r) { return "response to <" + r.text + ">"; });
    auto counting = std::make_shared<CountingBackend>(live);
    auto recorder = record_replay_session(counting, dir.path());

    std::vector<std::string> recorded;
    for (int i = 0; i < 5; ++i) {
        ChatRequest req = base_request();
        req.text = "request " + std::to_string(i);
        recorded.push_back(recorder->complete(req).text);
    }
    CHECK(counting->calls() == 5);

    ReplayBackend replay(dir.path());
    for (int i = 0; i < 5; ++i) {
        ChatRequest req = base_request();
        req.text = "request " + std::to_string(i);
        const auto res = replay.complete(req);
        CHECK(res.text == recorded[i]);
        CHECK(res.cached);
    }

    ChatRequest unknown = base_request();
    unknown.text = "never recorded";
    CHECK_THROWS_AS(replay.complete(unknown), UnknownDigest);

    // Re-recording identical traffic is idempotent.
    auto recorder2 = record_replay_session(counting, dir.path());
    for (int i = 0; i < 5; ++i) {
        ChatRequest req = base_request();
        req.text = "request " + std::to_string(i);
        recorder2->complete(req);
    }
    CHECK(counting->calls() == 5);
    CHECK(ResponseCache(dir.path()).size() == 5);
}

TEST_SUITE_END();
