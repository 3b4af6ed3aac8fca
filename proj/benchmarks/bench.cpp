#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "temploc/interval_parser.hpp"
#include "temploc/metrics.hpp"
#include "temploc/prompts.hpp"
#include "temploc/response_cache.hpp"

using namespace temploc;

namespace {

std::vector<std::pair<SecondsSpan, SecondsSpan>> random_interval_pairs(std::size_t n) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> point(0.0, 30.0);
    std::vector<std::pair<SecondsSpan, SecondsSpan>> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double a1 = point(rng), a2 = point(rng), b1 = point(rng), b2 = point(rng);
        if (a1 > a2) std::swap(a1, a2);
        if (b1 > b2) std::swap(b1, b2);
        pairs.push_back({{a1, a2}, {b1, b2}});
    }
    return pairs;
}

void BM_TemporalIoU(benchmark::State& state) {
    const auto pairs = random_interval_pairs(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [pred, gt] = pairs[i++ & 1023];
        benchmark::DoNotOptimize(temporal_iou(pred, gt));
    }
}
BENCHMARK(BM_TemporalIoU);

void BM_ParseStrictJson(benchmark::State& state) {
    const std::string response = R"({"start_frame": 16, "end_frame": 28})";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_interval(response, 31));
    }
}
BENCHMARK(BM_ParseStrictJson);

void BM_ParseVerboseFencedJson(benchmark::State& state) {
    const std::string response =
        "Looking at the descriptions, the activity is most visible from Frame 16 to Frame 28, "
        "where the relevant motion is described repeatedly. The frames before show the person "
        "walking around. My best estimate follows.\n\n"
        "```json\n{\n  \"start_frame\": \"16\",\n  \"end_frame\": \"28\"\n}\n```\n";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_interval(response, 31));
    }
}
BENCHMARK(BM_ParseVerboseFencedJson);

void BM_ParseProsePattern(benchmark::State& state) {
    const std::string response =
        "Based on the sequence of descriptions, the person appears to perform this action "
        "somewhere between frames 16 and 28 of the clip.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_interval(response, 31));
    }
}
BENCHMARK(BM_ParseProsePattern);

void BM_ParseRefusal(benchmark::State& state) {
    const std::string response =
        "I'm sorry, but the descriptions provided do not contain enough information for me to "
        "identify when this activity occurs.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_interval(response, 31));
    }
}
BENCHMARK(BM_ParseRefusal);

void BM_RenderStage2(benchmark::State& state) {
    const int n_frames = static_cast<int>(state.range(0));
    std::vector<FrameDescription> descriptions;
    for (int k = 1; k <= n_frames; ++k) {
        descriptions.push_back(
            {k, "The person is moving through the room and interacting with objects."});
    }
    const auto& templates = TemplateSet::builtin();
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_stage2(templates, descriptions, "person waves"));
    }
}
BENCHMARK(BM_RenderStage2)->Arg(31)->Arg(300);

void BM_CacheKey(benchmark::State& state) {
    ChatRequest req;
    req.model_id = "model";
    req.text = std::string(2048, 'p');
    req.image = MediaPayload{"frame.jpg", "image/jpeg",
                             std::vector<unsigned char>(16 * 1024, 0x5a)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(CacheKey::for_request(req));
    }
}
BENCHMARK(BM_CacheKey);

}  // namespace

BENCHMARK_MAIN();
