#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "temploc/annotations.hpp"
#include "temploc/backends.hpp"
#include "temploc/frames.hpp"
#include "temploc/metrics.hpp"
#include "temploc/prompts.hpp"
#include "temploc/reports.hpp"

namespace temploc {

struct RunConfig {
    PromptStrategy strategy = PromptStrategy::Activity;
    std::shared_ptr<ChatBackend> stage1_backend;
    std::shared_ptr<ChatBackend> stage2_backend;
    std::vector<double> thresholds{0.3, 0.5, 0.7};
    std::optional<SubsetSpec> subset;
    int max_in_flight = 4;
    std::filesystem::path cache_dir;  // empty disables caching
    std::filesystem::path out_dir;
    std::filesystem::path frames_root;
    TemplateSet templates = TemplateSet::builtin();
    // Long edge for image payloads before hashing/sending; <= 0 sends raw
    // file bytes (useful for replay fixtures with synthetic frames).
    int image_long_edge_px = 512;
    int max_tokens = 512;
    double temperature = 0.0;
    // Model ids recorded in requests (and therefore cache keys). Defaults to
    // the backend's own name; pin these when replaying a recorded session
    // through a differently-named backend.
    std::string stage1_model_id;
    std::string stage2_model_id;
    // Spec strings echoed into the run manifest.
    std::string stage1_spec;
    std::string stage2_spec;
};

struct EvalReport {
    std::vector<SampleResult> samples;
    MetricTable table;
    RunDiagnostics diagnostics;
};

inline constexpr const char* kUnavailableDescription = "(no description available)";

// Stage 1: one description per frame in index order. Activity strategy
// renders one prompt per (frame, query) pair; General renders the same
// generic prompt for every query, so a shared cache answers repeat videos
// without new backend calls. A frame whose request permanently fails yields
// the sentinel description so stage-2 frame numbering stays contiguous.
std::vector<FrameDescription> run_stage1(const Annotation& annotation,
                                         const FrameIndex& frame_index, ChatBackend& backend,
                                         const RunConfig& config,
                                         RunDiagnostics* diagnostics = nullptr);

// Stage 2: aggregate descriptions, query the text backend, parse the interval
// and score it against ground truth.
SampleResult run_stage2(const std::vector<FrameDescription>& descriptions,
                        const Annotation& annotation, const FrameIndex& frame_index,
                        ChatBackend& backend, const RunConfig& config,
                        RunDiagnostics* diagnostics = nullptr);

// Single-stage variant for a backend that accepts the video itself. The
// response is parsed in seconds mode ("mm:ss" or plain numbers).
SampleResult run_video_variant(const Annotation& annotation,
                               const std::filesystem::path& video_ref, ChatBackend& backend,
                               const RunConfig& config,
                               std::optional<double> duration_sec = std::nullopt,
                               RunDiagnostics* diagnostics = nullptr);

// Full experiment: optional subset selection, stage 1 + stage 2 per
// annotation, aggregate metrics, and the artifact set written to
// config.out_dir (samples.jsonl, summary.json, report.md,
// subset_manifest.json, run_manifest.json). Per-sample failures are recorded
// and scored as undefined instead of aborting the run. Deterministic given a
// warm cache.
EvalReport run_experiment(const std::vector<Annotation>& annotations, const RunConfig& config);

// Output file names inside config.out_dir.
inline constexpr const char* kSamplesFileName = "samples.jsonl";
inline constexpr const char* kSummaryFileName = "summary.json";
inline constexpr const char* kReportFileName = "report.md";
inline constexpr const char* kSubsetManifestFileName = "subset_manifest.json";
inline constexpr const char* kRunManifestFileName = "run_manifest.json";

}  // namespace temploc
