#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "temploc/metrics.hpp"

namespace temploc {

// Counters accumulated over a run; context overflows and undefined outputs
// materially change results, so they are reported rather than swallowed.
struct RunDiagnostics {
    std::size_t stage1_failed_frames = 0;
    std::size_t undefined_predictions = 0;
    std::size_t context_overflows = 0;
    std::size_t largest_stage2_prompt_chars = 0;
    std::vector<std::string> notes;
};

struct RunProvenance {
    std::string strategy;
    std::string stage1_model;
    std::string stage2_model;
    std::map<std::string, std::string> template_digests;
    std::map<std::string, std::string> config;  // flat echo of the run config
};

// One JSON object per line:
//   {"video_id", "query", "gt": [s,e], "pred": [s,e] | null, "iou", "parse_method"}
void write_samples_jsonl(const std::vector<SampleResult>& samples,
                         const std::filesystem::path& out_file);

// Reads a per-sample file back and recomputes each IoU from gt/pred, so the
// `eval` subcommand can re-score existing runs under new thresholds.
std::vector<SampleResult> load_samples_jsonl(const std::filesystem::path& file);

// Aggregate metrics plus diagnostics. The paper-ambiguous mIoU variant (mean
// of the recall values) is emitted alongside as a diagnostic only; mean_iou
// stays the mean of per-sample IoUs.
void write_summary_json(const MetricTable& table, const RunDiagnostics& diagnostics,
                        const RunProvenance& provenance, const std::filesystem::path& out_file);

MetricTable load_summary_json(const std::filesystem::path& file);

// | Model pair | R@0.3 | R@0.5 | R@0.7 | mIoU |, one decimal place.
std::string render_markdown_table(
    const std::vector<std::pair<std::string, MetricTable>>& rows);

void write_markdown_report(const std::string& label, const MetricTable& table,
                           const std::filesystem::path& out_file);

std::string format_percent(double value);  // one decimal, matches report output

}  // namespace temploc
