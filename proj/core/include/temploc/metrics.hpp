#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "temploc/annotations.hpp"
#include "temploc/interval_parser.hpp"

namespace temploc {

struct SampleResult {
    Annotation annotation;
    std::optional<SecondsSpan> prediction_sec;  // nullopt == undefined
    double iou = 0.0;
    ParseMethod parse_method = ParseMethod::None;
};

struct MetricTable {
    std::vector<double> thresholds;
    std::vector<double> recall_at;  // percent, aligned with thresholds
    double mean_iou = 0.0;          // percent, mean of per-sample IoUs
    std::size_t n_samples = 0;
};

// |pred ∩ gt| / |pred ∪ gt| over closed intervals, union measured as total
// covered length (two disjoint segments sum). Degenerate cases: identical
// points score 1, otherwise a zero-length union scores 0.
double temporal_iou(const SecondsSpan& pred, const SecondsSpan& gt);

// Scores one sample; an undefined prediction contributes IoU 0.
SampleResult make_sample_result(const Annotation& annotation,
                                const std::optional<SecondsSpan>& prediction,
                                ParseMethod method = ParseMethod::None);

// recall_at[m] = 100 * |{i : iou_i >= m}| / n, mean_iou = 100 * mean(iou).
// Thresholds must lie in (0, 1); throws EmptySampleSet on empty input.
MetricTable evaluate(const std::vector<SampleResult>& samples,
                     const std::vector<double>& thresholds = {0.3, 0.5, 0.7});

// Both endpoints divided by the video duration, clamped to [0, 1].
std::pair<double, double> normalized_interval(const SecondsSpan& pred, double duration_sec);

}  // namespace temploc
