#include "temploc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "temploc/errors.hpp"

namespace temploc {

double temporal_iou(const SecondsSpan& pred, const SecondsSpan& gt) {
    const double inter =
        std::max(0.0, std::min(pred.end, gt.end) - std::max(pred.start, gt.start));
    const double uni = (pred.end - pred.start) + (gt.end - gt.start) - inter;
    if (uni <= 0.0) {
        // Both degenerate points: identical counts as a perfect match.
        return (pred.start == gt.start && pred.end == gt.end) ? 1.0 : 0.0;
    }
    return inter / uni;
}

SampleResult make_sample_result(const Annotation& annotation,
                                const std::optional<SecondsSpan>& prediction,
                                ParseMethod method) {
    SampleResult result;
    result.annotation = annotation;
    result.prediction_sec = prediction;
    result.parse_method = method;
    result.iou = prediction ? temporal_iou(*prediction,
                                           SecondsSpan{annotation.gt_start_sec,
                                                       annotation.gt_end_sec})
                            : 0.0;
    return result;
}

MetricTable evaluate(const std::vector<SampleResult>& samples,
                     const std::vector<double>& thresholds) {
    if (samples.empty()) throw EmptySampleSet();
    for (double t : thresholds) {
        if (!(t > 0.0 && t < 1.0)) {
            throw ConfigError("IoU threshold must lie in (0,1), got " + std::to_string(t));
        }
    }

    MetricTable table;
    table.thresholds = thresholds;
    table.n_samples = samples.size();
    const double n = static_cast<double>(samples.size());

    double iou_sum = 0.0;
    for (const auto& s : samples) iou_sum += s.iou;
    table.mean_iou = 100.0 * iou_sum / n;

    table.recall_at.reserve(thresholds.size());
    for (double threshold : thresholds) {
        std::size_t hits = 0;
        for (const auto& s : samples) {
            if (s.iou >= threshold) ++hits;
        }
        table.recall_at.push_back(100.0 * static_cast<double>(hits) / n);
    }
    return table;
}

std::pair<double, double> normalized_interval(const SecondsSpan& pred, double duration_sec) {
    if (duration_sec <= 0.0) throw Error("normalized_interval requires a positive duration");
    const double s = std::clamp(pred.start / duration_sec, 0.0, 1.0);
    const double e = std::clamp(pred.end / duration_sec, 0.0, 1.0);
    return {s, e};
}

}  // namespace temploc
