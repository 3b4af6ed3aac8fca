#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "temploc/frames.hpp"

namespace temploc {

// Which extraction route produced the result. Routes are attempted in this
// order and the first success wins, so the method attests that earlier routes
// failed.
enum class ParseMethod { StrictJson, FencedJson, KeywordHeuristic, PatternHeuristic, None };

std::string to_string(ParseMethod m);
ParseMethod parse_method_from_string(std::string_view s);

// How bare numbers in the response should be read: stage-2 responses carry
// frame numbers, video-backend responses carry timestamps in seconds. Clock
// values ("mm:ss") always produce seconds regardless of mode.
enum class NumberUnit { Frames, Seconds };

struct FrameSpan {
    int start = 1;
    int end = 1;
    bool operator==(const FrameSpan&) const = default;
};

struct SecondsSpan {
    double start = 0.0;
    double end = 0.0;
    bool operator==(const SecondsSpan&) const = default;
};

struct IntervalPrediction {
    // monostate == undefined: nothing extractable in the response.
    std::variant<std::monostate, FrameSpan, SecondsSpan> outcome;
    ParseMethod method = ParseMethod::None;
    // True when the values came from clock-style "mm:ss" timestamps rather
    // than plain numbers.
    bool from_clock = false;
    std::string raw_response;

    bool undefined() const { return std::holds_alternative<std::monostate>(outcome); }
    const FrameSpan* frames() const { return std::get_if<FrameSpan>(&outcome); }
    const SecondsSpan* seconds() const { return std::get_if<SecondsSpan>(&outcome); }
};

// Extracts an interval from an arbitrary model response. Attempts, in order:
//   1. the whole text as strict JSON,
//   2. JSON inside the first fenced code block,
//   3. key-value keyword heuristics ("start_frame: 16", "end: 28", quoted or
//      not, clock values allowed),
//   4. free-text patterns ("Frame 7 to Frame 12", "frames 7-12",
//      "from 7 to 12", "00:15 - 00:28").
// When several candidates survive a route, the one nearest the end of the
// text wins (models tend to state the conclusion last). Frames are clamped to
// [1, n_frames] and reversed spans are swapped. Unparseable input yields
// Undefined; this function never throws on any input.
IntervalPrediction parse_interval(std::string_view response_text, int n_frames,
                                  NumberUnit unit = NumberUnit::Frames);

// Frame k (1-based, 1 fps) covers seconds [k-1, k], so Frames(a, b) maps to
// [a-1, b], clamped to [0, duration]. Seconds pass through clamped. Undefined
// yields nullopt.
std::optional<SecondsSpan> to_seconds(const IntervalPrediction& pred, double duration_sec);
std::optional<SecondsSpan> to_seconds(const IntervalPrediction& pred, const FrameIndex& index);

}  // namespace temploc
