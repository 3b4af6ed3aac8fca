#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "temploc/frames.hpp"

namespace temploc {

// Activity embeds the target query in every stage-1 prompt (one call per
// frame/query combination); General asks for a generic scene description
// that can be reused across queries on the same frame.
enum class PromptStrategy { Activity, General };

std::string to_string(PromptStrategy s);
PromptStrategy prompt_strategy_from_string(std::string_view s);

// Stage-1 output text attached to its 1-based frame index.
struct FrameDescription {
    int frame_index = 0;
    std::string text;
};

struct Stage2Prompt {
    std::string text;
    int n_frames = 0;
};

// The five prompt templates plus the two tuning-data generation prompts.
// Placeholders: {query} for the activity sentence, {frame_lines} for the
// "* Frame k: ..." block. Rendering substitutes placeholders verbatim and
// never rescans substituted text, so queries containing placeholder-like
// substrings pass through untouched.
struct TemplateSet {
    std::string stage1_activity;
    std::string stage1_general;
    std::string stage2;
    std::string video;
    std::string tuning_description;
    std::string tuning_qa;

    static const TemplateSet& builtin();

    // Loads the template files (stage1_activity.txt, stage1_general.txt,
    // stage2.txt, video.txt, tuning_description.txt, tuning_qa.txt) from a
    // directory. A single trailing newline per file is stripped so ordinary
    // text editors can be used.
    static TemplateSet load_dir(const std::filesystem::path& dir);

    void write_dir(const std::filesystem::path& dir) const;

    // SHA-256 per template, recorded in run manifests for provenance.
    std::map<std::string, std::string> digests() const;
};

// Stage-1 prompt text for one frame. Activity requires a non-empty query
// (MissingQuery otherwise); General must not receive one.
std::string render_stage1(const TemplateSet& templates, PromptStrategy strategy,
                          const std::optional<std::string>& query = std::nullopt);

// Aggregation prompt for the text-only model: header, one "* Frame k: ..."
// line per description (internal newlines flattened to spaces), closing
// question with the query substituted. Descriptions must be contiguous from
// frame 1 (NonContiguousDescriptions otherwise).
Stage2Prompt render_stage2(const TemplateSet& templates,
                           const std::vector<FrameDescription>& descriptions,
                           const std::string& query);

// Single-stage prompt for a backend that takes the video directly.
std::string render_video_prompt(const TemplateSet& templates, const std::string& query);

// Prompt pair for instruction-tuning data generation: a verbose description
// request followed by a Q&A generation request about the same frame.
std::pair<std::string, std::string> render_tuning_prompts(const TemplateSet& templates,
                                                          const FrameRef& frame);

}  // namespace temploc
