#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "temploc/chat.hpp"
#include "temploc/frames.hpp"
#include "temploc/prompts.hpp"

namespace temploc {

struct QAPair {
    std::string question;
    std::string answer;
};

struct TuningTurn {
    std::string role;  // "human" | "model"
    std::string text;
};

// One instruction-tuning sample: the description request/response pair,
// followed by zero or more Q&A pairs about the same frame. Serialized in the
// common conversation-JSON layout (see docs/tuning_record.schema.json).
struct TuningRecord {
    std::string id;
    std::string image;  // relative path
    std::vector<TuningTurn> conversations;
};

// Extracts {question, answer} pairs from a generation response: JSON array
// (strict or fenced) first, then "Q:/A:" line pairs. nullopt means the
// response had no recognizable structure (as opposed to a valid empty list).
std::optional<std::vector<QAPair>> parse_qa_pairs(std::string_view response_text);

using QaParser = std::function<std::optional<std::vector<QAPair>>(std::string_view)>;

struct TuningOptions {
    TemplateSet templates = TemplateSet::builtin();
    std::filesystem::path image_base;  // image paths relativized against this
    int image_long_edge_px = 512;
    int max_tokens = 768;
    double temperature = 0.0;
};

struct TuningBatch {
    std::vector<TuningRecord> records;
    std::size_t qa_parse_failures = 0;  // description-only records emitted
    std::size_t failed_frames = 0;      // frames skipped entirely
};

// Per frame: request a verbose description, then request Q&A pairs. Frames
// whose Q&A response fails to parse emit description-only records; frames
// whose description request fails are skipped and counted.
TuningBatch generate_tuning_records(const std::vector<FrameRef>& frames,
                                    ChatBackend& vision_backend, const QaParser& qa_parser,
                                    const TuningOptions& options = {});

// JSON array compatible with conversation-format instruction-tuning loaders.
void write_tuning_records(const std::vector<TuningRecord>& records,
                          const std::filesystem::path& out_file);

std::vector<TuningRecord> load_tuning_records(const std::filesystem::path& file);

}  // namespace temploc
