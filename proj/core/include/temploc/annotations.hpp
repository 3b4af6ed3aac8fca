#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace temploc {

// One grounding task: where in video `video_id` does `query` happen?
struct Annotation {
    std::string video_id;
    double gt_start_sec = 0.0;
    double gt_end_sec = 0.0;
    std::string query;

    bool operator==(const Annotation&) const = default;
};

struct SubsetSpec {
    std::size_t n_videos = 0;
    std::uint64_t seed = 0;
    bool one_annotation_per_video = true;
};

// Parses an annotation document where each non-blank line has the shape
//   <video_id> <start> <end>##<sentence>
// Blank lines are skipped. Throws MalformedLine when the "##" separator is
// missing or the numbers fail to parse, InvalidInterval when start >= end.
std::vector<Annotation> parse_annotations(std::string_view text);

std::vector<Annotation> load_annotations(const std::filesystem::path& file);

// Inverse of parse_annotations: one line per annotation, shortest round-trip
// number formatting so parse(serialize(x)) == x.
std::string serialize_annotations(const std::vector<Annotation>& annotations);

// Deterministic seeded draw of spec.n_videos distinct videos over the sorted
// video-id universe. Output is ordered by video_id ascending and is invariant
// to the input ordering. Throws InsufficientVideos when fewer distinct videos
// exist than requested (or n_videos == 0).
std::vector<Annotation> select_subset(const std::vector<Annotation>& annotations,
                                      const SubsetSpec& spec);

// JSON array of {video_id, gt_start_sec, gt_end_sec, query}, written next to
// results so a run's exact evaluation set can be reproduced.
void write_subset_manifest(const std::vector<Annotation>& annotations,
                           const std::filesystem::path& out_file);

std::vector<Annotation> load_subset_manifest(const std::filesystem::path& file);

}  // namespace temploc
