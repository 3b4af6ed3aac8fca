#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace temploc {

// One extracted frame. Frames are numbered from 1 and sampled at 1 fps, so
// frame k is the sample taken at second k-1.
struct FrameRef {
    int index = 0;
    double timestamp_sec = 0.0;
    std::filesystem::path image_path;
};

struct FrameIndex {
    std::string video_id;
    std::vector<FrameRef> frames;
    double duration_sec = 0.0;

    std::size_t frame_count() const { return frames.size(); }
};

// Expected layout: <frames_root>/<video_id>/frame_NNNNNN.jpg, 6-digit
// zero-padded, 1-based. Files that do not match the pattern are ignored.
// duration_sec defaults to the frame count (1 fps).
// Throws EmptyVideo when no frames are found, MissingFrames when the indices
// are not exactly 1..K.
FrameIndex build_frame_index(const std::string& video_id,
                             const std::filesystem::path& frames_root,
                             std::optional<double> duration_sec = std::nullopt);

// Default 1 fps extraction template; any tool works as long as it accepts an
// input path and a printf-style output pattern.
inline constexpr const char* kDefaultExtractCommand =
    "ffmpeg -hide_banner -loglevel error -i {input} -vf fps=1 -start_number 1 {output_pattern}";

// Runs the configured external command once, substituting {input} with the
// video path and {output_pattern} with <out_dir>/<stem>/frame_%06d.jpg, then
// indexes the result. Throws ConfigError when a placeholder is missing,
// ExtractionFailed when the tool exits nonzero.
FrameIndex extract_frames(const std::filesystem::path& video_path,
                          const std::filesystem::path& out_dir,
                          const std::string& command_template = kDefaultExtractCommand);

}  // namespace temploc
