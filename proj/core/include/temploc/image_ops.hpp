#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "temploc/frames.hpp"

namespace temploc {

struct ImageBytes {
    std::vector<unsigned char> bytes;
    std::string mime;
};

// Loads an image and, when its long edge exceeds long_edge_px, downscales and
// re-encodes it as JPEG. The returned bytes are exactly what gets sent to the
// backend, so cache keys hash what the model actually saw. long_edge_px <= 0
// passes the raw file bytes through without decoding.
ImageBytes prepare_image(const std::filesystem::path& path, int long_edge_px);

// Tiles >= 2 same-sized frames into one row-major grid image (optional input
// mode; single-frame input is the default elsewhere). Returns the written
// path; the default path is derived from the input paths, so identical inputs
// compose to the same file. Throws DimensionMismatch on mixed sizes.
std::filesystem::path compose_frame_grid(const std::vector<FrameRef>& frames, int columns,
                                         std::optional<std::filesystem::path> out_path = std::nullopt);

}  // namespace temploc
