#include "temploc/image_ops.hpp"

#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "temploc/errors.hpp"
#include "temploc/sha256.hpp"

namespace temploc {

namespace {

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read image file: " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

std::string mime_from_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".png") return "image/png";
    if (ext == ".webp") return "image/webp";
    if (ext == ".mp4") return "video/mp4";
    if (ext == ".webm") return "video/webm";
    return "application/octet-stream";
}

}  // namespace

ImageBytes prepare_image(const std::filesystem::path& path, int long_edge_px) {
    auto raw = read_file_bytes(path);
    if (long_edge_px <= 0) {
        return ImageBytes{std::move(raw), mime_from_extension(path)};
    }
    cv::Mat img = cv::imdecode(raw, cv::IMREAD_COLOR);
    if (img.empty()) throw Error("cannot decode image: " + path.string());
    const int long_edge = std::max(img.cols, img.rows);
    if (long_edge <= long_edge_px) {
        // Already small enough; the raw bytes are what the model sees.
        return ImageBytes{std::move(raw), mime_from_extension(path)};
    }
    const double scale = static_cast<double>(long_edge_px) / long_edge;
    cv::Mat resized;
    cv::resize(img, resized, cv::Size(), scale, scale, cv::INTER_AREA);
    std::vector<unsigned char> encoded;
    if (!cv::imencode(".jpg", resized, encoded, {cv::IMWRITE_JPEG_QUALITY, 90})) {
        throw Error("failed to re-encode resized image: " + path.string());
    }
    return ImageBytes{std::move(encoded), "image/jpeg"};
}

std::filesystem::path compose_frame_grid(const std::vector<FrameRef>& frames, int columns,
                                         std::optional<std::filesystem::path> out_path) {
    if (frames.size() < 2) throw Error("frame grid requires at least 2 frames");
    if (columns < 1) throw Error("frame grid requires at least 1 column");

    std::vector<cv::Mat> images;
    images.reserve(frames.size());
    for (const auto& f : frames) {
        cv::Mat img = cv::imread(f.image_path.string(), cv::IMREAD_COLOR);
        if (img.empty()) throw Error("cannot decode frame image: " + f.image_path.string());
        if (!images.empty() && (img.cols != images[0].cols || img.rows != images[0].rows)) {
            throw DimensionMismatch(f.image_path.filename().string() + " is " +
                                    std::to_string(img.cols) + "x" + std::to_string(img.rows) +
                                    ", expected " + std::to_string(images[0].cols) + "x" +
                                    std::to_string(images[0].rows));
        }
        images.push_back(std::move(img));
    }

    const int w = images[0].cols;
    const int h = images[0].rows;
    const int rows = (static_cast<int>(images.size()) + columns - 1) / columns;
    cv::Mat canvas = cv::Mat::zeros(rows * h, columns * w, images[0].type());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const int r = static_cast<int>(i) / columns;
        const int c = static_cast<int>(i) % columns;
        images[i].copyTo(canvas(cv::Rect(c * w, r * h, w, h)));
    }

    std::filesystem::path target;
    if (out_path) {
        target = *out_path;
    } else {
        // Name derived from the inputs: composing the same frames twice
        // reuses one file.
        Sha256 hash;
        for (const auto& f : frames) hash.update(f.image_path.string());
        hash.update_u64(static_cast<std::uint64_t>(columns));
        target = std::filesystem::temp_directory_path() /
                 ("temploc_grid_" + hash.hex_digest().substr(0, 16) + ".jpg");
    }
    if (!cv::imwrite(target.string(), canvas)) {
        throw Error("failed to write frame grid: " + target.string());
    }
    return target;
}

}  // namespace temploc
