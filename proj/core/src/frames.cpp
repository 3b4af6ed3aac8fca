#include "temploc/frames.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include "temploc/errors.hpp"

namespace temploc {

namespace {

// frame_NNNNNN.jpg, exactly six digits. Returns the parsed index or nullopt.
std::optional<int> frame_number(const std::string& filename) {
    constexpr std::string_view prefix = "frame_";
    constexpr std::string_view suffix = ".jpg";
    if (filename.size() != prefix.size() + 6 + suffix.size()) return std::nullopt;
    if (filename.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    if (filename.compare(prefix.size() + 6, suffix.size(), suffix) != 0) return std::nullopt;
    int value = 0;
    for (std::size_t i = prefix.size(); i < prefix.size() + 6; ++i) {
        char c = filename[i];
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return value;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string substitute_all(std::string text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

}  // namespace

FrameIndex build_frame_index(const std::string& video_id,
                             const std::filesystem::path& frames_root,
                             std::optional<double> duration_sec) {
    namespace fs = std::filesystem;
    const fs::path dir = frames_root / video_id;
    if (!fs::is_directory(dir)) throw EmptyVideo(video_id);

    std::set<int> indices;
    std::vector<std::pair<int, fs::path>> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto num = frame_number(entry.path().filename().string());
        if (!num) continue;
        indices.insert(*num);
        found.emplace_back(*num, entry.path());
    }
    if (found.empty()) throw EmptyVideo(video_id);

    const int max_index = *indices.rbegin();
    std::vector<int> gaps;
    for (int k = 1; k <= max_index; ++k) {
        if (!indices.count(k)) gaps.push_back(k);
    }
    if (*indices.begin() < 1) {
        throw MissingFrames(video_id, gaps,
                            "frame index " + std::to_string(*indices.begin()) +
                                " present but numbering is 1-based");
    }
    if (!gaps.empty()) {
        std::string detail = "missing indices:";
        for (int g : gaps) detail += " " + std::to_string(g);
        throw MissingFrames(video_id, gaps, detail);
    }

    std::sort(found.begin(), found.end());
    FrameIndex index;
    index.video_id = video_id;
    index.frames.reserve(found.size());
    for (const auto& [k, path] : found) {
        index.frames.push_back(FrameRef{k, static_cast<double>(k - 1), path});
    }
    index.duration_sec = duration_sec.value_or(static_cast<double>(found.size()));
    return index;
}

FrameIndex extract_frames(const std::filesystem::path& video_path,
                          const std::filesystem::path& out_dir,
                          const std::string& command_template) {
    namespace fs = std::filesystem;
    if (command_template.find("{input}") == std::string::npos) {
        throw ConfigError("extraction command template is missing the {input} placeholder");
    }
    if (command_template.find("{output_pattern}") == std::string::npos) {
        throw ConfigError("extraction command template is missing the {output_pattern} placeholder");
    }

    const std::string video_id = video_path.stem().string();
    const fs::path target = out_dir / video_id;
    fs::create_directories(target);
    const std::string pattern = (target / "frame_%06d.jpg").string();

    std::string cmd = substitute_all(command_template, "{input}", shell_quote(video_path.string()));
    cmd = substitute_all(cmd, "{output_pattern}", shell_quote(pattern));
    cmd += " 2>&1";

    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw ExtractionFailed(-1, "failed to spawn extraction command");
    std::string output;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    const int status = pclose(pipe);
    const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (exit_code != 0) {
        constexpr std::size_t kExcerpt = 500;
        std::string excerpt =
            output.size() > kExcerpt ? output.substr(output.size() - kExcerpt) : output;
        throw ExtractionFailed(exit_code, excerpt);
    }
    return build_frame_index(video_id, out_dir);
}

}  // namespace temploc
