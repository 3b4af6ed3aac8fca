#include <doctest.h>

#include <fstream>
#include <random>

#include "temploc/errors.hpp"
#include "temploc/frames.hpp"
#include "support/temp_dir.hpp"

using namespace temploc;

namespace {

void touch_frames(const std::filesystem::path& dir, const std::vector<int>& indices) {
    std::filesystem::create_directories(dir);
    for (int k : indices) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06d.jpg", k);
        std::ofstream out(dir / name);
        out << "x";
    }
}

std::vector<int> iota_frames(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i + 1;
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("a 31-frame directory indexes with timestamps 0..30") {
    testing::TempDir root("frames");
    touch_frames(root / "vidA", iota_frames(31));
    const auto index = build_frame_index("vidA", root.path());
    REQUIRE(index.frame_count() == 31);
    CHECK(index.duration_sec == doctest::Approx(31.0));
    for (int k = 1; k <= 31; ++k) {
        CHECK(index.frames[k - 1].index == k);
        CHECK(index.frames[k - 1].timestamp_sec == doctest::Approx(k - 1.0));
        CHECK(std::filesystem::exists(index.frames[k - 1].image_path));
    }
}

TEST_CASE("a single frame is a valid video") {
    testing::TempDir root("frames");
    touch_frames(root / "v", {1});
    const auto index = build_frame_index("v", root.path());
    REQUIRE(index.frame_count() == 1);
    CHECK(index.frames[0].timestamp_sec == doctest::Approx(0.0));
}

TEST_CASE("gaps are reported with the missing indices") {
    testing::TempDir root("frames");
    touch_frames(root / "v", {1, 2, 4});
    try {
        build_frame_index("v", root.path());
        FAIL("expected MissingFrames");
    } catch (const MissingFrames& e) {
        CHECK(e.video_id() == "v");
        CHECK(e.gaps() == std::vector<int>{3});
    }
}

TEST_CASE("an empty or missing directory raises EmptyVideo") {
    testing::TempDir root("frames");
    std::filesystem::create_directories(root / "empty");
    CHECK_THROWS_AS(build_frame_index("empty", root.path()), EmptyVideo);
    CHECK_THROWS_AS(build_frame_index("never_extracted", root.path()), EmptyVideo);
}

TEST_CASE("files that do not match the frame pattern are ignored") {
    testing::TempDir root("frames");
    touch_frames(root / "v", {1, 2});
    std::ofstream(root / "v" / "notes.txt") << "x";
    std::ofstream(root / "v" / "frame_1.jpg") << "x";       // not zero-padded
    std::ofstream(root / "v" / "frame_000003.png") << "x";  // wrong extension
    const auto index = build_frame_index("v", root.path());
    CHECK(index.frame_count() == 2);
}

TEST_CASE("zero-indexed extractions are flagged, frames are 1-based") {
    testing::TempDir root("frames");
    touch_frames(root / "v", {0, 1, 2});
    CHECK_THROWS_AS(build_frame_index("v", root.path()), MissingFrames);
}

TEST_CASE("an explicit duration overrides the 1 fps default") {
    testing::TempDir root("frames");
    touch_frames(root / "v", iota_frames(5));
    const auto index = build_frame_index("v", root.path(), 5.4);
    CHECK(index.duration_sec == doctest::Approx(5.4));
}

TEST_CASE("timestamp of frame k equals k-1 for arbitrary sizes") {
    std::mt19937_64 rng(3);
    testing::TempDir root("frames");
    for (int round = 0; round < 8; ++round) {
        const int n = 1 + static_cast<int>(rng() % 200);
        const std::string id = "v" + std::to_string(round);
        touch_frames(root / id, iota_frames(n));
        const auto index = build_frame_index(id, root.path());
        REQUIRE(index.frame_count() == static_cast<std::size_t>(n));
        for (const auto& f : index.frames) {
            CHECK(f.timestamp_sec == doctest::Approx(f.index - 1.0));
        }
    }
}

namespace {

// Stand-in extraction tool: the "video" file holds an integer duration in
// seconds; the script writes one frame per second, like a 1 fps ffmpeg run.
std::string write_fake_extractor(const std::filesystem::path& dir) {
    const auto script = dir / "fake_extract.sh";
    std::ofstream out(script);
    out << "#!/bin/sh\n"
           "n=$(cat \"$1\")\n"
           "i=1\n"
           "while [ \"$i\" -le \"$n\" ]; do\n"
           "  f=$(printf \"$2\" \"$i\")\n"
           "  echo frame > \"$f\"\n"
           "  i=$((i+1))\n"
           "done\n";
    out.close();
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);
    return "/bin/sh " + script.string() + " {input} {output_pattern}";
}

}  // namespace

TEST_CASE("extract_frames drives the configured tool and indexes its output") {
    testing::TempDir dir("extract");
    const auto tool = write_fake_extractor(dir.path());
    std::ofstream(dir / "clip9.mp4") << "9";
    const auto index = extract_frames(dir / "clip9.mp4", dir / "out", tool);
    CHECK(index.video_id == "clip9");
    CHECK(index.frame_count() == 9);
    CHECK(index.duration_sec == doctest::Approx(9.0));
}

TEST_CASE("missing placeholders fail before anything is spawned") {
    testing::TempDir dir("extract");
    std::ofstream(dir / "c.mp4") << "3";
    CHECK_THROWS_AS(extract_frames(dir / "c.mp4", dir / "out", "ffmpeg -i {input}"), ConfigError);
    CHECK_THROWS_AS(extract_frames(dir / "c.mp4", dir / "out", "tool {output_pattern}"),
                    ConfigError);
}

TEST_CASE("a nonzero tool exit surfaces code and stderr") {
    testing::TempDir dir("extract");
    std::ofstream(dir / "c.mp4") << "3";
    const std::string tool = "/bin/sh -c 'echo decode failure >&2; exit 3' ignored {input} {output_pattern}";
    try {
        extract_frames(dir / "c.mp4", dir / "out", tool);
        FAIL("expected ExtractionFailed");
    } catch (const ExtractionFailed& e) {
        CHECK(e.exit_code() == 3);
        CHECK(e.stderr_excerpt().find("decode failure") != std::string::npos);
    }
}

TEST_SUITE_END();
