#include <doctest.h>

#include <fstream>
#include <random>

#include <opencv2/imgcodecs.hpp>

#include "temploc/errors.hpp"
#include "temploc/image_ops.hpp"
#include "temploc/prompts.hpp"
#include "support/temp_dir.hpp"

using namespace temploc;

namespace {

const TemplateSet& T() { return TemplateSet::builtin(); }

std::vector<FrameDescription> make_descriptions(const std::vector<std::string>& texts) {
    std::vector<FrameDescription> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.push_back(FrameDescription{static_cast<int>(i) + 1, texts[i]});
    }
    return out;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

}  // namespace

TEST_SUITE_BEGIN("prompting");

TEST_CASE("general prompt golden text") {
    CHECK(render_stage1(T(), PromptStrategy::General) ==
          "Describe what is happening in the frame.");
}

TEST_CASE("activity prompt golden text") {
    const std::string expected =
        "This is one frame from a longer video clip. The video clip includes the action "
        "described as person put on shoes however, the frame may or may not include this "
        "action. Briefly explain what action or actions the person is conducting in the frame.";
    CHECK(render_stage1(T(), PromptStrategy::Activity, std::string("person put on shoes")) ==
          expected);
}

TEST_CASE("activity strategy requires a query") {
    CHECK_THROWS_AS(render_stage1(T(), PromptStrategy::Activity), MissingQuery);
    CHECK_THROWS_AS(render_stage1(T(), PromptStrategy::Activity, std::string("")), MissingQuery);
}

TEST_CASE("stage-2 prompt golden text for two frames") {
    const auto prompt = render_stage2(
        T(), make_descriptions({"A person stands near a chair.", "The person sits down."}),
        "person sits");
    const std::string expected =
        "The following are descriptions of actions for frames extracted 1 second apart from a "
        "video clip:\n"
        "* Frame 1: A person stands near a chair.\n"
        "* Frame 2: The person sits down.\n"
        "The action person sits has occurred in the video clip. What interval is the action "
        "most likely to start and end? Provide your best guess by providing the start and end "
        "frame numbers in json format.";
    CHECK(prompt.text == expected);
    CHECK(prompt.n_frames == 2);
}

TEST_CASE("a single description is still a valid stage-2 prompt") {
    const auto prompt = render_stage2(T(), make_descriptions({"only frame"}), "q");
    CHECK(prompt.n_frames == 1);
    CHECK(count_occurrences(prompt.text, "* Frame ") == 1);
}

TEST_CASE("descriptions must be contiguous from frame 1") {
    std::vector<FrameDescription> shifted{{2, "a"}, {3, "b"}};
    CHECK_THROWS_AS(render_stage2(T(), shifted, "q"), NonContiguousDescriptions);
    std::vector<FrameDescription> gapped{{1, "a"}, {3, "b"}};
    CHECK_THROWS_AS(render_stage2(T(), gapped, "q"), NonContiguousDescriptions);
    CHECK_THROWS_AS(render_stage2(T(), {}, "q"), NonContiguousDescriptions);
}

TEST_CASE("newlines inside descriptions are flattened to spaces") {
    const auto prompt = render_stage2(
        T(), make_descriptions({"line one\nline two", "crlf one\r\ncrlf two", "cr\ronly"}), "q");
    CHECK(prompt.text.find("line one line two") != std::string::npos);
    CHECK(prompt.text.find("crlf one crlf two") != std::string::npos);
    CHECK(prompt.text.find("cr only") != std::string::npos);
    CHECK(count_occurrences(prompt.text, "* Frame ") == 3);
}

TEST_CASE("stage-2 line count is n_frames plus the fixed header and footer") {
    std::mt19937_64 rng(9);
    for (int round = 0; round < 20; ++round) {
        const int n = 1 + static_cast<int>(rng() % 40);
        std::vector<std::string> texts(n, "something happens");
        const auto prompt = render_stage2(T(), make_descriptions(texts), "q");
        const int lines = count_occurrences(prompt.text, "\n") + 1;
        CHECK(lines == n + 2);
        CHECK(count_occurrences(prompt.text, "* Frame ") == n);
    }
}

TEST_CASE("video prompt golden text") {
    CHECK(render_video_prompt(T(), "person put on shoes") ==
          "The action person put on shoes has occurred in the video clip. In what interval is "
          "the action most likely to occur? Please provide the numbers for the start and end "
          "timestamps.");
    CHECK_THROWS_AS(render_video_prompt(T(), ""), MissingQuery);
}

TEST_CASE("queries are substituted verbatim, never normalized") {
    const std::string tricky = "a \"quoted\" query with {braces}, unicode ü and {query}";
    CHECK(render_stage1(T(), PromptStrategy::Activity, tricky).find(tricky) !=
          std::string::npos);
    CHECK(render_video_prompt(T(), tricky).find(tricky) != std::string::npos);
    const auto s2 = render_stage2(T(), make_descriptions({"d"}), tricky);
    CHECK(s2.text.find(tricky) != std::string::npos);

    const std::string trailing = "query with trailing period.";
    CHECK(render_video_prompt(T(), trailing).find(trailing + " has occurred") !=
          std::string::npos);
}

TEST_CASE("tuning prompts are a deterministic pair") {
    testing::TempDir dir("tuning");
    std::ofstream(dir / "frame_000001.jpg") << "img";
    FrameRef frame{1, 0.0, dir / "frame_000001.jpg"};
    const auto first = render_tuning_prompts(T(), frame);
    const auto second = render_tuning_prompts(T(), frame);
    CHECK(first == second);
    CHECK(!first.first.empty());
    CHECK(!first.second.empty());
    CHECK(first.first != first.second);

    FrameRef missing{2, 1.0, dir / "nope.jpg"};
    CHECK_THROWS_AS(render_tuning_prompts(T(), missing), Error);
}

TEST_CASE("repo template files match the builtin set byte for byte") {
    const auto loaded = TemplateSet::load_dir(TEMPLOC_TEMPLATES_DIR);
    const auto& builtin = TemplateSet::builtin();
    CHECK(loaded.stage1_activity == builtin.stage1_activity);
    CHECK(loaded.stage1_general == builtin.stage1_general);
    CHECK(loaded.stage2 == builtin.stage2);
    CHECK(loaded.video == builtin.video);
    CHECK(loaded.tuning_description == builtin.tuning_description);
    CHECK(loaded.tuning_qa == builtin.tuning_qa);
}

TEST_CASE("template digests are stable sha-256 hex strings") {
    const auto digests = TemplateSet::builtin().digests();
    CHECK(digests.size() == 6);
    for (const auto& [name, digest] : digests) {
        CHECK(digest.size() == 64);
    }
    CHECK(digests == TemplateSet::builtin().digests());
}

TEST_CASE("write_dir then load_dir round-trips a template set") {
    testing::TempDir dir("templates");
    TemplateSet custom = TemplateSet::builtin();
    custom.stage1_general = "Describe the scene with emphasis on motion.";
    custom.write_dir(dir.path());
    const auto loaded = TemplateSet::load_dir(dir.path());
    CHECK(loaded.stage1_general == custom.stage1_general);
    CHECK(loaded.stage2 == custom.stage2);
}

namespace {

std::filesystem::path write_image(const std::filesystem::path& path, int w, int h) {
    cv::Mat img(h, w, CV_8UC3, cv::Scalar(40, 80, 120));
    cv::imwrite(path.string(), img);
    return path;
}

}  // namespace

TEST_CASE("frame grid tiles row-major with matching dimensions") {
    testing::TempDir dir("grid");
    std::vector<FrameRef> frames;
    for (int k = 1; k <= 4; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06d.jpg", k);
        frames.push_back(FrameRef{k, k - 1.0, write_image(dir / name, 8, 6)});
    }
    const auto out = compose_frame_grid(frames, 2, dir / "grid.jpg");
    const cv::Mat grid = cv::imread(out.string());
    REQUIRE(!grid.empty());
    CHECK(grid.cols == 16);
    CHECK(grid.rows == 12);
}

TEST_CASE("frame grid rejects mixed dimensions and single frames") {
    testing::TempDir dir("grid");
    std::vector<FrameRef> frames{
        FrameRef{1, 0.0, write_image(dir / "a.jpg", 8, 6)},
        FrameRef{2, 1.0, write_image(dir / "b.jpg", 10, 6)},
    };
    CHECK_THROWS_AS(compose_frame_grid(frames, 2, dir / "g.jpg"), DimensionMismatch);
    CHECK_THROWS_AS(compose_frame_grid({frames[0]}, 2, dir / "g.jpg"), Error);
}

TEST_CASE("prepare_image resizes only above the configured long edge") {
    testing::TempDir dir("prep");
    write_image(dir / "big.jpg", 64, 32);
    const auto resized = prepare_image(dir / "big.jpg", 16);
    cv::Mat decoded = cv::imdecode(resized.bytes, cv::IMREAD_COLOR);
    REQUIRE(!decoded.empty());
    CHECK(decoded.cols == 16);
    CHECK(decoded.rows == 8);
    CHECK(resized.mime == "image/jpeg");

    const auto untouched = prepare_image(dir / "big.jpg", 512);
    std::ifstream in(dir / "big.jpg", std::ios::binary);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    CHECK(untouched.bytes == raw);

    std::ofstream(dir / "fake.jpg") << "not an image";
    CHECK_THROWS_AS(prepare_image(dir / "fake.jpg", 16), Error);
    const auto passthrough = prepare_image(dir / "fake.jpg", 0);
    CHECK(passthrough.bytes.size() == 12);
}

TEST_SUITE_END();
