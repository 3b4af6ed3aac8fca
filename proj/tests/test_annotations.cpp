#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "temploc/annotations.hpp"
#include "temploc/errors.hpp"
#include "support/temp_dir.hpp"

using namespace temploc;

TEST_SUITE_BEGIN("dataset");

TEST_CASE("parse_annotations reads the charades-sta line shape") {
    const auto anns =
        parse_annotations("AO8RW 0.0 6.9##a person is putting a book on a shelf.");
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].video_id == "AO8RW");
    CHECK(anns[0].gt_start_sec == doctest::Approx(0.0));
    CHECK(anns[0].gt_end_sec == doctest::Approx(6.9));
    CHECK(anns[0].query == "a person is putting a book on a shelf.");
}

TEST_CASE("zero-length interval is rejected") {
    CHECK_THROWS_AS(parse_annotations("X 5.0 5.0##sits"), InvalidInterval);
    try {
        parse_annotations("ok 1.0 2.0##fine\nX 5.0 5.0##sits");
    } catch (const InvalidInterval& e) {
        CHECK(e.line_no() == 2);
    }
}

TEST_CASE("blank lines between records are skipped") {
    const auto anns = parse_annotations("A 0.0 1.0##one\n\n   \nB 2.0 3.0##two\n");
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].video_id == "A");
    CHECK(anns[1].video_id == "B");
}

TEST_CASE("malformed lines carry their line number") {
    CHECK_THROWS_AS(parse_annotations("A 0.0 1.0 no separator"), MalformedLine);
    CHECK_THROWS_AS(parse_annotations("A zero 1.0##q"), MalformedLine);
    CHECK_THROWS_AS(parse_annotations("A 0.0##q"), MalformedLine);
    CHECK_THROWS_AS(parse_annotations("A 0.0 1.0 2.0##q"), MalformedLine);
    CHECK_THROWS_AS(parse_annotations("A -1.0 1.0##q"), MalformedLine);
    CHECK_THROWS_AS(parse_annotations("A 0.0 1.0##"), MalformedLine);
    try {
        parse_annotations("ok 1.0 2.0##fine\nbroken line");
    } catch (const MalformedLine& e) {
        CHECK(e.line_no() == 2);
    }
}

TEST_CASE("crlf endings are tolerated") {
    const auto anns = parse_annotations("A 0.0 1.5##query one\r\nB 1.0 4.0##query two\r\n");
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].query == "query one");
}

TEST_CASE("serialize then parse is the identity on annotation lists") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> start_dist(0.0, 100.0);
    std::uniform_real_distribution<double> len_dist(0.1, 60.0);
    for (int round = 0; round < 200; ++round) {
        std::vector<Annotation> anns;
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            Annotation a;
            a.video_id = "VID" + std::to_string(rng() % 1000);
            a.gt_start_sec = start_dist(rng);
            a.gt_end_sec = a.gt_start_sec + len_dist(rng);
            a.query = "person does thing " + std::to_string(i) + " with énergie";
            anns.push_back(a);
        }
        CHECK(parse_annotations(serialize_annotations(anns)) == anns);
    }
}

namespace {

std::vector<Annotation> make_corpus(int n_videos, int max_per_video, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Annotation> anns;
    for (int v = 0; v < n_videos; ++v) {
        char id[16];
        std::snprintf(id, sizeof id, "V%04d", v);
        const int per = 1 + static_cast<int>(rng() % max_per_video);
        for (int a = 0; a < per; ++a) {
            const double start = static_cast<double>(rng() % 200) / 10.0;
            anns.push_back(Annotation{id, start, start + 1.0 + static_cast<double>(rng() % 100) / 10.0,
                                      "query " + std::to_string(a)});
        }
    }
    return anns;
}

}  // namespace

TEST_CASE("select_subset draws exactly n distinct videos, sorted") {
    const auto corpus = make_corpus(300, 4, 7);
    const auto subset = select_subset(corpus, SubsetSpec{128, 99, true});
    REQUIRE(subset.size() == 128);
    std::vector<std::string> ids;
    for (const auto& a : subset) ids.push_back(a.video_id);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("select_subset is deterministic and input-order invariant") {
    auto corpus = make_corpus(200, 3, 11);
    const SubsetSpec spec{64, 12345, true};
    const auto first = select_subset(corpus, spec);
    const auto second = select_subset(corpus, spec);
    CHECK(first == second);

    std::mt19937_64 rng(5);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    CHECK(select_subset(corpus, spec) == first);
}

TEST_CASE("select_subset can keep every annotation of the chosen videos") {
    const auto corpus = make_corpus(50, 3, 3);
    const auto subset = select_subset(corpus, SubsetSpec{10, 1, false});
    std::set<std::string> distinct;
    for (const auto& a : subset) distinct.insert(a.video_id);
    CHECK(distinct.size() == 10);
    CHECK(subset.size() >= 10);
}

TEST_CASE("select_subset rejects impossible requests") {
    const auto corpus = make_corpus(5, 2, 3);
    CHECK_THROWS_AS(select_subset(corpus, SubsetSpec{6, 1, true}), InsufficientVideos);
    CHECK_THROWS_AS(select_subset(corpus, SubsetSpec{0, 1, true}), InsufficientVideos);
    CHECK_THROWS_AS(select_subset({}, SubsetSpec{1, 1, true}), InsufficientVideos);
}

TEST_CASE("subset manifest round-trips") {
    testing::TempDir dir("manifest");
    const auto corpus = make_corpus(10, 1, 3);
    const auto file = dir / "subset_manifest.json";
    write_subset_manifest(corpus, file);
    CHECK(load_subset_manifest(file) == corpus);
}

TEST_SUITE_END();
