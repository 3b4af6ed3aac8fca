#include "temploc/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"

namespace temploc {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::optional<double> parse_seconds(std::string_view token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (!std::isfinite(value) || value < 0.0) return std::nullopt;
    return value;
}

std::string format_seconds(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) return "0";
    return std::string(buf, ptr);
}

// Unbiased bounded draw; uniform_int_distribution is not portable across
// standard libraries, and subset selection promises cross-platform
// determinism for a published seed.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (std::numeric_limits<std::uint64_t>::max() / n) * n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace

std::vector<Annotation> parse_annotations(std::string_view text) {
    std::vector<Annotation> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || is_blank(line)) continue;

        std::size_t sep = line.find("##");
        if (sep == std::string_view::npos) {
            throw MalformedLine(line_no, "missing '##' separator");
        }
        std::string_view head = line.substr(0, sep);
        std::string_view query = line.substr(sep + 2);
        if (query.empty() || is_blank(query)) {
            throw MalformedLine(line_no, "empty query sentence");
        }

        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < head.size()) {
            while (i < head.size() && head[i] == ' ') ++i;
            std::size_t j = i;
            while (j < head.size() && head[j] != ' ') ++j;
            if (j > i) tokens.push_back(head.substr(i, j - i));
            i = j;
        }
        if (tokens.size() != 3) {
            throw MalformedLine(line_no, "expected '<video_id> <start> <end>' before '##'");
        }
        auto start = parse_seconds(tokens[1]);
        auto end = parse_seconds(tokens[2]);
        if (!start || !end) {
            throw MalformedLine(line_no, "start/end are not non-negative decimal seconds");
        }
        if (*start >= *end) {
            throw InvalidInterval(line_no, "start " + format_seconds(*start) +
                                               " >= end " + format_seconds(*end));
        }
        out.push_back(Annotation{std::string(tokens[0]), *start, *end, std::string(query)});
    }
    return out;
}

std::vector<Annotation> load_annotations(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open annotation file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_annotations(buf.str());
}

std::string serialize_annotations(const std::vector<Annotation>& annotations) {
    std::string out;
    for (const auto& a : annotations) {
        out += a.video_id;
        out += ' ';
        out += format_seconds(a.gt_start_sec);
        out += ' ';
        out += format_seconds(a.gt_end_sec);
        out += "##";
        out += a.query;
        out += '\n';
    }
    return out;
}

std::vector<Annotation> select_subset(const std::vector<Annotation>& annotations,
                                      const SubsetSpec& spec) {
    if (annotations.empty()) throw InsufficientVideos(spec.n_videos, 0);

    // Sort-then-sample: grouping by sorted video id makes the draw invariant
    // to the input ordering.
    std::map<std::string, std::vector<const Annotation*>> by_video;
    for (const auto& a : annotations) by_video[a.video_id].push_back(&a);
    for (auto& [id, group] : by_video) {
        std::sort(group.begin(), group.end(), [](const Annotation* x, const Annotation* y) {
            return std::tie(x->gt_start_sec, x->gt_end_sec, x->query) <
                   std::tie(y->gt_start_sec, y->gt_end_sec, y->query);
        });
    }

    if (spec.n_videos == 0 || by_video.size() < spec.n_videos) {
        throw InsufficientVideos(spec.n_videos, by_video.size());
    }

    std::vector<std::string> ids;
    ids.reserve(by_video.size());
    for (const auto& [id, group] : by_video) ids.push_back(id);

    std::mt19937_64 rng(spec.seed);
    // Partial Fisher-Yates: the first n_videos slots are the draw.
    for (std::size_t i = 0; i < spec.n_videos; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded(rng, ids.size() - i));
        std::swap(ids[i], ids[j]);
    }
    std::vector<std::string> chosen(ids.begin(), ids.begin() + spec.n_videos);
    std::sort(chosen.begin(), chosen.end());

    std::vector<Annotation> out;
    for (const auto& id : chosen) {
        const auto& group = by_video.at(id);
        if (spec.one_annotation_per_video) {
            std::size_t k = static_cast<std::size_t>(bounded(rng, group.size()));
            out.push_back(*group[k]);
        } else {
            for (const Annotation* a : group) out.push_back(*a);
        }
    }
    return out;
}

void write_subset_manifest(const std::vector<Annotation>& annotations,
                           const std::filesystem::path& out_file) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : annotations) {
        arr.push_back({{"video_id", a.video_id},
                       {"gt_start_sec", a.gt_start_sec},
                       {"gt_end_sec", a.gt_end_sec},
                       {"query", a.query}});
    }
    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write subset manifest: " + out_file.string());
    out << arr.dump(2) << '\n';
}

std::vector<Annotation> load_subset_manifest(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open subset manifest: " + file.string());
    nlohmann::json arr = nlohmann::json::parse(in);
    std::vector<Annotation> out;
    for (const auto& item : arr) {
        out.push_back(Annotation{item.at("video_id").get<std::string>(),
                                 item.at("gt_start_sec").get<double>(),
                                 item.at("gt_end_sec").get<double>(),
                                 item.at("query").get<std::string>()});
    }
    return out;
}

}  // namespace temploc
