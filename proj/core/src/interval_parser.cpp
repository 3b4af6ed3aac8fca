#include "temploc/interval_parser.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"

namespace temploc {

namespace {

using nlohmann::json;

// Whether a number came with an explicit unit hint: "start_frame" pins
// frames, "start_time"/"mm:ss" pins seconds, bare "start" follows the
// caller's unit.
enum class Anchor { None, Frame, Time };

struct RawValue {
    double value = 0.0;
    bool clock = false;
    Anchor anchor = Anchor::None;
};

struct Lexed {
    RawValue value;
    std::size_t end = 0;  // one past the last consumed char
};

struct Candidate {
    RawValue start;
    RawValue end;
    std::size_t end_pos = 0;
};

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return out;
}

std::size_t skip_spaces(std::string_view t, std::size_t pos) {
    while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
    return pos;
}

// mm:ss (minutes up to 3 digits). The char before must not be a digit or
// ':' so "1:23:45" does not half-match.
std::optional<Lexed> lex_clock(std::string_view t, std::size_t pos) {
    if (pos > 0 && (is_digit(t[pos - 1]) || t[pos - 1] == ':')) return std::nullopt;
    std::size_t p = pos;
    std::size_t digits = 0;
    while (p < t.size() && is_digit(t[p]) && digits < 4) {
        ++p;
        ++digits;
    }
    if (digits == 0 || digits > 3) return std::nullopt;
    if (p >= t.size() || t[p] != ':') return std::nullopt;
    ++p;
    if (p + 2 > t.size()) return std::nullopt;
    if (!is_digit(t[p]) || !is_digit(t[p + 1])) return std::nullopt;
    if (p + 2 < t.size() && (is_digit(t[p + 2]) || t[p + 2] == ':')) return std::nullopt;
    double minutes = 0;
    for (std::size_t i = pos; i < p - 1; ++i) minutes = minutes * 10 + (t[i] - '0');
    const double seconds = (t[p] - '0') * 10 + (t[p + 1] - '0');
    if (seconds >= 60.0) return std::nullopt;
    return Lexed{RawValue{minutes * 60.0 + seconds, true, Anchor::Time}, p + 2};
}

std::optional<Lexed> lex_plain_number(std::string_view t, std::size_t pos) {
    if (pos > 0 && (is_digit(t[pos - 1]) || t[pos - 1] == '.')) return std::nullopt;
    std::size_t p = pos;
    if (p >= t.size() || !is_digit(t[p])) return std::nullopt;
    while (p < t.size() && is_digit(t[p])) ++p;
    if (p < t.size() && t[p] == '.' && p + 1 < t.size() && is_digit(t[p + 1])) {
        ++p;
        while (p < t.size() && is_digit(t[p])) ++p;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data() + pos, t.data() + p, value);
    if (ec != std::errc{} || ptr != t.data() + p || !std::isfinite(value)) return std::nullopt;
    return Lexed{RawValue{value, false, Anchor::None}, p};
}

std::optional<Lexed> lex_value(std::string_view t, std::size_t pos) {
    if (auto clock = lex_clock(t, pos)) return clock;
    return lex_plain_number(t, pos);
}

// ---- alias matching -------------------------------------------------------

enum class KeyKind { Start, End };

constexpr std::string_view kStartWords[] = {"start", "begin"};
constexpr std::string_view kEndWords[] = {"end", "stop"};
constexpr std::string_view kFrameSuffixes[] = {"frames", "frame"};
constexpr std::string_view kTimeSuffixes[] = {"timestamps", "timestamp", "times", "time",
                                              "seconds",    "second",    "secs",  "sec"};

bool match_word(std::string_view lc, std::size_t pos, std::string_view word) {
    if (lc.compare(pos, word.size(), word) != 0) return false;
    const std::size_t after = pos + word.size();
    if (after < lc.size() && is_word_char(lc[after])) return false;
    return true;
}

struct AliasMatch {
    KeyKind kind;
    Anchor anchor = Anchor::None;
    std::size_t end = 0;
};

// Matches "start", "begin", "end", "stop" optionally followed by a
// [_ -]-joined unit suffix ("start_frame", "end time", "begin-timestamp").
std::optional<AliasMatch> match_alias(std::string_view lc, std::size_t pos) {
    if (pos > 0 && is_word_char(lc[pos - 1])) return std::nullopt;
    KeyKind kind = KeyKind::Start;
    std::size_t word_end = 0;
    bool matched = false;
    for (auto w : kStartWords) {
        if (lc.compare(pos, w.size(), w) == 0) {
            kind = KeyKind::Start;
            word_end = pos + w.size();
            matched = true;
            break;
        }
    }
    if (!matched) {
        for (auto w : kEndWords) {
            if (lc.compare(pos, w.size(), w) == 0) {
                kind = KeyKind::End;
                word_end = pos + w.size();
                matched = true;
                break;
            }
        }
    }
    if (!matched) return std::nullopt;

    // Suffix joined by '_', ' ' or '-'.
    if (word_end < lc.size() && (lc[word_end] == '_' || lc[word_end] == ' ' || lc[word_end] == '-')) {
        const std::size_t suffix_pos = word_end + 1;
        for (auto s : kFrameSuffixes) {
            if (match_word(lc, suffix_pos, s)) {
                return AliasMatch{kind, Anchor::Frame, suffix_pos + s.size()};
            }
        }
        for (auto s : kTimeSuffixes) {
            if (match_word(lc, suffix_pos, s)) {
                return AliasMatch{kind, Anchor::Time, suffix_pos + s.size()};
            }
        }
    }
    // Bare alias: the base word itself must end at a word boundary
    // ("starting"/"ending" do not count).
    if (word_end < lc.size() && is_word_char(lc[word_end])) return std::nullopt;
    return AliasMatch{kind, Anchor::None, word_end};
}

// ---- route 3: key-value keywords ------------------------------------------

// "start_frame": "16"   start = 16   begin time: 00:15
std::optional<Candidate> scan_keywords(std::string_view lc) {
    std::optional<std::pair<RawValue, std::size_t>> last_start, last_end;
    for (std::size_t i = 0; i < lc.size(); ++i) {
        auto alias = match_alias(lc, i);
        if (!alias) continue;
        std::size_t p = alias->end;
        if (p < lc.size() && (lc[p] == '"' || lc[p] == '\'')) ++p;  // closing key quote
        p = skip_spaces(lc, p);
        if (p >= lc.size() || (lc[p] != ':' && lc[p] != '=')) continue;
        ++p;
        p = skip_spaces(lc, p);
        if (p < lc.size() && (lc[p] == '"' || lc[p] == '\'')) ++p;  // opening value quote
        p = skip_spaces(lc, p);
        auto value = lex_value(lc, p);
        if (!value) continue;
        value->value.anchor = value->value.clock ? Anchor::Time : alias->anchor;
        auto entry = std::make_pair(value->value, value->end);
        if (alias->kind == KeyKind::Start)
            last_start = entry;
        else
            last_end = entry;
        i = value->end - 1;
    }
    if (!last_start || !last_end) return std::nullopt;
    return Candidate{last_start->first, last_end->first,
                     std::max(last_start->second, last_end->second)};
}

// ---- route 4: free-text patterns ------------------------------------------

// Connector between the two values: "to", "through", "until", "and" or a
// dash-like symbol.
std::optional<std::size_t> match_connector(std::string_view lc, std::size_t pos) {
    static constexpr std::string_view words[] = {"through", "until", "to", "and"};
    static constexpr std::string_view symbols[] = {"--", "-", "~", "\xe2\x80\x93", "\xe2\x80\x94"};
    for (auto w : words) {
        if (match_word(lc, pos, w)) return pos + w.size();
    }
    for (auto s : symbols) {
        if (lc.compare(pos, s.size(), s) == 0) return pos + s.size();
    }
    return std::nullopt;
}

// Optional "frame"/"frames" + optional "#" before a number.
std::size_t skip_frame_word(std::string_view lc, std::size_t pos) {
    for (auto w : kFrameSuffixes) {
        if (match_word(lc, pos, w)) {
            pos = skip_spaces(lc, pos + w.size());
            break;
        }
    }
    if (pos < lc.size() && lc[pos] == '#') pos = skip_spaces(lc, pos + 1);
    return pos;
}

void consider(std::optional<Candidate>& best, const Candidate& cand) {
    if (!best || cand.end_pos > best->end_pos) best = cand;
}

std::optional<Candidate> scan_patterns(std::string_view lc) {
    std::optional<Candidate> best;

    // "Frame 7 to Frame 12", "frames 16-28"
    for (std::size_t i = 0; i < lc.size(); ++i) {
        bool worked = false;
        for (auto w : kFrameSuffixes) {
            if ((i == 0 || !is_word_char(lc[i - 1])) && match_word(lc, i, w)) {
                std::size_t p = skip_spaces(lc, i + w.size());
                if (p < lc.size() && lc[p] == '#') p = skip_spaces(lc, p + 1);
                auto a = lex_plain_number(lc, p);
                if (!a) break;
                p = skip_spaces(lc, a->end);
                auto conn = match_connector(lc, p);
                if (!conn) break;
                p = skip_spaces(lc, *conn);
                p = skip_frame_word(lc, p);
                auto b = lex_plain_number(lc, p);
                if (!b) break;
                a->value.anchor = Anchor::Frame;
                b->value.anchor = Anchor::Frame;
                consider(best, Candidate{a->value, b->value, b->end});
                worked = true;
                break;
            }
        }
        if (worked) continue;

        // "from 7 to 12", "from 00:15 to 00:28"
        if ((i == 0 || !is_word_char(lc[i - 1])) && match_word(lc, i, "from")) {
            std::size_t p = skip_spaces(lc, i + 4);
            p = skip_frame_word(lc, p);
            auto a = lex_value(lc, p);
            if (!a) continue;
            p = skip_spaces(lc, a->end);
            if (!match_word(lc, p, "to")) continue;
            p = skip_spaces(lc, p + 2);
            p = skip_frame_word(lc, p);
            auto b = lex_value(lc, p);
            if (!b) continue;
            consider(best, Candidate{a->value, b->value, b->end});
            continue;
        }

        // "00:15 - 00:28"
        if (auto c1 = lex_clock(lc, i)) {
            std::size_t p = skip_spaces(lc, c1->end);
            auto conn = match_connector(lc, p);
            if (!conn) continue;
            p = skip_spaces(lc, *conn);
            if (auto c2 = lex_clock(lc, p)) {
                consider(best, Candidate{c1->value, c2->value, c2->end});
            }
        }
    }
    return best;
}

// ---- routes 1 & 2: JSON ----------------------------------------------------

std::optional<AliasMatch> classify_key(const std::string& key) {
    const std::string lc = ascii_lower(key);
    auto alias = match_alias(lc, 0);
    if (!alias || alias->end != lc.size()) return std::nullopt;
    return alias;
}

int anchor_rank(Anchor a) { return a == Anchor::Frame ? 3 : a == Anchor::Time ? 2 : 1; }

std::optional<RawValue> json_value(const json& v, Anchor anchor) {
    if (v.is_number()) {
        const double d = v.get<double>();
        if (!std::isfinite(d)) return std::nullopt;
        return RawValue{d, false, anchor};
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        std::size_t begin = 0, end = s.size();
        while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) ++begin;
        while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t')) --end;
        const std::string_view trimmed(s.data() + begin, end - begin);
        if (trimmed.empty()) return std::nullopt;
        if (auto clock = lex_clock(trimmed, 0); clock && clock->end == trimmed.size()) {
            return clock->value;
        }
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), d);
        if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size() || !std::isfinite(d)) {
            return std::nullopt;
        }
        return RawValue{d, false, anchor};
    }
    return std::nullopt;
}

// First object (document order, depth-first) holding both a start-alias and
// an end-alias key with numeric or clock values. More specific keys win
// within an object (start_frame over start).
std::optional<std::pair<RawValue, RawValue>> search_json(const json& j) {
    if (j.is_object()) {
        std::optional<RawValue> best_start, best_end;
        int start_rank = 0, end_rank = 0;
        for (const auto& [key, value] : j.items()) {
            auto alias = classify_key(key);
            if (!alias) continue;
            auto raw = json_value(value, alias->anchor);
            if (!raw) continue;
            if (raw->clock) raw->anchor = Anchor::Time;
            const int rank = anchor_rank(alias->anchor);
            if (alias->kind == KeyKind::Start && rank > start_rank) {
                start_rank = rank;
                best_start = raw;
            } else if (alias->kind == KeyKind::End && rank > end_rank) {
                end_rank = rank;
                best_end = raw;
            }
        }
        if (best_start && best_end) return std::make_pair(*best_start, *best_end);
        for (const auto& [key, value] : j.items()) {
            if (value.is_object() || value.is_array()) {
                if (auto r = search_json(value)) return r;
            }
        }
        return std::nullopt;
    }
    if (j.is_array()) {
        for (const auto& el : j) {
            if (el.is_object() || el.is_array()) {
                if (auto r = search_json(el)) return r;
            }
        }
    }
    return std::nullopt;
}

std::string_view trim_view(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::optional<std::pair<RawValue, RawValue>> try_strict_json(std::string_view text) {
    const auto trimmed = trim_view(text);
    if (trimmed.empty()) return std::nullopt;
    json doc = json::parse(trimmed, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) return std::nullopt;
    return search_json(doc);
}

std::optional<std::pair<RawValue, RawValue>> try_fenced_json(std::string_view text) {
    const std::size_t open = text.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    const std::size_t content_begin = open + 3;
    const std::size_t close = text.find("```", content_begin);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view content = trim_view(text.substr(content_begin, close - content_begin));
    // Optional language tag.
    if (content.size() >= 4) {
        std::string head = ascii_lower(content.substr(0, 4));
        if (head == "json" && (content.size() == 4 || !is_word_char(content[4]))) {
            content = trim_view(content.substr(4));
        }
    }
    if (content.empty()) return std::nullopt;
    json doc = json::parse(content, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) return std::nullopt;
    return search_json(doc);
}

// ---- normalization ----------------------------------------------------------

IntervalPrediction finalize(std::pair<RawValue, RawValue> pair, ParseMethod method,
                            NumberUnit unit, int n_frames, std::string raw) {
    const RawValue& a = pair.first;
    const RawValue& b = pair.second;
    const bool any_clock = a.clock || b.clock;
    const bool has_frame = a.anchor == Anchor::Frame || b.anchor == Anchor::Frame;
    const bool has_time = a.anchor == Anchor::Time || b.anchor == Anchor::Time;

    bool as_seconds;
    if (any_clock || (has_time && !has_frame)) {
        as_seconds = true;
    } else if (has_frame && !has_time) {
        as_seconds = false;
    } else {
        as_seconds = (unit == NumberUnit::Seconds);
    }

    IntervalPrediction pred;
    pred.method = method;
    pred.from_clock = any_clock;
    pred.raw_response = std::move(raw);
    if (as_seconds) {
        double s = std::max(0.0, a.value);
        double e = std::max(0.0, b.value);
        if (s > e) std::swap(s, e);
        pred.outcome = SecondsSpan{s, e};
    } else {
        // Clamp in double space before rounding so absurd values cannot
        // overflow the integer conversion.
        const double hi = static_cast<double>(n_frames);
        double s = std::clamp(a.value, 1.0, hi);
        double e = std::clamp(b.value, 1.0, hi);
        if (s > e) std::swap(s, e);
        pred.outcome = FrameSpan{static_cast<int>(std::llround(s)), static_cast<int>(std::llround(e))};
    }
    return pred;
}

}  // namespace

std::string to_string(ParseMethod m) {
    switch (m) {
        case ParseMethod::StrictJson: return "strict_json";
        case ParseMethod::FencedJson: return "fenced_json";
        case ParseMethod::KeywordHeuristic: return "keyword_heuristic";
        case ParseMethod::PatternHeuristic: return "pattern_heuristic";
        case ParseMethod::None: return "none";
    }
    return "none";
}

ParseMethod parse_method_from_string(std::string_view s) {
    if (s == "strict_json") return ParseMethod::StrictJson;
    if (s == "fenced_json") return ParseMethod::FencedJson;
    if (s == "keyword_heuristic") return ParseMethod::KeywordHeuristic;
    if (s == "pattern_heuristic") return ParseMethod::PatternHeuristic;
    if (s == "none") return ParseMethod::None;
    throw Error("unknown parse method: " + std::string(s));
}

IntervalPrediction parse_interval(std::string_view response_text, int n_frames, NumberUnit unit) {
    if (n_frames < 1) n_frames = 1;
    IntervalPrediction undefined;
    undefined.raw_response = std::string(response_text);

    try {
        if (auto r = try_strict_json(response_text)) {
            return finalize(*r, ParseMethod::StrictJson, unit, n_frames,
                            std::string(response_text));
        }
        if (auto r = try_fenced_json(response_text)) {
            return finalize(*r, ParseMethod::FencedJson, unit, n_frames,
                            std::string(response_text));
        }
        const std::string lc = ascii_lower(response_text);
        if (auto r = scan_keywords(lc)) {
            return finalize({r->start, r->end}, ParseMethod::KeywordHeuristic, unit, n_frames,
                            std::string(response_text));
        }
        if (auto r = scan_patterns(lc)) {
            return finalize({r->start, r->end}, ParseMethod::PatternHeuristic, unit, n_frames,
                            std::string(response_text));
        }
    } catch (...) {
        // An unparseable response is a valid Undefined result, never a crash.
    }
    return undefined;
}

std::optional<SecondsSpan> to_seconds(const IntervalPrediction& pred, double duration_sec) {
    const double duration = std::max(0.0, duration_sec);
    if (const FrameSpan* f = pred.frames()) {
        // Frame k covers seconds [k-1, k].
        double s = std::clamp(static_cast<double>(f->start - 1), 0.0, duration);
        double e = std::clamp(static_cast<double>(f->end), 0.0, duration);
        if (s > e) std::swap(s, e);
        return SecondsSpan{s, e};
    }
    if (const SecondsSpan* sec = pred.seconds()) {
        double s = std::clamp(sec->start, 0.0, duration);
        double e = std::clamp(sec->end, 0.0, duration);
        if (s > e) std::swap(s, e);
        return SecondsSpan{s, e};
    }
    return std::nullopt;
}

std::optional<SecondsSpan> to_seconds(const IntervalPrediction& pred, const FrameIndex& index) {
    return to_seconds(pred, index.duration_sec);
}

}  // namespace temploc
