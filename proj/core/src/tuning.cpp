#include "temploc/tuning.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"
#include "temploc/image_ops.hpp"

namespace temploc {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::optional<std::vector<QAPair>> pairs_from_json(const json& doc) {
    if (!doc.is_array()) return std::nullopt;
    std::vector<QAPair> pairs;
    std::size_t conforming = 0;
    for (const auto& el : doc) {
        if (!el.is_object()) continue;
        std::string q, a;
        if (el.contains("question") && el["question"].is_string()) q = el["question"];
        else if (el.contains("q") && el["q"].is_string()) q = el["q"];
        if (el.contains("answer") && el["answer"].is_string()) a = el["answer"];
        else if (el.contains("a") && el["a"].is_string()) a = el["a"];
        if (!q.empty() && !a.empty()) {
            pairs.push_back(QAPair{std::move(q), std::move(a)});
            ++conforming;
        }
    }
    if (!doc.empty() && conforming == 0) return std::nullopt;
    return pairs;
}

std::optional<std::string_view> line_after_prefix(std::string_view line,
                                                  std::initializer_list<std::string_view> prefixes) {
    for (auto prefix : prefixes) {
        if (line.size() >= prefix.size()) {
            bool match = true;
            for (std::size_t i = 0; i < prefix.size(); ++i) {
                char c = line[i];
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
                if (c != prefix[i]) {
                    match = false;
                    break;
                }
            }
            if (match) return trim(line.substr(prefix.size()));
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::vector<QAPair>> parse_qa_pairs(std::string_view response_text) {
    const auto text = trim(response_text);
    if (text.empty()) return std::nullopt;

    // Whole response as JSON.
    json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (!doc.is_discarded()) {
        if (auto pairs = pairs_from_json(doc)) return pairs;
    }

    // JSON inside the first fenced block.
    const std::size_t open = text.find("```");
    if (open != std::string_view::npos) {
        const std::size_t close = text.find("```", open + 3);
        if (close != std::string_view::npos) {
            std::string_view content = trim(text.substr(open + 3, close - open - 3));
            if (content.size() >= 4) {
                std::string_view head = content.substr(0, 4);
                if ((head == "json" || head == "JSON" || head == "Json")) {
                    content = trim(content.substr(4));
                }
            }
            json fenced = json::parse(content, nullptr, false);
            if (!fenced.is_discarded()) {
                if (auto pairs = pairs_from_json(fenced)) return pairs;
            }
        }
    }

    // "Q: ... / A: ..." line pairs.
    std::vector<QAPair> pairs;
    std::optional<std::string> pending_question;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        line = trim(line);
        if (auto q = line_after_prefix(line, {"question:", "q:"})) {
            pending_question = std::string(*q);
        } else if (auto a = line_after_prefix(line, {"answer:", "a:"})) {
            if (pending_question && !pending_question->empty() && !a->empty()) {
                pairs.push_back(QAPair{std::move(*pending_question), std::string(*a)});
            }
            pending_question.reset();
        }
    }
    if (!pairs.empty()) return pairs;
    return std::nullopt;
}

TuningBatch generate_tuning_records(const std::vector<FrameRef>& frames,
                                    ChatBackend& vision_backend, const QaParser& qa_parser,
                                    const TuningOptions& options) {
    TuningBatch batch;
    batch.records.reserve(frames.size());

    for (const FrameRef& frame : frames) {
        std::string description_prompt, qa_prompt;
        ChatResponse description;
        try {
            std::tie(description_prompt, qa_prompt) =
                render_tuning_prompts(options.templates, frame);
            ImageBytes image = prepare_image(frame.image_path, options.image_long_edge_px);

            ChatRequest req;
            req.model_id = vision_backend.name();
            req.text = description_prompt;
            req.image = MediaPayload{frame.image_path, image.mime, image.bytes};
            req.max_tokens = options.max_tokens;
            req.temperature = options.temperature;
            description = complete(vision_backend, req);

            TuningRecord record;
            std::filesystem::path rel = frame.image_path;
            if (!options.image_base.empty()) {
                rel = std::filesystem::relative(frame.image_path, options.image_base);
            }
            record.image = rel.generic_string();
            std::string id = rel.generic_string();
            std::replace(id.begin(), id.end(), '/', '_');
            if (auto dot = id.rfind('.'); dot != std::string::npos) id.resize(dot);
            record.id = id;
            record.conversations.push_back(TuningTurn{"human", description_prompt});
            record.conversations.push_back(TuningTurn{"model", description.text});

            ChatRequest qa_req = req;
            qa_req.text = qa_prompt;
            qa_req.image = MediaPayload{frame.image_path, image.mime, std::move(image.bytes)};
            try {
                const ChatResponse qa_response = complete(vision_backend, qa_req);
                if (auto pairs = qa_parser(qa_response.text)) {
                    for (auto& p : *pairs) {
                        record.conversations.push_back(TuningTurn{"human", std::move(p.question)});
                        record.conversations.push_back(TuningTurn{"model", std::move(p.answer)});
                    }
                } else {
                    ++batch.qa_parse_failures;
                }
            } catch (const ChatError&) {
                ++batch.qa_parse_failures;
            }
            batch.records.push_back(std::move(record));
        } catch (const std::exception&) {
            ++batch.failed_frames;
        }
    }
    return batch;
}

void write_tuning_records(const std::vector<TuningRecord>& records,
                          const std::filesystem::path& out_file) {
    json arr = json::array();
    for (const auto& r : records) {
        json convs = json::array();
        for (const auto& turn : r.conversations) {
            convs.push_back({{"from", turn.role}, {"value", turn.text}});
        }
        arr.push_back({{"id", r.id}, {"image", r.image}, {"conversations", std::move(convs)}});
    }
    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write tuning records: " + out_file.string());
    out << arr.dump(2) << '\n';
}

std::vector<TuningRecord> load_tuning_records(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open tuning records: " + file.string());
    json arr = json::parse(in);
    std::vector<TuningRecord> records;
    for (const auto& item : arr) {
        TuningRecord r;
        r.id = item.at("id").get<std::string>();
        r.image = item.at("image").get<std::string>();
        for (const auto& turn : item.at("conversations")) {
            r.conversations.push_back(
                TuningTurn{turn.at("from").get<std::string>(), turn.at("value").get<std::string>()});
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace temploc
