#include "temploc/prompts.hpp"

#include <fstream>
#include <sstream>

#include "temploc/errors.hpp"
#include "temploc/sha256.hpp"

namespace temploc {

namespace {

// Left-to-right single pass; replacement text is never rescanned, so a query
// containing "{query}" cannot recurse.
std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string_view>>& subs) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        std::size_t best = std::string_view::npos;
        std::size_t best_sub = 0;
        for (std::size_t s = 0; s < subs.size(); ++s) {
            std::size_t found = tmpl.find(subs[s].first, pos);
            if (found < best) {
                best = found;
                best_sub = s;
            }
        }
        if (best == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, best - pos));
        out.append(subs[best_sub].second);
        pos = best + subs[best_sub].first.size();
    }
    return out;
}

std::string flatten_newlines(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\r' || c == '\n') {
            out.push_back(' ');
            // \r\n counts as one newline
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            out.push_back(c);
        }
        ++i;
    }
    return out;
}

const std::vector<std::pair<std::string, std::string TemplateSet::*>>& template_files() {
    static const std::vector<std::pair<std::string, std::string TemplateSet::*>> files = {
        {"stage1_activity.txt", &TemplateSet::stage1_activity},
        {"stage1_general.txt", &TemplateSet::stage1_general},
        {"stage2.txt", &TemplateSet::stage2},
        {"video.txt", &TemplateSet::video},
        {"tuning_description.txt", &TemplateSet::tuning_description},
        {"tuning_qa.txt", &TemplateSet::tuning_qa},
    };
    return files;
}

}  // namespace

std::string to_string(PromptStrategy s) {
    return s == PromptStrategy::Activity ? "activity" : "general";
}

PromptStrategy prompt_strategy_from_string(std::string_view s) {
    if (s == "activity") return PromptStrategy::Activity;
    if (s == "general") return PromptStrategy::General;
    throw ConfigError("unknown prompt strategy: " + std::string(s));
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet t;
        t.stage1_activity =
            "This is one frame from a longer video clip. The video clip includes the action "
            "described as {query} however, the frame may or may not include this action. "
            "Briefly explain what action or actions the person is conducting in the frame.";
        t.stage1_general = "Describe what is happening in the frame.";
        t.stage2 =
            "The following are descriptions of actions for frames extracted 1 second apart "
            "from a video clip:\n"
            "{frame_lines}\n"
            "The action {query} has occurred in the video clip. What interval is the action "
            "most likely to start and end? Provide your best guess by providing the start and "
            "end frame numbers in json format.";
        t.video =
            "The action {query} has occurred in the video clip. In what interval is the "
            "action most likely to occur? Please provide the numbers for the start and end "
            "timestamps.";
        t.tuning_description =
            "Provide a verbose description of what is happening in the frame. Focus on the "
            "actions the person is conducting, their movements, the objects involved, and the "
            "surrounding environment.";
        t.tuning_qa =
            "Generate question and answer pairs regarding the activities occurring in the "
            "frame. Respond in json format as an array of objects, each with a \"question\" "
            "field and an \"answer\" field.";
        return t;
    }();
    return set;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    TemplateSet set;
    for (const auto& [filename, member] : template_files()) {
        const auto path = dir / filename;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("missing template file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();
        if (!text.empty() && text.back() == '\r') text.pop_back();
        set.*member = std::move(text);
    }
    return set;
}

void TemplateSet::write_dir(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [filename, member] : template_files()) {
        std::ofstream out(dir / filename, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write template file: " + (dir / filename).string());
        out << this->*member << '\n';
    }
}

std::map<std::string, std::string> TemplateSet::digests() const {
    std::map<std::string, std::string> out;
    for (const auto& [filename, member] : template_files()) {
        std::string key = filename.substr(0, filename.size() - 4);  // drop .txt
        out[key] = sha256_hex(this->*member);
    }
    return out;
}

std::string render_stage1(const TemplateSet& templates, PromptStrategy strategy,
                          const std::optional<std::string>& query) {
    if (strategy == PromptStrategy::General) {
        return templates.stage1_general;
    }
    if (!query || query->empty()) throw MissingQuery();
    return substitute(templates.stage1_activity, {{"{query}", *query}});
}

Stage2Prompt render_stage2(const TemplateSet& templates,
                           const std::vector<FrameDescription>& descriptions,
                           const std::string& query) {
    if (descriptions.empty()) {
        throw NonContiguousDescriptions("no descriptions supplied");
    }
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
        if (descriptions[i].frame_index != static_cast<int>(i) + 1) {
            throw NonContiguousDescriptions(
                "expected frame " + std::to_string(i + 1) + ", got frame " +
                std::to_string(descriptions[i].frame_index) + " at position " + std::to_string(i));
        }
    }
    std::string frame_lines;
    for (const auto& d : descriptions) {
        if (!frame_lines.empty()) frame_lines.push_back('\n');
        frame_lines += "* Frame " + std::to_string(d.frame_index) + ": " + flatten_newlines(d.text);
    }
    Stage2Prompt prompt;
    prompt.n_frames = static_cast<int>(descriptions.size());
    prompt.text = substitute(templates.stage2, {{"{frame_lines}", frame_lines}, {"{query}", query}});
    return prompt;
}

std::string render_video_prompt(const TemplateSet& templates, const std::string& query) {
    if (query.empty()) throw MissingQuery();
    return substitute(templates.video, {{"{query}", query}});
}

std::pair<std::string, std::string> render_tuning_prompts(const TemplateSet& templates,
                                                          const FrameRef& frame) {
    if (!std::filesystem::exists(frame.image_path)) {
        throw Error("tuning prompt requested for missing frame image: " +
                    frame.image_path.string());
    }
    return {templates.tuning_description, templates.tuning_qa};
}

}  // namespace temploc
