#include "temploc/reports.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"

namespace temploc {

namespace {

using nlohmann::json;

std::string format_threshold(double t) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t);
    if (ec != std::errc{}) return "?";
    return std::string(buf, ptr);
}

json sample_to_json(const SampleResult& s) {
    json j{{"video_id", s.annotation.video_id},
           {"query", s.annotation.query},
           {"gt", {s.annotation.gt_start_sec, s.annotation.gt_end_sec}},
           {"iou", s.iou},
           {"parse_method", to_string(s.parse_method)}};
    if (s.prediction_sec) {
        j["pred"] = {s.prediction_sec->start, s.prediction_sec->end};
    } else {
        j["pred"] = nullptr;
    }
    return j;
}

}  // namespace

std::string format_percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
}

void write_samples_jsonl(const std::vector<SampleResult>& samples,
                         const std::filesystem::path& out_file) {
    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write per-sample results: " + out_file.string());
    for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

std::vector<SampleResult> load_samples_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open per-sample results: " + file.string());
    std::vector<SampleResult> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error("per-sample line " + std::to_string(line_no) + " is not valid JSON");
        }
        Annotation ann;
        ann.video_id = j.at("video_id").get<std::string>();
        ann.query = j.value("query", std::string{});
        ann.gt_start_sec = j.at("gt")[0].get<double>();
        ann.gt_end_sec = j.at("gt")[1].get<double>();
        std::optional<SecondsSpan> pred;
        if (j.contains("pred") && !j["pred"].is_null()) {
            pred = SecondsSpan{j["pred"][0].get<double>(), j["pred"][1].get<double>()};
        }
        ParseMethod method = ParseMethod::None;
        if (j.contains("parse_method")) {
            method = parse_method_from_string(j["parse_method"].get<std::string>());
        }
        // IoU is recomputed rather than trusted, so re-scoring stays honest.
        samples.push_back(make_sample_result(ann, pred, method));
    }
    return samples;
}

void write_summary_json(const MetricTable& table, const RunDiagnostics& diagnostics,
                        const RunProvenance& provenance, const std::filesystem::path& out_file) {
    json recall = json::object();
    double recall_sum = 0.0;
    for (std::size_t i = 0; i < table.thresholds.size(); ++i) {
        recall[format_threshold(table.thresholds[i])] = table.recall_at[i];
        recall_sum += table.recall_at[i];
    }
    const double mean_of_recalls =
        table.thresholds.empty() ? 0.0 : recall_sum / static_cast<double>(table.thresholds.size());

    json j{{"n_samples", table.n_samples},
           {"thresholds", table.thresholds},
           {"recall_at", recall},
           {"mean_iou", table.mean_iou},
           {"diagnostics",
            {{"miou_mean_of_recalls", mean_of_recalls},
             {"undefined_predictions", diagnostics.undefined_predictions},
             {"stage1_failed_frames", diagnostics.stage1_failed_frames},
             {"context_overflows", diagnostics.context_overflows},
             {"largest_stage2_prompt_chars", diagnostics.largest_stage2_prompt_chars},
             {"notes", diagnostics.notes}}},
           {"run",
            {{"strategy", provenance.strategy},
             {"stage1_model", provenance.stage1_model},
             {"stage2_model", provenance.stage2_model},
             {"template_digests", provenance.template_digests},
             {"config", provenance.config}}}};

    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write summary: " + out_file.string());
    out << j.dump(2) << '\n';
}

MetricTable load_summary_json(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open summary: " + file.string());
    json j = json::parse(in);
    MetricTable table;
    table.n_samples = j.at("n_samples").get<std::size_t>();
    table.thresholds = j.at("thresholds").get<std::vector<double>>();
    for (double t : table.thresholds) {
        table.recall_at.push_back(j.at("recall_at").at(format_threshold(t)).get<double>());
    }
    table.mean_iou = j.at("mean_iou").get<double>();
    return table;
}

std::string render_markdown_table(
    const std::vector<std::pair<std::string, MetricTable>>& rows) {
    if (rows.empty()) throw Error("markdown table needs at least one row");
    const auto& thresholds = rows.front().second.thresholds;
    for (const auto& [label, table] : rows) {
        if (table.thresholds != thresholds) {
            throw Error("markdown table rows must share thresholds");
        }
    }

    std::ostringstream out;
    out << "| Model pair |";
    for (double t : thresholds) out << " R@" << format_threshold(t) << " |";
    out << " mIoU |\n";
    out << "|---|";
    for (std::size_t i = 0; i < thresholds.size(); ++i) out << "---:|";
    out << "---:|\n";
    for (const auto& [label, table] : rows) {
        out << "| " << label << " |";
        for (double r : table.recall_at) out << ' ' << format_percent(r) << " |";
        out << ' ' << format_percent(table.mean_iou) << " |\n";
    }
    return out.str();
}

void write_markdown_report(const std::string& label, const MetricTable& table,
                           const std::filesystem::path& out_file) {
    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write markdown report: " + out_file.string());
    out << render_markdown_table({{label, table}});
}

}  // namespace temploc
