#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "temploc/annotations.hpp"
#include "temploc/backends.hpp"
#include "temploc/errors.hpp"
#include "temploc/frames.hpp"
#include "temploc/interval_parser.hpp"
#include "temploc/metrics.hpp"
#include "temploc/pipeline.hpp"
#include "temploc/reports.hpp"
#include "temploc/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_thresholds(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw temploc::ConfigError("no thresholds given");
    return out;
}

json outcome_to_json(const temploc::IntervalPrediction& pred) {
    if (const auto* f = pred.frames()) {
        return {{"kind", "frames"}, {"start", f->start}, {"end", f->end}};
    }
    if (const auto* s = pred.seconds()) {
        return {{"kind", "seconds"}, {"start", s->start}, {"end", s->end}};
    }
    return {{"kind", "undefined"}};
}

temploc::TemplateSet load_templates(const std::string& templates_dir) {
    if (templates_dir.empty()) return temploc::TemplateSet::builtin();
    return temploc::TemplateSet::load_dir(templates_dir);
}

struct BackendFlags {
    std::string stage1 = "echo";
    std::string stage2 = "echo";
    std::string replay_dir;
};

std::shared_ptr<temploc::ChatBackend> resolve_backend(const std::string& spec,
                                                      const std::string& replay_dir) {
    if (!replay_dir.empty()) return std::make_shared<temploc::ReplayBackend>(replay_dir);
    return temploc::make_backend(spec);
}

fs::path find_video_file(const fs::path& videos_root, const std::string& video_id) {
    static const char* exts[] = {".mp4", ".webm", ".avi", ".mkv", ".mov"};
    for (const char* ext : exts) {
        fs::path candidate = videos_root / (video_id + ext);
        if (fs::exists(candidate)) return candidate;
    }
    return videos_root / (video_id + ".mp4");
}

int run_command(const std::string& annotations_file, const std::string& frames_root,
                const std::string& strategy, const BackendFlags& backends, int subset_n,
                std::uint64_t seed, bool all_annotations, const std::string& thresholds_csv,
                const std::string& cache_dir, const std::string& out_dir, int max_in_flight,
                bool max_in_flight_given,
                const std::string& templates_dir, int image_long_edge, int max_tokens,
                double temperature, const std::string& stage1_model,
                const std::string& stage2_model) {
    temploc::RunConfig config;
    config.strategy = temploc::prompt_strategy_from_string(strategy);
    config.stage1_backend = resolve_backend(backends.stage1, backends.replay_dir);
    config.stage2_backend = resolve_backend(backends.stage2, backends.replay_dir);
    config.stage1_spec = backends.replay_dir.empty() ? backends.stage1
                                                     : "replay:" + backends.replay_dir;
    config.stage2_spec = backends.replay_dir.empty() ? backends.stage2
                                                     : "replay:" + backends.replay_dir;
    config.thresholds = parse_thresholds(thresholds_csv);
    if (subset_n > 0) {
        config.subset = temploc::SubsetSpec{static_cast<std::size_t>(subset_n), seed,
                                            !all_annotations};
    }
    config.max_in_flight = max_in_flight;
    // An http config file may pin its own request concurrency; an explicit
    // --max-in-flight flag still wins.
    if (!max_in_flight_given && backends.replay_dir.empty() &&
        backends.stage1.rfind("http:", 0) == 0) {
        const auto http_cfg = temploc::HttpBackendConfig::from_file(backends.stage1.substr(5));
        if (http_cfg.max_in_flight > 0) config.max_in_flight = http_cfg.max_in_flight;
    }
    config.cache_dir = cache_dir;
    config.out_dir = out_dir;
    config.frames_root = frames_root;
    config.templates = load_templates(templates_dir);
    config.image_long_edge_px = image_long_edge;
    config.max_tokens = max_tokens;
    config.temperature = temperature;
    config.stage1_model_id = stage1_model;
    config.stage2_model_id = stage2_model;

    const auto annotations = temploc::load_annotations(annotations_file);
    const auto report = temploc::run_experiment(annotations, config);

    std::cout << temploc::render_markdown_table(
        {{config.stage1_backend->name() + " + " + config.stage2_backend->name(), report.table}});
    std::cout << "samples: " << report.table.n_samples
              << "  undefined: " << report.diagnostics.undefined_predictions
              << "  stage1 failures: " << report.diagnostics.stage1_failed_frames
              << "  context overflows: " << report.diagnostics.context_overflows << "\n"
              << "artifacts: " << out_dir << "\n";
    return 0;
}

int run_video_command(const std::string& annotations_file, const std::string& videos_root,
                      const std::string& frames_root, const BackendFlags& backends,
                      const std::string& thresholds_csv, const std::string& out_dir,
                      const std::string& templates_dir, int max_tokens, double temperature) {
    temploc::RunConfig config;
    config.templates = load_templates(templates_dir);
    config.max_tokens = max_tokens;
    config.temperature = temperature;
    config.thresholds = parse_thresholds(thresholds_csv);

    auto backend = resolve_backend(backends.stage1, backends.replay_dir);
    const auto annotations = temploc::load_annotations(annotations_file);
    if (annotations.empty()) throw temploc::ConfigError("annotation file is empty");

    fs::create_directories(out_dir);
    temploc::RunDiagnostics diagnostics;
    std::vector<temploc::SampleResult> samples;
    for (const auto& annotation : annotations) {
        std::optional<double> duration;
        if (!frames_root.empty()) {
            try {
                duration = temploc::build_frame_index(annotation.video_id, frames_root)
                               .duration_sec;
            } catch (const temploc::Error&) {
                // Duration stays unknown; predictions are only lower-clamped.
            }
        }
        const fs::path video = find_video_file(videos_root, annotation.video_id);
        samples.push_back(temploc::run_video_variant(annotation, video, *backend, config,
                                                     duration, &diagnostics));
    }

    const auto table = temploc::evaluate(samples, config.thresholds);
    temploc::write_samples_jsonl(samples, fs::path(out_dir) / temploc::kSamplesFileName);
    temploc::RunProvenance provenance;
    provenance.strategy = "video";
    provenance.stage1_model = backend->name();
    provenance.stage2_model = "";
    provenance.template_digests = config.templates.digests();
    temploc::write_summary_json(table, diagnostics, provenance,
                                fs::path(out_dir) / temploc::kSummaryFileName);
    temploc::write_markdown_report(backend->name() + " (video)", table,
                                   fs::path(out_dir) / temploc::kReportFileName);
    std::cout << temploc::render_markdown_table({{backend->name() + " (video)", table}});
    return 0;
}

int eval_command(const std::string& samples_file, const std::string& thresholds_csv,
                 const std::string& out_dir, const std::string& label) {
    const auto samples = temploc::load_samples_jsonl(samples_file);
    const auto table = temploc::evaluate(samples, parse_thresholds(thresholds_csv));
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        temploc::RunProvenance provenance;
        provenance.strategy = "eval";
        temploc::write_summary_json(table, {}, provenance,
                                    fs::path(out_dir) / temploc::kSummaryFileName);
        temploc::write_markdown_report(label, table,
                                       fs::path(out_dir) / temploc::kReportFileName);
    }
    std::cout << temploc::render_markdown_table({{label, table}});
    return 0;
}

int parse_command(int n_frames, bool seconds) {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    const auto pred = temploc::parse_interval(
        buf.str(), n_frames, seconds ? temploc::NumberUnit::Seconds : temploc::NumberUnit::Frames);
    json out{{"outcome", outcome_to_json(pred)}, {"method", temploc::to_string(pred.method)}};
    if (pred.seconds()) out["clock_format"] = pred.from_clock;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int gen_tuning_command(const std::string& frames_root, const BackendFlags& backends,
                       const std::string& out_file, int max_frames, std::uint64_t seed,
                       const std::string& templates_dir, int image_long_edge) {
    auto backend = resolve_backend(backends.stage1, backends.replay_dir);

    std::vector<temploc::FrameRef> frames;
    for (const auto& video_dir : fs::directory_iterator(frames_root)) {
        if (!video_dir.is_directory()) continue;
        try {
            auto index = temploc::build_frame_index(video_dir.path().filename().string(),
                                                    frames_root);
            frames.insert(frames.end(), index.frames.begin(), index.frames.end());
        } catch (const temploc::Error& e) {
            std::cerr << "skipping " << video_dir.path().filename().string() << ": " << e.what()
                      << "\n";
        }
    }
    std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) {
        return a.image_path.string() < b.image_path.string();
    });
    if (max_frames > 0 && static_cast<std::size_t>(max_frames) < frames.size()) {
        std::mt19937_64 rng(seed);
        std::shuffle(frames.begin(), frames.end(), rng);
        frames.resize(static_cast<std::size_t>(max_frames));
        std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) {
            return a.image_path.string() < b.image_path.string();
        });
    }

    temploc::TuningOptions options;
    options.templates = load_templates(templates_dir);
    options.image_base = frames_root;
    options.image_long_edge_px = image_long_edge;
    const auto batch =
        temploc::generate_tuning_records(frames, *backend, temploc::parse_qa_pairs, options);
    temploc::write_tuning_records(batch.records, out_file);
    std::cout << "records: " << batch.records.size()
              << "  qa parse failures: " << batch.qa_parse_failures
              << "  skipped frames: " << batch.failed_frames << "\n"
              << "written: " << out_file << "\n";
    return 0;
}

int extract_frames_command(const std::vector<std::string>& videos, const std::string& out_dir,
                           const std::string& command_template) {
    for (const auto& video : videos) {
        const auto index = temploc::extract_frames(video, out_dir, command_template);
        std::cout << index.video_id << ": " << index.frame_count() << " frames\n";
    }
    return 0;
}

int report_command(const std::string& summary_file, const std::string& label) {
    const auto table = temploc::load_summary_json(summary_file);
    std::cout << temploc::render_markdown_table({{label, table}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage temporal activity localization over chat-completion backends"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run the two-stage experiment over an annotation file");
    std::string annotations, frames_root, strategy = "activity", thresholds = "0.3,0.5,0.7";
    std::string cache_dir, out_dir, templates_dir;
    BackendFlags backends;
    int subset_n = 0, max_in_flight = 4, image_long_edge = 512, max_tokens = 512;
    std::uint64_t seed = 17;
    bool all_annotations = false;
    double temperature = 0.0;
    run->add_option("--annotations", annotations, "Annotation file")->required();
    run->add_option("--frames-root", frames_root, "Directory of per-video frame folders")
        ->required();
    run->add_option("--strategy", strategy, "activity|general")
        ->check(CLI::IsMember({"activity", "general"}));
    run->add_option("--stage1", backends.stage1, "Stage-1 backend spec (echo, replay:<dir>, http:<cfg>)");
    run->add_option("--stage2", backends.stage2, "Stage-2 backend spec");
    run->add_option("--replay-dir", backends.replay_dir,
                    "Answer all requests from this recorded directory");
    run->add_option("--subset-n", subset_n, "Evaluate a seeded subset of this many videos");
    run->add_option("--seed", seed, "Subset selection seed");
    run->add_flag("--all-annotations-per-video", all_annotations,
                  "Keep every annotation of a selected video");
    run->add_option("--thresholds", thresholds, "Comma-separated IoU thresholds");
    run->add_option("--cache-dir", cache_dir, "Response cache directory");
    run->add_option("--out-dir", out_dir, "Artifact output directory")->required();
    auto* max_in_flight_opt =
        run->add_option("--max-in-flight", max_in_flight, "Concurrent stage-1 requests");
    run->add_option("--templates-dir", templates_dir, "Override prompt templates");
    run->add_option("--image-long-edge", image_long_edge,
                    "Resize images to this long edge before sending (0 = raw bytes)");
    run->add_option("--max-tokens", max_tokens, "Completion token limit");
    run->add_option("--temperature", temperature, "Sampling temperature");
    std::string stage1_model, stage2_model;
    run->add_option("--stage1-model", stage1_model,
                    "Model id recorded in stage-1 requests (default: backend name)");
    run->add_option("--stage2-model", stage2_model,
                    "Model id recorded in stage-2 requests (default: backend name)");

    // run-video
    auto* run_video = app.add_subcommand("run-video", "Single-stage variant with a video backend");
    std::string videos_root;
    run_video->add_option("--annotations", annotations, "Annotation file")->required();
    run_video->add_option("--videos-root", videos_root, "Directory of <video_id>.<ext> files")
        ->required();
    run_video->add_option("--frames-root", frames_root,
                          "Optional frames root used to derive durations");
    run_video->add_option("--backend", backends.stage1, "Video backend spec");
    run_video->add_option("--replay-dir", backends.replay_dir,
                          "Answer all requests from this recorded directory");
    run_video->add_option("--thresholds", thresholds, "Comma-separated IoU thresholds");
    run_video->add_option("--out-dir", out_dir, "Artifact output directory")->required();
    run_video->add_option("--templates-dir", templates_dir, "Override prompt templates");
    run_video->add_option("--max-tokens", max_tokens, "Completion token limit");
    run_video->add_option("--temperature", temperature, "Sampling temperature");

    // eval
    auto* eval = app.add_subcommand("eval", "Re-score an existing per-sample JSONL file");
    std::string samples_file, label = "eval";
    eval->add_option("--samples", samples_file, "samples.jsonl from a previous run")->required();
    eval->add_option("--thresholds", thresholds, "Comma-separated IoU thresholds");
    eval->add_option("--out-dir", out_dir, "Optional output directory");
    eval->add_option("--label", label, "Row label for the report");

    // parse
    auto* parse = app.add_subcommand("parse", "Parse one model response from standard input");
    int n_frames = 1000000;
    bool seconds_mode = false;
    parse->add_option("--n-frames", n_frames, "Frame count used for clamping");
    parse->add_flag("--seconds", seconds_mode, "Interpret bare numbers as seconds");

    // gen-tuning-data
    auto* gen = app.add_subcommand("gen-tuning-data",
                                   "Generate conversation-format instruction-tuning records");
    std::string tuning_out = "tuning_records.json";
    int max_frames = 0;
    gen->add_option("--frames-root", frames_root, "Directory of per-video frame folders")
        ->required();
    gen->add_option("--backend", backends.stage1, "Vision backend spec");
    gen->add_option("--replay-dir", backends.replay_dir,
                    "Answer all requests from this recorded directory");
    gen->add_option("--out", tuning_out, "Output JSON file");
    gen->add_option("--max-frames", max_frames, "Random sample size (0 = all frames)");
    gen->add_option("--seed", seed, "Frame sampling seed");
    gen->add_option("--templates-dir", templates_dir, "Override prompt templates");
    gen->add_option("--image-long-edge", image_long_edge,
                    "Resize images to this long edge before sending (0 = raw bytes)");

    // extract-frames
    auto* extract = app.add_subcommand("extract-frames", "Extract 1 fps frames from videos");
    std::vector<std::string> videos;
    std::string command_template = temploc::kDefaultExtractCommand;
    extract->add_option("videos", videos, "Video files")->required();
    extract->add_option("--out-dir", out_dir, "Frames output root")->required();
    extract->add_option("--command", command_template,
                        "Extraction command with {input} and {output_pattern}");

    // report
    auto* report = app.add_subcommand("report", "Render a markdown table from a summary JSON");
    std::string summary_file;
    report->add_option("--summary", summary_file, "summary.json from a previous run")->required();
    report->add_option("--label", label, "Row label for the report");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return run_command(annotations, frames_root, strategy, backends, subset_n, seed,
                               all_annotations, thresholds, cache_dir, out_dir, max_in_flight,
                               max_in_flight_opt->count() > 0, templates_dir, image_long_edge,
                               max_tokens, temperature, stage1_model, stage2_model);
        }
        if (run_video->parsed()) {
            return run_video_command(annotations, videos_root, frames_root, backends, thresholds,
                                     out_dir, templates_dir, max_tokens, temperature);
        }
        if (eval->parsed()) return eval_command(samples_file, thresholds, out_dir, label);
        if (parse->parsed()) return parse_command(n_frames, seconds_mode);
        if (gen->parsed()) {
            return gen_tuning_command(frames_root, backends, tuning_out, max_frames, seed,
                                      templates_dir, image_long_edge);
        }
        if (extract->parsed()) return extract_frames_command(videos, out_dir, command_template);
        if (report->parsed()) return report_command(summary_file, label);
    } catch (const temploc::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
