#include "temploc/pipeline.hpp"

#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "temploc/errors.hpp"
#include "temploc/image_ops.hpp"
#include "temploc/interval_parser.hpp"

namespace temploc {

namespace {

using nlohmann::json;

std::string video_mime(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".webm") return "video/webm";
    if (ext == ".avi") return "video/x-msvideo";
    return "video/mp4";
}

void note(RunDiagnostics* diagnostics, std::string message) {
    if (diagnostics) diagnostics->notes.push_back(std::move(message));
}

}  // namespace

std::vector<FrameDescription> run_stage1(const Annotation& annotation,
                                         const FrameIndex& frame_index, ChatBackend& backend,
                                         const RunConfig& config, RunDiagnostics* diagnostics) {
    const std::string prompt =
        config.strategy == PromptStrategy::Activity
            ? render_stage1(config.templates, PromptStrategy::Activity, annotation.query)
            : render_stage1(config.templates, PromptStrategy::General);

    std::vector<ChatRequest> requests;
    std::vector<int> request_frame;  // frame index per request slot
    std::vector<FrameDescription> descriptions(frame_index.frames.size());
    for (std::size_t i = 0; i < frame_index.frames.size(); ++i) {
        const FrameRef& frame = frame_index.frames[i];
        descriptions[i].frame_index = frame.index;
        try {
            ImageBytes image = prepare_image(frame.image_path, config.image_long_edge_px);
            ChatRequest req;
            req.model_id =
                config.stage1_model_id.empty() ? backend.name() : config.stage1_model_id;
            req.text = prompt;
            req.image = MediaPayload{frame.image_path, image.mime, std::move(image.bytes)};
            req.max_tokens = config.max_tokens;
            req.temperature = config.temperature;
            requests.push_back(std::move(req));
            request_frame.push_back(static_cast<int>(i));
        } catch (const std::exception& e) {
            descriptions[i].text = kUnavailableDescription;
            if (diagnostics) ++diagnostics->stage1_failed_frames;
            note(diagnostics, annotation.video_id + " frame " + std::to_string(frame.index) +
                                  ": " + e.what());
        }
    }

    auto results = complete_batch(backend, requests, config.max_in_flight);
    for (std::size_t r = 0; r < results.size(); ++r) {
        const int i = request_frame[r];
        if (results[r].ok()) {
            descriptions[i].text = results[r].response->text;
        } else {
            // Keep the slot so stage-2 frame numbering stays contiguous.
            descriptions[i].text = kUnavailableDescription;
            if (diagnostics) ++diagnostics->stage1_failed_frames;
            note(diagnostics, annotation.video_id + " frame " +
                                  std::to_string(frame_index.frames[i].index) + ": " +
                                  results[r].error);
        }
    }
    return descriptions;
}

SampleResult run_stage2(const std::vector<FrameDescription>& descriptions,
                        const Annotation& annotation, const FrameIndex& frame_index,
                        ChatBackend& backend, const RunConfig& config,
                        RunDiagnostics* diagnostics) {
    const Stage2Prompt prompt = render_stage2(config.templates, descriptions, annotation.query);
    if (diagnostics) {
        diagnostics->largest_stage2_prompt_chars =
            std::max(diagnostics->largest_stage2_prompt_chars, prompt.text.size());
    }

    ChatRequest request;
    request.model_id =
        config.stage2_model_id.empty() ? backend.name() : config.stage2_model_id;
    request.text = prompt.text;
    request.max_tokens = config.max_tokens;
    request.temperature = config.temperature;

    try {
        const ChatResponse response = complete(backend, request);
        const IntervalPrediction pred =
            parse_interval(response.text, prompt.n_frames, NumberUnit::Frames);
        if (pred.undefined() && diagnostics) ++diagnostics->undefined_predictions;
        return make_sample_result(annotation, to_seconds(pred, frame_index), pred.method);
    } catch (const ContextOverflow& e) {
        if (diagnostics) {
            ++diagnostics->context_overflows;
            ++diagnostics->undefined_predictions;
        }
        note(diagnostics, annotation.video_id + ": context overflow at " +
                              std::to_string(prompt.text.size()) + " prompt chars: " + e.what());
        return make_sample_result(annotation, std::nullopt);
    } catch (const CapabilityMismatch&) {
        throw;  // configuration fault, not a per-sample failure
    } catch (const ChatError& e) {
        if (diagnostics) ++diagnostics->undefined_predictions;
        note(diagnostics, annotation.video_id + ": stage-2 request failed: " + e.what());
        return make_sample_result(annotation, std::nullopt);
    }
}

SampleResult run_video_variant(const Annotation& annotation,
                               const std::filesystem::path& video_ref, ChatBackend& backend,
                               const RunConfig& config, std::optional<double> duration_sec,
                               RunDiagnostics* diagnostics) {
    ChatRequest request;
    request.model_id = backend.name();
    request.text = render_video_prompt(config.templates, annotation.query);
    request.max_tokens = config.max_tokens;
    request.temperature = config.temperature;

    MediaPayload payload;
    payload.path = video_ref;
    payload.mime = video_mime(video_ref);
    if (std::filesystem::exists(video_ref)) {
        std::ifstream in(video_ref, std::ios::binary);
        payload.bytes.assign(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
    }
    request.image = std::move(payload);

    try {
        const ChatResponse response = complete(backend, request);
        const IntervalPrediction pred =
            parse_interval(response.text, std::numeric_limits<int>::max(), NumberUnit::Seconds);
        if (pred.undefined() && diagnostics) ++diagnostics->undefined_predictions;
        const double duration = duration_sec.value_or(std::numeric_limits<double>::max());
        return make_sample_result(annotation, to_seconds(pred, duration), pred.method);
    } catch (const CapabilityMismatch&) {
        throw;
    } catch (const ChatError& e) {
        if (diagnostics) ++diagnostics->undefined_predictions;
        note(diagnostics, annotation.video_id + ": video request failed: " + e.what());
        return make_sample_result(annotation, std::nullopt);
    }
}

EvalReport run_experiment(const std::vector<Annotation>& annotations, const RunConfig& config) {
    if (!config.stage1_backend || !config.stage2_backend) {
        throw ConfigError("run requires both stage-1 and stage-2 backends");
    }
    if (!config.stage1_backend->capabilities().vision) {
        throw ConfigError("stage-1 backend '" + config.stage1_backend->name() +
                          "' does not advertise vision capability");
    }
    if (config.out_dir.empty()) throw ConfigError("run requires an output directory");
    std::filesystem::create_directories(config.out_dir);

    const std::vector<Annotation> evaluated =
        config.subset ? select_subset(annotations, *config.subset) : annotations;
    if (evaluated.empty()) throw ConfigError("no annotations to evaluate");

    std::shared_ptr<ChatBackend> stage1 = config.stage1_backend;
    std::shared_ptr<ChatBackend> stage2 = config.stage2_backend;
    if (!config.cache_dir.empty()) {
        stage1 = std::make_shared<CachingBackend>(stage1, config.cache_dir);
        stage2 = std::make_shared<CachingBackend>(stage2, config.cache_dir);
    }

    EvalReport report;
    report.samples.reserve(evaluated.size());
    for (const Annotation& annotation : evaluated) {
        try {
            const FrameIndex frame_index =
                build_frame_index(annotation.video_id, config.frames_root);
            const auto descriptions =
                run_stage1(annotation, frame_index, *stage1, config, &report.diagnostics);
            report.samples.push_back(run_stage2(descriptions, annotation, frame_index, *stage2,
                                                config, &report.diagnostics));
        } catch (const CapabilityMismatch&) {
            throw;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            ++report.diagnostics.undefined_predictions;
            report.diagnostics.notes.push_back(annotation.video_id + ": " + e.what());
            report.samples.push_back(make_sample_result(annotation, std::nullopt));
        }
    }

    report.table = evaluate(report.samples, config.thresholds);

    RunProvenance provenance;
    provenance.strategy = to_string(config.strategy);
    provenance.stage1_model = config.stage1_backend->name();
    provenance.stage2_model = config.stage2_backend->name();
    provenance.template_digests = config.templates.digests();
    provenance.config["stage1_spec"] = config.stage1_spec;
    provenance.config["stage2_spec"] = config.stage2_spec;
    provenance.config["max_in_flight"] = std::to_string(config.max_in_flight);
    provenance.config["image_long_edge_px"] = std::to_string(config.image_long_edge_px);
    provenance.config["max_tokens"] = std::to_string(config.max_tokens);
    provenance.config["temperature"] = std::to_string(config.temperature);
    provenance.config["frames_root"] = config.frames_root.string();
    provenance.config["cache_dir"] = config.cache_dir.string();

    const std::string row_label =
        config.stage1_backend->name() + " + " + config.stage2_backend->name();

    write_samples_jsonl(report.samples, config.out_dir / kSamplesFileName);
    write_summary_json(report.table, report.diagnostics, provenance,
                       config.out_dir / kSummaryFileName);
    write_markdown_report(row_label, report.table, config.out_dir / kReportFileName);
    write_subset_manifest(evaluated, config.out_dir / kSubsetManifestFileName);

    json manifest{{"strategy", provenance.strategy},
                  {"stage1_model", provenance.stage1_model},
                  {"stage2_model", provenance.stage2_model},
                  {"thresholds", config.thresholds},
                  {"n_samples", evaluated.size()},
                  {"template_digests", provenance.template_digests},
                  {"config", provenance.config}};
    if (config.subset) {
        manifest["subset"] = {{"n_videos", config.subset->n_videos},
                              {"seed", config.subset->seed},
                              {"one_annotation_per_video", config.subset->one_annotation_per_video}};
    }
    std::ofstream manifest_out(config.out_dir / kRunManifestFileName,
                               std::ios::binary | std::ios::trunc);
    if (!manifest_out) throw Error("cannot write run manifest");
    manifest_out << manifest.dump(2) << '\n';

    return report;
}

}  // namespace temploc
