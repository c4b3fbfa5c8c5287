#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slidesync/cli.hpp"
#include "slidesync/correction.hpp"
#include "slidesync/error.hpp"
#include "slidesync/highlight.hpp"
#include "slidesync/ingest.hpp"
#include "slidesync/matchers.hpp"
#include "slidesync/metrics.hpp"
#include "slidesync/parallel.hpp"
#include "slidesync/providers.hpp"

namespace slidesync::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::size_t jobs = default_jobs();
  bool pretty = false;
};

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string safe_name(std::string_view id) {
  std::string out(id);
  for (auto& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '-' || c == '.' || c == '_')) c = '_';
  }
  return out;
}

ProviderConfig load_provider_config(const std::string& path) {
  if (path.empty()) return {};
  const fs::path p(path);
  return parse_provider_config(read_file(p), p.parent_path());
}

std::vector<std::string> policy_choices() {
  auto names = threshold_preset_names();
  names.push_back("custom");
  return names;
}

ThresholdPolicy resolve_policy(const std::string& name, std::optional<double> textual, std::optional<double> visual) {
  if (name == "custom") {
    if (!textual) throw UsageError("--policy custom requires --textual-th");
    return {"custom", *textual, visual.value_or(0.6)};
  }
  if (textual || visual) throw UsageError("--textual-th/--visual-th are only valid with --policy custom");
  auto preset = threshold_preset(name);
  if (!preset) throw UsageError("unknown policy " + name);
  return *preset;
}

MatcherConfig make_matcher(MatchMethod method, const ProviderConfig& providers) {
  MatcherConfig config;
  config.method = method;
  if (method == MatchMethod::embedding) {
    if (!providers.embedding) throw UsageError("method embedding needs --provider-config with an \"embedding\" block");
    config.embedding_provider = make_embedding_provider(*providers.embedding);
  } else if (method != MatchMethod::fuzzy) {
    if (!providers.llm) throw UsageError("LLM methods need --provider-config with an \"llm\" block");
    config.llm_provider = make_llm_provider(*providers.llm);
  }
  return config;
}

std::vector<Diagnostic> warnings_as_diagnostics(const DatasetEntry& e) {
  std::vector<Diagnostic> out;
  for (const auto& w : e.warnings) out.push_back({e.slide.slide_id, "", "", "ingest_warning", w.entity + ": " + w.message});
  return out;
}

void write_out(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, bytes);
}

/// An alignment directory holds {slide_id}.json files; a plain file holds one result.
std::map<std::string, AlignmentResult> load_alignments(const fs::path& path, const DatasetManifest& manifest) {
  std::map<std::string, AlignmentResult> out;
  if (fs::is_directory(path)) {
    for (const auto& e : manifest.entries) {
      const fs::path f = path / (safe_name(e.slide_id) + ".json");
      if (fs::exists(f)) out.emplace(e.slide_id, read_alignment(read_file(f)));
    }
  } else {
    AlignmentResult r = read_alignment(read_file(path));
    out.emplace(r.slide_id, std::move(r));
  }
  return out;
}

/// A transcript file, a manifest, or a directory of transcript files.
std::vector<Transcript> load_transcripts(const fs::path& path) {
  std::vector<Transcript> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(path))
      if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(parse_transcript(read_file(f)).value);
    return out;
  }
  const std::string bytes = read_file(path);
  const auto root = nlohmann::json::parse(bytes, nullptr, false);
  if (root.is_object() && root.contains("entries")) {
    for (const auto& e : load_manifest(path).entries) out.push_back(parse_transcript(read_file(e.transcript)).value);
  } else {
    out.push_back(parse_transcript(bytes).value);
  }
  return out;
}

// ---- align ----

struct AlignArgs {
  std::string manifest, method, policy = "T-1", provider_config, out;
  std::optional<double> textual_th, visual_th;
  std::size_t max_in_flight = kDefaultMaxInFlight;
};

int cmd_align(const AlignArgs& a, const Common& c) {
  const auto method = match_method_from_string(a.method);
  if (!method) throw UsageError("unknown method " + a.method);
  MatcherConfig config = make_matcher(*method, load_provider_config(a.provider_config));
  config.policy = resolve_policy(a.policy, a.textual_th, a.visual_th);
  config.max_in_flight = a.max_in_flight;

  const auto manifest = load_manifest(a.manifest);
  const auto dataset = load_dataset(manifest, c.jobs);
  std::vector<AlignOutput> outputs(dataset.size());
  parallel_for(dataset.size(), c.jobs, [&](std::size_t i) {
    outputs[i] = align(dataset[i].slide, dataset[i].transcript, config);
  });

  const fs::path out(a.out);
  fs::create_directories(out);
  std::vector<Diagnostic> diagnostics;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    write_out(out / (safe_name(dataset[i].slide.slide_id) + ".json"), write_alignment(outputs[i].result));
    auto w = warnings_as_diagnostics(dataset[i]);
    diagnostics.insert(diagnostics.end(), w.begin(), w.end());
    diagnostics.insert(diagnostics.end(), outputs[i].diagnostics.begin(), outputs[i].diagnostics.end());
  }
  write_out(out / "diagnostics.json", write_diagnostics(diagnostics));
  if (c.pretty) std::cout << "aligned " << dataset.size() << " slides, " << diagnostics.size() << " diagnostics\n";
  return diagnostics.empty() ? kExitOk : kExitDiagnostics;
}

// ---- correct ----

struct CorrectArgs {
  std::string manifest, backend, provider_config, out;
  std::size_t max_in_flight = kDefaultMaxInFlight;
};

int cmd_correct(const CorrectArgs& a, const Common& c) {
  std::shared_ptr<LlmProvider> llm;
  if (a.backend == "llm") {
    const auto providers = load_provider_config(a.provider_config);
    if (!providers.llm) throw UsageError("--backend llm needs --provider-config with an \"llm\" block");
    llm = make_llm_provider(*providers.llm);
  }
  const auto manifest = load_manifest(a.manifest);
  const auto dataset = load_dataset(manifest, c.jobs);
  std::vector<TranscriptCorrection> fixes(dataset.size());
  parallel_for(dataset.size(), c.jobs, [&](std::size_t i) {
    fixes[i] = llm ? correct_llm(dataset[i].transcript, dataset[i].slide, *llm, a.max_in_flight)
                   : correct_transcript_lexical(dataset[i].transcript, dataset[i].slide);
  });

  const fs::path out(a.out);
  fs::create_directories(out / "transcripts");
  DatasetManifest corrected = manifest;
  std::vector<Diagnostic> diagnostics;
  std::size_t substitutions = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::string name = safe_name(dataset[i].slide.slide_id) + ".json";
    const fs::path tpath = out / "transcripts" / name;
    write_out(tpath, write_transcript(fixes[i].transcript));
    if (!llm) {
      write_out(out / "substitutions" / name, write_substitution_logs(fixes[i].logs));
      for (const auto& log : fixes[i].logs) substitutions += log.subs.size();
    }
    corrected.entries[i].transcript = tpath;
    diagnostics.insert(diagnostics.end(), fixes[i].diagnostics.begin(), fixes[i].diagnostics.end());
  }
  corrected.metadata["corrected_by"] = a.backend;
  write_out(out / "manifest.json", write_manifest(corrected, out));
  write_out(out / "diagnostics.json", write_diagnostics(diagnostics));
  if (c.pretty)
    std::cout << "corrected " << dataset.size() << " transcripts, " << substitutions << " substitutions, "
              << diagnostics.size() << " diagnostics\n";
  return diagnostics.empty() ? kExitOk : kExitDiagnostics;
}

// ---- evaluation ----

AlignmentScores score_predictions(const DatasetManifest& manifest, const std::vector<DatasetEntry>& dataset,
                                  const std::map<std::string, AlignmentResult>& preds) {
  std::vector<AlignmentResult> results;
  std::vector<GroundTruth> gts;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].ground_truth) continue;
    gts.push_back(*dataset[i].ground_truth);
    auto it = preds.find(manifest.entries[i].slide_id);
    if (it != preds.end()) results.push_back(it->second);
  }
  if (gts.empty()) throw Error("manifest lists no ground truth");
  return evaluate_alignment(results, gts);
}

struct EvalAlignArgs {
  std::string manifest, pred, out;
};

int cmd_eval_align(const EvalAlignArgs& a, const Common& c) {
  const auto manifest = load_manifest(a.manifest);
  const auto dataset = load_dataset(manifest, c.jobs);
  const auto scores = score_predictions(manifest, dataset, load_alignments(a.pred, manifest));
  write_out(a.out, write_scores(scores));
  if (c.pretty) std::cout << format_scores_table(scores);
  return kExitOk;
}

struct EvalAsrArgs {
  std::string ref, hyp, out;
};

int cmd_eval_asr(const EvalAsrArgs& a, const Common& c) {
  const auto report = evaluate_transcription(load_transcripts(a.ref), load_transcripts(a.hyp));
  write_out(a.out, write_transcription_report(report));
  if (c.pretty) {
    const auto& s = report.avg;
    std::cout << "samples " << report.per_sample.size() << "\nCER " << s.cer << "\nWER " << s.wer << "\nedit distance "
              << s.edit_distance << "\nP " << s.precision << "  R " << s.recall << "  F1 " << s.f1 << "\n";
  }
  return kExitOk;
}

struct StatsArgs {
  std::string manifest, out;
};

int cmd_stats(const StatsArgs& a, const Common& c) {
  const auto dataset = load_dataset(load_manifest(a.manifest), c.jobs);
  const auto stats = corpus_stats(dataset);
  if (!a.out.empty()) write_out(a.out, write_corpus_stats(stats));
  if (c.pretty) {
    std::cout << format_corpus_stats(stats);
  } else if (a.out.empty()) {
    std::cout << write_corpus_stats(stats);
  }
  return kExitOk;
}

// ---- schedule / render ----

struct ScheduleArgs {
  std::string manifest, alignment, style = "bounding_box", gap_policy = "clear", out;
  StyleParams params;
};

int cmd_schedule(const ScheduleArgs& a, const Common& c) {
  const auto style = highlight_style_from_string(a.style);
  if (!style) throw UsageError("unknown style " + a.style);
  const auto gap = gap_policy_from_string(a.gap_policy);
  if (!gap) throw UsageError("unknown gap policy " + a.gap_policy);

  const auto manifest = load_manifest(a.manifest);
  const auto dataset = load_dataset(manifest, c.jobs);
  const auto alignments = load_alignments(a.alignment, manifest);
  std::vector<HighlightSchedule> parts;
  std::vector<SlideDocument> slides;
  for (const auto& d : dataset) {
    slides.push_back(d.slide);
    auto it = alignments.find(d.slide.slide_id);
    if (it != alignments.end()) parts.push_back(build_schedule(it->second, d.transcript, *style, a.params, *gap));
  }
  for (const auto& [id, r] : alignments)
    if (!manifest.find(id)) throw Error("alignment for slide " + id + " is not in the manifest");
  HighlightSchedule schedule = merge_schedules(parts);
  schedule.gap_policy = *gap;
  const auto violations = validate_schedule(schedule, slides);
  if (!violations.empty()) throw Error("invalid schedule: " + violations.front().entity + ": " + violations.front().rule);
  write_out(a.out, write_schedule(schedule));
  if (c.pretty) std::cout << "scheduled " << schedule.events.size() << " events\n";
  return kExitOk;
}

struct RenderArgs {
  std::string manifest, schedule, out_dir;
};

int cmd_render(const RenderArgs& a, const Common& c) {
  const auto dataset = load_dataset(load_manifest(a.manifest), c.jobs);
  std::vector<SlideDocument> slides;
  for (const auto& d : dataset) slides.push_back(d.slide);
  const HighlightSchedule schedule = read_schedule(read_file(a.schedule));
  const auto violations = validate_schedule(schedule, slides);
  if (!violations.empty()) throw Error("invalid schedule: " + violations.front().entity + ": " + violations.front().rule);
  const auto frames = render_schedule(slides, schedule, a.out_dir, c.jobs);
  if (c.pretty) std::cout << "rendered " << frames.size() << " frames\n";
  return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
  std::string manifest, provider_config, out;
  std::vector<std::string> methods, policies{"T-1", "T-2", "T-3"};
  std::size_t max_in_flight = kDefaultMaxInFlight;
};

int cmd_sweep(const SweepArgs& a, const Common& c) {
  const ProviderConfig providers = load_provider_config(a.provider_config);
  std::vector<std::string> methods = a.methods;
  if (methods.empty()) {
    methods.push_back("fuzzy");
    if (providers.embedding) methods.push_back("embedding");
    if (providers.llm) methods.insert(methods.end(), {"llm-yes-no", "llm-select"});
  }
  std::vector<ThresholdPolicy> policies;
  for (const auto& p : a.policies) policies.push_back(resolve_policy(p, std::nullopt, std::nullopt));

  const auto manifest = load_manifest(a.manifest);
  const auto dataset = load_dataset(manifest, c.jobs);
  const fs::path out(a.out);
  fs::create_directories(out);

  nlohmann::json cells = nlohmann::json::array();
  std::vector<Diagnostic> diagnostics;
  std::ostringstream table;
  auto record = [&](const std::string& method, const std::string& policy, std::vector<AlignmentResult> results) {
    std::map<std::string, AlignmentResult> preds;
    for (auto& r : results) preds.emplace(r.slide_id, std::move(r));
    const auto scores = score_predictions(manifest, dataset, preds);
    const std::string file = policy.empty() ? method + ".json" : method + "_" + policy + ".json";
    write_out(out / file, write_scores(scores));
    cells.push_back({{"method", method}, {"policy", policy}, {"file", file}, {"sc", round6(scores.avg.sc)},
                     {"sm", round6(scores.avg.sm)}, {"f1", round6(scores.avg.f1)}});
    table << method << (policy.empty() ? "" : " [" + policy + "]") << "\n" << format_scores_table(scores);
  };

  for (const auto& name : methods) {
    const auto method = match_method_from_string(name);
    if (!method) throw UsageError("unknown method " + name);
    MatcherConfig config = make_matcher(*method, providers);
    config.max_in_flight = a.max_in_flight;
    if (*method == MatchMethod::fuzzy || *method == MatchMethod::embedding) {
      // Score once per slide, then cut the same matrix at every policy.
      std::vector<ScoredSlide> scored(dataset.size());
      parallel_for(dataset.size(), c.jobs, [&](std::size_t i) {
        scored[i] = score_slide(dataset[i].slide, dataset[i].transcript, config);
      });
      for (const auto& s : scored) diagnostics.insert(diagnostics.end(), s.diagnostics.begin(), s.diagnostics.end());
      for (const auto& policy : policies) {
        std::vector<AlignmentResult> results;
        for (std::size_t i = 0; i < dataset.size(); ++i)
          results.push_back(apply_policy(scored[i].matrix, dataset[i].slide, policy, matcher_tag(config), scored[i].line_ok));
        record(name, policy.name, std::move(results));
      }
    } else {
      std::vector<AlignOutput> outputs(dataset.size());
      parallel_for(dataset.size(), c.jobs, [&](std::size_t i) {
        outputs[i] = align(dataset[i].slide, dataset[i].transcript, config);
      });
      std::vector<AlignmentResult> results;
      for (auto& o : outputs) {
        diagnostics.insert(diagnostics.end(), o.diagnostics.begin(), o.diagnostics.end());
        results.push_back(std::move(o.result));
      }
      record(name, "", std::move(results));
    }
  }
  write_out(out / "summary.json", cells.dump(2) + "\n");
  write_out(out / "diagnostics.json", write_diagnostics(diagnostics));
  if (c.pretty) std::cout << table.str();
  return diagnostics.empty() ? kExitOk : kExitDiagnostics;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--jobs", c.jobs, "Worker threads (default: number of processors)")->check(CLI::PositiveNumber);
  sub->add_flag("--pretty", c.pretty, "Print a human-readable summary");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Align lecture transcripts with slide regions and render timed highlights", "slidesync"};
  app.require_subcommand(1);
  Common common;

  const std::vector<std::string> methods{"fuzzy", "embedding", "llm-yes-no", "llm-select"};

  AlignArgs align_args;
  auto* align_cmd = app.add_subcommand("align", "Predict the regions each transcript line refers to");
  align_cmd->add_option("--manifest", align_args.manifest)->required();
  align_cmd->add_option("--method", align_args.method)->required()->check(CLI::IsMember(methods));
  align_cmd->add_option("--policy", align_args.policy, "Threshold preset or custom")->check(CLI::IsMember(policy_choices()));
  align_cmd->add_option("--textual-th", align_args.textual_th)->check(CLI::Range(0.0, 1.0));
  align_cmd->add_option("--visual-th", align_args.visual_th)->check(CLI::Range(0.0, 1.0));
  align_cmd->add_option("--provider-config", align_args.provider_config);
  align_cmd->add_option("--max-in-flight", align_args.max_in_flight)->check(CLI::PositiveNumber);
  align_cmd->add_option("--out", align_args.out)->required();
  add_common(align_cmd, common);

  CorrectArgs correct_args;
  auto* correct_cmd = app.add_subcommand("correct", "Correct transcripts using slide text");
  correct_cmd->add_option("--manifest", correct_args.manifest)->required();
  correct_cmd->add_option("--backend", correct_args.backend)->required()->check(CLI::IsMember({"lexicon", "llm"}));
  correct_cmd->add_option("--provider-config", correct_args.provider_config);
  correct_cmd->add_option("--max-in-flight", correct_args.max_in_flight)->check(CLI::PositiveNumber);
  correct_cmd->add_option("--out", correct_args.out)->required();
  add_common(correct_cmd, common);

  EvalAlignArgs eval_align_args;
  auto* eval_align_cmd = app.add_subcommand("eval-align", "Score alignments against ground truth");
  eval_align_cmd->add_option("--manifest", eval_align_args.manifest)->required();
  eval_align_cmd->add_option("--pred", eval_align_args.pred, "Alignment directory or file")->required();
  eval_align_cmd->add_option("--out", eval_align_args.out)->required();
  add_common(eval_align_cmd, common);

  EvalAsrArgs eval_asr_args;
  auto* eval_asr_cmd = app.add_subcommand("eval-asr", "Compare hypothesis transcripts with references");
  eval_asr_cmd->add_option("--ref", eval_asr_args.ref, "Transcript, manifest or directory")->required();
  eval_asr_cmd->add_option("--hyp", eval_asr_args.hyp, "Transcript, manifest or directory")->required();
  eval_asr_cmd->add_option("--out", eval_asr_args.out)->required();
  add_common(eval_asr_cmd, common);

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  stats_cmd->add_option("--manifest", stats_args.manifest)->required();
  stats_cmd->add_option("--out", stats_args.out, "Write JSON here instead of stdout");
  add_common(stats_cmd, common);

  ScheduleArgs schedule_args;
  auto* schedule_cmd = app.add_subcommand("schedule", "Build a highlight schedule from alignments");
  schedule_cmd->add_option("--manifest", schedule_args.manifest)->required();
  schedule_cmd->add_option("--alignment", schedule_args.alignment, "Alignment directory or file")->required();
  schedule_cmd->add_option("--style", schedule_args.style)
      ->check(CLI::IsMember({"bounding_box", "bounding-box", "shading", "hide_background", "hide-background", "magnify"}));
  schedule_cmd->add_option("--gap-policy", schedule_args.gap_policy)
      ->check(CLI::IsMember({"clear", "hold_previous", "hold-previous"}));
  schedule_cmd->add_option("--stroke-color", schedule_args.params.stroke_color);
  schedule_cmd->add_option("--fill-color", schedule_args.params.fill_color);
  schedule_cmd->add_option("--fill-opacity", schedule_args.params.fill_opacity)->check(CLI::Range(0.0, 1.0));
  schedule_cmd->add_option("--magnify-scale", schedule_args.params.magnify_scale)->check(CLI::Range(1.0, 100.0));
  schedule_cmd->add_option("--out", schedule_args.out)->required();
  add_common(schedule_cmd, common);

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Write one SVG overlay per schedule event");
  render_cmd->add_option("--manifest", render_args.manifest)->required();
  render_cmd->add_option("--schedule", render_args.schedule)->required();
  render_cmd->add_option("--out-dir", render_args.out_dir)->required();
  add_common(render_cmd, common);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Align and score every (method, policy) cell");
  sweep_cmd->add_option("--manifest", sweep_args.manifest)->required();
  sweep_cmd->add_option("--methods", sweep_args.methods)->delimiter(',')->check(CLI::IsMember(methods));
  sweep_cmd->add_option("--policies", sweep_args.policies)->delimiter(',')->check(CLI::IsMember(threshold_preset_names()));
  sweep_cmd->add_option("--provider-config", sweep_args.provider_config);
  sweep_cmd->add_option("--max-in-flight", sweep_args.max_in_flight)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_args.out)->required();
  add_common(sweep_cmd, common);

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*align_cmd) return cmd_align(align_args, common);
    if (*correct_cmd) return cmd_correct(correct_args, common);
    if (*eval_align_cmd) return cmd_eval_align(eval_align_args, common);
    if (*eval_asr_cmd) return cmd_eval_asr(eval_asr_args, common);
    if (*stats_cmd) return cmd_stats(stats_args, common);
    if (*schedule_cmd) return cmd_schedule(schedule_args, common);
    if (*render_cmd) return cmd_render(render_args, common);
    if (*sweep_cmd) return cmd_sweep(sweep_args, common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace slidesync::cli
