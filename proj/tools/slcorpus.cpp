// slcorpus: command line front end for the corpus pipeline.

#include <cstdio>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slc/annotation_service.hpp"
#include "slc/annotation_store.hpp"
#include "slc/corpus.hpp"
#include "slc/error.hpp"
#include "slc/jsonl.hpp"
#include "slc/pipeline.hpp"
#include "slc/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slc;

namespace {

annotation::AnnotationService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

std::string format_count(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : "N/A";
}

std::string stats_table(const corpus::CorpusStats& s) {
  std::ostringstream out;
  out << "split\thours\tsamples\tgloss_vocab\tgloss_running\tgloss_oovs\tgloss_singletons"
         "\tchar_vocab\tchar_running\tchar_oovs\tchar_singletons\n";
  auto row = [&](const char* name, const corpus::SplitStats& r) {
    char hours[32];
    std::snprintf(hours, sizeof hours, "%.2f", r.hours);
    out << name << '\t' << hours << '\t' << r.samples << '\t' << r.gloss_vocab << '\t'
        << r.running_glosses << '\t' << format_count(r.gloss_oovs) << '\t' << r.gloss_singletons
        << '\t' << r.char_vocab << '\t' << r.running_chars << '\t' << format_count(r.char_oovs)
        << '\t' << r.char_singletons << '\n';
  };
  row("train", s.train);
  row("dev", s.dev);
  row("test", s.test);
  row("total", s.overall);
  return out.str();
}

json stats_json(const corpus::SplitStats& r) {
  auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
  return {{"hours", r.hours},
          {"samples", r.samples},
          {"gloss_vocab", r.gloss_vocab},
          {"running_glosses", r.running_glosses},
          {"gloss_oovs", opt(r.gloss_oovs)},
          {"gloss_singletons", r.gloss_singletons},
          {"char_vocab", r.char_vocab},
          {"running_chars", r.running_chars},
          {"char_oovs", opt(r.char_oovs)},
          {"char_singletons", r.char_singletons}};
}

std::vector<annotation::AnnotationTask> tasks_from_manifest(const fs::path& path) {
  std::vector<annotation::AnnotationTask> tasks;
  for (const auto& r : corpus::read_manifest(path)) {
    annotation::AnnotationTask t;
    t.sample_id = r.sample_id;
    t.signer_id = r.signer_id;
    t.episode_id = r.episode_id;
    t.start_frame = r.start_frame;
    t.subtitle_text = r.text;
    tasks.push_back(std::move(t));
  }
  for (const json& j : read_jsonl(path))
    if (j.contains("media") && j["media"].is_string())
      for (auto& t : tasks)
        if (t.sample_id == j["sample_id"]) t.media = j["media"].get<std::string>();
  return tasks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign language corpus pipeline"};
  app.set_config("--config", "", "TOML or INI file with option values");
  app.require_subcommand(1);
  app.fallthrough();

  pipeline::PipelineConfig cfg;
  std::string merge_reference = "last-member";
  std::string ratios_text;
  app.add_option("--fps", cfg.fps, "Frame rate");
  app.add_option("--activity-threshold", cfg.activity_threshold, "Signing score threshold");
  app.add_option("--min-seconds", cfg.duration.min_seconds, "Shortest sign clip kept");
  app.add_option("--max-seconds", cfg.duration.max_seconds, "Longest sign clip kept");
  app.add_option("--laplacian-threshold", cfg.laplacian_threshold, "Subtitle transition threshold");
  app.add_option("--blank-epsilon", cfg.blank_epsilon, "Mean intensity below which a clip is blank");
  app.add_option("--regroup-threshold", cfg.regroup_threshold, "Merge subtitles closer than this edit distance");
  app.add_option("--merge-reference", merge_reference, "last-member or representative")
      ->check(CLI::IsMember({"last-member", "representative"}));
  app.add_option("--dtw-tie", cfg.dtw_tie, "Alignment tie policy");
  app.add_option("--joiner", cfg.joiner, "Separator between joined subtitle texts");
  app.add_option("--ratios", ratios_text, "train,dev,test split ratios");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--max-attempts", cfg.max_attempts, "Split resampling attempts");
  app.add_option("--cleaner", cfg.cleaner, "passthrough or command");
  app.add_option("--cleaner-command", cfg.cleaner_command, "Background removal command");
  app.add_option("--ocr", cfg.ocr.kind, "mock, command or http");
  app.add_option("--ocr-endpoint", cfg.ocr.endpoint, "Mock table, command line or URL");
  app.add_option("--workers", cfg.workers, "Episodes processed in parallel");
  app.add_option("--input", cfg.input, "Episode directory or directory of episodes");
  app.add_option("--work", cfg.work, "Directory for stage artifacts");

  std::vector<std::pair<CLI::App*, pipeline::Stage>> stage_cmds = {
      {app.add_subcommand("segment-activity", "Sign clips from activity scores"),
       pipeline::Stage::segment_activity},
      {app.add_subcommand("subtitle-clips", "Subtitle clips from the strip frames"),
       pipeline::Stage::subtitle_clips},
      {app.add_subcommand("ocr", "Recognise subtitle clip text"), pipeline::Stage::ocr},
      {app.add_subcommand("regroup", "Merge adjacent clips of one subtitle"), pipeline::Stage::regroup},
      {app.add_subcommand("align", "Align sign clips with subtitle groups"), pipeline::Stage::align},
  };
  auto* all_cmd = app.add_subcommand("all", "segment-activity through align");

  auto* norm_cmd = app.add_subcommand("gloss-normalize", "Flatten raw gloss annotations");
  fs::path norm_in, norm_out, norm_registry, norm_split;
  std::string norm_mode = "train", norm_scope = "all";
  norm_cmd->add_option("--annotations", norm_in, "<sample_id>\\t<raw> file")->required();
  norm_cmd->add_option("--output", norm_out, "Normalised gloss file")->required();
  norm_cmd->add_option("--registry", norm_registry, "Registry dump to write");
  norm_cmd->add_option("--mode", norm_mode, "train or test")->check(CLI::IsMember({"train", "test"}));
  norm_cmd->add_option("--registry-scope", norm_scope, "all or train")
      ->check(CLI::IsMember({"all", "train"}));
  norm_cmd->add_option("--split", norm_split, "Split file, for a train-only registry");

  auto* canon_cmd = app.add_subcommand("gloss-canonicalize", "Replace homosigns by representatives");
  fs::path canon_in, canon_out, canon_registry;
  canon_cmd->add_option("--glosses", canon_in, "Normalised gloss file")->required();
  canon_cmd->add_option("--registry", canon_registry, "Registry dump")->required();
  canon_cmd->add_option("--output", canon_out, "Output gloss file")->required();

  auto* score_cmd = app.add_subcommand("score", "Score hypotheses against references");
  std::string metric, tokenization = "per-character", smoothing = "none";
  fs::path hyp_path, ref_path, score_registry, report_path;
  bool sentence = false, score_json = false;
  pipeline::ScoreOptions score_opts;
  score_cmd->add_option("metric", metric, "wer, bleu or rouge")
      ->required()
      ->check(CLI::IsMember({"wer", "bleu", "rouge"}));
  score_cmd->add_option("--hyp", hyp_path, "Hypothesis file")->required();
  score_cmd->add_option("--ref", ref_path, "Reference file")->required();
  score_cmd->add_option("--registry", score_registry, "Registry dump for WER canonicalisation");
  score_cmd->add_option("--tokenization", tokenization, "per-character or ascii-runs")
      ->check(CLI::IsMember({"per-character", "ascii-runs"}));
  score_cmd->add_option("--max-n", score_opts.max_n, "Highest BLEU order")->check(CLI::Range(1, 9));
  score_cmd->add_flag("--sentence", sentence, "Per-sample sentence BLEU");
  score_cmd->add_option("--smoothing", smoothing, "none, floor, add-one or exp")
      ->check(CLI::IsMember({"none", "floor", "add-one", "exp"}));
  score_cmd->add_option("--beta", score_opts.beta, "ROUGE-L recall weight");
  score_cmd->add_option("--report", report_path, "Also write the report as JSON lines");
  score_cmd->add_flag("--json", score_json, "Print JSON instead of a table");

  auto* split_cmd = app.add_subcommand("split", "Train/dev/test split without dev/test OOV glosses");
  fs::path split_manifest, split_out;
  split_cmd->add_option("--manifest", split_manifest, "Sample manifest")->required();
  split_cmd->add_option("--output", split_out, "Split file")->required();

  auto* stats_cmd = app.add_subcommand("stats", "Per-split corpus statistics");
  fs::path stats_manifest, stats_split;
  bool stats_as_json = false;
  stats_cmd->add_option("--manifest", stats_manifest, "Sample manifest")->required();
  stats_cmd->add_option("--split", stats_split, "Split file")->required();
  stats_cmd->add_flag("--json", stats_as_json, "Print JSON");

  auto* serve_cmd = app.add_subcommand("serve", "Annotation service");
  fs::path store_dir, seed_manifest;
  std::string host = "127.0.0.1";
  int port = 8080;
  bool read_only = false;
  serve_cmd->add_option("--store", store_dir, "Store directory")->required();
  serve_cmd->add_option("--seed-manifest", seed_manifest, "Create the store from this manifest");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port, 0 for any")->check(CLI::Range(0, 65535));
  serve_cmd->add_flag("--read-only", read_only, "Reject writes");

  auto* synth_cmd = app.add_subcommand("synth-episode", "Generate a synthetic episode");
  synth::SynthSpec spec;
  fs::path synth_out;
  bool no_noise = false;
  synth_cmd->add_option("--out", synth_out, "Episode directory")->required();
  synth_cmd->add_option("--signs", spec.signs, "Sign runs with subtitles");
  synth_cmd->add_option("--subtitles", spec.subtitles, "Subtitles");
  synth_cmd->add_option("--idle-signs", spec.idle_signs, "Sign runs without subtitles");
  synth_cmd->add_option("--blips", spec.blips, "Too-short activity runs");
  synth_cmd->add_option("--min-sign-seconds", spec.min_sign_seconds, "Shortest sign run");
  synth_cmd->add_option("--max-sign-seconds", spec.max_sign_seconds, "Longest sign run");
  synth_cmd->add_option("--width", spec.width, "Strip width");
  synth_cmd->add_option("--height", spec.height, "Strip height");
  synth_cmd->add_flag("--no-ocr-noise", no_noise, "One clean piece per subtitle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    cfg.merge_reference = merge_reference == "representative" ? MergeReference::representative
                                                              : MergeReference::last_member;
    if (!ratios_text.empty()) {
      double r[3];
      char tail;
      if (std::sscanf(ratios_text.c_str(), "%lf,%lf,%lf%c", &r[0], &r[1], &r[2], &tail) != 3)
        throw Error(ErrorKind::usage, "config field 'ratios' must be three comma-separated numbers");
      cfg.ratios = {r[0], r[1], r[2]};
    }
    cfg.validate();

    for (const auto& [cmd, stage] : stage_cmds)
      if (cmd->parsed()) {
        if (cfg.input.empty()) throw Error(ErrorKind::usage, "config field 'input' is required");
        if (cfg.work.empty()) throw Error(ErrorKind::usage, "config field 'work' is required");
        pipeline::run_stages(cfg, {stage});
      }
    if (all_cmd->parsed()) {
      if (cfg.input.empty()) throw Error(ErrorKind::usage, "config field 'input' is required");
      if (cfg.work.empty()) throw Error(ErrorKind::usage, "config field 'work' is required");
      pipeline::run_all(cfg);
    }

    if (norm_cmd->parsed()) {
      std::optional<corpus::SplitAssignment> split;
      if (!norm_split.empty()) split = corpus::read_split_file(norm_split);
      const auto result = pipeline::normalize_annotations(
          pipeline::read_tsv(norm_in), norm_mode == "test",
          norm_scope == "train" ? pipeline::RegistryScope::train : pipeline::RegistryScope::all,
          split ? &*split : nullptr);
      pipeline::write_tsv(norm_out, result.normalized);
      if (!norm_registry.empty()) {
        std::ostringstream dump;
        result.registry.dump(dump);
        write_file_atomic(norm_registry, dump.str());
      }
    }

    if (canon_cmd->parsed()) {
      std::ifstream in(canon_registry);
      if (!in) throw Error(ErrorKind::data, "missing input file " + canon_registry.string());
      const auto registry = gloss::HomosignRegistry::load(in);
      pipeline::write_tsv(canon_out,
                          pipeline::canonicalize_records(pipeline::read_tsv(canon_in), registry));
    }

    if (score_cmd->parsed()) {
      score_opts.kind = metric == "wer"    ? metrics::MetricKind::wer
                        : metric == "bleu" ? metrics::MetricKind::bleu
                                           : metrics::MetricKind::rouge_l;
      score_opts.tokenization = tokenization == "ascii-runs" ? metrics::CharTokenization::ascii_runs
                                                             : metrics::CharTokenization::per_character;
      score_opts.sentence_bleu = sentence;
      score_opts.smoothing = smoothing == "floor"     ? metrics::Smoothing::floor
                             : smoothing == "add-one" ? metrics::Smoothing::add_one
                             : smoothing == "exp"     ? metrics::Smoothing::exp
                                                      : metrics::Smoothing::none;
      std::optional<gloss::HomosignRegistry> registry;
      if (!score_registry.empty()) {
        std::ifstream in(score_registry);
        if (!in) throw Error(ErrorKind::data, "missing input file " + score_registry.string());
        registry = gloss::HomosignRegistry::load(in);
        score_opts.registry = &*registry;
      }
      const auto report =
          pipeline::score(pipeline::read_tsv(hyp_path), pipeline::read_tsv(ref_path), score_opts);
      std::vector<json> rows;
      for (const auto& s : report.per_sample) {
        json values = json::object();
        for (const auto& [k, v] : s.values) values[k] = v;
        rows.push_back({{"sample_id", s.sample_id}, {"scores", values}});
      }
      json corpus = json::object();
      for (const auto& [k, v] : report.corpus) corpus[k] = v;
      rows.push_back({{"corpus", corpus}});
      if (!report_path.empty()) write_jsonl(report_path, rows);
      if (score_json) {
        const json doc = {{"metric", metric},
                          {"samples", std::vector<json>(rows.begin(), rows.end() - 1)},
                          {"corpus", corpus}};
        std::cout << doc.dump(2) << '\n';
      } else {
        std::cout << pipeline::format_report(report);
      }
    }

    if (split_cmd->parsed()) {
      const auto samples = corpus::read_manifest(split_manifest);
      const auto a = corpus::make_split(samples, cfg.ratios, cfg.seed, cfg.max_attempts);
      corpus::write_split_file(split_out, samples, a);
      std::fprintf(stderr, "split: %zu samples, %.4f/%.4f/%.4f after %zu attempt(s)%s\n",
                   samples.size(), a.achieved.train, a.achieved.dev, a.achieved.test, a.attempts,
                   a.used_fallback ? ", OOV samples moved to train" : "");
    }

    if (stats_cmd->parsed()) {
      const auto samples = corpus::read_manifest(stats_manifest);
      const auto s = corpus::compute_stats(samples, corpus::read_split_file(stats_split));
      if (stats_as_json) {
        std::cout << json{{"train", stats_json(s.train)},
                          {"dev", stats_json(s.dev)},
                          {"test", stats_json(s.test)},
                          {"total", stats_json(s.overall)}}
                         .dump(2)
                  << '\n';
      } else {
        std::cout << stats_table(s);
      }
    }

    if (serve_cmd->parsed()) {
      if (!seed_manifest.empty() &&
          !fs::exists(store_dir / annotation::AnnotationStore::kSeedFile))
        annotation::AnnotationStore::init(store_dir, tasks_from_manifest(seed_manifest));
      auto store = annotation::AnnotationStore::open(store_dir, read_only);
      annotation::AnnotationService service(*store);
      const int bound = service.bind(host, port);
      std::fprintf(stderr, "serving %s on http://%s:%d\n", store_dir.c_str(), host.c_str(), bound);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.serve();
      g_service = nullptr;
    }

    if (synth_cmd->parsed()) {
      spec.seed = cfg.seed;
      spec.fps = cfg.fps;
      spec.ocr_noise = !no_noise;
      fs::path abs = fs::absolute(synth_out).lexically_normal();
      if (abs.filename().empty()) abs = abs.parent_path();
      synth::write_episode(synth_out, synth::synth_episode(spec, abs.filename().string()));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "slcorpus: %s error: %s\n", std::string(error_kind_name(e.kind())).c_str(),
                 e.what());
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "slcorpus: data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "slcorpus: data error: %s\n", e.what());
    return 2;
  }
  return 0;
}
