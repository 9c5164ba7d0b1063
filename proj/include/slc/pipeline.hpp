#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "slc/adapters.hpp"
#include "slc/corpus.hpp"
#include "slc/gloss.hpp"
#include "slc/metrics.hpp"
#include "slc/signal.hpp"
#include "slc/subtitle.hpp"

namespace slc::pipeline {

struct PipelineConfig {
  double fps = 25.0;
  double activity_threshold = 0.5;
  DurationBounds duration;
  double laplacian_threshold = 0.02;
  double blank_epsilon = 0.02;
  std::size_t regroup_threshold = 3;
  MergeReference merge_reference = MergeReference::last_member;
  std::string dtw_tie = "diagonal-first";  // the only supported policy
  std::string joiner;                      // between joined subtitle texts
  corpus::SplitRatios ratios;
  std::uint64_t seed = 0;
  std::size_t max_attempts = 200;
  std::string cleaner = "passthrough";  // passthrough | command
  std::string cleaner_command;
  OcrConfig ocr;  // empty mock endpoint: <episode>/ocr_table.tsv
  std::size_t workers = 1;
  std::filesystem::path input;  // one episode directory, or a directory of them
  std::filesystem::path work;   // stage artifacts

  // Throws Error(usage) naming the offending field.
  void validate() const;
};

// Episode inputs: scores.txt plus frames.raw or a frames/ image directory.
struct Episode {
  std::string id;
  std::filesystem::path dir;
};

std::vector<Episode> discover_episodes(const std::filesystem::path& input);

// Per-episode artifacts under <work>/<episode>/.
inline constexpr const char* kSignsFile = "signs.jsonl";
inline constexpr const char* kClipsFile = "clips.jsonl";
inline constexpr const char* kClipDir = "clips";
inline constexpr const char* kOcrFile = "ocr.jsonl";
inline constexpr const char* kGroupsFile = "groups.jsonl";
inline constexpr const char* kAlignedFile = "aligned.jsonl";

std::filesystem::path episode_work_dir(const PipelineConfig& config,
                                       const Episode& episode);

void segment_activity(const PipelineConfig& config, const Episode& episode);
void subtitle_clips(const PipelineConfig& config, const Episode& episode);
void ocr(const PipelineConfig& config, const Episode& episode,
         const OcrAdapter* shared_adapter = nullptr);
void regroup_stage(const PipelineConfig& config, const Episode& episode);
void align(const PipelineConfig& config, const Episode& episode);

enum class Stage { segment_activity, subtitle_clips, ocr, regroup, align };

// Runs `stages` in order for every episode, up to config.workers episodes at
// a time, then writes <work>/aligned.jsonl when align was among them. The
// first failure (in episode order) is rethrown.
void run_stages(const PipelineConfig& config, const std::vector<Stage>& stages);
void run_all(const PipelineConfig& config);

// Concatenates per-episode aligned manifests in episode order.
void write_combined_manifest(const PipelineConfig& config,
                             const std::vector<Episode>& episodes);

// `<sample_id>\t<payload>` files used for raw annotations, normalised
// glosses and scoring inputs.
using TsvRecords = std::vector<std::pair<std::string, std::string>>;
TsvRecords read_tsv(const std::filesystem::path& path);
void write_tsv(const std::filesystem::path& path, const TsvRecords& records);

std::vector<std::string> split_glosses(std::string_view line);
std::string join_glosses(const std::vector<std::string>& glosses);

enum class RegistryScope { all, train };

struct NormalizeResult {
  TsvRecords normalized;
  gloss::HomosignRegistry registry;
};

// Parses every raw annotation, builds the registry from the homosign groups
// of the annotations in scope, and flattens each annotation. Train mode uses
// each group's own representative; test mode uses the registry.
NormalizeResult normalize_annotations(const TsvRecords& raw, bool test_mode,
                                      RegistryScope scope = RegistryScope::all,
                                      const corpus::SplitAssignment* split = nullptr);

TsvRecords canonicalize_records(const TsvRecords& normalized,
                                const gloss::HomosignRegistry& registry);

struct ScoreOptions {
  metrics::MetricKind kind = metrics::MetricKind::wer;
  metrics::CharTokenization tokenization = metrics::CharTokenization::per_character;
  int max_n = 4;
  bool sentence_bleu = false;
  metrics::Smoothing smoothing = metrics::Smoothing::none;
  double beta = 1.0;
  const gloss::HomosignRegistry* registry = nullptr;  // WER only
};

// Pairs hypotheses with references by sample id; every reference needs a
// hypothesis (missing ones are a data error), extra hypotheses are ignored.
metrics::ScoreReport score(const TsvRecords& hyps, const TsvRecords& refs,
                           const ScoreOptions& options);
std::string format_report(const metrics::ScoreReport& report);

}  // namespace slc::pipeline
