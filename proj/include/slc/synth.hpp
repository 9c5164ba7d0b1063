#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slc/adapters.hpp"
#include "slc/signal.hpp"

namespace slc::synth {

// Synthetic episode: a subtitle strip showing random binary patterns, an
// activity score stream, a mock OCR table for every pattern, and the samples
// the pipeline should recover.
struct SynthSpec {
  std::uint64_t seed = 0;
  double fps = 25.0;
  int width = 96;
  int height = 16;
  std::size_t signs = 4;       // sign runs that carry subtitles
  std::size_t subtitles = 6;   // spread over those runs, at least one each
  std::size_t idle_signs = 1;  // sign runs without subtitles
  std::size_t blips = 1;       // activity runs shorter than min_sign_seconds
  double min_sign_seconds = 3.0;
  double max_sign_seconds = 12.0;
  // Splits subtitles into pieces that differ slightly on screen; later pieces
  // are misread by one character.
  bool ocr_noise = true;
};

struct TruthSample {
  Segment sign;
  std::vector<std::string> texts;
  std::string joined_text;

  friend bool operator==(const TruthSample&, const TruthSample&) = default;
};

struct SynthEpisode {
  FrameStream frames;
  ScoreStream scores;
  MockOcr ocr;
  std::vector<TruthSample> truth;
};

// Deterministic under spec.seed. Throws Error(usage) for an infeasible spec.
SynthEpisode synth_episode(const SynthSpec& spec, const std::string& episode_id);

// Writes frames.raw, scores.txt, ocr_table.tsv and truth.jsonl into dir.
void write_episode(const std::filesystem::path& dir, const SynthEpisode& episode);

std::vector<TruthSample> read_truth(const std::filesystem::path& path);

}  // namespace slc::synth
