#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slc/edit_distance.hpp"

namespace slc::metrics {

using Tokens = std::vector<std::string>;

// Gloss error rate of one pair, in percent. Throws on an empty reference.
double wer(std::span<const std::string> hyp, std::span<const std::string> ref);

// Pooled edits over pooled reference length, in percent.
double corpus_wer(std::span<const std::pair<Tokens, Tokens>> pairs);

enum class CharTokenization {
  per_character,  // every unicode scalar value is a token
  ascii_runs,     // runs of ASCII letters/digits stay whole: "11宗" -> 11, 宗
};

// Whitespace is dropped in both modes.
Tokens char_tokens(std::string_view text,
                   CharTokenization mode = CharTokenization::per_character);

struct BleuScore {
  std::vector<double> bleu;        // BLEU-1..max_n, 0..100
  std::vector<double> precisions;  // modified n-gram precisions, 0..1
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
};

// Corpus-level BLEU with clipped counts, one reference per hypothesis and no
// smoothing.
BleuScore bleu(std::span<const Tokens> hyps, std::span<const Tokens> refs,
               int max_n = 4);

enum class Smoothing {
  none,
  floor,    // zero match counts become 0.1
  add_one,  // +1 to matches and totals for n >= 2
  exp,      // zero counts get 1 / (2^k * total), k = 1, 2, ...
};

// BLEU-max_n of a single pair, 0..100.
double sentence_bleu(std::span<const std::string> hyp,
                     std::span<const std::string> ref, int max_n = 4,
                     Smoothing smoothing = Smoothing::none);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

// LCS F-measure of one pair in [0,1]; 0 for an empty hypothesis.
double rouge_l_sample(std::span<const std::string> hyp,
                      std::span<const std::string> ref, double beta = 1.0);

// Mean per-sample F-measure, 0..100.
double rouge_l(std::span<const Tokens> hyps, std::span<const Tokens> refs,
               double beta = 1.0);

enum class MetricKind { wer, bleu, rouge_l };

struct SampleScore {
  std::string sample_id;
  std::vector<std::pair<std::string, double>> values;
};

struct ScoreReport {
  MetricKind kind = MetricKind::wer;
  std::vector<SampleScore> per_sample;
  std::vector<std::pair<std::string, double>> corpus;
};

}  // namespace slc::metrics
