#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "slc/corpus.hpp"

// Corpus whose gloss frequencies follow a Zipf law, so the tail holds many
// rare glosses that make random splits leak OOVs.
inline std::vector<slc::corpus::SampleRecord> zipf_corpus(std::uint64_t seed, std::size_t samples,
                                                          std::size_t vocab = 400,
                                                          double exponent = 1.1) {
  std::mt19937_64 gen(seed);
  std::vector<double> weights(vocab);
  for (std::size_t k = 0; k < vocab; ++k) weights[k] = 1.0 / std::pow(static_cast<double>(k + 1), exponent);
  std::discrete_distribution<std::size_t> gloss(weights.begin(), weights.end());
  std::uniform_int_distribution<int> length(2, 9), frames(75, 375), ch(0x4E00, 0x4E00 + 300);
  std::vector<slc::corpus::SampleRecord> out;
  for (std::size_t i = 0; i < samples; ++i) {
    slc::corpus::SampleRecord r;
    r.sample_id = "s" + std::to_string(i);
    r.signer_id = "signer" + std::to_string(i % 6);
    r.episode_id = "ep" + std::to_string(i / 40);
    r.start_frame = 0;
    r.end_frame = frames(gen);
    for (int k = 0, n = length(gen); k < n; ++k) r.glosses.push_back("G" + std::to_string(gloss(gen)));
    for (int k = 0, n = length(gen) + 3; k < n; ++k) {
      const char32_t c = static_cast<char32_t>(ch(gen));
      r.text += static_cast<char>(0xE0 | (c >> 12));
      r.text += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      r.text += static_cast<char>(0x80 | (c & 0x3F));
    }
    out.push_back(std::move(r));
  }
  return out;
}
