#include "slc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "slc/error.hpp"
#include "slc/utf8.hpp"

namespace slc::metrics {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(std::span<const std::string> tokens, int n) {
  NgramCounts out;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i)
    ++out[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + len)];
  return out;
}

// Clipped matches and hypothesis n-gram total for one pair and order.
std::pair<std::size_t, std::size_t> clipped(std::span<const std::string> hyp,
                                            std::span<const std::string> ref, int n) {
  const NgramCounts h = ngrams(hyp, n), r = ngrams(ref, n);
  std::size_t matched = 0, total = 0;
  for (const auto& [gram, count] : h) {
    total += count;
    const auto it = r.find(gram);
    if (it != r.end()) matched += std::min(count, it->second);
  }
  return {matched, total};
}

bool is_ascii_alnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

}  // namespace

double wer(std::span<const std::string> hyp, std::span<const std::string> ref) {
  if (ref.empty()) throw Error(ErrorKind::data, "WER needs a non-empty reference");
  return 100.0 * static_cast<double>(levenshtein<std::string>(hyp, ref)) /
         static_cast<double>(ref.size());
}

double corpus_wer(std::span<const std::pair<Tokens, Tokens>> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::data, "WER needs a non-empty corpus");
  std::size_t edits = 0, ref_len = 0;
  for (const auto& [hyp, ref] : pairs) {
    if (ref.empty()) throw Error(ErrorKind::data, "WER needs non-empty references");
    edits += levenshtein<std::string>(hyp, ref);
    ref_len += ref.size();
  }
  return 100.0 * static_cast<double>(edits) / static_cast<double>(ref_len);
}

Tokens char_tokens(std::string_view text, CharTokenization mode) {
  const std::u32string cps = utf8::decode(text);
  Tokens out;
  for (std::size_t i = 0; i < cps.size();) {
    if (utf8::is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (mode == CharTokenization::ascii_runs && is_ascii_alnum(cps[i]))
      while (j < cps.size() && is_ascii_alnum(cps[j])) ++j;
    out.push_back(utf8::encode(std::u32string_view(cps).substr(i, j - i)));
    i = j;
  }
  return out;
}

BleuScore bleu(std::span<const Tokens> hyps, std::span<const Tokens> refs, int max_n) {
  if (hyps.size() != refs.size())
    throw Error(ErrorKind::data, "BLEU needs one reference per hypothesis");
  if (hyps.empty()) throw Error(ErrorKind::data, "BLEU needs a non-empty corpus");
  if (max_n < 1) throw Error(ErrorKind::usage, "BLEU order must be >= 1");

  BleuScore s;
  const auto orders = static_cast<std::size_t>(max_n);
  s.matches.assign(orders, 0);
  s.totals.assign(orders, 0);
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    s.hyp_length += hyps[k].size();
    s.ref_length += refs[k].size();
    for (int n = 1; n <= max_n; ++n) {
      const auto [m, t] = clipped(hyps[k], refs[k], n);
      s.matches[n - 1] += m;
      s.totals[n - 1] += t;
    }
  }
  s.brevity_penalty =
      s.hyp_length == 0 ? 0.0
      : s.hyp_length < s.ref_length
          ? std::exp(1.0 - static_cast<double>(s.ref_length) / static_cast<double>(s.hyp_length))
          : 1.0;
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < orders; ++n) {
    const double p = s.totals[n] == 0 ? 0.0
                                      : static_cast<double>(s.matches[n]) /
                                            static_cast<double>(s.totals[n]);
    s.precisions.push_back(p);
    if (p == 0.0) zero = true;
    if (!zero) log_sum += std::log(p);
    s.bleu.push_back(zero ? 0.0
                          : 100.0 * s.brevity_penalty *
                                std::exp(log_sum / static_cast<double>(n + 1)));
  }
  return s;
}

double sentence_bleu(std::span<const std::string> hyp, std::span<const std::string> ref,
                     int max_n, Smoothing smoothing) {
  if (max_n < 1) throw Error(ErrorKind::usage, "BLEU order must be >= 1");
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  double decay = 1.0;
  for (int n = 1; n <= max_n; ++n) {
    auto [m, t] = clipped(hyp, ref, n);
    double num = static_cast<double>(m), den = static_cast<double>(t);
    if (smoothing == Smoothing::add_one && n > 1) num += 1.0, den += 1.0;
    if (den == 0.0) return 0.0;
    if (num == 0.0) {
      switch (smoothing) {
        case Smoothing::floor: num = 0.1; break;
        case Smoothing::exp:
          decay *= 2.0;
          num = 1.0 / decay;
          break;
        default: return 0.0;
      }
    }
    log_sum += std::log(num / den);
  }
  const double bp =
      hyp.size() < ref.size()
          ? std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()))
          : 1.0;
  return 100.0 * bp * std::exp(log_sum / max_n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

double rouge_l_sample(std::span<const std::string> hyp, std::span<const std::string> ref,
                      double beta) {
  if (hyp.empty() || ref.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(hyp.size());
  const double r = lcs / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

double rouge_l(std::span<const Tokens> hyps, std::span<const Tokens> refs, double beta) {
  if (hyps.size() != refs.size())
    throw Error(ErrorKind::data, "ROUGE-L needs one reference per hypothesis");
  if (hyps.empty()) throw Error(ErrorKind::data, "ROUGE-L needs a non-empty corpus");
  double total = 0.0;
  for (std::size_t k = 0; k < hyps.size(); ++k) total += rouge_l_sample(hyps[k], refs[k], beta);
  return 100.0 * total / static_cast<double>(hyps.size());
}

}  // namespace slc::metrics
