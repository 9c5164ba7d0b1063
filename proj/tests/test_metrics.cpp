#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slc/error.hpp"
#include "slc/metrics.hpp"

using namespace slc::metrics;

namespace {

const Tokens kRef{"昨天", "溫度", "二", "十", "有", "濕", "百分比", "七", "六"};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

Tokens random_tokens(std::mt19937& gen, std::size_t max_len, int alphabet) {
  Tokens t(gen() % (max_len + 1));
  for (auto& s : t) s = std::string(1, static_cast<char>('a' + gen() % alphabet));
  return t;
}

}  // namespace

TEST(Wer, GlossFixtures) {
  EXPECT_EQ(round2(wer(Tokens{"以前", "溫度", "小", "有", "濕", "百分比", "七", "六"}, kRef)), 33.33);
  EXPECT_EQ(round2(wer(Tokens{"溫度", "十", "濕", "百分比", "七", "九", "六"}, kRef)), 44.44);
  EXPECT_EQ(round2(wer(Tokens{"溫度", "二", "十", "濕", "百分比", "七", "六"}, kRef)), 22.22);
}

TEST(Wer, EmptyReferenceIsAnError) {
  EXPECT_THROW(wer(Tokens{"a"}, Tokens{}), slc::Error);
  EXPECT_EQ(wer(Tokens{}, Tokens{"a", "b"}), 100.0);
}

TEST(Wer, IdentityAndRenamingInvariance) {
  std::mt19937 gen(51);
  for (int trial = 0; trial < 300; ++trial) {
    auto h = random_tokens(gen, 8, 4), r = random_tokens(gen, 8, 4);
    if (r.empty()) r.push_back("a");
    ASSERT_EQ(wer(r, r), 0.0);
    auto rename = [](Tokens t) {
      for (auto& s : t) s = "w" + s + s;
      return t;
    };
    ASSERT_DOUBLE_EQ(wer(h, r), wer(rename(h), rename(r)));
  }
}

TEST(CorpusWer, MicroAverage) {
  const std::vector<std::pair<Tokens, Tokens>> one{{{"a", "x"}, {"a", "b"}}};
  EXPECT_DOUBLE_EQ(corpus_wer(one), wer(one[0].first, one[0].second));
  // 1 edit over 2 reference tokens plus 1 edit over 4 gives 2/6.
  const std::vector<std::pair<Tokens, Tokens>> two{{{"a", "x"}, {"a", "b"}},
                                                   {{"a", "b", "c"}, {"a", "b", "c", "d"}}};
  EXPECT_DOUBLE_EQ(corpus_wer(two), 100.0 * 2.0 / 6.0);
  const std::vector<std::pair<Tokens, Tokens>> same{{{"a"}, {"a"}}, {{"b", "c"}, {"b", "c"}}};
  EXPECT_EQ(corpus_wer(same), 0.0);
  EXPECT_THROW(corpus_wer(std::vector<std::pair<Tokens, Tokens>>{}), slc::Error);
}

TEST(CharTokens, Modes) {
  EXPECT_EQ(char_tokens("11宗 ab"), (Tokens{"1", "1", "宗", "a", "b"}));
  EXPECT_EQ(char_tokens("11宗 ab", CharTokenization::ascii_runs), (Tokens{"11", "宗", "ab"}));
  EXPECT_EQ(char_tokens("天　氣"), (Tokens{"天", "氣"}));
}

TEST(Bleu, PerfectAndDisjoint) {
  const std::vector<Tokens> h{char_tokens("今日天氣很好"), char_tokens("明天會下雨嗎")};
  const auto same = bleu(h, h);
  for (double b : same.bleu) EXPECT_DOUBLE_EQ(b, 100.0);
  const std::vector<Tokens> other{char_tokens("甲乙丙丁戊己"), char_tokens("庚辛壬癸子丑")};
  EXPECT_EQ(bleu(other, h).bleu[0], 0.0);
  EXPECT_THROW(bleu(std::vector<Tokens>{}, std::vector<Tokens>{}), slc::Error);
}

TEST(Bleu, MatchesNgramOracleOnMicroCorpus) {
  const std::vector<Tokens> h{char_tokens("今天天氣好好"), char_tokens("溫度二十度")};
  const std::vector<Tokens> r{char_tokens("今天天氣很好"), char_tokens("溫度是二十五度")};
  const auto got = bleu(h, r, 2);
  EXPECT_NEAR(got.bleu[0], oracle::bleu(h, r, 1), 1e-9);
  EXPECT_NEAR(got.bleu[1], oracle::bleu(h, r, 2), 1e-9);
  // Hand count: unigrams 5/6 + 5/5 clipped, bigrams 3/5 + 2/4.
  EXPECT_EQ(got.matches[0], 10u);
  EXPECT_EQ(got.totals[0], 11u);
  EXPECT_EQ(got.matches[1], 5u);
  EXPECT_EQ(got.totals[1], 9u);
}

TEST(Bleu, MatchesOracleOnRandomCorpora) {
  std::mt19937 gen(52);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Tokens> h, r;
    for (int k = 0, n = 1 + gen() % 4; k < n; ++k) {
      h.push_back(random_tokens(gen, 10, 3));
      r.push_back(random_tokens(gen, 10, 3));
      if (h.back().empty()) h.back().push_back("a");
    }
    const auto got = bleu(h, r, 4);
    for (int n = 1; n <= 4; ++n) ASSERT_NEAR(got.bleu[n - 1], oracle::bleu(h, r, n), 1e-9);
    auto h2 = h, r2 = r;
    std::reverse(h2.begin(), h2.end());
    std::reverse(r2.begin(), r2.end());
    ASSERT_EQ(bleu(h2, r2, 4).bleu, got.bleu);
  }
}

TEST(Bleu, ShortHypothesisContributesNoHigherOrderCounts) {
  const std::vector<Tokens> h{{"a"}}, r{{"a", "b", "c"}};
  const auto got = bleu(h, r, 2);
  EXPECT_EQ(got.totals[1], 0u);
  EXPECT_EQ(got.bleu[1], 0.0);
  EXPECT_GT(got.bleu[0], 0.0);
  EXPECT_NEAR(got.brevity_penalty, std::exp(1.0 - 3.0), 1e-12);
}

TEST(SentenceBleu, TranslationExamples) {
  // Sentence BLEU-4 over single characters, no smoothing.
  const auto ref = char_tokens("而輸入個案有一宗是一名印度海員");
  EXPECT_EQ(round2(sentence_bleu(char_tokens("至於輸入個案有11宗包括印度海員"), ref)), 39.38);
  EXPECT_EQ(round2(sentence_bleu(char_tokens("至於輸入個案有一名印度海員"), ref)), 63.86);
}

TEST(SentenceBleu, SmoothingOnlyLiftsZeroCounts) {
  const Tokens h{"a", "b", "x", "y"}, r{"a", "b", "c", "d"};
  EXPECT_EQ(sentence_bleu(h, r, 4, Smoothing::none), 0.0);
  for (auto s : {Smoothing::floor, Smoothing::add_one, Smoothing::exp}) EXPECT_GT(sentence_bleu(h, r, 4, s), 0.0);
  EXPECT_DOUBLE_EQ(sentence_bleu(r, r, 4, Smoothing::exp), 100.0);
}

TEST(RougeL, Examples) {
  const std::vector<Tokens> h{char_tokens("AB")}, r{char_tokens("ABC")};
  EXPECT_NEAR(rouge_l(h, r), 80.0, 1e-12);
  EXPECT_DOUBLE_EQ(rouge_l(r, r), 100.0);
  const std::vector<Tokens> d{char_tokens("XYZ")};
  EXPECT_EQ(rouge_l(d, r), 0.0);
  EXPECT_EQ(rouge_l_sample(Tokens{}, Tokens{"a"}), 0.0);
  EXPECT_EQ(lcs_length(char_tokens("ABCBDAB"), char_tokens("BDCABA")), 4u);
}

TEST(RougeL, RenamingInvariance) {
  std::mt19937 gen(53);
  for (int trial = 0; trial < 200; ++trial) {
    auto h = random_tokens(gen, 8, 4), r = random_tokens(gen, 8, 4);
    auto rename = [](Tokens t) {
      for (auto& s : t) s = "z" + s;
      return t;
    };
    ASSERT_DOUBLE_EQ(rouge_l_sample(h, r), rouge_l_sample(rename(h), rename(r)));
  }
}
