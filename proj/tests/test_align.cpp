#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slc/align.hpp"
#include "slc/error.hpp"

using namespace slc;

namespace {

std::vector<Segment> random_segments(std::mt19937& gen, std::size_t n, SegmentKind kind) {
  std::vector<Segment> out;
  std::int64_t t = gen() % 50;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t len = 1 + gen() % 300;
    out.push_back({t, t + len, kind});
    t += len + gen() % 100;
  }
  return out;
}

std::vector<std::int64_t> doubled_midpoints(const std::vector<Segment>& s) {
  std::vector<std::int64_t> out;
  for (const auto& x : s) out.push_back(x.start_frame + x.end_frame);
  return out;
}

SubtitleGroup group(std::int64_t start, std::int64_t end, std::string text) {
  SubtitleGroup g;
  g.start_frame = start;
  g.end_frame = end;
  g.representative_text = std::move(text);
  return g;
}

}  // namespace

TEST(Midpoint, Examples) {
  EXPECT_DOUBLE_EQ(midpoint({0, 50}, 25), 1.0);
  EXPECT_DOUBLE_EQ(midpoint({100, 200}, 25), 6.0);
  EXPECT_DOUBLE_EQ(midpoint({40, 60}, 25), midpoint({30, 70}, 25));
}

TEST(DtwAlign, SinglePair) {
  const std::vector<Segment> signs{{0, 100}}, subs{{50, 80, SegmentKind::subtitle}};
  const auto p = dtw_align(signs, subs, 25);
  EXPECT_EQ(p.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_DOUBLE_EQ(p.total_cost, std::abs(midpoint(signs[0], 25) - midpoint(subs[0], 25)));
}

TEST(DtwAlign, IdenticalMidpointsGiveDiagonal) {
  const std::vector<Segment> signs{{0, 10}, {20, 30}, {40, 50}};
  const std::vector<Segment> subs{{2, 8}, {22, 28}, {44, 46}};
  const auto p = dtw_align(signs, subs, 25);
  EXPECT_EQ(p.total_cost, 0.0);
  EXPECT_EQ(p.pairs.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(p.pairs[k], std::make_pair(k, k));
}

TEST(DtwAlign, EmptyOrUnorderedInputThrows) {
  const std::vector<Segment> one{{0, 10}}, none;
  EXPECT_THROW(dtw_align(none, one, 25), Error);
  EXPECT_THROW(dtw_align(one, none, 25), Error);
  const std::vector<Segment> unordered{{20, 30}, {0, 10}};
  EXPECT_THROW(dtw_align(unordered, one, 25), Error);
}

TEST(DtwAlign, TiesPreferDiagonalThenSubtitleStep) {
  // Every cell costs zero, so every path is optimal. Traced back from the
  // corner, each cell is entered by a diagonal step when one is optimal.
  const std::vector<Segment> signs{{0, 10}, {0, 10}};
  const std::vector<Segment> subs{{0, 10}, {0, 10}, {0, 10}};
  const auto p = dtw_align(signs, subs, 25);
  EXPECT_EQ(p.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {0, 1}, {1, 2}}));
}

TEST(DtwAlign, MatchesBruteForceAndIsValid) {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto signs = random_segments(gen, 1 + gen() % 6, SegmentKind::sign);
    const auto subs = random_segments(gen, 1 + gen() % 10, SegmentKind::subtitle);
    const auto p = dtw_align(signs, subs, 25);
    ASSERT_TRUE(is_valid_path(p, signs.size(), subs.size()));
    ASSERT_EQ(p.total_cost_half_frames,
              oracle::brute_force_dtw(doubled_midpoints(signs), doubled_midpoints(subs)));
    std::int64_t along = 0;
    for (auto [i, j] : p.pairs)
      along += std::llabs((signs[i].start_frame + signs[i].end_frame) - (subs[j].start_frame + subs[j].end_frame));
    ASSERT_EQ(along, p.total_cost_half_frames);
    ASSERT_DOUBLE_EQ(p.total_cost, static_cast<double>(p.total_cost_half_frames) / 50.0);
  }
}

TEST(DtwAlign, ShiftInvariant) {
  std::mt19937 gen(32);
  for (int trial = 0; trial < 200; ++trial) {
    auto signs = random_segments(gen, 1 + gen() % 6, SegmentKind::sign);
    auto subs = random_segments(gen, 1 + gen() % 8, SegmentKind::subtitle);
    const auto a = dtw_align(signs, subs, 25);
    const std::int64_t shift = gen() % 10000;
    for (auto& s : signs) s.start_frame += shift, s.end_frame += shift;
    for (auto& s : subs) s.start_frame += shift, s.end_frame += shift;
    const auto b = dtw_align(signs, subs, 25);
    ASSERT_EQ(a.pairs, b.pairs);
    ASSERT_EQ(a.total_cost_half_frames, b.total_cost_half_frames);
  }
}

TEST(IsValidPath, RejectsBadPaths) {
  AlignmentPath p;
  p.pairs = {{0, 0}, {1, 1}};
  EXPECT_TRUE(is_valid_path(p, 2, 2));
  EXPECT_FALSE(is_valid_path(p, 2, 3));
  p.pairs = {{0, 0}, {1, 2}};
  EXPECT_FALSE(is_valid_path(p, 2, 3));
  p.pairs = {{0, 1}, {1, 2}};
  EXPECT_FALSE(is_valid_path(p, 2, 3));
  p.pairs = {};
  EXPECT_FALSE(is_valid_path(p, 1, 1));
}

TEST(Materialize, ManyToOne) {
  const std::vector<Segment> signs{{0, 300}};
  const std::vector<SubtitleGroup> groups{group(10, 50, "天氣"), group(60, 120, "好"), group(130, 290, "嗎")};
  const auto p = dtw_align(signs, groups, 25);
  const auto samples = materialize_samples(p, signs, groups);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_EQ(samples[0].subtitles.size(), 3u);
  EXPECT_EQ(samples[0].joined_text, "天氣好嗎");
  EXPECT_EQ(materialize_samples(p, signs, groups, " ")[0].joined_text, "天氣 好 嗎");
}

TEST(Materialize, DiagonalKeepsEverySign) {
  const std::vector<Segment> signs{{0, 100}, {200, 300}};
  const std::vector<SubtitleGroup> groups{group(10, 90, "a"), group(210, 290, "b")};
  const auto samples = materialize_samples(dtw_align(signs, groups, 25), signs, groups);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].joined_text, "a");
  EXPECT_EQ(samples[1].joined_text, "b");
}

TEST(Materialize, SignsWithoutSubtitlesAreDropped) {
  const std::vector<Segment> signs{{0, 100}, {110, 120}, {400, 500}};
  const std::vector<SubtitleGroup> groups{group(10, 90, "a"), group(410, 490, "b")};
  const auto samples = materialize_samples(dtw_align(signs, groups, 25), signs, groups);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].sign, signs[0]);
  EXPECT_EQ(samples[1].sign, signs[2]);
}

TEST(Materialize, AssignmentIsTotalAndSingleValued) {
  std::mt19937 gen(33);
  for (int trial = 0; trial < 300; ++trial) {
    const auto signs = random_segments(gen, 1 + gen() % 6, SegmentKind::sign);
    const auto spans = random_segments(gen, 1 + gen() % 10, SegmentKind::subtitle);
    std::vector<SubtitleGroup> groups;
    for (std::size_t j = 0; j < spans.size(); ++j)
      groups.push_back(group(spans[j].start_frame, spans[j].end_frame, std::string(1, char('a' + j))));
    const auto p = dtw_align(signs, groups, 25);
    const auto owner = assign_subtitles(p, signs, spans);
    ASSERT_EQ(owner.size(), spans.size());
    for (std::size_t j = 0; j < spans.size(); ++j) {
      bool on_path = false;
      for (auto [i, jj] : p.pairs) on_path = on_path || (jj == j && i == owner[j]);
      ASSERT_TRUE(on_path);
    }
    const auto samples = materialize_samples(p, signs, groups);
    std::string all;
    std::size_t count = 0;
    for (const auto& s : samples) {
      ASSERT_FALSE(s.subtitles.empty());
      count += s.subtitles.size();
      all += s.joined_text;
    }
    ASSERT_EQ(count, groups.size());
    std::string want;
    for (const auto& g : groups) want += g.representative_text;
    ASSERT_EQ(all, want);
  }
}
