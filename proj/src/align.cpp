#include "slc/align.hpp"

#include <algorithm>
#include <limits>

#include "slc/error.hpp"

namespace slc {
namespace {

std::int64_t twice_mid(const Segment& s) { return s.start_frame + s.end_frame; }

std::int64_t local_cost(const Segment& a, const Segment& b) {
  const std::int64_t d = twice_mid(a) - twice_mid(b);
  return d < 0 ? -d : d;
}

void check_ordered(std::span<const Segment> segs, const char* what) {
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (segs[i].start_frame < segs[i - 1].start_frame)
      throw Error(ErrorKind::data, std::string(what) + " are not temporally ordered");
}

std::vector<Segment> spans_of(std::span<const SubtitleGroup> groups) {
  std::vector<Segment> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.span());
  return out;
}

}  // namespace

double midpoint(const Segment& segment, double fps) {
  return static_cast<double>(segment.start_frame + segment.end_frame) / 2.0 / fps;
}

AlignmentPath dtw_align(std::span<const Segment> signs,
                        std::span<const Segment> subtitles, double fps) {
  if (signs.empty() || subtitles.empty())
    throw Error(ErrorKind::data, "dtw_align needs at least one sign clip and one subtitle");
  check_ordered(signs, "sign clips");
  check_ordered(subtitles, "subtitle groups");

  const std::size_t rows = signs.size(), cols = subtitles.size();
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> acc(rows * cols, inf);
  auto at = [&](std::size_t i, std::size_t j) -> std::int64_t& { return acc[i * cols + j]; };

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      std::int64_t best = 0;
      if (i > 0 || j > 0) {
        best = inf;
        if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
        if (j > 0) best = std::min(best, at(i, j - 1));
        if (i > 0) best = std::min(best, at(i - 1, j));
      }
      at(i, j) = best + local_cost(signs[i], subtitles[j]);
    }
  }

  AlignmentPath path;
  path.total_cost_half_frames = at(rows - 1, cols - 1);
  path.total_cost = static_cast<double>(path.total_cost_half_frames) / (2.0 * fps);

  // Backtrack; among equal predecessors prefer the diagonal step, then the
  // step that advanced the subtitle index, then the one that advanced the sign.
  std::size_t i = rows - 1, j = cols - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    std::size_t ni = i, nj = j;
    std::int64_t best = inf;
    if (i > 0 && j > 0) best = at(i - 1, j - 1), ni = i - 1, nj = j - 1;
    if (j > 0 && at(i, j - 1) < best) best = at(i, j - 1), ni = i, nj = j - 1;
    if (i > 0 && at(i - 1, j) < best) best = at(i - 1, j), ni = i - 1, nj = j;
    i = ni, j = nj;
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

AlignmentPath dtw_align(std::span<const Segment> signs,
                        std::span<const SubtitleGroup> subtitles, double fps) {
  const auto spans = spans_of(subtitles);
  return dtw_align(signs, spans, fps);
}

bool is_valid_path(const AlignmentPath& path, std::size_t rows, std::size_t cols) {
  if (path.pairs.empty() || rows == 0 || cols == 0) return false;
  if (path.pairs.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (path.pairs.back() != std::pair<std::size_t, std::size_t>{rows - 1, cols - 1})
    return false;
  for (std::size_t k = 1; k < path.pairs.size(); ++k) {
    const auto [pi, pj] = path.pairs[k - 1];
    const auto [ci, cj] = path.pairs[k];
    const std::size_t di = ci - pi, dj = cj - pj;
    if (ci < pi || cj < pj || di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

std::vector<std::size_t> assign_subtitles(const AlignmentPath& path,
                                          std::span<const Segment> signs,
                                          std::span<const Segment> subtitles) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(subtitles.size(), none);
  for (const auto& [i, j] : path.pairs) {
    if (i >= signs.size() || j >= subtitles.size())
      throw Error(ErrorKind::data, "alignment path does not match the inputs");
    // Pairs arrive in ascending sign order per column, so strict < keeps the
    // earlier sign on ties.
    if (owner[j] == none ||
        local_cost(signs[i], subtitles[j]) < local_cost(signs[owner[j]], subtitles[j]))
      owner[j] = i;
  }
  for (std::size_t o : owner)
    if (o == none) throw Error(ErrorKind::data, "alignment path skips a subtitle");
  return owner;
}

std::vector<AlignedSample> materialize_samples(
    const AlignmentPath& path, std::span<const Segment> signs,
    std::span<const SubtitleGroup> subtitles, std::string_view separator) {
  const auto spans = spans_of(subtitles);
  const auto owner = assign_subtitles(path, signs, spans);
  std::vector<AlignedSample> out;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    AlignedSample sample;
    sample.sign = signs[i];
    for (std::size_t j = 0; j < subtitles.size(); ++j) {
      if (owner[j] != i) continue;
      if (!sample.subtitles.empty()) sample.joined_text += separator;
      sample.joined_text += subtitles[j].representative_text;
      sample.subtitles.push_back(subtitles[j]);
    }
    if (!sample.subtitles.empty()) out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace slc
