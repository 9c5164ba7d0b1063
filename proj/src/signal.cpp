#include "slc/signal.hpp"

#include <cmath>
#include <utility>

#include "slc/error.hpp"
#include "slc/kernels.hpp"

namespace slc {

FrameStream::FrameStream(std::string episode_id, double fps, int width,
                         int height, std::vector<float> pixels)
    : episode_id_(std::move(episode_id)),
      fps_(fps),
      width_(width),
      height_(height),
      pixels_(std::move(pixels)) {
  if (!(fps > 0.0)) throw Error(ErrorKind::data, "frame stream fps must be > 0");
  if (width <= 0 || height <= 0)
    throw Error(ErrorKind::data, "frame stream dimensions must be positive");
  if (pixels_.size() % pixels_per_frame() != 0)
    throw Error(ErrorKind::data,
                "frame stream pixel count is not a multiple of width*height");
  for (float v : pixels_)
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error(ErrorKind::data, "frame intensity outside [0,1]");
}

std::vector<Segment> binarize_and_segment(const ScoreStream& scores,
                                          float threshold) {
  const auto& s = scores.scores;
  std::vector<std::uint8_t> mask(s.size());
  kernels::active().threshold_mask(s.data(), threshold, mask.data(), s.size());

  std::vector<Segment> out;
  std::size_t t = 0;
  while (t < mask.size()) {
    if (!mask[t]) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < mask.size() && mask[t]) ++t;
    out.push_back({static_cast<std::int64_t>(start), static_cast<std::int64_t>(t),
                   SegmentKind::sign});
  }
  return out;
}

std::vector<Segment> filter_by_duration(std::span<const Segment> segments,
                                        double fps, DurationBounds bounds) {
  std::vector<Segment> out;
  for (const Segment& seg : segments) {
    const double d = seg.duration_seconds(fps);
    if (d >= bounds.min_seconds && d <= bounds.max_seconds) out.push_back(seg);
  }
  return out;
}

std::vector<double> temporal_laplacian(const FrameStream& stream) {
  const std::int64_t n = stream.frame_count();
  if (n < 3) throw Error(ErrorKind::data, "stream too short");
  const auto& k = kernels::active();
  const std::size_t px = stream.pixels_per_frame();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t t = 1; t + 1 < n; ++t) {
    const double total =
        k.abs_second_diff_sum(stream.frame(t - 1).data(), stream.frame(t).data(),
                              stream.frame(t + 1).data(), px);
    out[static_cast<std::size_t>(t)] = total / static_cast<double>(px);
  }
  return out;
}

std::vector<std::int64_t> detect_transitions(std::span<const double> measures,
                                             double threshold) {
  std::vector<std::int64_t> out;
  std::size_t t = 0;
  while (t < measures.size()) {
    if (!(measures[t] >= threshold)) {
      ++t;
      continue;
    }
    std::size_t best = t;
    for (; t < measures.size() && measures[t] >= threshold; ++t)
      if (measures[t] > measures[best]) best = t;
    out.push_back(static_cast<std::int64_t>(best));
  }
  return out;
}

std::vector<Segment> segments_from_transitions(
    std::span<const std::int64_t> transitions, std::int64_t frame_count,
    SegmentKind kind) {
  std::vector<Segment> out;
  if (frame_count <= 0) return out;
  std::int64_t start = 0;
  for (std::int64_t cut : transitions) {
    if (cut <= start || cut >= frame_count) continue;
    out.push_back({start, cut, kind});
    start = cut;
  }
  out.push_back({start, frame_count, kind});
  return out;
}

}  // namespace slc
