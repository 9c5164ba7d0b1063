#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace slc {

enum class SegmentKind { sign, subtitle };

// Half-open frame interval [start_frame, end_frame).
struct Segment {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  SegmentKind kind = SegmentKind::sign;

  std::int64_t length() const { return end_frame - start_frame; }
  double duration_seconds(double fps) const {
    return static_cast<double>(length()) / fps;
  }
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Ordered intensity planes for one fixed screen region, stored frame-major,
// each frame row-major, intensities in [0,1].
class FrameStream {
 public:
  FrameStream() = default;
  FrameStream(std::string episode_id, double fps, int width, int height,
              std::vector<float> pixels);

  const std::string& episode_id() const { return episode_id_; }
  double fps() const { return fps_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixels_per_frame() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::int64_t frame_count() const {
    return pixels_per_frame() == 0
               ? 0
               : static_cast<std::int64_t>(pixels_.size() / pixels_per_frame());
  }
  std::span<const float> frame(std::int64_t t) const {
    return {pixels_.data() + static_cast<std::size_t>(t) * pixels_per_frame(),
            pixels_per_frame()};
  }
  std::span<float> frame(std::int64_t t) {
    return {pixels_.data() + static_cast<std::size_t>(t) * pixels_per_frame(),
            pixels_per_frame()};
  }
  const std::vector<float>& pixels() const { return pixels_; }

 private:
  std::string episode_id_;
  double fps_ = 25.0;
  int width_ = 0;
  int height_ = 0;
  std::vector<float> pixels_;
};

// Per-frame signing-activity probabilities.
struct ScoreStream {
  std::string episode_id;
  double fps = 25.0;
  std::vector<float> scores;
};

struct DurationBounds {
  double min_seconds = 3.0;
  double max_seconds = 15.0;
};

// Maximal runs of frames whose score is >= threshold, ascending.
std::vector<Segment> binarize_and_segment(const ScoreStream& scores,
                                          float threshold);

// Keeps segments whose duration lies within [min, max] seconds inclusive.
std::vector<Segment> filter_by_duration(std::span<const Segment> segments,
                                        double fps, DurationBounds bounds);

// Mean absolute second temporal difference per frame; the first and last
// frames are 0. Requires at least 3 frames.
std::vector<double> temporal_laplacian(const FrameStream& stream);

// One index per contiguous run of measures >= threshold: the run's argmax,
// earliest on ties.
std::vector<std::int64_t> detect_transitions(std::span<const double> measures,
                                             double threshold);

// Partitions [0, frame_count) so that each transition index starts a segment.
std::vector<Segment> segments_from_transitions(
    std::span<const std::int64_t> transitions, std::int64_t frame_count,
    SegmentKind kind = SegmentKind::subtitle);

}  // namespace slc
