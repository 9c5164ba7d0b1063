#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slc/signal.hpp"
#include "slc/subtitle.hpp"

namespace slc {

// Temporal midpoint in seconds.
double midpoint(const Segment& segment, double fps);

// Monotonic warping path between sign clips (rows) and subtitle groups
// (columns). Local costs are midpoint distances; they are accumulated exactly
// in half-frame units (|(s_i + e_i) - (s_j + e_j)|) and reported in seconds.
struct AlignmentPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::int64_t total_cost_half_frames = 0;
  double total_cost = 0.0;  // seconds
};

AlignmentPath dtw_align(std::span<const Segment> signs,
                        std::span<const Segment> subtitles, double fps);
AlignmentPath dtw_align(std::span<const Segment> signs,
                        std::span<const SubtitleGroup> subtitles, double fps);

// Path validity: starts at (0,0), ends at (rows-1, cols-1), each step is
// (+1,+1), (0,+1) or (+1,0).
bool is_valid_path(const AlignmentPath& path, std::size_t rows, std::size_t cols);

struct AlignedSample {
  Segment sign;
  std::vector<SubtitleGroup> subtitles;
  std::string joined_text;
};

// For each subtitle column, the sign row it is assigned to: among the rows the
// path matches it with, the nearest midpoint wins (earlier sign on ties).
std::vector<std::size_t> assign_subtitles(const AlignmentPath& path,
                                          std::span<const Segment> signs,
                                          std::span<const Segment> subtitles);

std::vector<AlignedSample> materialize_samples(
    const AlignmentPath& path, std::span<const Segment> signs,
    std::span<const SubtitleGroup> subtitles, std::string_view separator = "");

}  // namespace slc
