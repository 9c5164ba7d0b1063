#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slc/signal.hpp"

namespace slc {

struct SubtitleClip {
  Segment segment;
  int width = 0;
  int height = 0;
  std::vector<float> mean_frame;  // per-pixel mean over the clip
  std::optional<std::string> text;
  std::optional<double> ocr_confidence;
};

// Temporally adjacent clips showing the same subtitle.
struct SubtitleGroup {
  std::vector<SubtitleClip> members;
  std::string representative_text;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;

  Segment span() const { return {start_frame, end_frame, SegmentKind::subtitle}; }
};

SubtitleClip average_clip(const FrameStream& stream, const Segment& segment);

// True iff the clip's mean intensity is below epsilon.
bool is_blank(const SubtitleClip& clip, double epsilon);

// Which text a candidate clip is compared against when deciding to merge.
enum class MergeReference {
  last_member,     // chain merging
  representative,  // current representative of the open group
};

struct RegroupOptions {
  std::size_t threshold = 3;  // merge iff distance < threshold
  MergeReference reference = MergeReference::last_member;
};

std::vector<SubtitleGroup> regroup(std::vector<SubtitleClip> clips,
                                   const RegroupOptions& options = {});

// Index of the member with minimum mean edit distance to the others,
// earliest on ties.
std::size_t representative_index(std::span<const std::string> texts);
std::string select_representative(std::span<const std::string> texts);

}  // namespace slc
