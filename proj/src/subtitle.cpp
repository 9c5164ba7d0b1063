#include "slc/subtitle.hpp"

#include <limits>

#include "slc/edit_distance.hpp"
#include "slc/error.hpp"
#include "slc/kernels.hpp"
#include "slc/utf8.hpp"

namespace slc {

SubtitleClip average_clip(const FrameStream& stream, const Segment& segment) {
  if (segment.start_frame < 0 || segment.end_frame > stream.frame_count() ||
      segment.start_frame >= segment.end_frame)
    throw Error(ErrorKind::data,
                "segment [" + std::to_string(segment.start_frame) + ", " +
                    std::to_string(segment.end_frame) + ") outside stream of " +
                    std::to_string(stream.frame_count()) + " frames");
  const std::size_t px = stream.pixels_per_frame();
  std::vector<double> acc(px, 0.0);
  const auto& k = kernels::active();
  for (std::int64_t t = segment.start_frame; t < segment.end_frame; ++t)
    k.accumulate(acc.data(), stream.frame(t).data(), px);

  SubtitleClip clip;
  clip.segment = segment;
  clip.width = stream.width();
  clip.height = stream.height();
  clip.mean_frame.resize(px);
  const double n = static_cast<double>(segment.length());
  for (std::size_t p = 0; p < px; ++p)
    clip.mean_frame[p] = static_cast<float>(acc[p] / n);
  return clip;
}

bool is_blank(const SubtitleClip& clip, double epsilon) {
  if (clip.mean_frame.empty()) return true;
  const double mean = kernels::sum(clip.mean_frame) /
                      static_cast<double>(clip.mean_frame.size());
  return mean < epsilon;
}

std::size_t representative_index(std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorKind::data, "empty subtitle group");
  std::vector<std::u32string> decoded;
  decoded.reserve(texts.size());
  for (const auto& t : texts) decoded.push_back(utf8::decode(t));
  std::size_t best = 0;
  std::size_t best_total = std::numeric_limits<std::size_t>::max();
  // Mean over the same n-1 peers for every member, so totals order equally.
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    std::size_t total = 0;
    for (std::size_t j = 0; j < decoded.size(); ++j)
      if (i != j) total += levenshtein<char32_t>(decoded[i], decoded[j]);
    if (total < best_total) {
      best_total = total;
      best = i;
    }
  }
  return best;
}

std::string select_representative(std::span<const std::string> texts) {
  return texts[representative_index(texts)];
}

namespace {

SubtitleGroup close_group(std::vector<SubtitleClip> members) {
  std::vector<std::string> texts;
  texts.reserve(members.size());
  for (const auto& m : members) texts.push_back(*m.text);
  SubtitleGroup g;
  g.representative_text = texts[representative_index(texts)];
  g.start_frame = members.front().segment.start_frame;
  g.end_frame = members.back().segment.end_frame;
  g.members = std::move(members);
  return g;
}

}  // namespace

std::vector<SubtitleGroup> regroup(std::vector<SubtitleClip> clips,
                                   const RegroupOptions& options) {
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!clips[i].text)
      throw Error(ErrorKind::data, "subtitle clip " + std::to_string(i) +
                                       " has no text; run OCR first");
    if (i > 0 && clips[i].segment.start_frame < clips[i - 1].segment.start_frame)
      throw Error(ErrorKind::data, "subtitle clips are not temporally ordered");
  }
  std::vector<SubtitleGroup> out;
  std::vector<SubtitleClip> open;
  std::vector<std::string> open_texts;
  for (auto& clip : clips) {
    if (!open.empty()) {
      const std::string& reference =
          options.reference == MergeReference::last_member
              ? open_texts.back()
              : open_texts[representative_index(open_texts)];
      if (edit_distance(*clip.text, reference) >= options.threshold) {
        out.push_back(close_group(std::move(open)));
        open.clear();
        open_texts.clear();
      }
    }
    open_texts.push_back(*clip.text);
    open.push_back(std::move(clip));
  }
  if (!open.empty()) out.push_back(close_group(std::move(open)));
  return out;
}

}  // namespace slc
