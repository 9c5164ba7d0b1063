#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slc/signal.hpp"

namespace slc::corpus {

struct SampleRecord {
  std::string sample_id;
  std::string signer_id;
  std::string episode_id;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  double fps = 25.0;
  std::vector<std::string> glosses;
  std::string text;

  double duration_seconds() const {
    return static_cast<double>(end_frame - start_frame) / fps;
  }
};

// Throws Error(data) unless the record has an id, a positive frame range
// and a duration within `bounds`.
void check_record(const SampleRecord& r, DurationBounds bounds = {});

// Manifest: one JSON object per line with the SampleRecord fields.
std::vector<SampleRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    std::span<const SampleRecord> samples);

enum class Split { train, dev, test };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.90;
  double dev = 0.05;
  double test = 0.05;
};

struct SplitAssignment {
  std::map<std::string, Split> split_of;
  std::uint64_t seed = 0;
  SplitRatios requested;
  SplitRatios achieved;
  std::size_t attempts = 0;   // partitions drawn
  bool used_fallback = false; // resampling exhausted; samples were moved
};

// Seeded random partition at the requested ratios, redrawn up to
// max_attempts times until no dev/test gloss is missing from train. When the
// attempts run out, the last partition is repaired: OOV-bearing dev/test
// samples move to train (greedy cover) and dev/test are refilled with train
// samples whose glosses all remain in train.
SplitAssignment make_split(std::span<const SampleRecord> samples,
                           SplitRatios ratios, std::uint64_t seed,
                           std::size_t max_attempts = 200);

// Split file: `<sample_id>\t<split>` per line, in manifest order.
void write_split_file(const std::filesystem::path& path,
                      std::span<const SampleRecord> samples,
                      const SplitAssignment& assignment);
SplitAssignment read_split_file(const std::filesystem::path& path);

struct SplitStats {
  double hours = 0.0;
  std::size_t samples = 0;
  std::size_t gloss_vocab = 0;
  std::size_t running_glosses = 0;
  std::optional<std::size_t> gloss_oovs;  // nullopt for train and overall
  std::size_t gloss_singletons = 0;
  std::size_t char_vocab = 0;
  std::size_t running_chars = 0;
  std::optional<std::size_t> char_oovs;
  std::size_t char_singletons = 0;

  friend bool operator==(const SplitStats&, const SplitStats&) = default;
};

struct CorpusStats {
  SplitStats train, dev, test, overall;
};

CorpusStats compute_stats(std::span<const SampleRecord> samples,
                          const SplitAssignment& assignment);

// Whitespace-free unicode scalar values of a subtitle text.
std::vector<std::string> text_characters(std::string_view text);

// Pose keypoints -----------------------------------------------------------

struct Keypoint {
  float x = 0.0f;
  float y = 0.0f;
  float confidence = 0.0f;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

inline constexpr std::size_t kWholeBodyPoints = 133;
inline constexpr std::size_t kKeypoints = 121;  // 68 face, 42 hands, 11 body
inline constexpr std::size_t kFacePoints = 68;
inline constexpr std::size_t kHandPoints = 42;
inline constexpr std::size_t kUpperBodyPoints = 11;

using KeypointFrame = std::array<Keypoint, kKeypoints>;

// COCO-WholeBody order in: 17 body, 6 feet, 68 face, 42 hands. Drops hips,
// knees, ankles (body 11-16) and the feet; out: face, hands, body 0-10.
KeypointFrame prune_keypoints(std::span<const Keypoint> wholebody);

// Zeroes the confidence of points outside [0,width) x [0,height).
void flag_out_of_bounds(KeypointFrame& frame, float width, float height);

struct KeypointSequence {
  std::string sample_id;
  std::vector<KeypointFrame> frames;
};

// Keypoint file, little-endian:
//   "SLKP" | u32 version (1) | u32 id_bytes | id (UTF-8) | u32 frame_count |
//   frame_count * 121 * (f32 x, f32 y, f32 confidence)
void write_keypoints(const std::filesystem::path& path, const KeypointSequence& seq);
KeypointSequence read_keypoints(const std::filesystem::path& path);

}  // namespace slc::corpus
