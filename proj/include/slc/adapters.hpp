#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "slc/frame_io.hpp"
#include "slc/signal.hpp"
#include "slc/subtitle.hpp"

namespace slc {

struct OcrResult {
  std::string text;
  double confidence = 0.0;
};

// One request per image. Implementations must be safe for concurrent use.
class OcrAdapter {
 public:
  virtual ~OcrAdapter() = default;
  virtual OcrResult recognize(const GrayImage& image) const = 0;
};

// Key of an image in a mock OCR table: FNV-1a 64 over the dimensions and the
// ink mask (pixel >= 128), as 16 hex digits. Faint ghosting from a boundary
// frame does not change the key.
std::string image_digest(const GrayImage& image);

// Offline backend: digest -> (text, confidence). Unknown images are a
// protocol error.
class MockOcr final : public OcrAdapter {
 public:
  MockOcr() = default;
  explicit MockOcr(std::map<std::string, OcrResult> table)
      : table_(std::move(table)) {}

  // Table file: `<digest>\t<confidence>\t<text>` per line.
  static MockOcr load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void add(std::string digest, OcrResult result) {
    table_[std::move(digest)] = std::move(result);
  }
  const std::map<std::string, OcrResult>& table() const { return table_; }

  OcrResult recognize(const GrayImage& image) const override;

 private:
  std::map<std::string, OcrResult> table_;
};

// Runs `<command> <image.pgm>` and reads `<confidence>\t<text>` from the
// first line of its standard output.
class CommandOcr final : public OcrAdapter {
 public:
  explicit CommandOcr(std::string command) : command_(std::move(command)) {}
  OcrResult recognize(const GrayImage& image) const override;

 private:
  std::string command_;
};

// POSTs the PGM bytes to `url` and expects {"text": ..., "confidence": ...}.
class HttpOcr final : public OcrAdapter {
 public:
  explicit HttpOcr(std::string url, double timeout_seconds = 10.0);
  OcrResult recognize(const GrayImage& image) const override;

 private:
  std::string origin_;
  std::string path_;
  double timeout_seconds_;
};

struct OcrConfig {
  std::string kind = "mock";  // mock | command | http
  std::string endpoint;       // mock table path, command line or URL
};

std::unique_ptr<OcrAdapter> make_ocr_adapter(const OcrConfig& config);

// Returns the clip with text and confidence populated.
SubtitleClip run_ocr(SubtitleClip clip, const OcrAdapter& adapter);

// Recognises clips on up to `workers` threads; output keeps input order.
std::vector<SubtitleClip> run_ocr_batch(std::vector<SubtitleClip> clips,
                                        const OcrAdapter& adapter,
                                        std::size_t workers);

// Background removal applied to the subtitle strip before segmentation.
class CleanerAdapter {
 public:
  virtual ~CleanerAdapter() = default;
  virtual FrameStream clean(const FrameStream& frames) const = 0;
};

class PassthroughCleaner final : public CleanerAdapter {
 public:
  FrameStream clean(const FrameStream& frames) const override { return frames; }
};

// Runs `<command> <in.raw> <out.raw>` on raw planar files.
class CommandCleaner final : public CleanerAdapter {
 public:
  explicit CommandCleaner(std::string command) : command_(std::move(command)) {}
  FrameStream clean(const FrameStream& frames) const override;

 private:
  std::string command_;
};

std::unique_ptr<CleanerAdapter> make_cleaner(const std::string& kind,
                                             const std::string& command);

}  // namespace slc
