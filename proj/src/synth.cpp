#include "slc/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "slc/align.hpp"
#include "slc/edit_distance.hpp"
#include "slc/error.hpp"
#include "slc/frame_io.hpp"
#include "slc/jsonl.hpp"
#include "slc/random.hpp"
#include "slc/utf8.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace slc::synth {
namespace {

constexpr std::u32string_view kCharPool =
    U"天氣溫度今日明天昨天香港政府市民新聞報道有關方面表示會議進行警方調查事件發生地區交通情況"
    U"學校醫院病人數字經濟發展社會安全工作時間公司員工服務中心計劃資助申請";

constexpr int kGapFrames = 26;     // blank frames between subtitles, at least
constexpr int kMinPiece = 8;       // frames per on-screen piece, at least
constexpr int kBlockWidth = 12;    // toggled block that marks a new piece
constexpr int kBlockHeight = 8;

struct Run {
  enum Kind { carrying, idle, blip } kind;
  std::int64_t length = 0;
  std::int64_t start = 0;
  std::size_t subtitles = 0;
};

struct Piece {
  std::int64_t start, end;
  std::vector<std::uint8_t> mask;
  std::string text;
  double confidence;
};

struct Subtitle {
  std::int64_t start, end;
  std::size_t sign;  // index among kept sign runs
  std::string text;
  std::vector<Piece> pieces;
};

std::u32string random_text(Rng& rng) {
  std::u32string t;
  const auto len = rng.between(4, 9);
  for (std::int64_t i = 0; i < len; ++i) t += kCharPool[rng.below(kCharPool.size())];
  return t;
}

std::vector<std::uint8_t> random_mask(Rng& rng, std::size_t pixels) {
  for (;;) {
    std::vector<std::uint8_t> m(pixels);
    std::size_t ink = 0;
    for (auto& p : m) ink += (p = rng.unit() < 0.25 ? 1 : 0);
    const double fill = static_cast<double>(ink) / static_cast<double>(pixels);
    if (fill >= 0.15 && fill <= 0.33) return m;
  }
}

std::size_t hamming(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

GrayImage mask_image(const std::vector<std::uint8_t>& mask, int w, int h) {
  GrayImage img{w, h, std::vector<std::uint8_t>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) img.pixels[i] = mask[i] ? 255 : 0;
  return img;
}

void check_spec(const SynthSpec& s) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::usage, "synth: " + why); };
  if (!(s.fps > 0)) fail("fps must be positive");
  if (s.width < 4 * kBlockWidth || s.height < kBlockHeight)
    fail("strip must be at least " + std::to_string(4 * kBlockWidth) + "x" +
         std::to_string(kBlockHeight));
  if (!(s.min_sign_seconds >= 3.0 && s.max_sign_seconds <= 15.0 &&
        s.min_sign_seconds <= s.max_sign_seconds))
    fail("sign durations must lie within [3,15] s");
  if (s.subtitles < s.signs) fail("every subtitle-carrying sign needs a subtitle");
  if (s.subtitles > 0 && s.signs == 0) fail("subtitles need a sign to carry them");
  if (std::ceil(s.min_sign_seconds * s.fps) > std::floor(s.max_sign_seconds * s.fps))
    fail("no whole frame count fits the sign duration bounds");
  if (std::ceil(s.min_sign_seconds * s.fps) < kGapFrames + kMinPiece)
    fail("frame rate too low for the subtitle layout");
}

// Spans the pipeline reports for a displayed interval [a, b): a switch at
// frame s peaks equally at s-1 and s, and the earlier index wins.
Segment detected_span(std::int64_t a, std::int64_t b) {
  return {a - 1, b - 1, SegmentKind::subtitle};
}

}  // namespace

SynthEpisode synth_episode(const SynthSpec& spec, const std::string& episode_id) {
  check_spec(spec);
  Rng rng(spec.seed);
  const auto fps = spec.fps;
  const std::int64_t sec = std::llround(fps);
  const std::int64_t min_len = static_cast<std::int64_t>(std::ceil(spec.min_sign_seconds * fps));
  const std::int64_t max_len = static_cast<std::int64_t>(std::floor(spec.max_sign_seconds * fps));
  const std::size_t pixels = static_cast<std::size_t>(spec.width) * spec.height;

  for (int attempt = 0; attempt < 1000; ++attempt) {
    // Runs and their order.
    std::vector<Run> runs;
    for (std::size_t i = 0; i < spec.signs; ++i) runs.push_back({Run::carrying, rng.between(min_len, max_len)});
    for (std::size_t i = 0; i < spec.idle_signs; ++i) runs.push_back({Run::idle, rng.between(min_len, max_len)});
    for (std::size_t i = 0; i < spec.blips; ++i)
      runs.push_back({Run::blip, rng.between(std::max<std::int64_t>(1, sec / 3), min_len - 1)});
    rng.shuffle(std::span(runs));

    std::vector<std::size_t> carrying;
    for (std::size_t i = 0; i < runs.size(); ++i)
      if (runs[i].kind == Run::carrying) {
        runs[i].subtitles = 1;
        carrying.push_back(i);
      }
    bool fits = true;
    for (std::size_t extra = spec.subtitles - spec.signs; extra > 0 && fits; --extra) {
      std::vector<std::size_t> open;
      for (auto i : carrying)
        if (runs[i].subtitles < static_cast<std::size_t>(runs[i].length / (kGapFrames + 3 * kMinPiece)))
          open.push_back(i);
      if (open.empty()) fits = false;
      else ++runs[open[rng.below(open.size())]].subtitles;
    }
    if (!fits) continue;

    std::int64_t t = rng.between(sec, 2 * sec);
    for (auto& r : runs) {
      t += rng.between(sec, 3 * sec);
      r.start = t;
      t += r.length;
    }
    const std::int64_t frame_count = t + 2 * sec;

    // Subtitles inside their sign runs, one slot each.
    std::vector<Segment> signs;
    std::vector<Subtitle> subs;
    std::u32string prev_text;
    std::vector<std::uint8_t> prev_mask;
    for (const auto& r : runs) {
      if (r.kind == Run::blip) continue;
      signs.push_back({r.start, r.start + r.length, SegmentKind::sign});
      const std::int64_t slot = r.length / static_cast<std::int64_t>(std::max<std::size_t>(r.subtitles, 1));
      for (std::size_t k = 0; k < r.subtitles; ++k) {
        Subtitle s;
        s.start = r.start + static_cast<std::int64_t>(k) * slot + kGapFrames / 2;
        s.end = r.start + static_cast<std::int64_t>(k + 1) * slot - (kGapFrames - kGapFrames / 2);
        s.sign = signs.size() - 1;
        std::u32string text;
        do text = random_text(rng);
        while (!prev_text.empty() &&
               levenshtein<char32_t>(text, prev_text) < 4);
        std::vector<std::uint8_t> mask;
        do mask = random_mask(rng, pixels);
        while (!prev_mask.empty() && hamming(mask, prev_mask) * 10 < pixels);
        prev_text = text;
        prev_mask = mask;
        s.text = utf8::encode(text);

        const std::int64_t len = s.end - s.start;
        const auto max_pieces = std::min<std::int64_t>(3, len / kMinPiece);
        const auto n_pieces = spec.ocr_noise ? rng.between(1, max_pieces) : 1;
        std::vector<std::int64_t> cuts{s.start};
        for (std::int64_t p = 1; p < n_pieces; ++p)
          cuts.push_back(s.start + p * len / n_pieces);
        cuts.push_back(s.end);
        std::size_t prev_block = SIZE_MAX;
        for (std::int64_t p = 0; p < n_pieces; ++p) {
          Piece piece{cuts[p], cuts[p + 1], mask, s.text, 0.95};
          if (p > 0) {
            const std::size_t slots = static_cast<std::size_t>(spec.width / kBlockWidth);
            std::size_t block;
            do block = rng.below(slots);
            while (block == prev_block);
            prev_block = block;
            const auto y0 = rng.below(static_cast<std::uint64_t>(spec.height - kBlockHeight + 1));
            for (int y = 0; y < kBlockHeight; ++y)
              for (int x = 0; x < kBlockWidth; ++x) {
                const auto i = (y0 + y) * spec.width + block * kBlockWidth + x;
                piece.mask[i] ^= 1;
              }
            std::u32string misread = text;
            const auto at = rng.below(misread.size());
            char32_t c;
            do c = kCharPool[rng.below(kCharPool.size())];
            while (c == misread[at]);
            misread[at] = c;
            piece.text = utf8::encode(misread);
            piece.confidence = 0.6;
          }
          s.pieces.push_back(std::move(piece));
        }
        subs.push_back(std::move(s));
      }
    }

    // Mock OCR table; identical ink masks must read identically.
    MockOcr table;
    bool clash = false;
    for (const auto& s : subs)
      for (const auto& p : s.pieces) {
        const auto key = image_digest(mask_image(p.mask, spec.width, spec.height));
        const auto it = table.table().find(key);
        if (it != table.table().end() && it->second.text != p.text) clash = true;
        table.add(key, {p.text, p.confidence});
      }
    if (clash) continue;

    // Keep only layouts whose intended assignment is what alignment yields.
    if (!signs.empty() && !subs.empty()) {
      std::vector<Segment> spans;
      for (const auto& s : subs) spans.push_back(detected_span(s.start, s.end));
      const auto path = dtw_align(signs, spans, fps);
      const auto owner = assign_subtitles(path, signs, spans);
      bool same = true;
      for (std::size_t j = 0; j < subs.size(); ++j) same = same && owner[j] == subs[j].sign;
      if (!same) continue;
    }

    SynthEpisode ep;
    std::vector<float> frames(static_cast<std::size_t>(frame_count) * pixels, 0.0f);
    for (const auto& s : subs)
      for (const auto& p : s.pieces)
        for (std::int64_t f = p.start; f < p.end; ++f)
          for (std::size_t i = 0; i < pixels; ++i)
            if (p.mask[i]) frames[static_cast<std::size_t>(f) * pixels + i] = 1.0f;
    ep.frames = FrameStream(episode_id, fps, spec.width, spec.height, std::move(frames));

    ep.scores.episode_id = episode_id;
    ep.scores.fps = fps;
    ep.scores.scores.resize(static_cast<std::size_t>(frame_count));
    for (auto& v : ep.scores.scores) v = static_cast<float>(0.05 + 0.3 * rng.unit());
    for (const auto& r : runs)
      for (std::int64_t f = r.start; f < r.start + r.length; ++f)
        ep.scores.scores[static_cast<std::size_t>(f)] = static_cast<float>(0.7 + 0.29 * rng.unit());
    ep.ocr = std::move(table);

    for (std::size_t k = 0; k < signs.size(); ++k) {
      TruthSample sample{signs[k], {}, {}};
      for (const auto& s : subs)
        if (s.sign == k) {
          sample.texts.push_back(s.text);
          sample.joined_text += s.text;
        }
      if (!sample.texts.empty()) ep.truth.push_back(std::move(sample));
    }
    return ep;
  }
  throw Error(ErrorKind::usage, "synth: no layout satisfies the requested episode (seed " +
                                    std::to_string(spec.seed) + ")");
}

void write_episode(const fs::path& dir, const SynthEpisode& episode) {
  fs::create_directories(dir);
  write_raw_planar(dir / "frames.raw", episode.frames);
  write_score_stream(dir / "scores.txt", episode.scores);
  episode.ocr.save(dir / "ocr_table.tsv");
  std::vector<json> rows;
  for (const auto& s : episode.truth)
    rows.push_back({{"episode_id", episode.frames.episode_id()},
                    {"start_frame", s.sign.start_frame},
                    {"end_frame", s.sign.end_frame},
                    {"texts", s.texts},
                    {"text", s.joined_text}});
  write_jsonl(dir / "truth.jsonl", rows);
}

std::vector<TruthSample> read_truth(const fs::path& path) {
  std::vector<TruthSample> out;
  for (const json& j : read_jsonl(path)) {
    try {
      out.push_back({{j.at("start_frame").get<std::int64_t>(), j.at("end_frame").get<std::int64_t>(),
                      SegmentKind::sign},
                     j.at("texts").get<std::vector<std::string>>(),
                     j.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorKind::data, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace slc::synth
