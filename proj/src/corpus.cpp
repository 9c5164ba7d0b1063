#include "slc/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "slc/error.hpp"
#include "slc/jsonl.hpp"
#include "slc/random.hpp"
#include "slc/utf8.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace slc::corpus {

void check_record(const SampleRecord& r, DurationBounds bounds) {
  if (r.sample_id.empty()) throw Error(ErrorKind::data, "sample without id");
  if (!(r.fps > 0.0)) throw Error(ErrorKind::data, r.sample_id + ": fps must be > 0");
  if (r.start_frame < 0 || r.end_frame <= r.start_frame)
    throw Error(ErrorKind::data, r.sample_id + ": empty or negative frame range");
  const double d = r.duration_seconds();
  if (d < bounds.min_seconds || d > bounds.max_seconds)
    throw Error(ErrorKind::data, r.sample_id + ": duration " + std::to_string(d) +
                                     " s outside [" + std::to_string(bounds.min_seconds) +
                                     ", " + std::to_string(bounds.max_seconds) + "]");
}

std::vector<SampleRecord> read_manifest(const fs::path& path) {
  std::vector<SampleRecord> out;
  std::unordered_set<std::string> seen;
  for (const json& j : read_jsonl(path)) {
    SampleRecord r;
    try {
      r.sample_id = j.at("sample_id").get<std::string>();
      r.signer_id = j.value("signer_id", "");
      r.episode_id = j.value("episode_id", "");
      r.start_frame = j.at("start_frame").get<std::int64_t>();
      r.end_frame = j.at("end_frame").get<std::int64_t>();
      r.fps = j.value("fps", 25.0);
      r.glosses = j.value("glosses", std::vector<std::string>{});
      r.text = j.value("text", "");
    } catch (const json::exception& e) {
      throw Error(ErrorKind::data, path.string() + ": bad manifest record: " + e.what());
    }
    check_record(r);
    if (!seen.insert(r.sample_id).second)
      throw Error(ErrorKind::data, path.string() + ": duplicate sample id " + r.sample_id);
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest(const fs::path& path, std::span<const SampleRecord> samples) {
  std::vector<json> rows;
  for (const auto& r : samples)
    rows.push_back({{"sample_id", r.sample_id},
                    {"signer_id", r.signer_id},
                    {"episode_id", r.episode_id},
                    {"start_frame", r.start_frame},
                    {"end_frame", r.end_frame},
                    {"fps", r.fps},
                    {"glosses", r.glosses},
                    {"text", r.text}});
  write_jsonl(path, rows);
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  throw Error(ErrorKind::data, "unknown split '" + std::string(name) + "'");
}

namespace {

using GlossCounts = std::unordered_map<std::string, std::size_t>;

// Number of distinct dev/test glosses never seen in train.
std::size_t count_oov(std::span<const SampleRecord> samples,
                      std::span<const Split> where) {
  std::unordered_set<std::string_view> train;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (where[i] == Split::train)
      for (const auto& g : samples[i].glosses) train.insert(g);
  std::unordered_set<std::string_view> oov;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (where[i] != Split::train)
      for (const auto& g : samples[i].glosses)
        if (!train.contains(g)) oov.insert(g);
  return oov.size();
}

void repair(std::span<const SampleRecord> samples, std::span<const std::size_t> order,
            std::vector<Split>& where, std::size_t want_dev, std::size_t want_test) {
  GlossCounts train_count;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (where[i] == Split::train)
      for (const auto& g : samples[i].glosses) ++train_count[g];

  // Greedy cover: move the held-out sample carrying the most uncovered OOV
  // glosses to train until none remain.
  std::vector<bool> pinned(samples.size(), false);
  for (;;) {
    std::size_t best = samples.size(), best_gain = 0;
    for (std::size_t i : order) {
      if (where[i] == Split::train) continue;
      std::set<std::string_view> missing;
      for (const auto& g : samples[i].glosses)
        if (train_count[g] == 0) missing.insert(g);
      if (missing.size() > best_gain) best_gain = missing.size(), best = i;
    }
    if (best == samples.size()) break;
    where[best] = Split::train;
    pinned[best] = true;
    for (const auto& g : samples[best].glosses) ++train_count[g];
  }

  // Refill held-out splits with samples whose removal keeps every gloss in
  // train.
  auto held = [&](Split s) {
    return static_cast<std::size_t>(std::count(where.begin(), where.end(), s));
  };
  for (Split target : {Split::dev, Split::test}) {
    const std::size_t want = target == Split::dev ? want_dev : want_test;
    for (std::size_t i : order) {
      if (held(target) >= want) break;
      if (where[i] != Split::train || pinned[i]) continue;
      GlossCounts own;
      for (const auto& g : samples[i].glosses) ++own[g];
      const bool safe = std::all_of(own.begin(), own.end(), [&](const auto& kv) {
        return train_count[kv.first] > kv.second;
      });
      if (!safe) continue;
      where[i] = target;
      for (const auto& [g, c] : own) train_count[g] -= c;
    }
  }
}

}  // namespace

SplitAssignment make_split(std::span<const SampleRecord> samples, SplitRatios ratios,
                           std::uint64_t seed, std::size_t max_attempts) {
  if (samples.empty()) throw Error(ErrorKind::data, "cannot split an empty corpus");
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    throw Error(ErrorKind::usage, "split ratios must be positive and sum to 1");
  for (const auto& s : samples)
    if (s.glosses.empty())
      throw Error(ErrorKind::data, s.sample_id + ": cannot split unannotated sample");

  const std::size_t n = samples.size();
  const auto want_dev = static_cast<std::size_t>(std::llround(ratios.dev * n));
  const auto want_test = static_cast<std::size_t>(std::llround(ratios.test * n));
  if (want_dev + want_test >= n)
    throw Error(ErrorKind::data, "corpus too small for the requested ratios");

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::vector<Split> where(n);
  SplitAssignment out;
  out.seed = seed;
  out.requested = ratios;

  bool ok = false;
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, max_attempts); ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    for (std::size_t k = 0; k < n; ++k)
      where[order[k]] = k < want_dev               ? Split::dev
                        : k < want_dev + want_test ? Split::test
                                                   : Split::train;
    out.attempts = attempt + 1;
    if (count_oov(samples, where) == 0) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    out.used_fallback = true;
    repair(samples, order, where, want_dev, want_test);
  }

  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    out.split_of[samples[i].sample_id] = where[i];
    ++counts[static_cast<int>(where[i])];
  }
  out.achieved = {static_cast<double>(counts[0]) / n, static_cast<double>(counts[1]) / n,
                  static_cast<double>(counts[2]) / n};
  return out;
}

void write_split_file(const fs::path& path, std::span<const SampleRecord> samples,
                      const SplitAssignment& assignment) {
  std::string bytes;
  for (const auto& s : samples) {
    const auto it = assignment.split_of.find(s.sample_id);
    if (it == assignment.split_of.end())
      throw Error(ErrorKind::data, s.sample_id + ": missing from split assignment");
    bytes += s.sample_id + "\t" + std::string(split_name(it->second)) + "\n";
  }
  write_file_atomic(path, bytes);
}

SplitAssignment read_split_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "missing split file " + path.string());
  SplitAssignment out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorKind::data, path.string() + ": expected '<sample_id>\\t<split>'");
    if (!out.split_of.emplace(line.substr(0, tab), parse_split(line.substr(tab + 1))).second)
      throw Error(ErrorKind::data, path.string() + ": duplicate id " + line.substr(0, tab));
  }
  return out;
}

std::vector<std::string> text_characters(std::string_view text) {
  std::vector<std::string> out;
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_space(c)) continue;
    std::string s;
    utf8::append(s, c);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct Tally {
  double seconds = 0.0;
  std::size_t samples = 0;
  std::unordered_map<std::string, std::size_t> glosses, chars;
};

std::size_t running(const std::unordered_map<std::string, std::size_t>& m) {
  std::size_t n = 0;
  for (const auto& [k, v] : m) n += v;
  return n;
}

std::size_t singletons(const std::unordered_map<std::string, std::size_t>& m) {
  return static_cast<std::size_t>(
      std::count_if(m.begin(), m.end(), [](const auto& kv) { return kv.second == 1; }));
}

std::size_t oovs(const std::unordered_map<std::string, std::size_t>& m,
                 const std::unordered_map<std::string, std::size_t>& train) {
  return static_cast<std::size_t>(std::count_if(
      m.begin(), m.end(), [&](const auto& kv) { return !train.contains(kv.first); }));
}

SplitStats finish(const Tally& t) {
  SplitStats s;
  s.hours = t.seconds / 3600.0;
  s.samples = t.samples;
  s.gloss_vocab = t.glosses.size();
  s.running_glosses = running(t.glosses);
  s.gloss_singletons = singletons(t.glosses);
  s.char_vocab = t.chars.size();
  s.running_chars = running(t.chars);
  s.char_singletons = singletons(t.chars);
  return s;
}

}  // namespace

CorpusStats compute_stats(std::span<const SampleRecord> samples,
                          const SplitAssignment& assignment) {
  Tally tally[3], all;
  for (const auto& r : samples) {
    const auto it = assignment.split_of.find(r.sample_id);
    if (it == assignment.split_of.end())
      throw Error(ErrorKind::data, r.sample_id + ": missing from split assignment");
    for (Tally* t : {&tally[static_cast<int>(it->second)], &all}) {
      t->seconds += r.duration_seconds();
      ++t->samples;
      for (const auto& g : r.glosses) ++t->glosses[g];
      for (auto& c : text_characters(r.text)) ++t->chars[c];
    }
  }
  CorpusStats out{finish(tally[0]), finish(tally[1]), finish(tally[2]), finish(all)};
  const auto& train = tally[0];
  out.dev.gloss_oovs = oovs(tally[1].glosses, train.glosses);
  out.dev.char_oovs = oovs(tally[1].chars, train.chars);
  out.test.gloss_oovs = oovs(tally[2].glosses, train.glosses);
  out.test.char_oovs = oovs(tally[2].chars, train.chars);
  return out;
}

KeypointFrame prune_keypoints(std::span<const Keypoint> wholebody) {
  if (wholebody.size() != kWholeBodyPoints)
    throw Error(ErrorKind::data, "expected " + std::to_string(kWholeBodyPoints) +
                                     " whole-body keypoints, got " +
                                     std::to_string(wholebody.size()));
  constexpr std::size_t face_begin = 23, hands_begin = 91;
  KeypointFrame out;
  auto it = std::copy_n(wholebody.begin() + face_begin, kFacePoints, out.begin());
  it = std::copy_n(wholebody.begin() + hands_begin, kHandPoints, it);
  std::copy_n(wholebody.begin(), kUpperBodyPoints, it);
  return out;
}

void flag_out_of_bounds(KeypointFrame& frame, float width, float height) {
  for (auto& k : frame)
    if (!(k.x >= 0.0f && k.x < width && k.y >= 0.0f && k.y < height)) k.confidence = 0.0f;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "keypoint I/O assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos, const fs::path& path) {
  if (pos + 4 > in.size()) throw Error(ErrorKind::data, path.string() + ": truncated keypoint file");
  std::uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  pos += 4;
  return v;
}

}  // namespace

void write_keypoints(const fs::path& path, const KeypointSequence& seq) {
  std::string out = "SLKP";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(seq.sample_id.size()));
  out += seq.sample_id;
  put_u32(out, static_cast<std::uint32_t>(seq.frames.size()));
  for (const auto& frame : seq.frames)
    for (const auto& k : frame)
      for (float f : {k.x, k.y, k.confidence}) {
        char b[4];
        std::memcpy(b, &f, 4);
        out.append(b, 4);
      }
  write_file_atomic(path, out);
}

KeypointSequence read_keypoints(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, "missing keypoint file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = std::move(ss).str();
  if (buf.compare(0, 4, "SLKP") != 0)
    throw Error(ErrorKind::data, path.string() + ": not a keypoint file");
  std::size_t pos = 4;
  if (get_u32(buf, pos, path) != 1)
    throw Error(ErrorKind::data, path.string() + ": unsupported keypoint file version");
  const std::uint32_t id_len = get_u32(buf, pos, path);
  if (pos + id_len > buf.size()) throw Error(ErrorKind::data, path.string() + ": truncated header");
  KeypointSequence seq;
  seq.sample_id = buf.substr(pos, id_len);
  pos += id_len;
  const std::uint32_t frames = get_u32(buf, pos, path);
  const std::size_t need = static_cast<std::size_t>(frames) * kKeypoints * 3 * 4;
  if (buf.size() - pos != need)
    throw Error(ErrorKind::data, path.string() + ": keypoint payload size mismatch");
  seq.frames.resize(frames);
  for (auto& frame : seq.frames)
    for (auto& k : frame) {
      std::memcpy(&k.x, buf.data() + pos, 4);
      std::memcpy(&k.y, buf.data() + pos + 4, 4);
      std::memcpy(&k.confidence, buf.data() + pos + 8, 4);
      pos += 12;
    }
  return seq;
}

}  // namespace slc::corpus
