#include "slc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "slc/align.hpp"
#include "slc/error.hpp"
#include "slc/frame_io.hpp"
#include "slc/jsonl.hpp"
#include "slc/utf8.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace slc::pipeline {
namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::usage, "config field '" + field + "' " + why);
}

fs::path require_file(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorKind::data, "missing input file " + p.string());
  return p;
}

fs::path frames_path(const Episode& e) {
  if (fs::exists(e.dir / "frames.raw")) return e.dir / "frames.raw";
  if (fs::is_directory(e.dir / "frames")) return e.dir / "frames";
  throw Error(ErrorKind::data, "missing input file " + (e.dir / "frames.raw").string());
}

json segment_json(const std::string& episode, const Segment& s) {
  return {{"episode_id", episode}, {"start_frame", s.start_frame}, {"end_frame", s.end_frame}};
}

Segment segment_from(const json& j, SegmentKind kind) {
  return {j.at("start_frame").get<std::int64_t>(), j.at("end_frame").get<std::int64_t>(), kind};
}

template <typename F>
auto with_records(const fs::path& path, F&& f) {
  try {
    return f(read_jsonl(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::data, path.string() + ": " + e.what());
  }
}

std::string clip_file_name(const Segment& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%08lld-%08lld.pgm", static_cast<long long>(s.start_frame),
                static_cast<long long>(s.end_frame));
  return buf;
}

std::string sample_id_for(const std::string& episode, const Segment& s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%08lld", static_cast<long long>(s.start_frame));
  return episode + buf;
}

// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the failure
// with the lowest index.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(fps > 0) || !std::isfinite(fps)) bad_field("fps", "must be positive");
  if (!(activity_threshold > 0 && activity_threshold < 1))
    bad_field("activity-threshold", "must lie in (0,1)");
  if (!(duration.min_seconds > 0)) bad_field("min-seconds", "must be positive");
  if (!(duration.max_seconds >= duration.min_seconds))
    bad_field("max-seconds", "must be at least min-seconds");
  if (!(laplacian_threshold > 0)) bad_field("laplacian-threshold", "must be positive");
  if (!(blank_epsilon >= 0)) bad_field("blank-epsilon", "must not be negative");
  if (dtw_tie != "diagonal-first") bad_field("dtw-tie", "must be diagonal-first");
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0))
    bad_field("ratios", "must all be positive");
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    bad_field("ratios", "must sum to 1");
  if (max_attempts == 0) bad_field("max-attempts", "must be positive");
  if (cleaner != "passthrough" && cleaner != "command")
    bad_field("cleaner", "must be passthrough or command");
  if (cleaner == "command" && cleaner_command.empty())
    bad_field("cleaner-command", "is required for the command cleaner");
  if (ocr.kind != "mock" && ocr.kind != "command" && ocr.kind != "http")
    bad_field("ocr", "must be mock, command or http");
  if (ocr.kind != "mock" && ocr.endpoint.empty())
    bad_field("ocr-endpoint", "is required for the " + ocr.kind + " adapter");
  if (workers == 0) bad_field("workers", "must be positive");
}

std::vector<Episode> discover_episodes(const fs::path& input) {
  if (!fs::is_directory(input)) throw Error(ErrorKind::data, "missing input directory " + input.string());
  auto is_episode = [](const fs::path& d) { return fs::exists(d / "scores.txt"); };
  std::vector<Episode> out;
  if (is_episode(input)) {
    fs::path abs = fs::absolute(input).lexically_normal();
    if (abs.filename().empty()) abs = abs.parent_path();
    out.push_back({abs.filename().string(), input});
    return out;
  }
  for (const auto& entry : fs::directory_iterator(input))
    if (entry.is_directory() && is_episode(entry.path()))
      out.push_back({entry.path().filename().string(), entry.path()});
  std::sort(out.begin(), out.end(), [](const Episode& a, const Episode& b) { return a.id < b.id; });
  if (out.empty())
    throw Error(ErrorKind::data, "no episodes under " + input.string() + " (missing scores.txt)");
  return out;
}

fs::path episode_work_dir(const PipelineConfig& config, const Episode& episode) {
  return config.work / episode.id;
}

void segment_activity(const PipelineConfig& config, const Episode& episode) {
  ScoreStream scores = read_score_stream(require_file(episode.dir / "scores.txt"), episode.id);
  const auto runs = binarize_and_segment(scores, static_cast<float>(config.activity_threshold));
  const auto kept = filter_by_duration(runs, scores.fps, config.duration);
  std::vector<json> rows;
  for (const auto& s : kept) rows.push_back(segment_json(episode.id, s));
  write_jsonl(episode_work_dir(config, episode) / kSignsFile, rows);
}

void subtitle_clips(const PipelineConfig& config, const Episode& episode) {
  const FrameStream raw = read_frames(frames_path(episode), episode.id, config.fps);
  const auto cleaner = make_cleaner(config.cleaner, config.cleaner_command);
  const FrameStream frames = cleaner->clean(raw);
  const fs::path out_dir = episode_work_dir(config, episode);

  std::vector<Segment> segments;
  if (frames.frame_count() >= 3) {
    const auto measures = temporal_laplacian(frames);
    const auto cuts = detect_transitions(measures, config.laplacian_threshold);
    segments = segments_from_transitions(cuts, frames.frame_count());
  } else if (frames.frame_count() > 0) {
    segments.push_back({0, frames.frame_count(), SegmentKind::subtitle});
  }

  std::vector<json> rows;
  for (const auto& s : segments) {
    const SubtitleClip clip = average_clip(frames, s);
    if (is_blank(clip, config.blank_epsilon)) continue;
    const std::string name = clip_file_name(s);
    write_file_atomic(out_dir / kClipDir / name,
                      encode_pgm(to_gray_image(clip.mean_frame, clip.width, clip.height)));
    json row = segment_json(episode.id, s);
    row["image"] = std::string(kClipDir) + "/" + name;
    rows.push_back(std::move(row));
  }
  write_jsonl(out_dir / kClipsFile, rows);
}

void ocr(const PipelineConfig& config, const Episode& episode, const OcrAdapter* shared_adapter) {
  const fs::path dir = episode_work_dir(config, episode);
  std::vector<SubtitleClip> clips = with_records(dir / kClipsFile, [&](const auto& rows) {
    std::vector<SubtitleClip> out;
    for (const json& j : rows) {
      const GrayImage img = read_pnm(require_file(dir / j.at("image").template get<std::string>()));
      SubtitleClip c;
      c.segment = segment_from(j, SegmentKind::subtitle);
      c.width = img.width;
      c.height = img.height;
      c.mean_frame.resize(img.pixels.size());
      for (std::size_t i = 0; i < img.pixels.size(); ++i)
        c.mean_frame[i] = static_cast<float>(img.pixels[i]) / 255.0f;
      out.push_back(std::move(c));
    }
    return out;
  });

  std::unique_ptr<OcrAdapter> own;
  const OcrAdapter* adapter = shared_adapter;
  if (adapter == nullptr) {
    OcrConfig oc = config.ocr;
    if (oc.kind == "mock" && oc.endpoint.empty())
      oc.endpoint = require_file(episode.dir / "ocr_table.tsv").string();
    own = make_ocr_adapter(oc);
    adapter = own.get();
  }
  clips = run_ocr_batch(std::move(clips), *adapter, config.workers);

  std::vector<json> rows;
  for (const auto& c : clips) {
    json row = segment_json(episode.id, c.segment);
    row["text"] = *c.text;
    row["confidence"] = *c.ocr_confidence;
    rows.push_back(std::move(row));
  }
  write_jsonl(dir / kOcrFile, rows);
}

void regroup_stage(const PipelineConfig& config, const Episode& episode) {
  const fs::path dir = episode_work_dir(config, episode);
  std::vector<SubtitleClip> clips = with_records(dir / kOcrFile, [](const auto& rows) {
    std::vector<SubtitleClip> out;
    for (const json& j : rows) {
      SubtitleClip c;
      c.segment = segment_from(j, SegmentKind::subtitle);
      c.text = j.at("text").template get<std::string>();
      c.ocr_confidence = j.at("confidence").template get<double>();
      out.push_back(std::move(c));
    }
    return out;
  });
  const auto groups =
      regroup(std::move(clips), {config.regroup_threshold, config.merge_reference});
  std::vector<json> rows;
  for (const auto& g : groups) {
    json members = json::array();
    for (const auto& m : g.members)
      members.push_back({{"start_frame", m.segment.start_frame},
                         {"end_frame", m.segment.end_frame},
                         {"text", *m.text},
                         {"confidence", *m.ocr_confidence}});
    rows.push_back({{"episode_id", episode.id},
                    {"start_frame", g.start_frame},
                    {"end_frame", g.end_frame},
                    {"text", g.representative_text},
                    {"members", members}});
  }
  write_jsonl(dir / kGroupsFile, rows);
}

void align(const PipelineConfig& config, const Episode& episode) {
  const fs::path dir = episode_work_dir(config, episode);
  const auto signs = with_records(dir / kSignsFile, [](const auto& rows) {
    std::vector<Segment> out;
    for (const json& j : rows) out.push_back(segment_from(j, SegmentKind::sign));
    return out;
  });
  const auto groups = with_records(dir / kGroupsFile, [](const auto& rows) {
    std::vector<SubtitleGroup> out;
    for (const json& j : rows) {
      SubtitleGroup g;
      g.start_frame = j.at("start_frame").template get<std::int64_t>();
      g.end_frame = j.at("end_frame").template get<std::int64_t>();
      g.representative_text = j.at("text").template get<std::string>();
      for (const json& m : j.at("members")) {
        SubtitleClip c;
        c.segment = segment_from(m, SegmentKind::subtitle);
        c.text = m.at("text").template get<std::string>();
        c.ocr_confidence = m.at("confidence").template get<double>();
        g.members.push_back(std::move(c));
      }
      out.push_back(std::move(g));
    }
    return out;
  });

  std::vector<json> rows;
  if (!signs.empty() && !groups.empty()) {
    const AlignmentPath path = dtw_align(signs, groups, config.fps);
    for (const auto& s : materialize_samples(path, signs, groups, config.joiner)) {
      json spans = json::array();
      for (const auto& g : s.subtitles)
        spans.push_back({{"start_frame", g.start_frame},
                         {"end_frame", g.end_frame},
                         {"text", g.representative_text}});
      rows.push_back({{"sample_id", sample_id_for(episode.id, s.sign)},
                      {"signer_id", ""},
                      {"episode_id", episode.id},
                      {"start_frame", s.sign.start_frame},
                      {"end_frame", s.sign.end_frame},
                      {"fps", config.fps},
                      {"glosses", json::array()},
                      {"text", s.joined_text},
                      {"subtitles", spans}});
    }
  }
  write_jsonl(dir / kAlignedFile, rows);
}

void write_combined_manifest(const PipelineConfig& config, const std::vector<Episode>& episodes) {
  std::vector<json> rows;
  for (const auto& e : episodes)
    for (auto& j : read_jsonl(episode_work_dir(config, e) / kAlignedFile)) rows.push_back(std::move(j));
  write_jsonl(config.work / kAlignedFile, rows);
}

void run_stages(const PipelineConfig& config, const std::vector<Stage>& stages) {
  config.validate();
  const auto episodes = discover_episodes(config.input);
  std::unique_ptr<OcrAdapter> shared;
  if (std::find(stages.begin(), stages.end(), Stage::ocr) != stages.end() &&
      !(config.ocr.kind == "mock" && config.ocr.endpoint.empty()))
    shared = make_ocr_adapter(config.ocr);

  PipelineConfig inner = config;
  if (episodes.size() > 1) inner.workers = 1;
  parallel_for(episodes.size(), config.workers, [&](std::size_t i) {
    for (Stage s : stages) {
      switch (s) {
        case Stage::segment_activity: segment_activity(inner, episodes[i]); break;
        case Stage::subtitle_clips: subtitle_clips(inner, episodes[i]); break;
        case Stage::ocr: ocr(inner, episodes[i], shared.get()); break;
        case Stage::regroup: regroup_stage(inner, episodes[i]); break;
        case Stage::align: align(inner, episodes[i]); break;
      }
    }
  });
  if (std::find(stages.begin(), stages.end(), Stage::align) != stages.end())
    write_combined_manifest(config, episodes);
}

void run_all(const PipelineConfig& config) {
  run_stages(config, {Stage::segment_activity, Stage::subtitle_clips, Stage::ocr,
                      Stage::regroup, Stage::align});
}

TsvRecords read_tsv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, "missing input file " + path.string());
  TsvRecords out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error(ErrorKind::data, path.string() + ":" + std::to_string(lineno) +
                                       ": expected <sample_id><TAB><payload>");
    if (!utf8::try_decode(line, nullptr))
      throw Error(ErrorKind::data, path.string() + ":" + std::to_string(lineno) + ": invalid UTF-8");
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

void write_tsv(const fs::path& path, const TsvRecords& records) {
  std::string bytes;
  for (const auto& [id, payload] : records) bytes += id + "\t" + payload + "\n";
  write_file_atomic(path, bytes);
}

std::vector<std::string> split_glosses(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string g; in >> g;) out.push_back(g);
  return out;
}

std::string join_glosses(const std::vector<std::string>& glosses) {
  std::string out;
  for (const auto& g : glosses) {
    if (!out.empty()) out += ' ';
    out += g;
  }
  return out;
}

NormalizeResult normalize_annotations(const TsvRecords& raw, bool test_mode, RegistryScope scope,
                                      const corpus::SplitAssignment* split) {
  if (scope == RegistryScope::train && split == nullptr)
    throw Error(ErrorKind::usage, "a train-only registry needs a split file");
  std::vector<gloss::GlossAnnotation> parsed;
  std::vector<gloss::HomosignGroup> groups;
  for (const auto& [id, text] : raw) {
    try {
      parsed.push_back(gloss::normalize_units(gloss::parse(text)));
    } catch (const gloss::ParseError& e) {
      throw Error(ErrorKind::data, "sample " + id + ": " + e.what());
    }
    bool in_scope = true;
    if (scope == RegistryScope::train) {
      const auto it = split->split_of.find(id);
      in_scope = it != split->split_of.end() && it->second == corpus::Split::train;
    }
    if (in_scope)
      for (auto& g : gloss::homosign_groups(parsed.back())) groups.push_back(std::move(g));
  }
  NormalizeResult result;
  result.registry = gloss::HomosignRegistry::build(groups);
  for (std::size_t i = 0; i < raw.size(); ++i)
    result.normalized.emplace_back(
        raw[i].first, join_glosses(gloss::to_training_sequence(
                          parsed[i], test_mode ? &result.registry : nullptr)));
  return result;
}

TsvRecords canonicalize_records(const TsvRecords& normalized,
                                const gloss::HomosignRegistry& registry) {
  TsvRecords out;
  for (const auto& [id, line] : normalized)
    out.emplace_back(id, join_glosses(gloss::canonicalize(split_glosses(line), registry)));
  return out;
}

metrics::ScoreReport score(const TsvRecords& hyps, const TsvRecords& refs,
                           const ScoreOptions& options) {
  if (refs.empty()) throw Error(ErrorKind::data, "no reference samples to score");
  std::map<std::string, std::string, std::less<>> hyp_of;
  for (const auto& [id, text] : hyps)
    if (!hyp_of.emplace(id, text).second) throw Error(ErrorKind::data, "duplicate hypothesis " + id);

  metrics::ScoreReport report;
  report.kind = options.kind;
  std::vector<std::pair<metrics::Tokens, metrics::Tokens>> pairs;
  for (const auto& [id, ref_text] : refs) {
    const auto it = hyp_of.find(id);
    if (it == hyp_of.end()) throw Error(ErrorKind::data, "no hypothesis for sample " + id);
    metrics::Tokens h, r;
    if (options.kind == metrics::MetricKind::wer) {
      h = split_glosses(it->second);
      r = split_glosses(ref_text);
      if (options.registry) std::tie(h, r) = gloss::canonicalize_for_scoring(h, r, *options.registry);
    } else {
      h = metrics::char_tokens(it->second, options.tokenization);
      r = metrics::char_tokens(ref_text, options.tokenization);
    }
    pairs.emplace_back(std::move(h), std::move(r));
    report.per_sample.push_back({id, {}});
  }

  switch (options.kind) {
    case metrics::MetricKind::wer: {
      for (std::size_t i = 0; i < pairs.size(); ++i)
        report.per_sample[i].values.emplace_back("wer", metrics::wer(pairs[i].first, pairs[i].second));
      report.corpus.emplace_back("wer", metrics::corpus_wer(pairs));
      break;
    }
    case metrics::MetricKind::bleu: {
      std::vector<metrics::Tokens> hs, rs;
      for (auto& [h, r] : pairs) {
        hs.push_back(h);
        rs.push_back(r);
      }
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto& values = report.per_sample[i].values;
        if (options.sentence_bleu) {
          for (int n = 1; n <= options.max_n; ++n)
            values.emplace_back("bleu" + std::to_string(n),
                                metrics::sentence_bleu(hs[i], rs[i], n, options.smoothing));
        } else {
          const auto one = metrics::bleu(std::span(hs).subspan(i, 1), std::span(rs).subspan(i, 1),
                                         options.max_n);
          for (int n = 1; n <= options.max_n; ++n)
            values.emplace_back("bleu" + std::to_string(n), one.bleu[n - 1]);
        }
      }
      const auto all = metrics::bleu(hs, rs, options.max_n);
      for (int n = 1; n <= options.max_n; ++n)
        report.corpus.emplace_back("bleu" + std::to_string(n), all.bleu[n - 1]);
      report.corpus.emplace_back("brevity_penalty", all.brevity_penalty);
      break;
    }
    case metrics::MetricKind::rouge_l: {
      std::vector<metrics::Tokens> hs, rs;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        report.per_sample[i].values.emplace_back(
            "rouge_l", 100.0 * metrics::rouge_l_sample(pairs[i].first, pairs[i].second, options.beta));
        hs.push_back(pairs[i].first);
        rs.push_back(pairs[i].second);
      }
      report.corpus.emplace_back("rouge_l", metrics::rouge_l(hs, rs, options.beta));
      break;
    }
  }
  return report;
}

std::string format_report(const metrics::ScoreReport& report) {
  std::string out = "sample_id";
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  const auto& header = report.per_sample.empty() ? report.corpus : report.per_sample.front().values;
  for (const auto& [name, v] : header) out += "\t" + name;
  out += "\n";
  for (const auto& s : report.per_sample) {
    out += s.sample_id;
    for (const auto& [name, v] : s.values) out += "\t" + fmt(v);
    out += "\n";
  }
  for (const auto& [name, v] : report.corpus) out += "corpus\t" + name + "\t" + fmt(v) + "\n";
  return out;
}

}  // namespace slc::pipeline
