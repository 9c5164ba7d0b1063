// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "e2e_check.hpp"
#include "gloss_gen.hpp"
#include "oracles.hpp"
#include "slc/align.hpp"
#include "slc/corpus.hpp"
#include "slc/edit_distance.hpp"
#include "slc/gloss.hpp"
#include "slc/metrics.hpp"
#include "slc/pipeline.hpp"
#include "slc/signal.hpp"
#include "slc/subtitle.hpp"
#include "slc/synth.hpp"
#include "slc/utf8.hpp"
#include "zipf_corpus.hpp"

namespace fs = std::filesystem;
using namespace slc;

namespace {

// A criterion returns an empty string on success, otherwise what went wrong.
struct Criterion {
  std::string name;
  double time_limit_s;  // 0: untimed
  std::function<std::string()> check;
};

std::string fail(const std::string& what, auto... details) {
  std::ostringstream os;
  os << what;
  ((os << ' ' << details), ...);
  return os.str();
}

std::string random_word(std::mt19937& gen, std::size_t max_len, std::u32string_view alphabet) {
  std::u32string s(gen() % (max_len + 1), U'a');
  for (auto& c : s) c = alphabet[gen() % alphabet.size()];
  return utf8::encode(s);
}

std::vector<Segment> random_segments(std::mt19937& gen, std::size_t n, SegmentKind kind) {
  std::vector<Segment> out;
  std::int64_t t = gen() % 50;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t len = 1 + gen() % 300;
    out.push_back({t, t + len, kind});
    t += len + gen() % 100;
  }
  return out;
}

std::string wer_fixture() {
  const metrics::Tokens ref{"昨天", "溫度", "二", "十", "有", "濕", "百分比", "七", "六"};
  const std::vector<std::pair<metrics::Tokens, double>> cases{
      {{"以前", "溫度", "小", "有", "濕", "百分比", "七", "六"}, 33.33},
      {{"溫度", "十", "濕", "百分比", "七", "九", "六"}, 44.44},
      {{"溫度", "二", "十", "濕", "百分比", "七", "六"}, 22.22}};
  for (const auto& [hyp, want] : cases) {
    const double got = metrics::wer(hyp, ref);
    if (std::abs(got - want) > 0.005) return fail("wer", got, "want", want);
  }
  return {};
}

std::string dtw_oracle() {
  std::mt19937 gen(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto signs = random_segments(gen, 1 + gen() % 6, SegmentKind::sign);
    const auto subs = random_segments(gen, 1 + gen() % 10, SegmentKind::subtitle);
    std::vector<std::int64_t> x, y;
    for (const auto& s : signs) x.push_back(s.start_frame + s.end_frame);
    for (const auto& s : subs) y.push_back(s.start_frame + s.end_frame);
    const auto p = dtw_align(signs, subs, 25.0);
    if (!is_valid_path(p, signs.size(), subs.size())) return fail("invalid path in trial", trial);
    const auto want = oracle::brute_force_dtw(x, y);
    if (p.total_cost_half_frames != want)
      return fail("trial", trial, "cost", p.total_cost_half_frames, "oracle", want);
  }
  return {};
}

std::string edit_distance_oracle() {
  std::mt19937 gen(1002);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = random_word(gen, 8, U"ab天氣c"), b = random_word(gen, 8, U"ab天氣c");
    if (edit_distance(a, b) != oracle::edit_distance(utf8::decode(a), utf8::decode(b)))
      return fail("oracle mismatch on", a, b);
  }
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = random_word(gen, 8, U"abc"), b = random_word(gen, 8, U"abc"),
               c = random_word(gen, 8, U"abc");
    const auto ab = edit_distance(a, b);
    if (ab != edit_distance(b, a)) return fail("asymmetric on", a, b);
    if ((ab == 0) != (a == b)) return fail("identity fails on", a, b);
    if (edit_distance(a, c) > ab + edit_distance(b, c)) return fail("triangle fails on", a, b, c);
  }
  return {};
}

std::string regroup_checks() {
  std::mt19937 gen(1003);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> texts(1 + gen() % 8);
    for (auto& t : texts) t = random_word(gen, 6, U"ab天c");
    std::vector<std::size_t> total(texts.size(), 0);
    for (std::size_t i = 0; i < texts.size(); ++i)
      for (std::size_t j = 0; j < texts.size(); ++j)
        total[i] += oracle::edit_distance(utf8::decode(texts[i]), utf8::decode(texts[j]));
    const auto best = *std::min_element(total.begin(), total.end());
    const auto k = representative_index(texts);
    if (total[k] != best) return fail("representative not minimal in trial", trial);
    if (std::find(total.begin(), total.end(), best) - total.begin() != static_cast<long>(k))
      return fail("representative tie not earliest in trial", trial);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<SubtitleClip> clips;
    std::int64_t t = 0;
    for (int i = 0, n = 1 + gen() % 15; i < n; ++i) {
      SubtitleClip c;
      const std::int64_t len = 1 + gen() % 20;
      c.segment = {t, t + len, SegmentKind::subtitle};
      c.text = random_word(gen, 6, U"abc");
      clips.push_back(c);
      t += len + gen() % 3;
    }
    const RegroupOptions opts{1 + gen() % 4, gen() % 2 ? MergeReference::representative
                                                       : MergeReference::last_member};
    std::size_t k = 0;
    for (const auto& g : regroup(clips, opts)) {
      if (g.members.empty()) return fail("empty group in corpus", trial);
      if (g.start_frame != g.members.front().segment.start_frame ||
          g.end_frame != g.members.back().segment.end_frame)
        return fail("group span mismatch in corpus", trial);
      for (const auto& m : g.members)
        if (k >= clips.size() || m.segment != clips[k++].segment)
          return fail("not an ordered partition in corpus", trial);
    }
    if (k != clips.size()) return fail("clips lost in corpus", trial);
  }
  return {};
}

std::string gloss_checks() {
  using namespace gloss_gen;
  Generator g(1004);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto s = g.next();
    const auto parsed = gloss::parse(s.raw);
    if (parsed != s.ann) return fail("parse differs for", s.raw);
    if (gloss::parse(gloss::render(parsed)) != parsed) return fail("round trip fails for", s.raw);
  }

  const auto ann = gloss::normalize_units(gloss::parse("A+B C(?) D(2) E(=F=G)"));
  const auto reg = gloss::HomosignRegistry::build(gloss::homosign_groups(ann));
  if (reg.classes().size() != 1 || gloss::render(reg.classes()[0].representative) != "E")
    return fail("fixture registry wrong");
  const std::vector<std::string> want{"A", "B", "C", "D", "E"};
  if (gloss::to_training_sequence(ann) != want) return fail("fixture sequence wrong");

  std::mt19937 gen(1005);
  const std::vector<gloss::Compound> pool{compound({"A"}), compound({"B"}), compound({"C"}),
                                          compound({"D"}), compound({"E"}), compound({"A", "B"}),
                                          compound({"天"}), compound({"地", "人"}), compound({"F"})};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<gloss::HomosignGroup> groups;
    std::vector<std::vector<std::string>> labels;
    for (int k = 0, n = 1 + gen() % 6; k < n; ++k) {
      gloss::HomosignGroup hg;
      std::vector<std::string> l;
      for (const auto& c : pool)
        if (gen() % 4 == 0) {
          hg.members.push_back(c);
          l.push_back(gloss::render(c));
        }
      if (hg.members.size() < 2) continue;
      groups.push_back(hg);
      labels.push_back(l);
    }
    std::set<std::set<std::string>> got;
    const auto registry = gloss::HomosignRegistry::build(groups);
    for (const auto& cls : registry.classes()) {
      std::set<std::string> members;
      for (const auto& m : cls.members) members.insert(gloss::render(m));
      for (const auto& m : cls.members) {
        const auto rc = gloss::compound_count(cls.representative), mc = gloss::compound_count(m);
        if (rc < mc || (rc == mc && gloss::render(m) < gloss::render(cls.representative)))
          return fail("representative rule broken in trial", trial);
      }
      got.insert(members);
    }
    if (got != oracle::components(labels)) return fail("classes differ from components in trial", trial);
  }
  return {};
}

std::string canonical_scoring() {
  using namespace gloss_gen;
  const auto reg = gloss::HomosignRegistry::build(
      std::vector<gloss::HomosignGroup>{homosign({compound({"A"}), compound({"B"})})});
  const std::vector<std::string> hyp{"B"}, ref{"A"};
  const auto [h, r] = gloss::canonicalize_for_scoring(hyp, ref, reg);
  const double w = metrics::wer(h, r);
  return w == 0.0 ? std::string() : fail("wer", w);
}

std::size_t oov_count(const std::vector<corpus::SampleRecord>& samples,
                      const corpus::SplitAssignment& a) {
  std::set<std::string> train, oov;
  for (const auto& s : samples)
    if (a.split_of.at(s.sample_id) == corpus::Split::train) train.insert(s.glosses.begin(), s.glosses.end());
  for (const auto& s : samples)
    if (a.split_of.at(s.sample_id) != corpus::Split::train)
      for (const auto& g : s.glosses)
        if (!train.count(g)) oov.insert(g);
  return oov.size();
}

std::string splitter() {
  for (std::uint64_t c = 0; c < 100; ++c) {
    const auto samples = zipf_corpus(5000 + c, 500 + 10 * (c % 5));
    const auto a = corpus::make_split(samples, {}, c);
    if (const auto n = oov_count(samples, a)) return fail("corpus", c, "has", n, "OOV glosses");
    std::size_t counts[3] = {};
    for (const auto& [id, s] : a.split_of) ++counts[static_cast<int>(s)];
    const double total = static_cast<double>(samples.size());
    const double want[3] = {0.90, 0.05, 0.05};
    for (int k = 0; k < 3; ++k)
      if (std::abs(counts[k] / total - want[k]) > 0.02)
        return fail("corpus", c, "split", k, "ratio", counts[k] / total);
    if (corpus::make_split(samples, {}, c).split_of != a.split_of)
      return fail("corpus", c, "not deterministic");
  }
  return {};
}

std::string statistics() {
  auto sample = [](std::string id, std::int64_t frames, std::vector<std::string> glosses, std::string text) {
    corpus::SampleRecord r;
    r.sample_id = std::move(id);
    r.end_frame = frames;
    r.glosses = std::move(glosses);
    r.text = std::move(text);
    return r;
  };
  const std::vector<corpus::SampleRecord> s{sample("s1", 100, {"A", "B", "A"}, "天氣好"),
                                            sample("s2", 125, {"B", "C"}, "天 好"),
                                            sample("s3", 75, {"A", "D", "D"}, "天雨")};
  corpus::SplitAssignment a;
  a.split_of = {{"s1", corpus::Split::train}, {"s2", corpus::Split::train}, {"s3", corpus::Split::dev}};
  const auto st = corpus::compute_stats(s, a);
  if (st.train != corpus::SplitStats{9.0 / 3600, 2, 3, 5, std::nullopt, 1, 3, 5, std::nullopt, 1})
    return fail("train row differs");
  if (st.dev != corpus::SplitStats{3.0 / 3600, 1, 2, 3, 1, 1, 2, 2, 1, 2}) return fail("dev row differs");
  if (st.test != corpus::SplitStats{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}) return fail("test row differs");
  if (st.overall != corpus::SplitStats{12.0 / 3600, 3, 4, 8, std::nullopt, 1, 4, 7, std::nullopt, 2})
    return fail("overall row differs");

  for (std::uint64_t c = 0; c < 20; ++c) {
    const auto samples = zipf_corpus(7000 + c, 500);
    const auto z = corpus::compute_stats(samples, corpus::make_split(samples, {}, c));
    if (z.train.running_glosses + z.dev.running_glosses + z.test.running_glosses != z.overall.running_glosses)
      return fail("running glosses not additive in corpus", c);
  }
  return {};
}

std::string signal_stack() {
  std::mt19937 gen(1009);
  std::uniform_real_distribution<float> px(0.0f, 1.0f);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 8, h = 4, k = static_cast<int>(gen() % 12);
    std::vector<int> lengths(k + 1);
    for (auto& l : lengths) l = 4 + static_cast<int>(gen() % 60);
    std::vector<float> pixels;
    std::vector<float> pattern(w * h);
    for (int seg = 0; seg <= k; ++seg) {
      for (auto& p : pattern) p = px(gen);
      for (int t = 0; t < lengths[seg]; ++t) pixels.insert(pixels.end(), pattern.begin(), pattern.end());
    }
    const FrameStream stream("acc", 25.0, w, h, pixels);
    const auto transitions = detect_transitions(temporal_laplacian(stream), 0.02);
    if (static_cast<int>(transitions.size()) != k)
      return fail("trial", trial, "switches", k, "transitions", transitions.size());
  }
  for (int trial = 0; trial < 500; ++trial) {
    ScoreStream s{"acc", 25.0, std::vector<float>(1 + gen() % 5000)};
    float level = 0.0f;
    for (auto& v : s.scores) {
      if (gen() % 40 == 0) level = px(gen);
      v = level;
    }
    for (const auto& seg : filter_by_duration(binarize_and_segment(s, 0.5f), 25.0, {}))
      if (seg.duration_seconds(25.0) < 3.0 || seg.duration_seconds(25.0) > 15.0)
        return fail("clip of", seg.duration_seconds(25.0), "seconds in trial", trial);
  }
  return {};
}

std::string end_to_end() {
  const auto root = fs::temp_directory_path() / ("slc_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    synth::SynthSpec spec;
    spec.seed = seed;
    char id[16];
    std::snprintf(id, sizeof id, "ep%02llu", static_cast<unsigned long long>(seed));
    synth::write_episode(root / "input" / id, synth::synth_episode(spec, id));
  }
  pipeline::PipelineConfig config;
  config.input = root / "input";
  config.work = root / "work";
  pipeline::run_all(config);
  for (const auto& ep : pipeline::discover_episodes(config.input))
    if (auto m = e2e_mismatch(config.work / ep.id / pipeline::kAlignedFile, ep.dir / "truth.jsonl");
        !m.empty())
      return m;
  fs::remove_all(root);
  return {};
}

std::string bleu_rouge() {
  const std::vector<metrics::Tokens> same{metrics::char_tokens("今天天氣很好"),
                                          metrics::char_tokens("明天下雨")};
  const auto perfect = metrics::bleu(same, same, 4);
  for (int n = 0; n < 4; ++n)
    if (std::abs(perfect.bleu[n] - 100.0) > 1e-9) return fail("identical BLEU", n + 1, perfect.bleu[n]);
  if (std::abs(metrics::rouge_l(same, same) - 100.0) > 1e-9) return fail("identical ROUGE-L");

  const std::vector<metrics::Tokens> h{metrics::char_tokens("今天天氣好好"), metrics::char_tokens("溫度二十度")};
  const std::vector<metrics::Tokens> r{metrics::char_tokens("今天天氣很好"),
                                       metrics::char_tokens("溫度是二十五度")};
  const auto got = metrics::bleu(h, r, 2);
  for (int n = 1; n <= 2; ++n)
    if (std::abs(got.bleu[n - 1] - oracle::bleu(h, r, n)) > 1e-9)
      return fail("BLEU", n, got.bleu[n - 1], "oracle", oracle::bleu(h, r, n));

  const std::vector<metrics::Tokens> ab{metrics::char_tokens("AB")}, abc{metrics::char_tokens("ABC")};
  const double rouge = metrics::rouge_l(ab, abc, 1.0);
  if (std::abs(rouge - 80.0) > 1e-9) return fail("ROUGE-L", rouge);
  return {};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"wer-fixture", 1.0, wer_fixture},
      {"dtw-oracle", 30.0, dtw_oracle},
      {"edit-distance", 0.0, edit_distance_oracle},
      {"regrouping", 0.0, regroup_checks},
      {"gloss-grammar", 0.0, gloss_checks},
      {"canonical-scoring", 0.0, canonical_scoring},
      {"splitter", 0.0, splitter},
      {"statistics", 0.0, statistics},
      {"signal-stack", 0.0, signal_stack},
      {"end-to-end", 60.0, end_to_end},
      {"bleu-rouge", 0.0, bleu_rouge},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      error = c.check();
    } catch (const std::exception& e) {
      error = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (error.empty() && c.time_limit_s > 0 && secs > c.time_limit_s)
      error = fail("took", secs, "s, limit", c.time_limit_s, "s");
    std::printf("%s %-18s %8.3f s%s%s\n", error.empty() ? "PASS" : "FAIL", c.name.c_str(), secs,
                error.empty() ? "" : "  ", error.c_str());
    failures += !error.empty();
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
