#pragma once

#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slc/gloss.hpp"

namespace gloss_gen {

using namespace slc::gloss;

inline GlossUnit unit(std::string base, bool ill = false, std::optional<unsigned> variant = {}) {
  return {std::move(base), ill, variant};
}

inline Compound compound(std::initializer_list<const char*> bases) {
  Compound c;
  for (const char* b : bases) c.units.push_back(unit(b));
  return c;
}

inline HomosignGroup homosign(std::initializer_list<Compound> members) { return {members}; }

// Random valid annotation as (canonical AST, raw spelling). The spelling
// shuffles modifier order and whitespace.
struct Generated {
  GlossAnnotation ann;
  std::string raw;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : gen_(seed) {}

  Generated next() {
    Generated g;
    const int tokens = 1 + pick(5);
    for (int t = 0; t < tokens; ++t) {
      if (t > 0) g.raw += pick(3) == 0 ? "  " : (pick(4) == 0 ? "\t" : " ");
      if (pick(4) == 0) {
        HomosignGroup h;
        std::vector<std::string> spelled;
        const int members = 2 + pick(2);
        while (static_cast<int>(h.members.size()) < members) {
          auto [c, raw] = random_compound();
          if (std::find(h.members.begin(), h.members.end(), c) != h.members.end()) continue;
          h.members.push_back(c);
          spelled.push_back(raw);
        }
        g.raw += spelled[0] + "(=";
        for (std::size_t m = 1; m < spelled.size(); ++m) g.raw += (m > 1 ? "=" : "") + spelled[m];
        g.raw += ")";
        g.ann.tokens.push_back(h);
      } else {
        auto [c, raw] = random_compound();
        g.raw += raw;
        g.ann.tokens.push_back(c);
      }
    }
    if (pick(3) == 0) g.raw = " " + g.raw + "　";
    return g;
  }

 private:
  int pick(int n) { return static_cast<int>(gen_() % static_cast<unsigned>(n)); }

  std::pair<Compound, std::string> random_compound() {
    static const std::vector<std::string> bases{"A", "B", "C", "天氣", "溫度", "X1", "好"};
    Compound c;
    std::string raw;
    const int units = 1 + pick(3);
    for (int u = 0; u < units; ++u) {
      GlossUnit gu = unit(bases[pick(static_cast<int>(bases.size()))]);
      std::vector<std::string> mods;
      if (pick(3) == 0) {
        gu.ill_performed = true;
        mods.push_back("(?)");
      }
      if (pick(3) == 0) {
        gu.variant = 1 + pick(12);
        mods.push_back("(" + std::to_string(*gu.variant) + ")");
      }
      if (mods.size() == 2 && pick(2)) std::swap(mods[0], mods[1]);
      raw += (u ? "+" : "") + gu.base;
      for (auto& m : mods) raw += m;
      c.units.push_back(gu);
    }
    return {c, raw};
  }

  std::mt19937_64 gen_;
};

}  // namespace gloss_gen
