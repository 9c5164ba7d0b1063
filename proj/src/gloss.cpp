#include "slc/gloss.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "slc/utf8.hpp"

namespace slc::gloss {
namespace {

bool is_reserved(char32_t c) { return c == U'+' || c == U'(' || c == U')' || c == U'='; }

std::string describe_parse_error(const Diagnostic& d) {
  std::string msg = d.message + " at offset " + std::to_string(d.offset) +
                    " (token " + std::to_string(d.token_index + 1) + ")";
  if (!d.expected.empty()) msg += ": expected " + d.expected;
  if (!d.found.empty()) msg += ", found '" + d.found + "'";
  return msg;
}

class Parser {
 public:
  Parser(std::string_view raw, std::u32string text)
      : raw_(raw), text_(std::move(text)) {
    byte_at_.reserve(text_.size() + 1);
    std::size_t b = 0;
    for (char32_t c : text_) {
      byte_at_.push_back(b);
      std::string tmp;
      utf8::append(tmp, c);
      b += tmp.size();
    }
    byte_at_.push_back(b);
  }

  GlossAnnotation run() {
    GlossAnnotation ann;
    ann.raw = std::string(raw_);
    std::size_t i = 0;
    while (true) {
      while (i < text_.size() && utf8::is_space(text_[i])) ++i;
      if (i >= text_.size()) break;
      std::size_t end = i;
      while (end < text_.size() && !utf8::is_space(text_[end])) ++end;
      pos_ = i;
      end_ = end;
      ann.tokens.push_back(parse_token());
      ++token_index_;
      i = end;
    }
    if (ann.tokens.empty()) fail(0, "non-empty annotation", "empty annotation");
    return ann;
  }

 private:
  [[noreturn]] void fail(std::size_t at, std::string expected, std::string message,
                         std::size_t found_len = 1) {
    Diagnostic d;
    d.offset = at;
    d.byte_offset = byte_at_[std::min(at, text_.size())];
    d.token_index = token_index_;
    d.expected = std::move(expected);
    if (at < end_) {
      const std::size_t stop = std::min(at + found_len, end_);
      d.found = utf8::encode(std::u32string_view(text_).substr(at, stop - at));
    }
    d.message = std::move(message);
    throw ParseError(std::move(d));
  }

  bool at_end() const { return pos_ >= end_; }
  char32_t peek(std::size_t ahead = 0) const {
    return pos_ + ahead < end_ ? text_[pos_ + ahead] : U'\0';
  }

  GlossToken parse_token() {
    Compound head = parse_compound(/*in_homolist=*/false);
    if (at_end()) return head;
    if (peek() == U'(' && peek(1) == U'=') {
      const std::size_t open = pos_;
      pos_ += 2;
      HomosignGroup group;
      group.members.push_back(std::move(head));
      while (true) {
        if (at_end()) fail(open, "')'", "unbalanced parenthesis");
        if (peek() == U'=' || peek() == U')')
          fail(pos_, "homosign member", "empty homosign member");
        const std::size_t member_at = pos_;
        Compound member = parse_compound(/*in_homolist=*/true);
        if (std::find(group.members.begin(), group.members.end(), member) !=
            group.members.end())
          fail(member_at, "distinct homosign member", "duplicate homosign member",
               pos_ - member_at);
        group.members.push_back(std::move(member));
        if (at_end()) fail(open, "')'", "unbalanced parenthesis");
        if (peek() == U'=') {
          ++pos_;
          continue;
        }
        if (peek() == U')') {
          ++pos_;
          break;
        }
        fail(pos_, "'=' or ')'", "unexpected character");
      }
      if (!at_end()) fail(pos_, "end of token", "unexpected text after homosign group",
                          end_ - pos_);
      return group;
    }
    if (peek() == U')') fail(pos_, "'+' or end of token", "unbalanced parenthesis");
    fail(pos_, "'+' or end of token", "unexpected character");
  }

  Compound parse_compound(bool in_homolist) {
    Compound c;
    c.units.push_back(parse_unit(in_homolist));
    while (!at_end() && peek() == U'+') {
      ++pos_;
      c.units.push_back(parse_unit(in_homolist));
    }
    return c;
  }

  GlossUnit parse_unit(bool in_homolist) {
    GlossUnit u;
    const std::size_t start = pos_;
    while (!at_end() && !is_reserved(peek())) ++pos_;
    if (pos_ == start) {
      if (!at_end() && peek() == U')') fail(pos_, "gloss word", "unbalanced parenthesis");
      fail(pos_, "gloss word", "empty base");
    }
    u.base = utf8::encode(std::u32string_view(text_).substr(start, pos_ - start));

    while (!at_end() && peek() == U'(') {
      const std::size_t open = pos_;
      const char32_t kind = peek(1);
      if (kind == U'=') {
        if (in_homolist) fail(open, "'=' or ')'", "nested homosign group", 2);
        break;  // homolist; handled by the token parser
      }
      if (kind == U'\0') fail(open, "')'", "unbalanced parenthesis");
      if (kind == U'?') {
        if (peek(2) != U')') fail(open, "')'", "unbalanced parenthesis", 2);
        if (u.ill_performed) fail(open, "single '(?)'", "duplicate ill-performed marker", 3);
        u.ill_performed = true;
        pos_ += 3;
        continue;
      }
      if (kind >= U'0' && kind <= U'9') {
        std::size_t q = pos_ + 1;
        unsigned long long value = 0;
        while (q < end_ && text_[q] >= U'0' && text_[q] <= U'9') {
          value = value * 10 + (text_[q] - U'0');
          if (value > 1000000) fail(open, "variant index", "variant index too large", q - open + 1);
          ++q;
        }
        if (q >= end_ || text_[q] != U')') fail(open, "')'", "unbalanced parenthesis", q - open);
        if (value == 0) fail(open, "variant index >= 1", "variant index must be positive", q - open + 1);
        if (u.variant) fail(open, "single variant index", "duplicate variant index", q - open + 1);
        u.variant = static_cast<unsigned>(value);
        pos_ = q + 1;
        continue;
      }
      fail(pos_ + 1, "'?', digits or '='", "unknown modifier");
    }
    return u;
  }

  std::string_view raw_;
  std::u32string text_;
  std::vector<std::size_t> byte_at_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  std::size_t token_index_ = 0;
};

void append_units(std::vector<std::string>& out, const Compound& c) {
  for (const auto& u : c.units) out.push_back(u.base);
}

}  // namespace

ParseError::ParseError(Diagnostic d)
    : Error(ErrorKind::parse, describe_parse_error(d)), diag_(std::move(d)) {}

GlossAnnotation parse(std::string_view raw) {
  std::size_t bad = 0;
  auto text = utf8::try_decode(raw, &bad);
  if (!text) {
    Diagnostic d;
    d.byte_offset = bad;
    d.offset = utf8::try_decode(raw.substr(0, bad))->size();
    d.expected = "UTF-8 text";
    d.message = "invalid UTF-8";
    throw ParseError(std::move(d));
  }
  return Parser(raw, *std::move(text)).run();
}

std::vector<Diagnostic> validate(std::string_view raw) {
  try {
    parse(raw);
    return {};
  } catch (const ParseError& e) {
    return {e.diagnostic()};
  }
}

std::string render(const GlossUnit& unit) {
  std::string out = unit.base;
  if (unit.variant) out += "(" + std::to_string(*unit.variant) + ")";
  if (unit.ill_performed) out += "(?)";
  return out;
}

std::string render(const Compound& compound) {
  std::string out;
  for (std::size_t i = 0; i < compound.units.size(); ++i) {
    if (i) out.push_back('+');
    out += render(compound.units[i]);
  }
  return out;
}

std::string render(const GlossToken& token) {
  if (const auto* c = std::get_if<Compound>(&token)) return render(*c);
  const auto& g = std::get<HomosignGroup>(token);
  std::string out = render(g.members.front()) + "(";
  for (std::size_t i = 1; i < g.members.size(); ++i) out += "=" + render(g.members[i]);
  return out + ")";
}

std::string render(const GlossAnnotation& annotation) {
  std::string out;
  for (std::size_t i = 0; i < annotation.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += render(annotation.tokens[i]);
  }
  return out;
}

Compound strip_modifiers(Compound compound) {
  for (auto& u : compound.units) {
    u.ill_performed = false;
    u.variant.reset();
  }
  return compound;
}

GlossAnnotation normalize_units(GlossAnnotation annotation) {
  for (auto& token : annotation.tokens) {
    if (auto* c = std::get_if<Compound>(&token)) {
      *c = strip_modifiers(std::move(*c));
      continue;
    }
    auto& g = std::get<HomosignGroup>(token);
    std::vector<Compound> members;
    for (auto& m : g.members) {
      Compound s = strip_modifiers(std::move(m));
      if (std::find(members.begin(), members.end(), s) == members.end())
        members.push_back(std::move(s));
    }
    if (members.size() == 1)
      token = std::move(members.front());
    else
      g.members = std::move(members);
  }
  annotation.raw = render(annotation);
  return annotation;
}

std::size_t representative_index(std::span<const Compound> members) {
  std::size_t best = 0;
  std::string best_text = members.empty() ? std::string() : render(members[0]);
  for (std::size_t i = 1; i < members.size(); ++i) {
    std::string text = render(members[i]);
    const auto ci = compound_count(members[i]), cb = compound_count(members[best]);
    if (ci > cb || (ci == cb && text < best_text)) {
      best = i;
      best_text = std::move(text);
    }
  }
  return best;
}

HomosignRegistry HomosignRegistry::build(std::span<const HomosignGroup> groups) {
  // Union-find over rendered, modifier-free members.
  std::vector<std::size_t> parent;
  std::vector<Compound> nodes;
  std::unordered_map<std::string, std::size_t> id;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& g : groups) {
    std::size_t first = SIZE_MAX;
    for (const auto& raw_member : g.members) {
      Compound m = strip_modifiers(raw_member);
      std::string key = render(m);
      auto [it, inserted] = id.try_emplace(std::move(key), nodes.size());
      if (inserted) {
        parent.push_back(nodes.size());
        nodes.push_back(std::move(m));
      }
      if (first == SIZE_MAX) {
        first = it->second;
      } else {
        const std::size_t a = find(first), b = find(it->second);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  HomosignRegistry reg;
  std::map<std::size_t, std::size_t> class_of_root;  // ordered by first appearance
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const std::size_t root = find(n);
    auto [it, inserted] = class_of_root.try_emplace(root, reg.classes_.size());
    if (inserted) reg.classes_.emplace_back();
    reg.classes_[it->second].members.push_back(nodes[n]);
  }
  for (std::size_t k = 0; k < reg.classes_.size(); ++k) {
    auto& cls = reg.classes_[k];
    std::sort(cls.members.begin(), cls.members.end(),
              [](const Compound& a, const Compound& b) { return render(a) < render(b); });
    cls.representative = cls.members[representative_index(cls.members)];
    for (const auto& m : cls.members) reg.index_[render(m)] = k;
  }
  return reg;
}

HomosignRegistry HomosignRegistry::load(std::istream& in) {
  std::vector<HomosignGroup> groups;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    GlossAnnotation ann;
    try {
      ann = parse(line);
    } catch (const ParseError& e) {
      throw Error(ErrorKind::data,
                  "registry line " + std::to_string(lineno) + ": " + e.what());
    }
    HomosignGroup g;
    for (auto& t : ann.tokens) {
      if (!std::holds_alternative<Compound>(t))
        throw Error(ErrorKind::data,
                    "registry line " + std::to_string(lineno) + ": nested group");
      g.members.push_back(std::get<Compound>(std::move(t)));
    }
    groups.push_back(std::move(g));
  }
  HomosignRegistry reg = build(groups);
  return reg;
}

void HomosignRegistry::dump(std::ostream& out) const {
  for (const auto& cls : classes_) {
    out << render(cls.representative);
    for (const auto& m : cls.members)
      if (!(m == cls.representative)) out << ' ' << render(m);
    out << '\n';
  }
}

const Compound* HomosignRegistry::representative_of(const Compound& c) const {
  const auto it = index_.find(render(strip_modifiers(c)));
  return it == index_.end() ? nullptr : &classes_[it->second].representative;
}

const Compound* HomosignRegistry::representative_of_gloss(std::string_view gloss) const {
  const auto it = index_.find(std::string(gloss));
  return it == index_.end() ? nullptr : &classes_[it->second].representative;
}

std::vector<HomosignGroup> homosign_groups(const GlossAnnotation& annotation) {
  std::vector<HomosignGroup> out;
  for (const auto& t : normalize_units(annotation).tokens)
    if (const auto* g = std::get_if<HomosignGroup>(&t)) out.push_back(*g);
  return out;
}

std::vector<std::string> to_training_sequence(const GlossAnnotation& annotation,
                                              const HomosignRegistry* registry) {
  std::vector<std::string> out;
  for (const auto& token : annotation.tokens) {
    if (const auto* c = std::get_if<Compound>(&token)) {
      const Compound* rep = registry ? registry->representative_of(*c) : nullptr;
      append_units(out, rep ? *rep : *c);
      continue;
    }
    const auto& g = std::get<HomosignGroup>(token);
    const Compound* rep = registry ? registry->representative_of(g.members.front()) : nullptr;
    if (rep == nullptr) {
      std::vector<Compound> members;
      for (const auto& m : g.members) members.push_back(strip_modifiers(m));
      append_units(out, members[representative_index(members)]);
    } else {
      append_units(out, *rep);
    }
  }
  return out;
}

std::vector<std::string> canonicalize(std::span<const std::string> glosses,
                                      const HomosignRegistry& registry) {
  std::vector<std::string> out;
  out.reserve(glosses.size());
  for (const auto& g : glosses) {
    const Compound* rep = registry.representative_of_gloss(g);
    out.push_back(rep ? render(*rep) : g);
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>>
canonicalize_for_scoring(std::span<const std::string> hyp,
                         std::span<const std::string> ref,
                         const HomosignRegistry& registry) {
  return {canonicalize(hyp, registry), canonicalize(ref, registry)};
}

}  // namespace slc::gloss
