#pragma once

// Annotation grammar for gloss transcriptions.
//
//   annotation := token (ws+ token)*
//   token      := compound homolist?
//   compound   := unit ('+' unit)*
//   unit       := base ('(?)' | '(' digits ')')*
//   homolist   := '(=' compound ('=' compound)* ')'
//
// X+Y is a compound sign, X(?) an ill-performed sign, X(n) the n-th sign
// sharing gloss X, and X(=Y=Z) a homosign group whose members are all valid
// glosses of one sign.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "slc/error.hpp"

namespace slc::gloss {

struct GlossUnit {
  std::string base;
  bool ill_performed = false;
  std::optional<unsigned> variant;

  friend bool operator==(const GlossUnit&, const GlossUnit&) = default;
};

struct Compound {
  std::vector<GlossUnit> units;

  friend bool operator==(const Compound&, const Compound&) = default;
};

struct HomosignGroup {
  std::vector<Compound> members;  // at least two

  friend bool operator==(const HomosignGroup&, const HomosignGroup&) = default;
};

using GlossToken = std::variant<Compound, HomosignGroup>;

struct GlossAnnotation {
  std::vector<GlossToken> tokens;
  std::string raw;

  // Structural equality; the raw spelling is not compared.
  friend bool operator==(const GlossAnnotation& a, const GlossAnnotation& b) {
    return a.tokens == b.tokens;
  }
};

struct Diagnostic {
  std::size_t offset = 0;       // in unicode scalar values
  std::size_t byte_offset = 0;  // in the UTF-8 input
  std::size_t token_index = 0;
  std::string expected;         // token class that would have been valid
  std::string found;            // offending substring
  std::string message;
};

class ParseError : public Error {
 public:
  explicit ParseError(Diagnostic d);
  const Diagnostic& diagnostic() const noexcept { return diag_; }

 private:
  Diagnostic diag_;
};

GlossAnnotation parse(std::string_view raw);

// Empty result means the annotation is valid. Never throws.
std::vector<Diagnostic> validate(std::string_view raw);

std::string render(const GlossUnit& unit);
std::string render(const Compound& compound);
std::string render(const GlossToken& token);
std::string render(const GlossAnnotation& annotation);

// Clears ill-performed flags and variant indices everywhere. Homosign members
// that become identical are merged; a group left with one member becomes a
// plain compound.
GlossAnnotation normalize_units(GlossAnnotation annotation);
Compound strip_modifiers(Compound compound);

inline std::size_t compound_count(const Compound& c) { return c.units.size(); }

// Highest compound count, then lowest byte-wise rendering.
std::size_t representative_index(std::span<const Compound> members);

struct HomosignClass {
  Compound representative;
  std::vector<Compound> members;  // sorted by rendering; includes representative
};

// Homosign groups merged globally: groups sharing any member end up in one
// class.
class HomosignRegistry {
 public:
  static HomosignRegistry build(std::span<const HomosignGroup> groups);

  // Registry dump: one class per line, representative first, members
  // space-separated.
  static HomosignRegistry load(std::istream& in);
  void dump(std::ostream& out) const;

  const std::vector<HomosignClass>& classes() const { return classes_; }
  bool empty() const { return classes_.empty(); }

  // Representative of the class containing `c` (compared after stripping
  // modifiers), or nullptr.
  const Compound* representative_of(const Compound& c) const;
  const Compound* representative_of_gloss(std::string_view gloss) const;

 private:
  std::vector<HomosignClass> classes_;
  std::unordered_map<std::string, std::size_t> index_;
};

// All homosign groups of an annotation, normalised.
std::vector<HomosignGroup> homosign_groups(const GlossAnnotation& annotation);

// Flat gloss sequence. Without a registry (training) each homosign group is
// replaced by its own representative; with one (testing) every compound in a
// registry class is replaced by the class representative. Compounds are then
// split into their units.
std::vector<std::string> to_training_sequence(
    const GlossAnnotation& annotation, const HomosignRegistry* registry = nullptr);

// Replaces every gloss that is a registry member by the rendering of its
// class representative, in both sequences.
std::pair<std::vector<std::string>, std::vector<std::string>>
canonicalize_for_scoring(std::span<const std::string> hyp,
                         std::span<const std::string> ref,
                         const HomosignRegistry& registry);

std::vector<std::string> canonicalize(std::span<const std::string> glosses,
                                      const HomosignRegistry& registry);

}  // namespace slc::gloss
