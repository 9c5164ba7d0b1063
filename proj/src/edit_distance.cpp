#include "slc/edit_distance.hpp"

#include "slc/utf8.hpp"

namespace slc {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::u32string ca = utf8::decode(a);
  const std::u32string cb = utf8::decode(b);
  return levenshtein<char32_t>(ca, cb);
}

}  // namespace slc
