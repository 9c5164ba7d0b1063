#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace slc::utf8 {

// Decodes UTF-8 into unicode scalar values. Throws Error(data) naming the
// byte offset of the first invalid sequence.
std::u32string decode(std::string_view text);

// Non-throwing variant; on failure stores the offending byte offset.
std::optional<std::u32string> try_decode(std::string_view text,
                                         std::size_t* bad_offset = nullptr);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

inline bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x3000;  // ideographic space
}

}  // namespace slc::utf8
