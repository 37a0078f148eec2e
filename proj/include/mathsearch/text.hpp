#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mathsearch {

/// Lowercased alphanumeric runs. Bytes of multi-byte UTF-8 sequences count
/// as word characters; only ASCII letters are case-folded.
std::vector<std::string> tokenize_terms(std::string_view text);

struct TextSegment {
  bool formula = false;
  std::string text;
  /// Byte offset of the segment content in the source.
  std::size_t position = 0;
};

/// Splits prose with embedded $...$ (or $$...$$) formulas. Escaped "\$" is
/// literal text. Throws ParseError for an unterminated formula.
std::vector<TextSegment> split_math(std::string_view text);

}  // namespace mathsearch
