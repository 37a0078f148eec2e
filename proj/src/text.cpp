#include "mathsearch/text.hpp"

#include <cctype>

#include "mathsearch/errors.hpp"

namespace mathsearch {

namespace {

bool is_word_byte(char ch) {
  const auto u = static_cast<unsigned char>(ch);
  return u >= 0x80 || std::isalnum(u) != 0;
}

}  // namespace

std::vector<std::string> tokenize_terms(std::string_view text) {
  std::vector<std::string> terms;
  std::string current;
  for (char ch : text) {
    if (is_word_byte(ch)) {
      current.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(ch))));
    } else if (!current.empty()) {
      terms.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) terms.push_back(std::move(current));
  return terms;
}

std::vector<TextSegment> split_math(std::string_view text) {
  std::vector<TextSegment> out;
  std::string prose;
  std::size_t prose_start = 0;
  std::size_t i = 0;
  auto flush_prose = [&] {
    if (!prose.empty()) out.push_back({false, std::move(prose), prose_start});
    prose.clear();
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\\' && i + 1 < text.size() && text[i + 1] == '$') {
      if (prose.empty()) prose_start = i;
      prose.push_back('$');
      i += 2;
      continue;
    }
    if (ch != '$') {
      if (prose.empty()) prose_start = i;
      prose.push_back(ch);
      ++i;
      continue;
    }
    const bool display = i + 1 < text.size() && text[i + 1] == '$';
    const std::string_view delim = display ? "$$" : "$";
    const std::size_t open = i;
    const std::size_t body = i + delim.size();
    std::size_t close = body;
    while (true) {
      close = text.find(delim, close);
      if (close == std::string_view::npos) {
        throw ParseError(open, "unterminated '$' formula");
      }
      if (close > body && text[close - 1] == '\\') {
        ++close;
        continue;
      }
      break;
    }
    flush_prose();
    out.push_back({true, std::string(text.substr(body, close - body)), body});
    i = close + delim.size();
  }
  flush_prose();
  return out;
}

}  // namespace mathsearch
