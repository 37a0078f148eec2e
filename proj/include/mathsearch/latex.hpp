#pragma once

// LaTeX math subset <-> symbol layout trees.
//
// Supported: single-character symbols, Greek letters and named symbol
// commands, {...} grouping, ^ and _, \frac, \sqrt (with optional index),
// \left/\right delimiters, matrix-family environments and cases, text runs
// (\text, \mbox) and wildcards ("?" or \qvar{id}). Font and spacing commands
// are dropped.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mathsearch/errors.hpp"
#include "mathsearch/slt.hpp"

namespace mathsearch {

struct LatexToken {
  enum class Kind {
    Symbol,
    Command,
    GroupOpen,
    GroupClose,
    Superscript,
    Subscript,
    AlignmentTab,
    RowBreak,
    EnvironmentBegin,
    EnvironmentEnd,
    Wildcard,
  };

  Kind kind;
  std::string text;
  std::size_t position = 0;
};

/// Splits a LaTeX string into tokens. Throws ParseError on stray characters.
std::vector<LatexToken> tokenize_latex(std::string_view src);

/// Throws ParseError (with byte position) on malformed input.
SymbolLayoutTree parse_latex(std::string_view src);

enum class LatexStyle {
  /// Every script and argument braced: "x^{2}".
  Braced,
  /// Braces omitted around single-symbol scripts: "x^2".
  Compact,
};

/// Emits LaTeX that parses back to a tree with the same canonical key.
std::string to_latex(const SymbolNode& node, LatexStyle style = LatexStyle::Braced);
std::string to_latex(const SymbolLayoutTree& tree,
                     LatexStyle style = LatexStyle::Braced);

/// True when `name` (without backslash) is a symbol command the parser
/// turns into a node labeled `name`.
bool is_symbol_command(std::string_view name);

}  // namespace mathsearch
