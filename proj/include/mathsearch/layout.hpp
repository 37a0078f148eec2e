#pragma once

// Layout analysis: labeled symbols with bounding boxes -> symbol layout tree.
//
// The main baseline is located greedily from the left, remaining symbols are
// assigned to regions (above, below, superscript, subscript, within) around
// baseline symbols, and each region is parsed recursively. Compound tokens
// such as stacked dashes are then rewritten, and a line with both a
// numerator and a denominator becomes a fraction.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mathsearch/errors.hpp"
#include "mathsearch/slt.hpp"

namespace mathsearch {

/// Canvas coordinates, y increasing downward.
struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }
};

struct PlacedSymbol {
  std::string label;
  BoundingBox bbox;
  /// Pre-grouped grid cell this symbol belongs to, if any.
  std::optional<int> group;
};

struct LayoutParams {
  /// Vertical position of the reference centroid within a symbol's box.
  double centroid_ratio = 0.5;
  /// Half-width of the same-baseline band, as a fraction of symbol height.
  double region_threshold = 0.25;
  /// Minimum row/column gap, as a fraction of the median cell height.
  double grid_gap = 0.5;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

using SpatialRegion = Relation;

/// Symbols on the main baseline, left to right.
std::vector<PlacedSymbol> extract_baseline(std::span<const PlacedSymbol> symbols,
                                           const LayoutParams& params = {});

struct RewriteRule {
  std::string base;
  Relation relation;
  std::string attached;
  std::string result;
};

/// Stacked dashes -> "=", dash and plus -> "±" (both stacking orders).
const std::vector<RewriteRule>& default_rewrite_rules();

/// Applies the rules until no rule fires. Each application merges the
/// attached child into its base, reducing the symbol count by one.
SymbolLayoutTree rewrite_compounds(SymbolLayoutTree tree,
                                   std::span<const RewriteRule> rules);
SymbolLayoutTree rewrite_compounds(SymbolLayoutTree tree);

/// Throws std::invalid_argument for empty input or degenerate boxes.
SymbolLayoutTree parse_layout(std::span<const PlacedSymbol> symbols,
                              const LayoutParams& params = {});
SymbolLayoutTree parse_layout(std::span<const PlacedSymbol> symbols,
                              const LayoutParams& params,
                              std::span<const RewriteRule> rules);

struct GridCell {
  std::size_t row = 1;  // 1-based
  std::size_t col = 1;  // 1-based
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Row/column for each group from gaps in the box projections. Throws
/// AmbiguousGrid when two groups land in the same cell.
std::vector<GridCell> detect_grid(std::span<const std::vector<PlacedSymbol>> groups,
                                  const LayoutParams& params = {});

/// A matrix node whose cells are the parsed groups.
SymbolLayoutTree parse_grid(std::span<const std::vector<PlacedSymbol>> groups,
                            const LayoutParams& params = {});

/// One JSON object per line: {"label": str, "bbox": [xmin, ymin, xmax, ymax]}
/// with an optional integer "group". Throws std::invalid_argument.
std::vector<PlacedSymbol> read_placed_symbols(std::istream& in);
std::vector<RewriteRule> read_rewrite_rules(std::istream& in);

}  // namespace mathsearch
