#pragma once

// Symbol pair tuples: the retrieval "words" of a layout tree. Every symbol is
// paired with each of its descendants, recording the path length and the net
// change in baseline position along the path.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mathsearch/slt.hpp"

namespace mathsearch {

enum class ModelVersion : std::uint8_t { V1, V2 };

std::string_view model_version_name(ModelVersion v) noexcept;
/// Accepts "v1" / "v2"; throws std::invalid_argument otherwise.
ModelVersion parse_model_version(std::string_view name);

struct TupleConfig {
  /// V2 adds leaf tuples and matrix tuples.
  ModelVersion model_version = ModelVersion::V2;
  bool emit_wildcard_expansions = true;
};

struct SymbolPairTuple {
  std::string parent;
  /// Empty for a leaf tuple.
  std::string child;
  int dist = 0;
  int vert = 0;

  bool is_leaf() const noexcept { return child.empty(); }
  friend auto operator<=>(const SymbolPairTuple&, const SymbolPairTuple&) = default;
};

struct MatrixTuple {
  enum class Kind : std::uint8_t { Dimensions, Cell };

  Kind kind = Kind::Dimensions;
  /// Dimensions: rows/cols of the grid. Cell: 1-based location.
  int row = 0;
  int col = 0;
  /// Compact LaTeX of the cell subexpression; empty for Dimensions.
  std::string payload;

  friend auto operator<=>(const MatrixTuple&, const MatrixTuple&) = default;
};

using Tuple = std::variant<SymbolPairTuple, MatrixTuple>;

/// Multiset of tuples for one expression, in generation order.
std::vector<Tuple> generate_tuples(const SymbolLayoutTree& tree,
                                   const TupleConfig& cfg);

// Key text encoding: fields joined by tabs. Sentinels mark the empty child
// of a leaf tuple and wildcard symbols.
inline constexpr std::string_view kNoneKey = "!NONE";
inline constexpr std::string_view kWildcardKey = "!?";
inline constexpr std::string_view kMatrixKey = "!matrix";
inline constexpr std::string_view kDimensionsKey = "!dims";
inline constexpr std::string_view kCellKeyPrefix = "!cell:";

std::string tuple_key(const Tuple& tuple);
std::string tuple_key(const SymbolPairTuple& tuple);
std::string tuple_key(const MatrixTuple& tuple);

/// Keys under which an indexed tuple is posted: the concrete key plus the
/// two single-wildcard generalizations of a concrete pair. Leaf tuples map
/// to themselves; a tuple whose both symbols are wildcards maps to nothing.
std::vector<std::string> expand_wildcard_keys(const SymbolPairTuple& tuple);

/// Parsed view of a pair-tuple key, or nothing for matrix keys.
struct PairKeyView {
  std::string_view parent;
  std::string_view child;
  std::string_view dist;
  std::string_view vert;
};
bool split_pair_key(std::string_view key, PairKeyView& out);

/// True when the key has a wildcard in exactly one symbol position.
bool is_single_wildcard_key(std::string_view key);
/// True when the key mentions a wildcard in any symbol position.
bool is_wildcard_key(std::string_view key);

/// The single-wildcard generalizations of a concrete indexed key (empty for
/// leaf, matrix or wildcard-bearing keys).
std::vector<std::string> key_generalizations(std::string_view key);

/// Sorted (key, count) multiset.
using TupleBag = std::vector<std::pair<std::string, std::uint32_t>>;

TupleBag make_bag(const std::vector<Tuple>& tuples);
std::uint32_t bag_size(const TupleBag& bag) noexcept;

}  // namespace mathsearch
