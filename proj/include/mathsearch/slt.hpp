#pragma once

// Symbol layout trees: the appearance encoding of a formula. Symbols sit on
// writing lines (baselines) and are connected by spatial relations.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mathsearch {

enum class Relation : std::uint8_t { Next, Super, Sub, Above, Below, Within };

inline constexpr std::size_t kRelationCount = 6;

/// All relations in canonical serialization order.
inline constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::Next,  Relation::Super, Relation::Sub,
    Relation::Above, Relation::Below, Relation::Within};

/// Change in baseline position when following an edge of this relation.
constexpr int vert_weight(Relation rel) noexcept {
  switch (rel) {
    case Relation::Super:
    case Relation::Above:
      return 1;
    case Relation::Sub:
    case Relation::Below:
      return -1;
    case Relation::Next:
    case Relation::Within:
      return 0;
  }
  return 0;
}

std::string_view relation_name(Relation rel) noexcept;
std::optional<Relation> relation_from_name(std::string_view name) noexcept;

inline constexpr std::string_view kWildcardLabel = "?";
inline constexpr std::string_view kFractionLabel = "FRAC";
inline constexpr std::string_view kRootLabel = "SQRT";

struct MatrixPayload;

class SymbolNode {
 public:
  explicit SymbolNode(std::string label);
  /// Builds a grid node labeled "matrix{rows}x{cols}".
  static SymbolNode make_matrix(MatrixPayload payload);

  SymbolNode(const SymbolNode& other);
  SymbolNode& operator=(const SymbolNode& other);
  SymbolNode(SymbolNode&&) noexcept;
  SymbolNode& operator=(SymbolNode&&) noexcept;
  ~SymbolNode();

  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label);

  const SymbolNode* child(Relation rel) const noexcept {
    return children_[static_cast<std::size_t>(rel)].get();
  }
  SymbolNode* child(Relation rel) noexcept {
    return children_[static_cast<std::size_t>(rel)].get();
  }
  bool has_child(Relation rel) const noexcept { return child(rel) != nullptr; }

  /// Replaces any existing child for `rel`; returns the stored child.
  SymbolNode& set_child(Relation rel, SymbolNode node);
  std::optional<SymbolNode> take_child(Relation rel);

  bool is_leaf() const noexcept;
  bool is_wildcard() const noexcept { return label_ == kWildcardLabel; }

  const MatrixPayload* matrix() const noexcept { return matrix_.get(); }

  friend bool operator==(const SymbolNode& a, const SymbolNode& b);

 private:
  std::string label_;
  std::array<std::unique_ptr<SymbolNode>, kRelationCount> children_;
  std::unique_ptr<MatrixPayload> matrix_;
};

/// Grid of independent cell expressions, row-major. A cell may be empty.
struct MatrixPayload {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::optional<SymbolNode>> cells;

  MatrixPayload() = default;
  MatrixPayload(std::size_t r, std::size_t c);

  const std::optional<SymbolNode>& at(std::size_t row, std::size_t col) const {
    return cells.at(row * cols + col);
  }
  std::optional<SymbolNode>& at(std::size_t row, std::size_t col) {
    return cells.at(row * cols + col);
  }

  friend bool operator==(const MatrixPayload& a, const MatrixPayload& b);
};

std::string matrix_label(std::size_t rows, std::size_t cols);

class SymbolLayoutTree {
 public:
  explicit SymbolLayoutTree(SymbolNode root) : root_(std::move(root)) {}

  const SymbolNode& root() const noexcept { return root_; }
  SymbolNode& root() noexcept { return root_; }

  friend bool operator==(const SymbolLayoutTree& a,
                         const SymbolLayoutTree& b) = default;

 private:
  SymbolNode root_;
};

/// Deterministic prefix serialization. Equal trees have equal keys and
/// structurally distinct trees never share one.
std::string canonical_key(const SymbolNode& node);
std::string canonical_key(const SymbolLayoutTree& tree);

/// Number of symbols; a matrix counts once plus the symbols of its cells.
std::size_t symbol_count(const SymbolNode& node);
std::size_t symbol_count(const SymbolLayoutTree& tree);

/// Builds a NEXT chain from the given nodes; nullopt when empty.
std::optional<SymbolNode> link_baseline(std::vector<SymbolNode> nodes);

}  // namespace mathsearch
