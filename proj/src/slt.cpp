#include "mathsearch/slt.hpp"

#include <utility>

namespace mathsearch {

std::string_view relation_name(Relation rel) noexcept {
  switch (rel) {
    case Relation::Next: return "NEXT";
    case Relation::Super: return "SUPER";
    case Relation::Sub: return "SUB";
    case Relation::Above: return "ABOVE";
    case Relation::Below: return "BELOW";
    case Relation::Within: return "WITHIN";
  }
  return "";
}

std::optional<Relation> relation_from_name(std::string_view name) noexcept {
  for (Relation rel : kAllRelations) {
    if (relation_name(rel) == name) return rel;
  }
  return std::nullopt;
}

std::string matrix_label(std::size_t rows, std::size_t cols) {
  return "matrix" + std::to_string(rows) + "x" + std::to_string(cols);
}

MatrixPayload::MatrixPayload(std::size_t r, std::size_t c)
    : rows(r), cols(c), cells(r * c) {}

bool operator==(const MatrixPayload& a, const MatrixPayload& b) {
  return a.rows == b.rows && a.cols == b.cols && a.cells == b.cells;
}

SymbolNode::SymbolNode(std::string label) : label_(std::move(label)) {}

SymbolNode SymbolNode::make_matrix(MatrixPayload payload) {
  SymbolNode node(matrix_label(payload.rows, payload.cols));
  node.matrix_ = std::make_unique<MatrixPayload>(std::move(payload));
  return node;
}

SymbolNode::SymbolNode(const SymbolNode& other) : label_(other.label_) {
  for (std::size_t i = 0; i < kRelationCount; ++i) {
    if (other.children_[i]) {
      children_[i] = std::make_unique<SymbolNode>(*other.children_[i]);
    }
  }
  if (other.matrix_) matrix_ = std::make_unique<MatrixPayload>(*other.matrix_);
}

SymbolNode& SymbolNode::operator=(const SymbolNode& other) {
  if (this != &other) {
    SymbolNode copy(other);
    *this = std::move(copy);
  }
  return *this;
}

SymbolNode::SymbolNode(SymbolNode&&) noexcept = default;
SymbolNode& SymbolNode::operator=(SymbolNode&&) noexcept = default;
SymbolNode::~SymbolNode() = default;

void SymbolNode::set_label(std::string label) { label_ = std::move(label); }

SymbolNode& SymbolNode::set_child(Relation rel, SymbolNode node) {
  auto& slot = children_[static_cast<std::size_t>(rel)];
  slot = std::make_unique<SymbolNode>(std::move(node));
  return *slot;
}

std::optional<SymbolNode> SymbolNode::take_child(Relation rel) {
  auto& slot = children_[static_cast<std::size_t>(rel)];
  if (!slot) return std::nullopt;
  std::optional<SymbolNode> out(std::move(*slot));
  slot.reset();
  return out;
}

bool SymbolNode::is_leaf() const noexcept {
  for (const auto& c : children_) {
    if (c) return false;
  }
  return true;
}

bool operator==(const SymbolNode& a, const SymbolNode& b) {
  if (a.label_ != b.label_) return false;
  for (std::size_t i = 0; i < kRelationCount; ++i) {
    const auto* ca = a.children_[i].get();
    const auto* cb = b.children_[i].get();
    if ((ca == nullptr) != (cb == nullptr)) return false;
    if (ca && !(*ca == *cb)) return false;
  }
  if ((a.matrix_ == nullptr) != (b.matrix_ == nullptr)) return false;
  return !a.matrix_ || *a.matrix_ == *b.matrix_;
}

namespace {

// Structural characters of the key grammar are escaped inside labels.
void append_escaped(std::string& out, std::string_view label) {
  for (char ch : label) {
    switch (ch) {
      case '[': case ']': case '{': case '}':
      case ',': case ';': case ':': case '\\':
        out.push_back('\\');
        [[fallthrough]];
      default:
        out.push_back(ch);
    }
  }
}

void append_key(std::string& out, const SymbolNode& node) {
  append_escaped(out, node.label());
  if (const auto* m = node.matrix()) {
    out.push_back('{');
    for (std::size_t r = 0; r < m->rows; ++r) {
      if (r > 0) out.push_back(';');
      for (std::size_t c = 0; c < m->cols; ++c) {
        if (c > 0) out.push_back(',');
        if (const auto& cell = m->at(r, c)) append_key(out, *cell);
      }
    }
    out.push_back('}');
  }
  for (Relation rel : kAllRelations) {
    if (const auto* child = node.child(rel)) {
      out.push_back('[');
      out.append(relation_name(rel));
      out.push_back(':');
      append_key(out, *child);
      out.push_back(']');
    }
  }
}

}  // namespace

std::string canonical_key(const SymbolNode& node) {
  std::string out;
  append_key(out, node);
  return out;
}

std::string canonical_key(const SymbolLayoutTree& tree) {
  return canonical_key(tree.root());
}

std::size_t symbol_count(const SymbolNode& node) {
  std::size_t n = 1;
  if (const auto* m = node.matrix()) {
    for (const auto& cell : m->cells) {
      if (cell) n += symbol_count(*cell);
    }
  }
  for (Relation rel : kAllRelations) {
    if (const auto* child = node.child(rel)) n += symbol_count(*child);
  }
  return n;
}

std::size_t symbol_count(const SymbolLayoutTree& tree) {
  return symbol_count(tree.root());
}

std::optional<SymbolNode> link_baseline(std::vector<SymbolNode> nodes) {
  std::optional<SymbolNode> head;
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    SymbolNode node = std::move(*it);
    if (head) {
      SymbolNode* tail = &node;
      while (tail->child(Relation::Next)) tail = tail->child(Relation::Next);
      tail->set_child(Relation::Next, std::move(*head));
    }
    head = std::move(node);
  }
  return head;
}

}  // namespace mathsearch
