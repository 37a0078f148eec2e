#include "mathsearch/tuples.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mathsearch/latex.hpp"

namespace mathsearch {

std::string_view model_version_name(ModelVersion v) noexcept {
  return v == ModelVersion::V1 ? "v1" : "v2";
}

ModelVersion parse_model_version(std::string_view name) {
  if (name == "v1") return ModelVersion::V1;
  if (name == "v2") return ModelVersion::V2;
  throw std::invalid_argument("unknown model version '" + std::string(name) + "'");
}

namespace {

class Generator {
 public:
  Generator(const TupleConfig& cfg, std::vector<Tuple>& out)
      : cfg_(cfg), out_(out) {}

  void expression(const SymbolNode& root) { visit(root); }

 private:
  void visit(const SymbolNode& node) {
    for (Relation rel : kAllRelations) {
      if (const auto* child = node.child(rel)) {
        descend(node.label(), *child, 1, vert_weight(rel));
      }
    }
    if (cfg_.model_version == ModelVersion::V2 && node.is_leaf()) {
      out_.emplace_back(SymbolPairTuple{node.label(), {}, 0, 0});
    }
    if (const auto* m = node.matrix()) matrix(*m);
    for (Relation rel : kAllRelations) {
      if (const auto* child = node.child(rel)) visit(*child);
    }
  }

  void descend(const std::string& ancestor, const SymbolNode& node, int dist,
               int vert) {
    out_.emplace_back(SymbolPairTuple{ancestor, node.label(), dist, vert});
    for (Relation rel : kAllRelations) {
      if (const auto* child = node.child(rel)) {
        descend(ancestor, *child, dist + 1, vert + vert_weight(rel));
      }
    }
  }

  // Cells are independent expressions; no pair crosses the grid boundary.
  void matrix(const MatrixPayload& m) {
    if (cfg_.model_version == ModelVersion::V2) {
      out_.emplace_back(MatrixTuple{MatrixTuple::Kind::Dimensions,
                                    static_cast<int>(m.rows),
                                    static_cast<int>(m.cols), {}});
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        const auto& cell = m.at(r, c);
        if (!cell) continue;
        if (cfg_.model_version == ModelVersion::V2) {
          out_.emplace_back(MatrixTuple{MatrixTuple::Kind::Cell,
                                        static_cast<int>(r + 1),
                                        static_cast<int>(c + 1),
                                        to_latex(*cell, LatexStyle::Compact)});
        }
      }
    }
    for (const auto& cell : m.cells) {
      if (cell) visit(*cell);
    }
  }

  const TupleConfig& cfg_;
  std::vector<Tuple>& out_;
};

std::string symbol_key(std::string_view label) {
  if (label.empty()) return std::string(kNoneKey);
  if (label == kWildcardLabel) return std::string(kWildcardKey);
  return std::string(label);
}

std::string join_key(std::string_view a, std::string_view b, int x, int y) {
  std::string key;
  key.reserve(a.size() + b.size() + 8);
  key.append(a);
  key.push_back('\t');
  key.append(b);
  key.push_back('\t');
  key.append(std::to_string(x));
  key.push_back('\t');
  key.append(std::to_string(y));
  return key;
}

}  // namespace

std::vector<Tuple> generate_tuples(const SymbolLayoutTree& tree,
                                   const TupleConfig& cfg) {
  std::vector<Tuple> out;
  Generator(cfg, out).expression(tree.root());
  return out;
}

std::string tuple_key(const SymbolPairTuple& t) {
  return join_key(symbol_key(t.parent), symbol_key(t.child), t.dist, t.vert);
}

std::string tuple_key(const MatrixTuple& t) {
  if (t.kind == MatrixTuple::Kind::Dimensions) {
    return join_key(kMatrixKey, kDimensionsKey, t.row, t.col);
  }
  return join_key(kMatrixKey, std::string(kCellKeyPrefix) + t.payload, t.row,
                  t.col);
}

std::string tuple_key(const Tuple& t) {
  return std::visit([](const auto& v) { return tuple_key(v); }, t);
}

std::vector<std::string> expand_wildcard_keys(const SymbolPairTuple& t) {
  const bool parent_wild = t.parent == kWildcardLabel;
  const bool child_wild = t.child == kWildcardLabel;
  if (parent_wild && child_wild) return {};
  std::vector<std::string> keys{tuple_key(t)};
  if (t.is_leaf() || parent_wild || child_wild) return keys;
  keys.push_back(join_key(kWildcardKey, t.child, t.dist, t.vert));
  keys.push_back(join_key(t.parent, kWildcardKey, t.dist, t.vert));
  return keys;
}

bool split_pair_key(std::string_view key, PairKeyView& out) {
  std::string_view fields[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t tab = key.find('\t', start);
    if ((tab == std::string_view::npos) != (i == 3)) return false;
    fields[i] = key.substr(start, i == 3 ? std::string_view::npos : tab - start);
    start = tab + 1;
  }
  if (fields[0] == kMatrixKey) return false;
  out = PairKeyView{fields[0], fields[1], fields[2], fields[3]};
  return true;
}

bool is_wildcard_key(std::string_view key) {
  PairKeyView v;
  if (!split_pair_key(key, v)) return false;
  return v.parent == kWildcardKey || v.child == kWildcardKey;
}

bool is_single_wildcard_key(std::string_view key) {
  PairKeyView v;
  if (!split_pair_key(key, v)) return false;
  return (v.parent == kWildcardKey) != (v.child == kWildcardKey);
}

std::vector<std::string> key_generalizations(std::string_view key) {
  PairKeyView v;
  if (!split_pair_key(key, v)) return {};
  if (v.child == kNoneKey || v.parent == kWildcardKey ||
      v.child == kWildcardKey) {
    return {};
  }
  auto rebuild = [&](std::string_view p, std::string_view c) {
    std::string k;
    k.append(p).push_back('\t');
    k.append(c).push_back('\t');
    k.append(v.dist).push_back('\t');
    k.append(v.vert);
    return k;
  };
  return {rebuild(kWildcardKey, v.child), rebuild(v.parent, kWildcardKey)};
}

TupleBag make_bag(const std::vector<Tuple>& tuples) {
  std::map<std::string, std::uint32_t> counts;
  for (const auto& t : tuples) ++counts[tuple_key(t)];
  return TupleBag(counts.begin(), counts.end());
}

std::uint32_t bag_size(const TupleBag& bag) noexcept {
  std::uint32_t n = 0;
  for (const auto& [key, count] : bag) n += count;
  return n;
}

}  // namespace mathsearch
