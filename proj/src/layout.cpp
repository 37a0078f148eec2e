#include "mathsearch/layout.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace mathsearch {

namespace {

bool is_descender(std::string_view label) {
  return label == "g" || label == "j" || label == "p" || label == "q" ||
         label == "y";
}

bool is_line(std::string_view label) {
  return label == "-" || label == "hline" || label == "frac";
}

bool is_root(std::string_view label) {
  return label == "sqrt" || label == kRootLabel;
}

struct Item {
  const PlacedSymbol* sym;
  double cx;
  double cy;
  double w;
  double h;
};

Item make_item(const PlacedSymbol& s, const LayoutParams& p) {
  const BoundingBox& b = s.bbox;
  const double h = b.height();
  const double cy = is_descender(s.label)
                        ? b.ymin + p.centroid_ratio * (h / 2.0)
                        : b.ymin + p.centroid_ratio * h;
  return Item{&s, (b.xmin + b.xmax) / 2.0, cy, b.width(), h};
}

bool same_band(const Item& a, const Item& b, const LayoutParams& p) {
  return std::abs(b.cy - a.cy) <= p.region_threshold * std::max(a.h, b.h);
}

bool contains_centroid(const Item& outer, const Item& inner) {
  const BoundingBox& b = outer.sym->bbox;
  return inner.cx > b.xmin && inner.cx < b.xmax && inner.cy > b.ymin &&
         inner.cy < b.ymax;
}

// A fraction line spans the symbols stacked on it; a radical encloses its
// radicand. Dominated symbols never start or continue a baseline.
bool dominates(const Item& s, const Item& t) {
  if (s.sym == t.sym) return false;
  const BoundingBox& b = s.sym->bbox;
  if (is_line(s.sym->label)) {
    return s.w > t.w && t.cx > b.xmin && t.cx < b.xmax;
  }
  if (is_root(s.sym->label)) {
    return s.w > t.w && contains_centroid(s, t);
  }
  return false;
}

bool dominated(const Item& t, const std::vector<Item>& all) {
  return std::any_of(all.begin(), all.end(),
                     [&](const Item& s) { return dominates(s, t); });
}

void check_symbols(std::span<const PlacedSymbol> symbols) {
  if (symbols.empty()) throw std::invalid_argument("no symbols to parse");
  for (const auto& s : symbols) {
    if (s.label.empty()) throw std::invalid_argument("symbol with empty label");
    if (!(s.bbox.xmin < s.bbox.xmax) || !(s.bbox.ymin < s.bbox.ymax)) {
      throw std::invalid_argument("degenerate bounding box for '" + s.label +
                                  "'");
    }
  }
}

// Indices into `items` of the main baseline, left to right.
std::vector<std::size_t> baseline_indices(const std::vector<Item>& items,
                                          const LayoutParams& p) {
  std::size_t leftmost = 0;
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].sym->bbox.xmin < items[leftmost].sym->bbox.xmin) leftmost = i;
  }

  // Start: among symbols horizontally overlapping the leftmost one and not
  // dominated, the one with the largest vertical extent.
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& c = items[i];
    if (c.sym->bbox.xmin >= items[leftmost].sym->bbox.xmax && i != leftmost) {
      continue;
    }
    if (dominated(c, items)) continue;
    if (!start) {
      start = i;
      continue;
    }
    const Item& s = items[*start];
    if (c.h != s.h) {
      if (c.h > s.h) start = i;
    } else if (c.sym->bbox.xmin != s.sym->bbox.xmin) {
      if (c.sym->bbox.xmin < s.sym->bbox.xmin) start = i;
    } else if (c.cy != s.cy) {
      if (c.cy > s.cy) start = i;
    } else if (c.sym->label < s.sym->label) {
      start = i;
    }
  }
  if (!start) start = leftmost;

  std::vector<std::size_t> line{*start};
  std::vector<char> used(items.size(), 0);
  used[*start] = 1;
  while (true) {
    const Item& cur = items[line.back()];
    std::optional<std::size_t> next;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const Item& c = items[i];
      if (used[i] || c.cx <= cur.cx || c.sym->bbox.xmin < cur.sym->bbox.xmin) {
        continue;
      }
      if (!same_band(cur, c, p) || dominated(c, items)) continue;
      if (!next) {
        next = i;
        continue;
      }
      const Item& n = items[*next];
      const double dc = c.sym->bbox.xmin - cur.sym->bbox.xmax;
      const double dn = n.sym->bbox.xmin - cur.sym->bbox.xmax;
      if (dc != dn) {
        if (dc < dn) next = i;
      } else if (std::abs(c.cy - cur.cy) != std::abs(n.cy - cur.cy)) {
        if (std::abs(c.cy - cur.cy) < std::abs(n.cy - cur.cy)) next = i;
      } else if (c.sym->label < n.sym->label) {
        next = i;
      }
    }
    if (!next) break;
    used[*next] = 1;
    line.push_back(*next);
  }
  return line;
}

std::string output_label(const std::string& label) {
  if (is_root(label)) return std::string(kRootLabel);
  return label;
}

SymbolNode parse_region(std::vector<const PlacedSymbol*> symbols,
                        const LayoutParams& p) {
  std::vector<Item> items;
  items.reserve(symbols.size());
  for (const auto* s : symbols) items.push_back(make_item(*s, p));

  const auto line = baseline_indices(items, p);
  std::vector<char> on_line(items.size(), 0);
  for (std::size_t i : line) on_line[i] = 1;

  // (baseline position, region) -> symbols assigned there
  std::map<std::pair<std::size_t, Relation>, std::vector<const PlacedSymbol*>>
      regions;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (on_line[i]) continue;
    const Item& s = items[i];

    std::optional<std::size_t> owner;
    Relation rel = Relation::Super;
    for (std::size_t k = 0; k < line.size() && !owner; ++k) {
      const Item& b = items[line[k]];
      if (is_root(b.sym->label) && contains_centroid(b, s)) {
        owner = k;
        rel = Relation::Within;
      }
    }
    if (!owner) {
      double best = 0.0;
      for (std::size_t k = 0; k < line.size(); ++k) {
        const BoundingBox& b = items[line[k]].sym->bbox;
        const double overlap =
            std::min(b.xmax, s.sym->bbox.xmax) - std::max(b.xmin, s.sym->bbox.xmin);
        const double frac = overlap / s.w;
        if (frac >= 0.5 && frac > best) {
          best = frac;
          owner = k;
        }
      }
      if (owner) {
        rel = s.cy < items[line[*owner]].cy ? Relation::Above : Relation::Below;
      }
    }
    if (!owner) {
      std::size_t k = 0;
      for (std::size_t j = 0; j < line.size(); ++j) {
        if (items[line[j]].cx < s.cx) k = j;
      }
      owner = k;
      rel = s.cy < items[line[k]].cy ? Relation::Super : Relation::Sub;
    }
    regions[{*owner, rel}].push_back(s.sym);
  }

  std::vector<SymbolNode> nodes;
  nodes.reserve(line.size());
  for (std::size_t i : line) nodes.emplace_back(output_label(items[i].sym->label));
  for (auto& [where, members] : regions) {
    nodes[where.first].set_child(where.second,
                                 parse_region(std::move(members), p));
  }
  return std::move(*link_baseline(std::move(nodes)));
}

bool apply_rule(SymbolNode& node, const RewriteRule& rule) {
  if (node.label() != rule.base || node.matrix()) return false;
  const SymbolNode* attached = node.child(rule.relation);
  if (!attached || attached->label() != rule.attached || attached->matrix()) {
    return false;
  }
  for (Relation rel : kAllRelations) {
    if (attached->has_child(rel) && rel != rule.relation && node.has_child(rel)) {
      return false;
    }
  }
  SymbolNode taken = std::move(*node.take_child(rule.relation));
  for (Relation rel : kAllRelations) {
    if (auto grandchild = taken.take_child(rel)) {
      node.set_child(rel, std::move(*grandchild));
    }
  }
  node.set_label(rule.result);
  return true;
}

bool rewrite_pass(SymbolNode& node, std::span<const RewriteRule> rules) {
  bool changed = false;
  for (const auto& rule : rules) {
    while (apply_rule(node, rule)) changed = true;
  }
  for (Relation rel : kAllRelations) {
    if (auto* child = node.child(rel)) changed = rewrite_pass(*child, rules) || changed;
  }
  return changed;
}

void mark_fractions(SymbolNode& node) {
  if (is_line(node.label()) && node.has_child(Relation::Above) &&
      node.has_child(Relation::Below)) {
    node.set_label(std::string(kFractionLabel));
  }
  for (Relation rel : kAllRelations) {
    if (auto* child = node.child(rel)) mark_fractions(*child);
  }
}

std::vector<std::size_t> cluster_axis(const std::vector<std::pair<double, double>>& spans,
                                      double min_gap) {
  std::vector<std::size_t> order(spans.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spans[a].first < spans[b].first;
  });
  std::vector<std::size_t> cluster(spans.size(), 0);
  std::size_t current = 1;
  double reach = spans[order[0]].second;
  cluster[order[0]] = current;
  for (std::size_t n = 1; n < order.size(); ++n) {
    const auto& [lo, hi] = spans[order[n]];
    if (lo - reach > min_gap) {
      ++current;
      reach = hi;
    } else {
      reach = std::max(reach, hi);
    }
    cluster[order[n]] = current;
  }
  return cluster;
}

BoundingBox group_box(const std::vector<PlacedSymbol>& group) {
  if (group.empty()) throw std::invalid_argument("empty grid cell group");
  BoundingBox box = group.front().bbox;
  for (const auto& s : group) {
    box.xmin = std::min(box.xmin, s.bbox.xmin);
    box.ymin = std::min(box.ymin, s.bbox.ymin);
    box.xmax = std::max(box.xmax, s.bbox.xmax);
    box.ymax = std::max(box.ymax, s.bbox.ymax);
  }
  return box;
}

}  // namespace

void LayoutParams::validate() const {
  if (!(centroid_ratio > 0.0 && centroid_ratio < 1.0)) {
    throw std::invalid_argument("centroid_ratio must lie in (0, 1)");
  }
  if (!(region_threshold > 0.0 && region_threshold < 0.5)) {
    throw std::invalid_argument("region_threshold must lie in (0, 0.5)");
  }
  if (!(grid_gap > 0.0)) throw std::invalid_argument("grid_gap must be positive");
}

std::vector<PlacedSymbol> extract_baseline(std::span<const PlacedSymbol> symbols,
                                           const LayoutParams& params) {
  params.validate();
  check_symbols(symbols);
  std::vector<Item> items;
  for (const auto& s : symbols) items.push_back(make_item(s, params));
  std::vector<PlacedSymbol> out;
  for (std::size_t i : baseline_indices(items, params)) out.push_back(*items[i].sym);
  return out;
}

const std::vector<RewriteRule>& default_rewrite_rules() {
  static const std::vector<RewriteRule> rules = {
      {"-", Relation::Above, "-", "="},
      {"-", Relation::Below, "-", "="},
      {"-", Relation::Above, "+", "±"},
      {"+", Relation::Below, "-", "±"},
  };
  return rules;
}

SymbolLayoutTree rewrite_compounds(SymbolLayoutTree tree,
                                   std::span<const RewriteRule> rules) {
  while (rewrite_pass(tree.root(), rules)) {
  }
  return tree;
}

SymbolLayoutTree rewrite_compounds(SymbolLayoutTree tree) {
  return rewrite_compounds(std::move(tree), default_rewrite_rules());
}

SymbolLayoutTree parse_layout(std::span<const PlacedSymbol> symbols,
                              const LayoutParams& params,
                              std::span<const RewriteRule> rules) {
  params.validate();
  check_symbols(symbols);
  std::vector<const PlacedSymbol*> ptrs;
  ptrs.reserve(symbols.size());
  for (const auto& s : symbols) ptrs.push_back(&s);
  SymbolLayoutTree tree(parse_region(std::move(ptrs), params));
  tree = rewrite_compounds(std::move(tree), rules);
  mark_fractions(tree.root());
  return tree;
}

SymbolLayoutTree parse_layout(std::span<const PlacedSymbol> symbols,
                              const LayoutParams& params) {
  return parse_layout(symbols, params, default_rewrite_rules());
}

std::vector<GridCell> detect_grid(std::span<const std::vector<PlacedSymbol>> groups,
                                  const LayoutParams& params) {
  params.validate();
  if (groups.empty()) throw std::invalid_argument("no grid cells");
  std::vector<std::pair<double, double>> xs, ys;
  std::vector<double> heights;
  for (const auto& g : groups) {
    check_symbols(g);
    const BoundingBox b = group_box(g);
    xs.emplace_back(b.xmin, b.xmax);
    ys.emplace_back(b.ymin, b.ymax);
    heights.push_back(b.height());
  }
  std::sort(heights.begin(), heights.end());
  const std::size_t n = heights.size();
  const double median =
      n % 2 ? heights[n / 2] : (heights[n / 2 - 1] + heights[n / 2]) / 2.0;
  const double min_gap = params.grid_gap * median;

  const auto cols = cluster_axis(xs, min_gap);
  const auto rows = cluster_axis(ys, min_gap);
  std::vector<GridCell> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    GridCell cell{rows[i], cols[i]};
    if (std::find(out.begin(), out.end(), cell) != out.end()) {
      throw AmbiguousGrid("two cell groups share row " + std::to_string(cell.row) +
                          ", column " + std::to_string(cell.col));
    }
    out.push_back(cell);
  }
  return out;
}

SymbolLayoutTree parse_grid(std::span<const std::vector<PlacedSymbol>> groups,
                            const LayoutParams& params) {
  const auto cells = detect_grid(groups, params);
  std::size_t rows = 0, cols = 0;
  for (const auto& c : cells) {
    rows = std::max(rows, c.row);
    cols = std::max(cols, c.col);
  }
  MatrixPayload grid(rows, cols);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    grid.at(cells[i].row - 1, cells[i].col - 1) =
        parse_layout(groups[i], params).root();
  }
  return SymbolLayoutTree(SymbolNode::make_matrix(std::move(grid)));
}

std::vector<PlacedSymbol> read_placed_symbols(std::istream& in) {
  std::vector<PlacedSymbol> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PlacedSymbol s;
      s.label = j.at("label").get<std::string>();
      const auto& b = j.at("bbox");
      if (!b.is_array() || b.size() != 4) {
        throw std::invalid_argument("bbox must be [xmin, ymin, xmax, ymax]");
      }
      s.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                b[3].get<double>()};
      if (j.contains("group")) s.group = j.at("group").get<int>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " +
                                  e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return out;
}

std::vector<RewriteRule> read_rewrite_rules(std::istream& in) {
  std::vector<RewriteRule> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto rel = relation_from_name(j.at("relation").get<std::string>());
      if (!rel) throw std::invalid_argument("unknown relation in rewrite rule");
      out.push_back({j.at("base").get<std::string>(), *rel,
                     j.at("attached").get<std::string>(),
                     j.at("result").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("rewrite rule: ") + e.what());
    }
  }
  return out;
}

}  // namespace mathsearch
