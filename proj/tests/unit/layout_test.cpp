#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "mathsearch/latex.hpp"
#include "mathsearch/layout.hpp"

using namespace mathsearch;

namespace {

PlacedSymbol sym(std::string label, double x0, double y0, double x1, double y1) {
  return PlacedSymbol{std::move(label), {x0, y0, x1, y1}, std::nullopt};
}

// (a+b)^2 with the exponent raised and shrunk next to the closing paren.
std::vector<PlacedSymbol> squared_sum() {
  return {sym("(", 0, -1, 4, 11),  sym("a", 5, 2, 11, 10), sym("+", 12, 3, 18, 9),
          sym("b", 19, 0, 25, 10), sym(")", 26, -1, 30, 11), sym("2", 31, -6, 35, 1)};
}

std::vector<PlacedSymbol> transformed(std::vector<PlacedSymbol> s, double scale,
                                      double dx, double dy) {
  for (auto& p : s) {
    p.bbox = {p.bbox.xmin * scale + dx, p.bbox.ymin * scale + dy,
              p.bbox.xmax * scale + dx, p.bbox.ymax * scale + dy};
  }
  return s;
}

std::vector<std::string> labels(const std::vector<PlacedSymbol>& s) {
  std::vector<std::string> out;
  for (const auto& p : s) out.push_back(p.label);
  return out;
}

std::string key_of(const std::vector<PlacedSymbol>& s) {
  return canonical_key(parse_layout(s));
}

std::vector<PlacedSymbol> shifted(std::vector<PlacedSymbol> s, double dx, double dy) {
  return transformed(std::move(s), 1.0, dx, dy);
}

}  // namespace

TEST(Baseline, SquaredSum) {
  EXPECT_EQ(labels(extract_baseline(squared_sum())),
            (std::vector<std::string>{"(", "a", "+", "b", ")"}));
}

TEST(Baseline, Trivial) {
  const std::vector<PlacedSymbol> one = {sym("x", 0, 0, 5, 10)};
  EXPECT_EQ(labels(extract_baseline(one)), std::vector<std::string>{"x"});
  const std::vector<PlacedSymbol> two = {sym("y", 7, 0, 12, 10), sym("x", 0, 0, 5, 10)};
  EXPECT_EQ(labels(extract_baseline(two)), (std::vector<std::string>{"x", "y"}));
}

TEST(ParseLayout, SquaredSumTree) {
  EXPECT_EQ(key_of(squared_sum()), canonical_key(parse_latex("(a+b)^2")));
}

TEST(ParseLayout, Subscript) {
  const std::vector<PlacedSymbol> s = {sym("x", 0, 0, 8, 10), sym("i", 9, 8, 12, 14),
                                       sym("+", 14, 2, 20, 8), sym("1", 22, 0, 27, 10)};
  EXPECT_EQ(key_of(s), canonical_key(parse_latex("x_i+1")));
}

TEST(ParseLayout, InvariantUnderScalingAndTranslation) {
  const std::string expected = key_of(squared_sum());
  for (double scale : {0.1, 0.5, 3.7, 250.0}) {
    for (auto [dx, dy] : {std::pair{0.0, 0.0}, std::pair{-40.0, 12.5}, std::pair{1e4, -3e3}}) {
      EXPECT_EQ(key_of(transformed(squared_sum(), scale, dx, dy)), expected)
          << scale << " " << dx << " " << dy;
    }
  }
}

TEST(ParseLayout, InputOrderDoesNotMatter) {
  auto s = squared_sum();
  std::reverse(s.begin(), s.end());
  EXPECT_EQ(key_of(s), key_of(squared_sum()));
}

TEST(ParseLayout, Fraction) {
  const std::vector<PlacedSymbol> s = {sym("-", 0, 10, 20, 11), sym("1", 7, 0, 13, 8),
                                       sym("2", 7, 13, 13, 21)};
  const auto tree = parse_layout(s);
  EXPECT_EQ(canonical_key(tree), "FRAC[ABOVE:1][BELOW:2]");
  EXPECT_EQ(symbol_count(tree), 3u);
}

TEST(ParseLayout, FractionInContext) {
  const std::vector<PlacedSymbol> s = {
      sym("y", 0, 6, 8, 16),    sym("=", 10, 8, 18, 13),  sym("-", 20, 10, 40, 11),
      sym("a", 22, 0, 28, 8),   sym("+", 29, 1, 35, 7),   sym("1", 36, 0, 39, 8),
      sym("b", 27, 13, 33, 21), sym("+", 42, 7, 48, 13),  sym("c", 50, 7, 56, 15)};
  EXPECT_EQ(key_of(s), canonical_key(parse_latex("y=\\frac{a+1}{b}+c")));
}

TEST(ParseLayout, SquareRoot) {
  const std::vector<PlacedSymbol> s = {sym("sqrt", 0, 0, 30, 14), sym("x", 8, 4, 16, 12),
                                       sym("+", 18, 5, 24, 11)};
  EXPECT_EQ(key_of(s), canonical_key(parse_latex("\\sqrt{x+}")));
}

TEST(ParseLayout, StackedDashesBecomeEquals) {
  const std::vector<PlacedSymbol> s = {sym("-", 0, 4, 10, 5), sym("-", 0, 8, 10, 9)};
  const auto tree = parse_layout(s);
  EXPECT_EQ(canonical_key(tree), "=");
  EXPECT_EQ(symbol_count(tree), 1u);
}

TEST(ParseLayout, EqualsInsideExpression) {
  const std::vector<PlacedSymbol> s = {sym("x", 0, 0, 8, 10), sym("-", 10, 3, 18, 4),
                                       sym("-", 10, 6, 18, 7), sym("z", 20, 0, 28, 10)};
  EXPECT_EQ(key_of(s), canonical_key(parse_latex("x=z")));
}

TEST(ParseLayout, DashWithPlusAboveBecomesPlusMinus) {
  const std::vector<PlacedSymbol> s = {sym("-", 0, 9, 10, 10), sym("+", 2, 1, 8, 7)};
  EXPECT_EQ(canonical_key(parse_layout(s)), "±");
  EXPECT_EQ(canonical_key(parse_layout(shifted(s, 5, -20))), "±");
}

TEST(ParseLayout, Errors) {
  EXPECT_THROW(parse_layout(std::vector<PlacedSymbol>{}), std::invalid_argument);
  EXPECT_THROW(parse_layout(std::vector<PlacedSymbol>{sym("x", 0, 0, 0, 10)}),
               std::invalid_argument);
  LayoutParams bad;
  bad.centroid_ratio = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(parse_layout(squared_sum(), bad), std::invalid_argument);
}

TEST(RewriteCompounds, NoDashesUnchanged) {
  const auto tree = parse_latex("x^2+y_1");
  EXPECT_EQ(rewrite_compounds(tree), tree);
}

TEST(RewriteCompounds, DefaultRules) {
  SymbolNode dash("-");
  dash.set_child(Relation::Above, SymbolNode("-"));
  EXPECT_EQ(canonical_key(rewrite_compounds(SymbolLayoutTree(dash))), "=");

  SymbolNode pm("-");
  pm.set_child(Relation::Above, SymbolNode("+"));
  pm.set_child(Relation::Next, SymbolNode("x"));
  EXPECT_EQ(canonical_key(rewrite_compounds(SymbolLayoutTree(pm))), "±[NEXT:x]");
}

TEST(RewriteCompounds, CustomRuleKeepsAttachedChildren) {
  SymbolNode lt("<");
  SymbolNode bar("-");
  bar.set_child(Relation::Below, SymbolNode("1"));
  lt.set_child(Relation::Below, bar);
  const std::vector<RewriteRule> rules = {{"<", Relation::Below, "-", "leq"}};
  EXPECT_EQ(canonical_key(rewrite_compounds(SymbolLayoutTree(lt), rules)), "leq[BELOW:1]");
}

TEST(Grid, TwoByTwo) {
  const std::vector<std::vector<PlacedSymbol>> groups = {
      {sym("a", 0, 0, 10, 10)},
      {sym("b", 30, 0, 40, 10)},
      {sym("c", 0, 30, 10, 40)},
      {sym("d", 30, 30, 40, 40)}};
  EXPECT_EQ(detect_grid(groups),
            (std::vector<GridCell>{{1, 1}, {1, 2}, {2, 1}, {2, 2}}));
}

TEST(Grid, SingleGroup) {
  const std::vector<std::vector<PlacedSymbol>> groups = {{sym("a", 0, 0, 10, 10)}};
  EXPECT_EQ(detect_grid(groups), (std::vector<GridCell>{{1, 1}}));
}

TEST(Grid, OverlappingGroupsAreAmbiguous) {
  const std::vector<std::vector<PlacedSymbol>> groups = {
      {sym("a", 0, 0, 10, 10)}, {sym("b", 5, 2, 15, 12)}};
  EXPECT_THROW(detect_grid(groups), AmbiguousGrid);
}

TEST(Grid, ParsesCellsIntoMatrix) {
  const std::vector<std::vector<PlacedSymbol>> groups = {
      {sym("x", 0, 4, 8, 14), sym("2", 9, 0, 13, 7)},
      {sym("0", 40, 4, 48, 14)},
      {sym("0", 0, 40, 8, 50)},
      {sym("1", 40, 40, 46, 50)}};
  EXPECT_EQ(canonical_key(parse_grid(groups)),
            canonical_key(parse_latex("\\begin{matrix}x^2&0\\\\0&1\\end{matrix}")));
}

TEST(Io, ReadsPlacedSymbolsAndRules) {
  std::istringstream symbols(
      "{\"label\": \"x\", \"bbox\": [0, 0, 8, 10]}\n\n"
      "{\"label\": \"2\", \"bbox\": [9, -5, 13, 2], \"group\": 3}\n");
  const auto placed = read_placed_symbols(symbols);
  ASSERT_EQ(placed.size(), 2u);
  EXPECT_EQ(placed[1].label, "2");
  EXPECT_EQ(placed[1].group, 3);
  EXPECT_DOUBLE_EQ(placed[1].bbox.ymin, -5);

  std::istringstream bad("{\"label\": \"x\"}\n");
  EXPECT_THROW(read_placed_symbols(bad), std::invalid_argument);

  std::istringstream rules(
      "{\"base\": \"<\", \"relation\": \"BELOW\", \"attached\": \"-\", \"result\": \"leq\"}\n");
  const auto parsed = read_rewrite_rules(rules);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0].relation, Relation::Below);
  EXPECT_EQ(parsed[0].result, "leq");
}
