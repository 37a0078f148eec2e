#include <gtest/gtest.h>

#include <algorithm>

#include "mathsearch/latex.hpp"
#include "mathsearch/tuples.hpp"
#include "oracles.hpp"

using namespace mathsearch;

namespace {

Tuple pair(std::string p, std::string c, int dist, int vert) {
  return SymbolPairTuple{std::move(p), std::move(c), dist, vert};
}
Tuple leaf(std::string p) { return SymbolPairTuple{std::move(p), "", 0, 0}; }
Tuple dims(int r, int c) { return MatrixTuple{MatrixTuple::Kind::Dimensions, r, c, ""}; }
Tuple cell(std::string payload, int r, int c) {
  return MatrixTuple{MatrixTuple::Kind::Cell, r, c, std::move(payload)};
}

std::vector<Tuple> sorted(std::vector<Tuple> v) {
  std::sort(v.begin(), v.end());
  return v;
}

TupleConfig v1() { return {ModelVersion::V1, false}; }
TupleConfig v2() { return {ModelVersion::V2, true}; }

oracle::TupleCounts counts_of(const std::vector<Tuple>& tuples) {
  oracle::TupleCounts out;
  for (const auto& t : tuples) {
    const auto& p = std::get<SymbolPairTuple>(t);
    ++out[{p.parent, p.child, p.dist, p.vert}];
  }
  return out;
}

}  // namespace

TEST(GenerateTuples, FractionExpressionV2) {
  const auto got = generate_tuples(parse_latex("\\frac{x^2+y}{\\sqrt{z}}"), v2());
  const std::vector<Tuple> expected = {
      pair("FRAC", "x", 1, 1),     pair("FRAC", "2", 2, 2),  pair("FRAC", "+", 2, 1),
      pair("FRAC", "y", 3, 1),     pair("FRAC", "SQRT", 1, -1), pair("FRAC", "z", 2, -1),
      pair("x", "2", 1, 1),        leaf("2"),                pair("x", "+", 1, 0),
      pair("x", "y", 2, 0),        pair("+", "y", 1, 0),     leaf("y"),
      pair("SQRT", "z", 1, 0),     leaf("z")};
  ASSERT_EQ(got.size(), 14u);
  EXPECT_EQ(sorted(got), sorted(expected));
}

TEST(GenerateTuples, MatrixExpressionV2) {
  const auto got = generate_tuples(
      parse_latex("A\\begin{bmatrix} x^2 & 0 \\\\ 0 & 1 \\end{bmatrix}+1"), v2());
  const std::vector<Tuple> expected = {
      dims(2, 2),
      cell("x^2", 1, 1),
      cell("0", 1, 2),
      cell("0", 2, 1),
      cell("1", 2, 2),
      pair("A", "matrix2x2", 1, 0),
      pair("A", "+", 2, 0),
      pair("A", "1", 3, 0),
      pair("matrix2x2", "+", 1, 0),
      pair("matrix2x2", "1", 2, 0),
      pair("+", "1", 1, 0),
      leaf("1"),
      pair("x", "2", 1, 1),
      leaf("2"),
      leaf("0"),
      leaf("0"),
      leaf("1")};
  EXPECT_EQ(sorted(got), sorted(expected));
}

TEST(GenerateTuples, MatrixCellsStayIndependentInV1) {
  const auto got = generate_tuples(
      parse_latex("A\\begin{bmatrix} x^2 & 0 \\\\ 0 & 1 \\end{bmatrix}"), v1());
  EXPECT_EQ(sorted(got), sorted({pair("A", "matrix2x2", 1, 0), pair("x", "2", 1, 1)}));
}

TEST(GenerateTuples, SingleSymbol) {
  EXPECT_EQ(generate_tuples(parse_latex("x"), v2()), std::vector<Tuple>{leaf("x")});
  EXPECT_TRUE(generate_tuples(parse_latex("x"), v1()).empty());
}

TEST(GenerateTuples, ChainPairCount) {
  oracle::Rng rng(99);
  const std::vector<std::string> labels = {"a", "b", "+", "=", "1", "x"};
  for (int trial = 0; trial < 50; ++trial) {
    const int n = oracle::uniform(rng, 2, 10);
    std::vector<SymbolNode> nodes;
    for (int i = 0; i < n; ++i) nodes.emplace_back(labels[oracle::uniform(rng, 0, 5)]);
    const SymbolLayoutTree tree(*link_baseline(std::move(nodes)));
    const auto expected_pairs = static_cast<std::size_t>(n * (n - 1) / 2);
    EXPECT_EQ(generate_tuples(tree, v1()).size(), expected_pairs);
    const auto with_leaves = generate_tuples(tree, v2());
    EXPECT_EQ(with_leaves.size(), expected_pairs + 1);
    EXPECT_EQ(std::count_if(with_leaves.begin(), with_leaves.end(),
                            [](const Tuple& t) {
                              return std::get<SymbolPairTuple>(t).is_leaf();
                            }),
              1);
  }
}

TEST(GenerateTuples, MatchesPathPrefixOracle) {
  oracle::Rng rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const auto f = oracle::random_formula(rng);
    const auto tree = parse_latex(f.latex);
    ASSERT_EQ(counts_of(generate_tuples(tree, v1())),
              oracle::brute_force_tuples(tree.root(), false))
        << f.latex;
    ASSERT_EQ(counts_of(generate_tuples(tree, v2())),
              oracle::brute_force_tuples(tree.root(), true))
        << f.latex;
  }
}

TEST(TupleKeys, DistinctAndParseable) {
  const std::string concrete = tuple_key(SymbolPairTuple{"x", "2", 1, 1});
  EXPECT_EQ(concrete, "x\t2\t1\t1");
  EXPECT_NE(tuple_key(SymbolPairTuple{"x", "", 0, 0}),
            tuple_key(SymbolPairTuple{"x", "NONE", 0, 0}));
  EXPECT_NE(tuple_key(MatrixTuple{MatrixTuple::Kind::Dimensions, 2, 2, ""}),
            tuple_key(MatrixTuple{MatrixTuple::Kind::Cell, 2, 2, ""}));
  PairKeyView view;
  ASSERT_TRUE(split_pair_key(concrete, view));
  EXPECT_EQ(view.parent, "x");
  EXPECT_EQ(view.child, "2");
  EXPECT_EQ(view.dist, "1");
  EXPECT_EQ(view.vert, "1");
  EXPECT_FALSE(split_pair_key(tuple_key(MatrixTuple{MatrixTuple::Kind::Dimensions, 2, 2, ""}),
                              view));
}

TEST(WildcardExpansion, ConcretePair) {
  auto keys = expand_wildcard_keys(SymbolPairTuple{"x", "2", 1, 1});
  std::sort(keys.begin(), keys.end());
  std::vector<std::string> expected = {tuple_key(SymbolPairTuple{"x", "2", 1, 1}),
                                       tuple_key(SymbolPairTuple{"?", "2", 1, 1}),
                                       tuple_key(SymbolPairTuple{"x", "?", 1, 1})};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(keys, expected);
  for (const auto& k : keys) {
    if (k != tuple_key(SymbolPairTuple{"x", "2", 1, 1})) {
      EXPECT_TRUE(is_single_wildcard_key(k));
    }
  }
}

TEST(WildcardExpansion, LeafAndDoubleWildcard) {
  EXPECT_EQ(expand_wildcard_keys(SymbolPairTuple{"x", "", 0, 0}),
            std::vector<std::string>{tuple_key(SymbolPairTuple{"x", "", 0, 0})});
  EXPECT_TRUE(expand_wildcard_keys(SymbolPairTuple{"?", "?", 1, 0}).empty());
}

TEST(WildcardExpansion, KeyPredicates) {
  const auto both = tuple_key(SymbolPairTuple{"?", "?", 1, 0});
  EXPECT_TRUE(is_wildcard_key(both));
  EXPECT_FALSE(is_single_wildcard_key(both));
  EXPECT_FALSE(is_wildcard_key(tuple_key(SymbolPairTuple{"x", "y", 1, 0})));
  EXPECT_EQ(key_generalizations(tuple_key(SymbolPairTuple{"x", "", 0, 0})).size(), 0u);
  EXPECT_EQ(key_generalizations(tuple_key(SymbolPairTuple{"x", "y", 1, 0})).size(), 2u);
}

TEST(Bags, CountsDuplicates) {
  const auto bag = make_bag(generate_tuples(parse_latex("x+x+x"), v1()));
  EXPECT_EQ(bag_size(bag), 10u);
  EXPECT_TRUE(std::is_sorted(bag.begin(), bag.end()));
  const auto it = std::find_if(bag.begin(), bag.end(), [](const auto& e) {
    return e.first == tuple_key(SymbolPairTuple{"x", "x", 2, 0});
  });
  ASSERT_NE(it, bag.end());
  EXPECT_EQ(it->second, 2u);
}

TEST(ModelVersion, Names) {
  EXPECT_EQ(parse_model_version("v1"), ModelVersion::V1);
  EXPECT_EQ(model_version_name(ModelVersion::V2), "v2");
  EXPECT_THROW(parse_model_version("v3"), std::invalid_argument);
}
