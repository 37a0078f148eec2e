#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "json.hpp"
#include "mathsearch/eval.hpp"
#include "mathsearch/latex.hpp"
#include "oracles.hpp"

using namespace mathsearch;

TEST(SpecificItem, SelfQueriesRankSourceFirst) {
  oracle::Rng rng(3);
  Index index;
  std::vector<EvalQuery> queries;
  std::set<std::string> seen;
  for (int d = 0; d < 60; ++d) {
    // Formulas unique to one document keep the source unambiguous.
    std::string latex;
    do {
      latex = oracle::random_formula(rng, 10).latex;
    } while (!seen.insert(canonical_key(parse_latex(latex))).second);
    const std::string id = "doc" + std::to_string(d);
    index.add_document(id, "", "filler text", {latex});
    queries.push_back({"q" + std::to_string(d), "$" + latex + "$", id});
  }
  const EvalReport report = specific_item_eval(index, queries, 10);
  EXPECT_DOUBLE_EQ(report.top1_rate, 1.0);
  EXPECT_DOUBLE_EQ(report.mean_reciprocal_rank, 1.0);
  for (const auto& q : report.per_query) {
    ASSERT_TRUE(q.source_rank.has_value());
    EXPECT_EQ(*q.source_rank, 1u);
  }
}

TEST(SpecificItem, UnknownSource) {
  Index index;
  index.add_document("a", "", "", {"x^2"});
  EXPECT_THROW(specific_item_eval(index, {{"q", "$x^2$", "missing"}}, 5), UnknownSourceDoc);
  EXPECT_THROW(specific_item_eval(index, {{"q", "$y^3$", "a"}}, 5), UnknownSourceDoc);
  EXPECT_NO_THROW(specific_item_eval(index, {{"q", "$x^?$", "a"}}, 5));
}

TEST(SpecificItem, ExactMatchesCountedWithinK) {
  Index index;
  for (const char* id : {"a", "b", "c"}) index.add_document(id, "", "", {"e^{i\\pi}+1=0"});
  index.add_document("d", "", "", {"e^{i\\pi}"});
  const EvalReport report = specific_item_eval(index, {{"q", "$e^{i\\pi}+1=0$", "b"}}, 3);
  ASSERT_EQ(report.per_query.size(), 1u);
  EXPECT_EQ(report.per_query[0].exact_matches, 3u);
  EXPECT_EQ(report.exact_matches, 3u);
  EXPECT_EQ(report.per_query[0].source_rank, 2u);
  EXPECT_EQ(report.per_query[0].ranking.size(), 4u);
}

TEST(Precision, Definition) {
  const mathsearch::Run run = {{"all", {"a", "b"}}, {"none", {"a", "b"}}, {"some", {"a", "b", "c", "d", "e"}}};
  const Qrels qrels = {{{"all", "a"}, true},  {{"all", "b"}, true},  {{"none", "a"}, false},
                       {{"none", "b"}, false}, {{"some", "a"}, true}, {{"some", "b"}, false},
                       {{"some", "c"}, true},  {{"some", "e"}, true}};
  const auto two = precision_at_k(run, qrels, 2);
  EXPECT_DOUBLE_EQ(two.per_query.at("all"), 1.0);
  EXPECT_DOUBLE_EQ(two.per_query.at("none"), 0.0);
  const auto five = precision_at_k(run, qrels, 5);
  EXPECT_DOUBLE_EQ(five.per_query.at("some"), 0.6);
  ASSERT_EQ(five.unjudged.size(), 1u);
  EXPECT_EQ(five.unjudged[0], (std::pair<std::string, std::string>{"some", "d"}));
  EXPECT_THROW(precision_at_k(run, qrels, 0), std::invalid_argument);
}

TEST(Precision, ShortRankingsCountMissingSlotsAsMisses) {
  const auto p = precision_at_k({{"q", {"a"}}}, {{{"q", "a"}, true}}, 5);
  EXPECT_DOUBLE_EQ(p.mean, 0.2);
}

TEST(Io, Readers) {
  std::istringstream qrels("q1\ta\t1\r\nq1\tb\t0\n\n");
  const auto parsed = read_qrels(qrels);
  EXPECT_EQ(parsed.size(), 2u);
  EXPECT_TRUE(parsed.at({"q1", "a"}));
  std::istringstream bad_qrels("q1 a 1\n");
  EXPECT_THROW(read_qrels(bad_qrels), std::invalid_argument);

  std::istringstream queries(
      "{\"query_id\": \"q1\", \"query\": \"$x^2$\", \"source_doc_id\": \"a\"}\n");
  const auto q = read_eval_queries(queries);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q[0].source_doc_id, "a");
  std::istringstream bad_queries("{\"query\": 1}\n");
  EXPECT_THROW(read_eval_queries(bad_queries), std::invalid_argument);
}

TEST(Reports, JsonAndTsv) {
  Index index;
  index.add_document("a", "", "", {"x^2"});
  index.add_document("b", "", "", {"x^3"});
  EvalReport report = specific_item_eval(index, {{"q1", "$x^2$", "a"}}, 2);
  report.precision = precision_at_k(run_of(report), {{{"q1", "a"}, true}}, 2);

  const auto j = nlohmann::json::parse(report_json(report));
  EXPECT_EQ(j.at("queries"), 1);
  EXPECT_EQ(j.at("per_query")[0].at("source_rank"), 1);
  EXPECT_DOUBLE_EQ(j.at("precision").at("mean").get<double>(), 0.5);

  const std::string tsv = report_tsv(report);
  EXPECT_EQ(tsv, "query_id\tsource_rank\texact_matches\tprecision_at_2\nq1\t1\t1\t0.5\n");
}
