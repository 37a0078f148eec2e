#pragma once

// Formula matching by tuple f-measure and document-level combined ranking.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mathsearch/index.hpp"
#include "mathsearch/slt.hpp"
#include "mathsearch/tuples.hpp"

namespace mathsearch {

struct MatchScore {
  std::uint32_t matched = 0;
  std::uint32_t query_total = 0;
  std::uint32_t cand_total = 0;
  double recall = 0.0;
  double precision = 0.0;
  double fscore = 0.0;
};

/// Tuple matching between a query bag and a candidate bag.
///
/// Concrete query keys match by multiset intersection. Then, in key order,
/// each single-wildcard query tuple consumes the first unconsumed candidate
/// instance it generalizes. Wildcard tuples that cannot be indexed (both
/// symbols wildcards, or a wildcard leaf) never match but still count toward
/// the query total. With `wildcard_matching` off only concrete keys match.
MatchScore score_formula(const TupleBag& query, const TupleBag& candidate,
                         bool wildcard_matching = true);

/// True for a wildcard key that the index posts under expansion.
bool is_indexed_wildcard_key(std::string_view key);

struct FormulaMatch {
  ExprId expr_id = 0;
  MatchScore score;
};

/// Keys a query bag is looked up under; empty when nothing is usable.
std::vector<std::string> retrieval_keys(const TupleBag& query,
                                        const TupleConfig& cfg);

/// Scores every expression sharing a retrieval key with the query. Results
/// are ordered by descending fscore, then ascending expr_id, cut to `k`.
/// Throws EmptyQueryTuples when the formula has no retrieval keys.
std::vector<FormulaMatch> search_formula(const Index& index,
                                         const SymbolLayoutTree& formula,
                                         std::size_t k);

struct Query {
  std::vector<std::string> keywords;
  std::vector<SymbolLayoutTree> formulas;
  /// Source text of each formula, as written in the query.
  std::vector<std::string> formula_latex;
  double alpha = 0.5;
};

/// Splits keywords from $...$ formulas. A query with no '$' that contains
/// math punctuation and parses as LaTeX is taken as a single formula.
/// Throws QueryParseError listing every fragment that fails to parse, or
/// when the query is empty.
Query parse_query(std::string_view raw, double alpha);

struct FormulaHit {
  std::size_t query_formula = 0;
  ExprId expr_id = 0;
  std::string latex;
  double fscore = 0.0;
};

struct SearchHit {
  std::string doc_id;
  std::string title;
  double combined_score = 0.0;
  double text_score = 0.0;
  double formula_score = 0.0;
  /// Best-matching expression per query formula, when any matched.
  std::vector<FormulaHit> matches;
};

/// Weight of each query formula: its share of the total symbol count.
std::vector<double> formula_weights(const Query& query);

/// `raw_text_score` is the document's TF-IDF cosine; `max_text_score` is the
/// maximum over the result set and normalizes it into [0, 1].
SearchHit score_document(const Index& index, std::size_t doc,
                         const Query& query, double raw_text_score = 0.0,
                         double max_text_score = 0.0);

/// Ranks every document holding a candidate expression or a query term by
/// combined score (ties: ascending doc_id), cut to `k`. `alpha` defaults to
/// the index's configured weight.
std::vector<SearchHit> search(const Index& index, const Query& query,
                              std::size_t k);
std::vector<SearchHit> search(const Index& index, std::string_view raw,
                              std::size_t k,
                              std::optional<double> alpha = std::nullopt);

}  // namespace mathsearch
