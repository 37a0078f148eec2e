#pragma once

// Batch evaluation: specific-item retrieval (rank of the known source
// document of each query) and precision-at-k against binary judgments.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mathsearch/index.hpp"

namespace mathsearch {

/// Ranks beyond this are reported as "not found".
inline constexpr std::size_t kRankCutoff = 1000;

struct EvalQuery {
  std::string query_id;
  std::string query;
  std::string source_doc_id;
};

struct QueryOutcome {
  std::string query_id;
  /// 1-based rank of the source document; nullopt when outside the cutoff.
  std::optional<std::size_t> source_rank;
  /// Hits within the top k whose best formula match has fscore 1.0.
  std::size_t exact_matches = 0;
  /// Ranked doc ids (up to the cutoff).
  std::vector<std::string> ranking;
};

struct PrecisionReport {
  std::size_t k = 0;
  std::map<std::string, double> per_query;
  double mean = 0.0;
  /// (query_id, doc_id) pairs in a top k with no judgment; counted as
  /// non-relevant.
  std::vector<std::pair<std::string, std::string>> unjudged;
};

struct EvalReport {
  std::size_t k = 0;
  std::vector<QueryOutcome> per_query;
  double mean_reciprocal_rank = 0.0;
  double top1_rate = 0.0;
  std::size_t exact_matches = 0;
  std::optional<PrecisionReport> precision;
};

/// Throws UnknownSourceDoc when a source document is missing from the index
/// or does not contain a concrete query formula.
EvalReport specific_item_eval(const Index& index,
                              const std::vector<EvalQuery>& queries,
                              std::size_t k,
                              std::optional<double> alpha = std::nullopt);

using Run = std::map<std::string, std::vector<std::string>>;
using Qrels = std::map<std::pair<std::string, std::string>, bool>;

/// Mean over the run's queries of |relevant in top k| / k.
PrecisionReport precision_at_k(const Run& run, const Qrels& qrels,
                               std::size_t k);

Run run_of(const EvalReport& report);

/// TSV lines: query_id, doc_id, 0/1. Throws std::invalid_argument.
Qrels read_qrels(std::istream& in);
/// JSON lines: {"query_id", "query", "source_doc_id"}.
std::vector<EvalQuery> read_eval_queries(std::istream& in);

std::string report_json(const EvalReport& report);
std::string report_tsv(const EvalReport& report);

}  // namespace mathsearch
