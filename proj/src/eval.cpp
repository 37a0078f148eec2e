#include "mathsearch/eval.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mathsearch/query.hpp"

namespace mathsearch {

using json = nlohmann::json;

namespace {

bool has_wildcard(const SymbolNode& node) {
  if (node.is_wildcard()) return true;
  if (const auto* m = node.matrix()) {
    for (const auto& cell : m->cells) {
      if (cell && has_wildcard(*cell)) return true;
    }
  }
  for (Relation rel : kAllRelations) {
    if (const auto* c = node.child(rel); c && has_wildcard(*c)) return true;
  }
  return false;
}

void check_source(const Index& index, const EvalQuery& q, const Query& parsed) {
  const auto doc = index.find_document(q.source_doc_id);
  if (!doc) {
    throw UnknownSourceDoc("query " + q.query_id + ": source document '" +
                           q.source_doc_id + "' is not indexed");
  }
  std::vector<std::string> concrete;
  for (const auto& f : parsed.formulas) {
    if (!has_wildcard(f.root())) concrete.push_back(canonical_key(f));
  }
  if (concrete.empty()) return;
  const auto& ids = index.documents()[*doc].expr_ids;
  const bool found = std::any_of(concrete.begin(), concrete.end(), [&](const auto& key) {
    return std::any_of(ids.begin(), ids.end(), [&](ExprId id) {
      return index.expression(id).key == key;
    });
  });
  if (!found) {
    throw UnknownSourceDoc("query " + q.query_id + ": source document '" +
                           q.source_doc_id + "' does not contain the query formula");
  }
}

}  // namespace

EvalReport specific_item_eval(const Index& index,
                              const std::vector<EvalQuery>& queries,
                              std::size_t k, std::optional<double> alpha) {
  EvalReport report;
  report.k = k;
  double rr_sum = 0.0;
  std::size_t top1 = 0;
  for (const auto& q : queries) {
    const Query parsed = parse_query(q.query, alpha.value_or(index.alpha_default()));
    check_source(index, q, parsed);
    const auto hits = search(index, parsed, kRankCutoff);

    QueryOutcome outcome;
    outcome.query_id = q.query_id;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      outcome.ranking.push_back(hits[i].doc_id);
      if (!outcome.source_rank && hits[i].doc_id == q.source_doc_id) {
        outcome.source_rank = i + 1;
      }
      if (i < k && std::any_of(hits[i].matches.begin(), hits[i].matches.end(),
                               [](const FormulaHit& m) { return m.fscore == 1.0; })) {
        ++outcome.exact_matches;
      }
    }
    if (outcome.source_rank) {
      rr_sum += 1.0 / static_cast<double>(*outcome.source_rank);
      if (*outcome.source_rank == 1) ++top1;
    }
    report.exact_matches += outcome.exact_matches;
    report.per_query.push_back(std::move(outcome));
  }
  if (!queries.empty()) {
    report.mean_reciprocal_rank = rr_sum / static_cast<double>(queries.size());
    report.top1_rate = static_cast<double>(top1) / static_cast<double>(queries.size());
  }
  return report;
}

PrecisionReport precision_at_k(const Run& run, const Qrels& qrels,
                               std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  PrecisionReport report;
  report.k = k;
  double sum = 0.0;
  for (const auto& [qid, ranking] : run) {
    std::size_t relevant = 0;
    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
      auto it = qrels.find({qid, ranking[i]});
      if (it == qrels.end()) {
        report.unjudged.emplace_back(qid, ranking[i]);
      } else if (it->second) {
        ++relevant;
      }
    }
    const double p = static_cast<double>(relevant) / static_cast<double>(k);
    report.per_query[qid] = p;
    sum += p;
  }
  if (!run.empty()) report.mean = sum / static_cast<double>(run.size());
  return report;
}

Run run_of(const EvalReport& report) {
  Run run;
  for (const auto& q : report.per_query) run[q.query_id] = q.ranking;
  return run;
}

Qrels read_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string qid, doc, rel;
    if (!std::getline(fields, qid, '\t') || !std::getline(fields, doc, '\t') ||
        !std::getline(fields, rel, '\t') || (rel != "0" && rel != "1")) {
      throw std::invalid_argument("qrels line " + std::to_string(lineno) +
                                  ": expected query_id<TAB>doc_id<TAB>0|1");
    }
    qrels[{qid, doc}] = rel == "1";
  }
  return qrels;
}

std::vector<EvalQuery> read_eval_queries(std::istream& in) {
  std::vector<EvalQuery> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("query_id").get<std::string>(),
                     j.at("query").get<std::string>(),
                     j.at("source_doc_id").get<std::string>()});
    } catch (const json::exception& e) {
      throw std::invalid_argument("queries line " + std::to_string(lineno) +
                                  ": " + e.what());
    }
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  json per_query = json::array();
  for (const auto& q : report.per_query) {
    per_query.push_back({{"query_id", q.query_id},
                         {"source_rank", q.source_rank ? json(*q.source_rank) : json(nullptr)},
                         {"exact_matches", q.exact_matches}});
  }
  json out{{"k", report.k},
           {"queries", report.per_query.size()},
           {"mean_reciprocal_rank", report.mean_reciprocal_rank},
           {"top1_rate", report.top1_rate},
           {"exact_matches", report.exact_matches},
           {"per_query", std::move(per_query)}};
  if (report.precision) {
    const auto& p = *report.precision;
    json unjudged = json::array();
    for (const auto& [qid, doc] : p.unjudged) unjudged.push_back({qid, doc});
    out["precision"] = {{"k", p.k},
                        {"mean", p.mean},
                        {"per_query", p.per_query},
                        {"unjudged", std::move(unjudged)}};
  }
  return out.dump(2);
}

std::string report_tsv(const EvalReport& report) {
  std::ostringstream os;
  os << "query_id\tsource_rank\texact_matches";
  if (report.precision) os << "\tprecision_at_" << report.precision->k;
  os << '\n';
  for (const auto& q : report.per_query) {
    os << q.query_id << '\t';
    if (q.source_rank) {
      os << *q.source_rank;
    } else {
      os << "inf";
    }
    os << '\t' << q.exact_matches;
    if (report.precision) os << '\t' << report.precision->per_query.at(q.query_id);
    os << '\n';
  }
  return os.str();
}

}  // namespace mathsearch
