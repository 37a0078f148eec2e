#include "mathsearch/query.hpp"

#include <algorithm>
#include <unordered_map>

#include "mathsearch/errors.hpp"
#include "mathsearch/latex.hpp"
#include "mathsearch/text.hpp"

namespace mathsearch {

namespace {

// Does the single-wildcard query key generalize this candidate key?
bool wildcard_matches(const PairKeyView& q, std::string_view cand_key) {
  PairKeyView c;
  if (!split_pair_key(cand_key, c)) return false;
  if (c.dist != q.dist || c.vert != q.vert) return false;
  if (c.child == kNoneKey || c.parent == kWildcardKey ||
      c.child == kWildcardKey) {
    return false;
  }
  if (q.parent == kWildcardKey) return q.child == c.child;
  return q.parent == c.parent;
}

double f_measure(double recall, double precision) {
  if (recall + precision == 0.0) return 0.0;
  return 2.0 * recall * precision / (recall + precision);
}

struct PreparedQuery {
  std::vector<TupleBag> bags;
  std::vector<double> weights;
  bool wildcard_matching = true;
};

PreparedQuery prepare(const Index& index, const Query& query) {
  PreparedQuery p;
  p.wildcard_matching = index.tuple_config().emit_wildcard_expansions;
  for (const auto& f : query.formulas) {
    p.bags.push_back(make_bag(generate_tuples(f, index.tuple_config())));
  }
  p.weights = formula_weights(query);
  return p;
}

SearchHit score_prepared(const Index& index, std::size_t doc,
                         const Query& query, const PreparedQuery& prepared,
                         double raw_text, double max_text) {
  const DocumentRecord& rec = index.documents().at(doc);
  SearchHit hit;
  hit.doc_id = rec.doc_id;
  hit.title = rec.title;
  for (std::size_t i = 0; i < prepared.bags.size(); ++i) {
    if (prepared.bags[i].empty()) continue;
    std::optional<FormulaHit> best;
    for (ExprId id : rec.expr_ids) {
      const double f = score_formula(prepared.bags[i], index.expression_bag(id),
                                     prepared.wildcard_matching)
                           .fscore;
      if (f > 0.0 && (!best || f > best->fscore ||
                      (f == best->fscore && id < best->expr_id))) {
        best = FormulaHit{i, id, index.expression(id).latex, f};
      }
    }
    if (best) {
      hit.formula_score += prepared.weights[i] * best->fscore;
      hit.matches.push_back(std::move(*best));
    }
  }
  hit.text_score = max_text > 0.0 ? raw_text / max_text : 0.0;
  hit.combined_score =
      query.alpha * hit.text_score + (1.0 - query.alpha) * hit.formula_score;
  return hit;
}

bool looks_like_formula(std::string_view raw) {
  return raw.find_first_of("\\^_{}=()[]<>?") != std::string_view::npos;
}

}  // namespace

bool is_indexed_wildcard_key(std::string_view key) {
  PairKeyView v;
  if (!split_pair_key(key, v)) return false;
  const bool pw = v.parent == kWildcardKey;
  const bool cw = v.child == kWildcardKey;
  return pw != cw && v.child != kNoneKey;
}

MatchScore score_formula(const TupleBag& query, const TupleBag& candidate,
                         bool wildcard_matching) {
  MatchScore s;
  s.query_total = bag_size(query);
  s.cand_total = bag_size(candidate);

  std::vector<std::uint32_t> remaining;
  remaining.reserve(candidate.size());
  for (const auto& [key, count] : candidate) remaining.push_back(count);

  // Concrete keys: sorted merge.
  std::size_t ci = 0;
  for (const auto& [key, count] : query) {
    if (is_wildcard_key(key)) continue;
    while (ci < candidate.size() && candidate[ci].first < key) ++ci;
    if (ci < candidate.size() && candidate[ci].first == key) {
      const std::uint32_t m = std::min(count, remaining[ci]);
      remaining[ci] -= m;
      s.matched += m;
    }
  }

  if (wildcard_matching) {
    for (const auto& [key, count] : query) {
      if (!is_indexed_wildcard_key(key)) continue;
      PairKeyView q;
      split_pair_key(key, q);
      std::uint32_t left = count;
      for (std::size_t j = 0; j < candidate.size() && left > 0; ++j) {
        if (remaining[j] == 0 || !wildcard_matches(q, candidate[j].first)) {
          continue;
        }
        const std::uint32_t m = std::min(left, remaining[j]);
        remaining[j] -= m;
        left -= m;
        s.matched += m;
      }
    }
  }

  if (s.query_total > 0) s.recall = double(s.matched) / s.query_total;
  if (s.cand_total > 0) s.precision = double(s.matched) / s.cand_total;
  s.fscore = s.matched == 0 ? 0.0 : f_measure(s.recall, s.precision);
  return s;
}

std::vector<std::string> retrieval_keys(const TupleBag& query,
                                        const TupleConfig& cfg) {
  std::vector<std::string> keys;
  for (const auto& [key, count] : query) {
    if (!is_wildcard_key(key)) {
      keys.push_back(key);
    } else if (cfg.emit_wildcard_expansions && is_indexed_wildcard_key(key)) {
      keys.push_back(key);
    }
  }
  return keys;
}

std::vector<FormulaMatch> search_formula(const Index& index,
                                         const SymbolLayoutTree& formula,
                                         std::size_t k) {
  const TupleBag bag = make_bag(generate_tuples(formula, index.tuple_config()));
  const auto keys = retrieval_keys(bag, index.tuple_config());
  if (keys.empty()) throw EmptyQueryTuples();

  std::vector<ExprId> candidates;
  for (const auto& key : keys) {
    for (const Posting& p : index.lookup(key)) candidates.push_back(p.expr_id);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  const bool wild = index.tuple_config().emit_wildcard_expansions;
  std::vector<FormulaMatch> out;
  out.reserve(candidates.size());
  for (ExprId id : candidates) {
    out.push_back({id, score_formula(bag, index.expression_bag(id), wild)});
  }
  auto better = [](const FormulaMatch& a, const FormulaMatch& b) {
    if (a.score.fscore != b.score.fscore) return a.score.fscore > b.score.fscore;
    return a.expr_id < b.expr_id;
  };
  if (k < out.size()) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k),
                      out.end(), better);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
  return out;
}

Query parse_query(std::string_view raw, double alpha) {
  Query q;
  q.alpha = alpha;
  std::vector<QueryParseError::Fragment> bad;

  auto add_formula = [&](std::string text, std::size_t offset) {
    try {
      q.formulas.push_back(parse_latex(text));
      q.formula_latex.push_back(std::move(text));
    } catch (const ParseError& e) {
      bad.push_back({std::move(text), offset + e.position(), e.detail()});
    }
  };

  if (raw.find('$') == std::string_view::npos && looks_like_formula(raw)) {
    try {
      q.formulas.push_back(parse_latex(raw));
      q.formula_latex.emplace_back(raw);
      return q;
    } catch (const ParseError&) {
      // not math after all; fall back to keywords
    }
  }

  std::vector<TextSegment> segments;
  try {
    segments = split_math(raw);
  } catch (const ParseError& e) {
    throw QueryParseError("unterminated formula in query",
                          {{std::string(raw.substr(e.position())),
                            e.position(), e.detail()}});
  }
  for (auto& seg : segments) {
    if (seg.formula) {
      add_formula(std::move(seg.text), seg.position);
    } else {
      for (auto& term : tokenize_terms(seg.text)) {
        q.keywords.push_back(std::move(term));
      }
    }
  }
  if (!bad.empty()) {
    std::string msg = "cannot parse query formula";
    for (const auto& f : bad) {
      msg += " '" + f.latex + "' (at " + std::to_string(f.position) + ": " +
             f.message + ")";
    }
    throw QueryParseError(msg, std::move(bad));
  }
  if (q.keywords.empty() && q.formulas.empty()) {
    throw QueryParseError("empty query", {});
  }
  return q;
}

std::vector<double> formula_weights(const Query& query) {
  std::vector<double> w;
  double total = 0.0;
  for (const auto& f : query.formulas) {
    w.push_back(static_cast<double>(symbol_count(f)));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return w;
}

SearchHit score_document(const Index& index, std::size_t doc,
                         const Query& query, double raw_text_score,
                         double max_text_score) {
  return score_prepared(index, doc, query, prepare(index, query),
                        raw_text_score, max_text_score);
}

std::vector<SearchHit> search(const Index& index, const Query& query,
                              std::size_t k) {
  const PreparedQuery prepared = prepare(index, query);

  std::vector<char> is_candidate(index.documents().size(), 0);
  bool usable_formula = false;
  for (const auto& bag : prepared.bags) {
    const auto keys = retrieval_keys(bag, index.tuple_config());
    usable_formula = usable_formula || !keys.empty();
    for (const auto& key : keys) {
      for (const Posting& p : index.lookup(key)) {
        for (std::size_t doc : index.documents_of(p.expr_id)) {
          is_candidate[doc] = 1;
        }
      }
    }
  }
  if (query.keywords.empty() && !usable_formula) throw EmptyQueryTuples();

  std::vector<double> raw_text(index.documents().size(), 0.0);
  double max_text = 0.0;
  for (const auto& [doc, score] : index.text_scores(query.keywords)) {
    is_candidate[doc] = 1;
    raw_text[doc] = score;
    max_text = std::max(max_text, score);
  }

  std::vector<SearchHit> hits;
  for (std::size_t doc = 0; doc < is_candidate.size(); ++doc) {
    if (!is_candidate[doc]) continue;
    hits.push_back(
        score_prepared(index, doc, query, prepared, raw_text[doc], max_text));
  }
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.combined_score != b.combined_score) {
      return a.combined_score > b.combined_score;
    }
    return a.doc_id < b.doc_id;
  };
  if (k < hits.size()) {
    std::partial_sort(hits.begin(),
                      hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                      better);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
  return hits;
}

std::vector<SearchHit> search(const Index& index, std::string_view raw,
                              std::size_t k, std::optional<double> alpha) {
  return search(index, parse_query(raw, alpha.value_or(index.alpha_default())),
                k);
}

}  // namespace mathsearch
