#pragma once

// Inverted index over symbol pair tuples, with a unique-expression table,
// the expression <-> document mapping and a TF-IDF text index.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mathsearch/errors.hpp"
#include "mathsearch/tuples.hpp"

namespace mathsearch {

using ExprId = std::uint32_t;

struct ExpressionRecord {
  ExprId expr_id = 0;
  std::string latex;
  std::string key;
  /// Unexpanded tuple instances generated for the expression.
  std::uint32_t total_tuples = 0;
  std::uint32_t symbol_count = 1;
};

struct Posting {
  ExprId expr_id = 0;
  std::uint32_t count = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

struct DocumentRecord {
  std::string doc_id;
  std::string title;
  std::vector<ExprId> expr_ids;
  std::map<std::string, std::uint32_t> term_frequencies;
};

struct IndexMeta {
  TupleConfig tuples;
  double alpha_default = 0.5;
  std::size_t doc_count = 0;
  std::size_t expression_count = 0;
};

struct FormulaError {
  std::string latex;
  std::size_t position = 0;
  std::string message;
};

struct IngestReport {
  std::string doc_id;
  std::size_t formulas_seen = 0;
  std::size_t new_expressions = 0;
  std::size_t linked_expressions = 0;
  std::size_t terms = 0;
  std::vector<FormulaError> errors;
};

class Index {
 public:
  static constexpr int kFormatVersion = 1;

  explicit Index(TupleConfig cfg = {}, double alpha_default = 0.5);

  Index(const Index&) = delete;
  Index& operator=(const Index&) = delete;
  Index(Index&& other) noexcept;
  Index& operator=(Index&& other) noexcept;

  /// Formulas come from `formulas` and from $...$ fragments of `text`.
  /// Unparseable formulas are skipped and listed in the report. Throws
  /// DuplicateDocument if `doc_id` is already present.
  IngestReport add_document(std::string doc_id, std::string title,
                            std::string_view text,
                            const std::vector<std::string>& formulas);

  /// Postings sorted by expr_id; empty for an absent key.
  std::span<const Posting> lookup(std::string_view key) const;
  std::size_t key_count() const noexcept { return postings_.size(); }

  IndexMeta meta() const;
  const TupleConfig& tuple_config() const noexcept { return cfg_; }
  double alpha_default() const noexcept { return alpha_default_; }

  const std::vector<ExpressionRecord>& expressions() const noexcept {
    return expressions_;
  }
  const ExpressionRecord& expression(ExprId id) const {
    return expressions_.at(id);
  }
  const TupleBag& expression_bag(ExprId id) const { return bags_.at(id); }
  std::optional<ExprId> find_expression(std::string_view canonical) const;

  const std::vector<DocumentRecord>& documents() const noexcept {
    return documents_;
  }
  std::optional<std::size_t> find_document(std::string_view doc_id) const;
  /// Indices into documents() of the documents containing an expression.
  std::span<const std::size_t> documents_of(ExprId id) const {
    return expr_docs_.at(id);
  }

  /// Cosine similarity of TF-IDF vectors, idf = ln(1 + N/df). Returns
  /// (document index, score) for every document sharing a term, ordered by
  /// document index.
  std::vector<std::pair<std::size_t, double>> text_scores(
      const std::vector<std::string>& terms) const;

  /// Writes meta.json, expressions.jsonl, postings.jsonl, documents.jsonl.
  /// Throws IoError.
  void save(const std::filesystem::path& dir) const;
  /// Throws IoError for unreadable files and CorruptIndex for version or
  /// checksum mismatches and inconsistent content.
  static Index load(const std::filesystem::path& dir);

 private:
  ExprId intern_expression(const SymbolLayoutTree& tree, std::string key);
  void link(std::size_t doc, ExprId expr);
  void add_terms(std::size_t doc, const std::vector<std::string>& terms);
  double idf(std::size_t df) const;
  void refresh_norms() const;

  TupleConfig cfg_;
  double alpha_default_;

  std::vector<ExpressionRecord> expressions_;
  std::vector<TupleBag> bags_;
  std::vector<std::vector<std::size_t>> expr_docs_;
  std::unordered_map<std::string, ExprId> expr_by_key_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;

  std::vector<DocumentRecord> documents_;
  std::unordered_map<std::string, std::size_t> doc_by_id_;
  // term -> (document index, term frequency), ascending document index
  std::unordered_map<std::string,
                     std::vector<std::pair<std::size_t, std::uint32_t>>>
      term_postings_;

  mutable std::mutex norms_mutex_;
  mutable std::atomic<bool> norms_dirty_{true};
  mutable std::vector<double> doc_norms_;
};

}  // namespace mathsearch
