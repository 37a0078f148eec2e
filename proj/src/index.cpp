#include "mathsearch/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "mathsearch/latex.hpp"
#include "mathsearch/text.hpp"

namespace mathsearch {

using json = nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "mathsearch-index";
constexpr const char* kMetaFile = "meta.json";
constexpr const char* kExpressionsFile = "expressions.jsonl";
constexpr const char* kPostingsFile = "postings.jsonl";
constexpr const char* kDocumentsFile = "documents.jsonl";

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

template <typename F>
void for_each_line(const std::string& data, const char* file, F&& fn) {
  std::istringstream in(data);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw CorruptIndex(std::string(file) + ":" + std::to_string(lineno) +
                         ": " + e.what());
    }
  }
}

}  // namespace

Index::Index(TupleConfig cfg, double alpha_default)
    : cfg_(cfg), alpha_default_(alpha_default) {
  if (!(alpha_default >= 0.0 && alpha_default <= 1.0)) {
    throw std::invalid_argument("alpha_default must lie in [0, 1]");
  }
}

Index::Index(Index&& other) noexcept
    : cfg_(other.cfg_),
      alpha_default_(other.alpha_default_),
      expressions_(std::move(other.expressions_)),
      bags_(std::move(other.bags_)),
      expr_docs_(std::move(other.expr_docs_)),
      expr_by_key_(std::move(other.expr_by_key_)),
      postings_(std::move(other.postings_)),
      documents_(std::move(other.documents_)),
      doc_by_id_(std::move(other.doc_by_id_)),
      term_postings_(std::move(other.term_postings_)),
      norms_dirty_(true) {}

Index& Index::operator=(Index&& other) noexcept {
  if (this != &other) {
    cfg_ = other.cfg_;
    alpha_default_ = other.alpha_default_;
    expressions_ = std::move(other.expressions_);
    bags_ = std::move(other.bags_);
    expr_docs_ = std::move(other.expr_docs_);
    expr_by_key_ = std::move(other.expr_by_key_);
    postings_ = std::move(other.postings_);
    documents_ = std::move(other.documents_);
    doc_by_id_ = std::move(other.doc_by_id_);
    term_postings_ = std::move(other.term_postings_);
    norms_dirty_ = true;
  }
  return *this;
}

IndexMeta Index::meta() const {
  return IndexMeta{cfg_, alpha_default_, documents_.size(),
                   expressions_.size()};
}

std::optional<ExprId> Index::find_expression(std::string_view canonical) const {
  auto it = expr_by_key_.find(std::string(canonical));
  if (it == expr_by_key_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Index::find_document(std::string_view doc_id) const {
  auto it = doc_by_id_.find(std::string(doc_id));
  if (it == doc_by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const Posting> Index::lookup(std::string_view key) const {
  auto it = postings_.find(std::string(key));
  if (it == postings_.end()) return {};
  return it->second;
}

ExprId Index::intern_expression(const SymbolLayoutTree& tree, std::string key) {
  if (auto it = expr_by_key_.find(key); it != expr_by_key_.end()) {
    return it->second;
  }
  const auto id = static_cast<ExprId>(expressions_.size());
  const auto tuples = generate_tuples(tree, cfg_);

  std::map<std::string, std::uint32_t> posted;
  for (const auto& t : tuples) {
    if (cfg_.emit_wildcard_expansions) {
      if (const auto* pair = std::get_if<SymbolPairTuple>(&t)) {
        for (auto& k : expand_wildcard_keys(*pair)) ++posted[std::move(k)];
        continue;
      }
    }
    ++posted[tuple_key(t)];
  }
  // Ids grow monotonically, so appending keeps every list sorted.
  for (auto& [k, count] : posted) postings_[k].push_back(Posting{id, count});

  expressions_.push_back(ExpressionRecord{
      id, to_latex(tree), key, static_cast<std::uint32_t>(tuples.size()),
      static_cast<std::uint32_t>(symbol_count(tree))});
  bags_.push_back(make_bag(tuples));
  expr_docs_.emplace_back();
  expr_by_key_.emplace(std::move(key), id);
  return id;
}

void Index::link(std::size_t doc, ExprId expr) {
  auto& ids = documents_[doc].expr_ids;
  if (std::find(ids.begin(), ids.end(), expr) != ids.end()) return;
  ids.push_back(expr);
  expr_docs_[expr].push_back(doc);
}

void Index::add_terms(std::size_t doc, const std::vector<std::string>& terms) {
  auto& tf = documents_[doc].term_frequencies;
  for (const auto& term : terms) ++tf[term];
  for (const auto& [term, count] : tf) {
    term_postings_[term].emplace_back(doc, count);
  }
  norms_dirty_ = true;
}

IngestReport Index::add_document(std::string doc_id, std::string title,
                                 std::string_view text,
                                 const std::vector<std::string>& formulas) {
  if (doc_by_id_.contains(doc_id)) {
    throw DuplicateDocument("duplicate document '" + doc_id + "'");
  }
  IngestReport report;
  report.doc_id = doc_id;

  std::vector<std::string> sources(formulas.begin(), formulas.end());
  std::string prose;
  try {
    for (auto& seg : split_math(text)) {
      if (seg.formula) {
        sources.push_back(std::move(seg.text));
      } else {
        prose += seg.text;
        prose.push_back(' ');
      }
    }
  } catch (const ParseError& e) {
    report.errors.push_back({std::string(text), e.position(), e.detail()});
    prose = std::string(text);
  }

  const std::size_t doc = documents_.size();
  doc_by_id_.emplace(doc_id, doc);
  documents_.push_back(DocumentRecord{std::move(doc_id), std::move(title), {}, {}});

  for (const auto& src : sources) {
    ++report.formulas_seen;
    try {
      auto tree = parse_latex(src);
      const std::size_t before = expressions_.size();
      const ExprId id = intern_expression(tree, canonical_key(tree));
      if (expressions_.size() > before) ++report.new_expressions;
      link(doc, id);
    } catch (const ParseError& e) {
      report.errors.push_back({src, e.position(), e.detail()});
    }
  }
  report.linked_expressions = documents_[doc].expr_ids.size();

  const auto terms = tokenize_terms(prose);
  report.terms = terms.size();
  add_terms(doc, terms);
  return report;
}

double Index::idf(std::size_t df) const {
  return std::log(1.0 + static_cast<double>(documents_.size()) /
                            static_cast<double>(df));
}

void Index::refresh_norms() const {
  if (!norms_dirty_.load(std::memory_order_acquire)) return;
  std::lock_guard lock(norms_mutex_);
  if (!norms_dirty_.load(std::memory_order_relaxed)) return;
  std::vector<double> norms(documents_.size(), 0.0);
  for (const auto& [term, plist] : term_postings_) {
    const double w = idf(plist.size());
    for (const auto& [doc, tf] : plist) {
      const double x = tf * w;
      norms[doc] += x * x;
    }
  }
  for (double& n : norms) n = std::sqrt(n);
  doc_norms_ = std::move(norms);
  norms_dirty_.store(false, std::memory_order_release);
}

std::vector<std::pair<std::size_t, double>> Index::text_scores(
    const std::vector<std::string>& terms) const {
  refresh_norms();
  std::map<std::string, std::uint32_t> qtf;
  for (const auto& t : terms) ++qtf[t];

  std::map<std::size_t, double> dot;
  double qnorm = 0.0;
  for (const auto& [term, count] : qtf) {
    auto it = term_postings_.find(term);
    if (it == term_postings_.end()) continue;
    const double w = idf(it->second.size());
    const double qw = count * w;
    qnorm += qw * qw;
    for (const auto& [doc, tf] : it->second) dot[doc] += qw * tf * w;
  }
  std::vector<std::pair<std::size_t, double>> out;
  if (qnorm == 0.0) return out;
  qnorm = std::sqrt(qnorm);
  out.reserve(dot.size());
  for (const auto& [doc, d] : dot) {
    const double denom = qnorm * doc_norms_[doc];
    out.emplace_back(doc, denom > 0.0 ? d / denom : 0.0);
  }
  return out;
}

void Index::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create index directory " + dir.string() +
                  (ec ? ": " + ec.message() : ""));
  }

  std::string expressions;
  for (const auto& e : expressions_) {
    expressions += json{{"expr_id", e.expr_id},
                        {"latex", e.latex},
                        {"key", e.key},
                        {"total_tuples", e.total_tuples},
                        {"symbol_count", e.symbol_count}}
                       .dump();
    expressions.push_back('\n');
  }

  std::vector<const std::string*> keys;
  keys.reserve(postings_.size());
  for (const auto& [k, _] : postings_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(),
            [](const auto* a, const auto* b) { return *a < *b; });
  std::string postings;
  for (const auto* k : keys) {
    json list = json::array();
    for (const auto& p : postings_.at(*k)) list.push_back({p.expr_id, p.count});
    postings += json{{"key", *k}, {"postings", std::move(list)}}.dump();
    postings.push_back('\n');
  }

  std::string documents;
  for (const auto& d : documents_) {
    documents += json{{"doc_id", d.doc_id},
                      {"title", d.title},
                      {"expr_ids", d.expr_ids},
                      {"terms", d.term_frequencies}}
                     .dump();
    documents.push_back('\n');
  }

  json meta{{"format", kFormatName},
            {"format_version", kFormatVersion},
            {"model_version", model_version_name(cfg_.model_version)},
            {"emit_wildcard_expansions", cfg_.emit_wildcard_expansions},
            {"alpha_default", alpha_default_},
            {"doc_count", documents_.size()},
            {"expression_count", expressions_.size()},
            {"checksums",
             {{kExpressionsFile, fnv1a_hex(expressions)},
              {kPostingsFile, fnv1a_hex(postings)},
              {kDocumentsFile, fnv1a_hex(documents)}}}};

  write_file(dir / kExpressionsFile, expressions);
  write_file(dir / kPostingsFile, postings);
  write_file(dir / kDocumentsFile, documents);
  // Meta last: a directory without it is not a loadable index.
  write_file(dir / kMetaFile, meta.dump(2) + "\n");
}

Index Index::load(const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(read_file(dir / kMetaFile));
  } catch (const json::exception& e) {
    throw CorruptIndex(std::string("meta.json: ") + e.what());
  }

  try {
    if (meta.at("format").get<std::string>() != kFormatName ||
        meta.at("format_version").get<int>() != kFormatVersion) {
      throw CorruptIndex("unsupported index format or version");
    }
    TupleConfig cfg;
    cfg.model_version =
        parse_model_version(meta.at("model_version").get<std::string>());
    cfg.emit_wildcard_expansions = meta.at("emit_wildcard_expansions").get<bool>();
    Index index(cfg, meta.at("alpha_default").get<double>());

    const auto& sums = meta.at("checksums");
    auto checked = [&](const char* name) {
      std::string data = read_file(dir / name);
      if (fnv1a_hex(data) != sums.at(name).get<std::string>()) {
        throw CorruptIndex(std::string("checksum mismatch in ") + name);
      }
      return data;
    };
    const std::string expressions = checked(kExpressionsFile);
    const std::string postings = checked(kPostingsFile);
    const std::string documents = checked(kDocumentsFile);

    for_each_line(expressions, kExpressionsFile, [&](const json& j) {
      ExpressionRecord rec;
      rec.expr_id = j.at("expr_id").get<ExprId>();
      rec.latex = j.at("latex").get<std::string>();
      rec.key = j.at("key").get<std::string>();
      rec.total_tuples = j.at("total_tuples").get<std::uint32_t>();
      rec.symbol_count = j.at("symbol_count").get<std::uint32_t>();
      if (rec.expr_id != index.expressions_.size()) {
        throw CorruptIndex("expression ids out of order");
      }
      SymbolLayoutTree tree = [&] {
        try {
          return parse_latex(rec.latex);
        } catch (const ParseError& e) {
          throw CorruptIndex("stored expression does not parse: " +
                             std::string(e.what()));
        }
      }();
      const auto tuples = generate_tuples(tree, cfg);
      if (canonical_key(tree) != rec.key || tuples.size() != rec.total_tuples) {
        throw CorruptIndex("expression " + std::to_string(rec.expr_id) +
                           " disagrees with its stored key");
      }
      index.bags_.push_back(make_bag(tuples));
      index.expr_docs_.emplace_back();
      index.expr_by_key_.emplace(rec.key, rec.expr_id);
      index.expressions_.push_back(std::move(rec));
    });

    for_each_line(postings, kPostingsFile, [&](const json& j) {
      std::vector<Posting> list;
      for (const auto& p : j.at("postings")) {
        Posting posting{p.at(0).get<ExprId>(), p.at(1).get<std::uint32_t>()};
        if (posting.expr_id >= index.expressions_.size() || posting.count == 0 ||
            (!list.empty() && list.back().expr_id >= posting.expr_id)) {
          throw CorruptIndex("invalid posting list");
        }
        list.push_back(posting);
      }
      index.postings_.emplace(j.at("key").get<std::string>(), std::move(list));
    });

    for_each_line(documents, kDocumentsFile, [&](const json& j) {
      const std::size_t doc = index.documents_.size();
      DocumentRecord rec;
      rec.doc_id = j.at("doc_id").get<std::string>();
      rec.title = j.at("title").get<std::string>();
      if (index.doc_by_id_.contains(rec.doc_id)) {
        throw CorruptIndex("duplicate document '" + rec.doc_id + "'");
      }
      index.doc_by_id_.emplace(rec.doc_id, doc);
      index.documents_.push_back(std::move(rec));
      for (const auto& id : j.at("expr_ids")) {
        const auto expr = id.get<ExprId>();
        if (expr >= index.expressions_.size()) {
          throw CorruptIndex("document references unknown expression");
        }
        index.link(doc, expr);
      }
      auto& tf = index.documents_[doc].term_frequencies;
      tf = j.at("terms").get<std::map<std::string, std::uint32_t>>();
      for (const auto& [term, count] : tf) {
        index.term_postings_[term].emplace_back(doc, count);
      }
    });

    if (index.documents_.size() != meta.at("doc_count").get<std::size_t>() ||
        index.expressions_.size() !=
            meta.at("expression_count").get<std::size_t>()) {
      throw CorruptIndex("record counts disagree with meta.json");
    }
    index.norms_dirty_ = true;
    return index;
  } catch (const json::exception& e) {
    throw CorruptIndex(std::string("meta.json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptIndex(e.what());
  }
}

}  // namespace mathsearch
