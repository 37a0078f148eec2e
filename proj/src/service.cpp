#include "mathsearch/service.hpp"

#include <chrono>
#include <charconv>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace mathsearch {

using json = nlohmann::json;

IndexHandle::IndexHandle(std::shared_ptr<const Index> index)
    : index_(std::move(index)) {}

std::shared_ptr<const Index> IndexHandle::acquire() const {
  if (swapping_.load()) return nullptr;
  std::lock_guard lock(mutex_);
  return index_;
}

IndexHandle::SwapGuard IndexHandle::begin_swap() {
  bool expected = false;
  if (!swapping_.compare_exchange_strong(expected, true)) {
    throw std::logic_error("index swap already in progress");
  }
  return SwapGuard(*this);
}

IndexHandle::SwapGuard::~SwapGuard() {
  if (handle_) handle_->swapping_.store(false);
}

void IndexHandle::SwapGuard::commit(std::shared_ptr<const Index> next) {
  {
    std::lock_guard lock(handle_->mutex_);
    handle_->index_ = std::move(next);
  }
  handle_->swapping_.store(false);
  handle_ = nullptr;
}

void IndexHandle::reload(const std::filesystem::path& dir) {
  auto guard = begin_swap();
  auto next = std::make_shared<const Index>(Index::load(dir));
  guard.commit(std::move(next));
}

std::string render_search_response(const Query& query,
                                   const std::vector<SearchHit>& hits,
                                   std::size_t k, double elapsed_ms) {
  json jhits = json::array();
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const SearchHit& h = hits[i];
    json matches = json::array();
    for (const auto& m : h.matches) {
      matches.push_back({{"query_formula", m.query_formula},
                         {"expr_id", m.expr_id},
                         {"latex", m.latex},
                         {"fscore", m.fscore}});
    }
    jhits.push_back({{"rank", i + 1},
                     {"doc_id", h.doc_id},
                     {"title", h.title},
                     {"combined_score", h.combined_score},
                     {"text_score", h.text_score},
                     {"formula_score", h.formula_score},
                     {"matches", std::move(matches)}});
  }
  json body{{"query",
             {{"keywords", query.keywords},
              {"formulas", query.formula_latex},
              {"alpha", query.alpha},
              {"k", k}}},
            {"hits", std::move(jhits)},
            {"timing_ms", elapsed_ms}};
  return body.dump();
}

std::string render_error(std::string_view message,
                         const std::vector<QueryParseError::Fragment>& fragments) {
  json frags = json::array();
  for (const auto& f : fragments) {
    frags.push_back(
        {{"latex", f.latex}, {"position", f.position}, {"message", f.message}});
  }
  return json{{"error", message}, {"fragments", std::move(frags)}}.dump();
}

namespace {

template <typename T>
std::optional<T> parse_number(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

ApiResponse api_search(const IndexHandle& handle, std::string_view q,
                       std::optional<std::string> k,
                       std::optional<std::string> alpha) {
  const auto index = handle.acquire();
  if (!index) return {503, render_error("index swap in progress")};
  if (q.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    return {400, render_error("empty query")};
  }
  std::size_t count = kDefaultHitCount;
  if (k) {
    auto v = parse_number<std::size_t>(*k);
    if (!v || *v == 0) return {400, render_error("k must be a positive integer")};
    count = *v;
  }
  double weight = index->alpha_default();
  if (alpha) {
    auto v = parse_number<double>(*alpha);
    if (!v || !(*v >= 0.0 && *v <= 1.0)) {
      return {400, render_error("alpha must lie in [0, 1]")};
    }
    weight = *v;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    const Query query = parse_query(q, weight);
    const auto hits = search(*index, query, count);
    const std::chrono::duration<double, std::milli> elapsed =
        std::chrono::steady_clock::now() - start;
    return {200, render_search_response(query, hits, count, elapsed.count())};
  } catch (const QueryParseError& e) {
    return {400, render_error(e.what(), e.fragments())};
  } catch (const EmptyQueryTuples& e) {
    return {400, render_error(e.what())};
  }
}

ApiResponse api_health(const IndexHandle& handle) {
  const auto index = handle.acquire();
  if (!index) return {503, render_error("index swap in progress")};
  const IndexMeta meta = index->meta();
  return {200, json{{"status", "ok"},
                    {"documents", meta.doc_count},
                    {"expressions", meta.expression_count},
                    {"model_version", model_version_name(meta.tuples.model_version)},
                    {"wildcards", meta.tuples.emit_wildcard_expansions}}
                   .dump()};
}

void install_routes(httplib::Server& server, IndexHandle& handle,
                    const ServerOptions& options) {
  auto reply = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body, "application/json; charset=utf-8");
  };
  auto param = [](const httplib::Request& req,
                  const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  };

  server.Get("/api/health", [&handle, reply](const httplib::Request&,
                                             httplib::Response& res) {
    reply(res, api_health(handle));
  });
  server.Get("/api/search", [&handle, reply, param](const httplib::Request& req,
                                                    httplib::Response& res) {
    reply(res, api_search(handle, req.get_param_value("q"), param(req, "k"),
                          param(req, "alpha")));
  });
  if (options.index_dir) {
    const auto dir = *options.index_dir;
    server.Post("/api/reload", [&handle, reply, dir](const httplib::Request&,
                                                     httplib::Response& res) {
      try {
        handle.reload(dir);
        reply(res, api_health(handle));
      } catch (const std::logic_error& e) {
        reply(res, {503, render_error(e.what())});
      } catch (const std::exception& e) {
        reply(res, {500, render_error(e.what())});
      }
    });
  }
  if (options.static_dir) {
    server.set_mount_point("/", options.static_dir->string());
  }
}

}  // namespace mathsearch
