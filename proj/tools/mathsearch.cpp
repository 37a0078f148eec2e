// mathsearch: index a corpus, run queries, serve the HTTP API, evaluate runs.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "mathsearch/eval.hpp"
#include "mathsearch/index.hpp"
#include "mathsearch/latex.hpp"
#include "mathsearch/layout.hpp"
#include "mathsearch/query.hpp"
#include "mathsearch/service.hpp"

namespace {

using json = nlohmann::json;
using namespace mathsearch;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

int run_index(const std::string& corpus, const std::string& out,
              const std::string& model, const std::string& wildcards,
              double alpha) {
  TupleConfig cfg;
  cfg.model_version = parse_model_version(model);
  cfg.emit_wildcard_expansions = wildcards == "on";
  Index index(cfg, alpha);

  auto in = open_input(corpus);
  std::string line;
  std::size_t lineno = 0, skipped = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      std::vector<std::string> formulas;
      if (j.contains("formulas")) {
        formulas = j.at("formulas").get<std::vector<std::string>>();
      }
      const auto report = index.add_document(
          j.at("doc_id").get<std::string>(), j.value("title", std::string()),
          j.value("text", std::string()), formulas);
      for (const auto& e : report.errors) {
        ++skipped;
        std::cerr << corpus << ":" << lineno << ": skipped formula '" << e.latex
                  << "' (at " << e.position << ": " << e.message << ")\n";
      }
    } catch (const json::exception& e) {
      throw DataError(corpus + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  index.save(out);
  const auto meta = index.meta();
  std::cerr << "indexed " << meta.doc_count << " documents, "
            << meta.expression_count << " unique expressions, " << skipped
            << " formulas skipped -> " << out << "\n";
  return kOk;
}

int run_query(const std::string& dir, const std::string& q, std::size_t k,
              std::optional<double> alpha) {
  const Index index = Index::load(dir);
  const auto start = std::chrono::steady_clock::now();
  const Query query = parse_query(q, alpha.value_or(index.alpha_default()));
  const auto hits = search(index, query, k);
  const std::chrono::duration<double, std::milli> elapsed =
      std::chrono::steady_clock::now() - start;
  std::cout << render_search_response(query, hits, k, elapsed.count()) << "\n";
  return kOk;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(const std::string& dir, const std::string& host, int port,
              const std::string& static_dir) {
  IndexHandle handle(std::make_shared<const Index>(Index::load(dir)));
  httplib::Server server;
  ServerOptions options;
  options.index_dir = dir;
  if (!static_dir.empty()) options.static_dir = static_dir;
  install_routes(server, handle, options);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cerr << "serving " << dir << " on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    throw DataError("cannot listen on " + host + ":" + std::to_string(port));
  }
  return kOk;
}

int run_eval(const std::string& dir, const std::string& queries_path,
             const std::string& qrels_path, std::size_t k,
             const std::string& format, std::optional<double> alpha) {
  const Index index = Index::load(dir);
  auto qin = open_input(queries_path);
  const auto queries = read_eval_queries(qin);
  EvalReport report = specific_item_eval(index, queries, k, alpha);
  if (!qrels_path.empty()) {
    auto rin = open_input(qrels_path);
    report.precision = precision_at_k(run_of(report), read_qrels(rin), k);
    if (!report.precision->unjudged.empty()) {
      std::cerr << report.precision->unjudged.size()
                << " unjudged hits counted as non-relevant\n";
    }
  }
  std::cout << (format == "tsv" ? report_tsv(report) : report_json(report) + "\n");
  return kOk;
}

int run_layout(const std::string& input, const std::string& rules_path,
               const LayoutParams& params) {
  auto in = open_input(input);
  const auto symbols = read_placed_symbols(in);
  if (symbols.empty()) throw DataError("no symbols in " + input);
  std::vector<RewriteRule> rules = default_rewrite_rules();
  if (!rules_path.empty()) {
    auto rin = open_input(rules_path);
    for (auto& r : read_rewrite_rules(rin)) rules.push_back(std::move(r));
  }

  std::optional<SymbolLayoutTree> tree;
  if (symbols.front().group) {
    std::map<int, std::vector<PlacedSymbol>> grouped;
    for (const auto& s : symbols) {
      if (!s.group) throw DataError("either all symbols carry a group or none");
      grouped[*s.group].push_back(s);
    }
    std::vector<std::vector<PlacedSymbol>> groups;
    for (auto& [id, members] : grouped) groups.push_back(std::move(members));
    tree = parse_grid(groups, params);
  } else {
    tree = parse_layout(symbols, params, rules);
  }
  std::cout << json{{"latex", to_latex(*tree)},
                    {"key", canonical_key(*tree)},
                    {"symbols", symbol_count(*tree)}}
                   .dump()
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formula search over symbol layout trees"};
  app.require_subcommand(1);

  std::string corpus, out, model = "v2", wildcards = "on";
  double index_alpha = 0.5;
  auto* index_cmd = app.add_subcommand("index", "Build an index from a JSON-lines corpus");
  index_cmd->add_option("--corpus", corpus, "Corpus file (JSON lines)")->required();
  index_cmd->add_option("--out", out, "Index directory")->required();
  index_cmd->add_option("--model", model, "Tuple model")
      ->check(CLI::IsMember({"v1", "v2"}));
  index_cmd->add_option("--wildcards", wildcards, "Post wildcard expansions")
      ->check(CLI::IsMember({"on", "off"}));
  index_cmd->add_option("--alpha", index_alpha, "Default text weight")
      ->check(CLI::Range(0.0, 1.0));

  std::string dir, q;
  std::size_t k = kDefaultHitCount;
  std::optional<double> alpha;
  auto* query_cmd = app.add_subcommand("query", "Run one query and print JSON hits");
  query_cmd->add_option("--index", dir, "Index directory")->required();
  query_cmd->add_option("--q", q, "Keywords with $...$ formulas")->required();
  query_cmd->add_option("-k,--k", k, "Number of hits")->check(CLI::PositiveNumber);
  query_cmd->add_option("--alpha", alpha, "Text weight")->check(CLI::Range(0.0, 1.0));

  std::string host = "127.0.0.1", static_dir;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP/JSON API");
  serve_cmd->add_option("--index", dir, "Index directory")->required();
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--static", static_dir, "UI assets served at /");

  std::string queries, qrels, format = "json";
  std::size_t eval_k = 10;
  auto* eval_cmd = app.add_subcommand("eval", "Specific-item evaluation");
  eval_cmd->add_option("--index", dir, "Index directory")->required();
  eval_cmd->add_option("--queries", queries, "Query file (JSON lines)")->required();
  eval_cmd->add_option("--qrels", qrels, "Judgments (TSV)");
  eval_cmd->add_option("-k,--k", eval_k, "Cutoff for exact matches and precision")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--alpha", alpha, "Text weight")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "tsv"}));

  std::string layout_input, rules;
  LayoutParams params;
  auto* layout_cmd = app.add_subcommand("layout", "Parse placed symbols into a layout tree");
  layout_cmd->add_option("--input", layout_input, "Placed symbols (JSON lines)")->required();
  layout_cmd->add_option("--rules", rules, "Extra rewrite rules (JSON lines)");
  layout_cmd->add_option("--centroid-ratio", params.centroid_ratio);
  layout_cmd->add_option("--region-threshold", params.region_threshold);
  layout_cmd->add_option("--grid-gap", params.grid_gap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*index_cmd) return run_index(corpus, out, model, wildcards, index_alpha);
    if (*query_cmd) return run_query(dir, q, k, alpha);
    if (*serve_cmd) return run_serve(dir, host, port, static_dir);
    if (*eval_cmd) return run_eval(dir, queries, qrels, eval_k, format, alpha);
    if (*layout_cmd) {
      params.validate();
      return run_layout(layout_input, rules, params);
    }
  } catch (const QueryParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
