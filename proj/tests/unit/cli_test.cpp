#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "mathsearch/service.hpp"
#include "oracles.hpp"

using namespace mathsearch;
using json = nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

class Cli : public ::testing::Test {
 protected:
  Result run(const std::vector<std::string>& args) {
    std::string cmd = quote(MATHSEARCH_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    const auto err_path = dir_.path() / "stderr.txt";
    cmd += " 2>" + quote(err_path.string());
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err_path);
    return r;
  }

  std::string file(const std::string& name, const std::string& content) {
    const auto p = dir_.path() / name;
    std::ofstream(p) << content;
    return p.string();
  }

  std::string build_index() {
    const auto corpus = file("corpus.jsonl",
        R"({"doc_id":"p","title":"Pythagoras","text":"right triangle","formulas":["a^2+b^2=c^2"]})"
        "\n"
        R"({"doc_id":"s","title":"Square","text":"area of a square is $x^2$","formulas":[]})"
        "\n"
        R"({"doc_id":"e","title":"Euler","text":"identity","formulas":["e^{i\\pi}+1=0","\\frac{x"]})"
        "\n");
    const auto out = (dir_.path() / "idx").string();
    const auto r = run({"index", "--corpus", corpus, "--out", out});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.err.find("skipped formula"), std::string::npos);
    return out;
  }

  oracle::TempDir dir_{"mathsearch-cli"};
};

}  // namespace

TEST_F(Cli, IndexThenQuery) {
  const auto idx = build_index();
  const auto r = run({"query", "--index", idx, "--q", "$x^2$", "-k", "5"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_FALSE(j.at("hits").empty());
  EXPECT_EQ(j.at("hits")[0].at("doc_id"), "s");
  EXPECT_DOUBLE_EQ(j.at("hits")[0].at("formula_score").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("hits")[0].at("matches")[0].at("fscore").get<double>(), 1.0);
}

TEST_F(Cli, QueryOutputMatchesHttpBody) {
  const auto idx = build_index();
  IndexHandle handle(std::make_shared<const Index>(Index::load(idx)));
  for (const std::string q : {"triangle $a^2+b^?=c^2$", "identity", "x^2"}) {
    const auto r = run({"query", "--index", idx, "--q", q, "-k", "3", "--alpha", "0.25"});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto api = api_search(handle, q, "3", "0.25");
    ASSERT_EQ(api.status, 200);
    json cli_body = json::parse(r.out);
    json http_body = json::parse(api.body);
    cli_body.erase("timing_ms");
    http_body.erase("timing_ms");
    EXPECT_EQ(cli_body, http_body) << q;
  }
}

TEST_F(Cli, DataErrorsExitTwo) {
  const auto idx = build_index();
  const auto bad = run({"query", "--index", idx, "--q", "find $x+\\frac{x}$"});
  EXPECT_EQ(bad.status, 2);
  EXPECT_NE(bad.err.find("at 8"), std::string::npos) << bad.err;

  const auto missing = run({"query", "--index", (dir_.path() / "none").string(), "--q", "x"});
  EXPECT_EQ(missing.status, 2);

  const auto corpus = file("bad.jsonl", "{not json\n");
  EXPECT_EQ(run({"index", "--corpus", corpus, "--out", (dir_.path() / "o").string()}).status, 2);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).status, 1);
  EXPECT_EQ(run({"query"}).status, 1);
  EXPECT_EQ(run({"index", "--corpus", "c", "--out", "o", "--model", "v9"}).status, 1);
  EXPECT_EQ(run({"query", "--index", "i", "--q", "x", "-k", "0"}).status, 1);
  EXPECT_EQ(run({"--help"}).status, 0);
}

TEST_F(Cli, Eval) {
  const auto idx = build_index();
  const auto queries = file("q.jsonl",
      R"({"query_id":"q1","query":"$a^2+b^2=c^2$","source_doc_id":"p"})" "\n"
      R"({"query_id":"q2","query":"$e^{i\\pi}+1=0$","source_doc_id":"e"})" "\n");
  const auto qrels = file("qrels.tsv", "q1\tp\t1\nq2\te\t1\n");
  const auto r = run({"eval", "--index", idx, "--queries", queries, "--qrels", qrels, "-k", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("top1_rate").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("precision").at("mean").get<double>(), 1.0);

  const auto tsv = run({"eval", "--index", idx, "--queries", queries, "-k", "1", "--format", "tsv"});
  ASSERT_EQ(tsv.status, 0);
  EXPECT_EQ(tsv.out, "query_id\tsource_rank\texact_matches\nq1\t1\t1\nq2\t1\t1\n");

  const auto wrong = file("w.jsonl", R"({"query_id":"q","query":"$x^2$","source_doc_id":"nope"})" "\n");
  EXPECT_EQ(run({"eval", "--index", idx, "--queries", wrong}).status, 2);
}

TEST_F(Cli, Layout) {
  const auto input = file("lay.jsonl",
      R"({"label":"x","bbox":[0,0,10,10]})" "\n"
      R"({"label":"2","bbox":[11,-5,16,1]})" "\n");
  const auto r = run({"layout", "--input", input});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("latex"), "x^{2}");
}
