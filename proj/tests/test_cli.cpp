#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "eae/resources.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int status;
  std::string out;
  std::string err;
};

Invocation cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = eae::run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("stats and validate on a fixture corpus") {
  const auto dir = eae::test::scratch_dir("cli_stats");
  const auto corpus = (dir / "attack.jsonl").string();
  const auto ontology = (dir / "attack.ontology.json").string();
  eae::save_corpus(eae::test::attack_corpus(), corpus);
  eae::save_ontology(eae::test::attack_ontology(), ontology);

  auto r = cli({"stats", corpus});
  REQUIRE(r.status == 0);
  const auto stats = json::parse(r.out);
  CHECK(stats["documents"] == 1);
  CHECK(stats["events"] == 2);
  CHECK(stats["arguments"] == 4);

  r = cli({"stats", corpus, "--table"});
  CHECK(r.status == 0);
  CHECK(r.out.find("attack\t") != std::string::npos);

  r = cli({"validate", corpus, "--ontology", ontology});
  CHECK(r.status == 0);
  CHECK(json::parse(r.out)["violations"].empty());

  r = cli({"lint-resources", ontology});
  CHECK(r.status == 0);
  fs::remove_all(dir);
}

TEST_CASE("ingest a synthetic corpus and run a matrix from a grid file") {
  const auto dir = eae::test::scratch_dir("cli_matrix");
  const auto corpus = (dir / "synth.jsonl").string();
  const auto ontology = (dir / "synth.ontology.json").string();
  auto r = cli({"ingest", "--synthetic", "--documents", "20", "--output", corpus, "--ontology-out",
                ontology});
  REQUIRE(r.status == 0);
  CHECK(json::parse(r.out)["documents"] == 20);

  const json grid = {
      {"output_dir", "grid"},
      {"defaults", {{"ontology", "synth.ontology.json"}, {"corpus", "synth.jsonl"}}},
      {"cells", {{{"method", "TI"}, {"source", "synth"}, {"target", "synth"}},
                 {{"method", "QA"}, {"source", "synth"}, {"target", "synth"}, {"t_dev", 0.0}}}}};
  std::ofstream(dir / "grid.json") << grid.dump(2);
  r = cli({"matrix", "--config", (dir / "grid.json").string()});
  INFO(r.err);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("**100.00**") != std::string::npos);
  CHECK(fs::exists(dir / "grid" / "matrix.csv"));

  r = cli({"matrix", "--config", (dir / "grid.json").string(), "--latex", "--output-dir",
           (dir / "grid2").string()});
  CHECK(r.status == 0);
  CHECK(r.out.find("\\textbf{") != std::string::npos);

  r = cli({"evaluate", "--predictions",
           (dir / "grid" / "cells").string() + "/does-not-exist/predictions.jsonl", "--corpus", corpus});
  CHECK(r.status != 0);
  CHECK(json::parse(r.err.substr(0, r.err.find('\n'))).contains("error"));
  fs::remove_all(dir);
}

TEST_CASE("usage errors and machine-readable failures") {
  auto r = cli({"frobnicate"});
  CHECK(r.status != 0);
  CHECK(json::parse(r.err.substr(0, r.err.find('\n')))["error"]["code"] == "usage");

  r = cli({});
  CHECK(r.status != 0);

  r = cli({"stats", "/nonexistent/corpus.jsonl"});
  CHECK(r.status != 0);
  const auto e = json::parse(r.err.substr(0, r.err.find('\n')));
  CHECK(e["error"]["message"].get<std::string>().find("/nonexistent/corpus.jsonl") != std::string::npos);
}

TEST_CASE("correlate accepts per-type maps") {
  const auto dir = eae::test::scratch_dir("cli_corr");
  std::ofstream(dir / "in.json") << R"({"A": 0.1, "B": 0.2, "C": 0.3})";
  std::ofstream(dir / "zs.json") << R"({"A": 0.3, "B": 0.2, "C": 0.1, "D": 0.9})";
  auto r = cli({"correlate", "--in-domain", (dir / "in.json").string(), "--zero-shot",
                (dir / "zs.json").string()});
  REQUIRE(r.status == 0);
  const auto j = json::parse(r.out);
  CHECK(j["n_types"] == 3);
  CHECK(j["rho"].get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  fs::remove_all(dir);
}
