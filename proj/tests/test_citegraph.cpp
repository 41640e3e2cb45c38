#include <doctest.h>

#include <random>

#include "citesum/citegraph.hpp"
#include "citesum/errors.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace citesum;

namespace {

Dataset tiny_dataset() {
  Dataset ds;
  auto add = [&ds](const std::string& uid, std::vector<std::string> cits, bool aux) {
    PaperRecord rec;
    rec.uid = uid;
    rec.citation_uids = std::move(cits);
    (aux ? ds.aux_records : ds.records).emplace(uid, std::move(rec));
  };
  add("a", {"b", "c"}, false);
  add("b", {"c"}, false);
  add("c", {}, true);
  return ds;
}

CitationGraph explicit_graph(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& adj) {
  CitationGraph g;
  for (const auto& [uid, edges] : adj) {
    g.nodes.push_back(uid);
    g.adjacency.emplace(uid, edges);
  }
  return g;
}

}  // namespace

TEST_CASE("build_graph: nodes and edges from the dataset") {
  CitationGraph g = build_graph(tiny_dataset());
  CHECK(g.nodes.size() == 3);
  CHECK(g.adjacency.at("a") == std::vector<std::string>{"b", "c"});
  CHECK(g.adjacency.at("b") == std::vector<std::string>{"c"});
  CHECK(g.adjacency.at("c").empty());
}

TEST_CASE("build_graph: dangling edge") {
  Dataset ds = tiny_dataset();
  ds.records.at("a").citation_uids.push_back("ghost");
  CHECK_THROWS_AS(build_graph(ds), DanglingEdge);
}

TEST_CASE("build_graph: counts match a direct tally") {
  std::mt19937_64 rng(31);
  auto corpus = synth::random_raw_corpus(rng, 20);
  Dataset ds;
  try {
    ds = build_dataset(corpus, 2);
  } catch (const EmptyResult&) {
    return;
  }
  CitationGraph g = build_graph(ds);
  std::size_t expected_nodes = ds.records.size() + ds.aux_records.size();
  std::size_t expected_edges = 0;
  for (const auto* m : {&ds.records, &ds.aux_records})
    for (const auto& [uid, rec] : *m) expected_edges += rec.citation_uids.size();
  std::size_t actual_edges = 0;
  for (const auto& [uid, adj] : g.adjacency) actual_edges += adj.size();
  CHECK(g.nodes.size() == expected_nodes);
  CHECK(actual_edges == expected_edges);
}

TEST_CASE("extract_neighborhood: star graph") {
  CitationGraph g = explicit_graph(
      {{"seed", {"a", "b", "c"}}, {"a", {}}, {"b", {}}, {"c", {}}});
  auto entries = extract_neighborhood(g, "seed", 1, 12);
  REQUIRE(entries.size() == 4);
  CHECK(entries[0] == RetrievedEntry{"seed", 0});
  CHECK(entries[1] == RetrievedEntry{"a", 1});
  CHECK(entries[2] == RetrievedEntry{"b", 1});
  CHECK(entries[3] == RetrievedEntry{"c", 1});
}

TEST_CASE("extract_neighborhood: hop_max zero returns only the seed") {
  CitationGraph g = explicit_graph({{"s", {"a"}}, {"a", {"s"}}});
  auto entries = extract_neighborhood(g, "s", 0, 10);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0] == RetrievedEntry{"s", 0});
}

TEST_CASE("extract_neighborhood: capacity cap fires before depth") {
  CitationGraph g = explicit_graph({{"s", {"a"}}, {"a", {"b"}}, {"b", {}}});
  auto entries = extract_neighborhood(g, "s", 2, 2);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0] == RetrievedEntry{"s", 0});
  CHECK(entries[1] == RetrievedEntry{"a", 1});
}

TEST_CASE("extract_neighborhood: unknown seed and bad bounds") {
  CitationGraph g = explicit_graph({{"s", {}}});
  CHECK_THROWS_AS(extract_neighborhood(g, "nope", 1, 5), UnknownSeed);
  CHECK_THROWS_AS(extract_neighborhood(g, "s", -1, 5), std::invalid_argument);
  CHECK_THROWS_AS(extract_neighborhood(g, "s", 1, 0), std::invalid_argument);
}

TEST_CASE("extract_neighborhood: cycles visit each node once") {
  CitationGraph g = explicit_graph({{"s", {"a"}}, {"a", {"s", "b"}}, {"b", {"a"}}});
  auto entries = extract_neighborhood(g, "s", 5, 10);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0] == RetrievedEntry{"s", 0});
  CHECK(entries[1] == RetrievedEntry{"a", 1});
  CHECK(entries[2] == RetrievedEntry{"b", 2});
}

TEST_CASE("extract_neighborhood: equivalence with the level-order oracle") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    CitationGraph g = synth::random_digraph(rng, 50);
    const std::string seed = g.nodes[uniform_index(rng, g.nodes.size())];
    for (int hop_max : {0, 1, 2, 3}) {
      for (int n_max : {1, 5, 12, 20}) {
        auto got = extract_neighborhood(g, seed, hop_max, n_max);
        auto want = oracle::naive_bfs(g, seed, hop_max, n_max);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].uid == want[i].uid);
          CHECK(got[i].hop == want[i].hop);
        }
      }
    }
  }
}

TEST_CASE("extract_neighborhood: bounds and prefix monotonicity") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    CitationGraph g = synth::random_digraph(rng, 30);
    const std::string seed = g.nodes[uniform_index(rng, g.nodes.size())];
    const int hop_max = static_cast<int>(uniform_index(rng, 4));
    std::vector<RetrievedEntry> prev;
    for (int n_max = 1; n_max <= 20; ++n_max) {
      auto cur = extract_neighborhood(g, seed, hop_max, n_max);
      CHECK(cur.size() <= static_cast<std::size_t>(n_max));
      std::set<std::string> seen;
      int last_hop = 0;
      for (const auto& e : cur) {
        CHECK(e.hop <= hop_max);
        CHECK(e.hop >= last_hop);  // hops never decrease along the list
        last_hop = e.hop;
        CHECK(seen.insert(e.uid).second);
      }
      // growing the cap only extends the previous result
      REQUIRE(prev.size() <= cur.size());
      for (std::size_t i = 0; i < prev.size(); ++i) CHECK(prev[i] == cur[i]);
      prev = cur;
    }
  }
}
