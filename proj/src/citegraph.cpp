#include "citesum/citegraph.hpp"

#include <deque>

#include "citesum/errors.hpp"

namespace citesum {

CitationGraph build_graph(const Dataset& ds) {
  CitationGraph g;
  for (const auto* m : {&ds.records, &ds.aux_records}) {
    for (const auto& [uid, rec] : *m) {
      g.nodes.push_back(uid);
      g.adjacency.emplace(uid, rec.citation_uids);
    }
  }
  for (const auto& [uid, cited] : g.adjacency) {
    for (const auto& c : cited) {
      if (!g.adjacency.count(c))
        throw DanglingEdge("edge " + uid + " -> " + c + " leaves the dataset");
    }
  }
  return g;
}

std::vector<RetrievedEntry> extract_neighborhood(const CitationGraph& g,
                                                 const std::string& seed,
                                                 int hop_max, int n_max) {
  if (hop_max < 0) throw std::invalid_argument("hop_max must be >= 0");
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!g.has_node(seed)) throw UnknownSeed("seed uid " + seed + " not in graph");

  std::vector<RetrievedEntry> entries;
  std::deque<RetrievedEntry> queue;
  std::unordered_set<std::string> visited;
  queue.push_back({seed, 0});
  visited.insert(seed);

  while (!queue.empty()) {
    RetrievedEntry cur = queue.front();
    queue.pop_front();
    if (cur.hop > hop_max) break;
    if (entries.size() + 1 > static_cast<std::size_t>(n_max)) break;
    entries.push_back(cur);
    for (const auto& next : g.adjacency.at(cur.uid)) {
      if (visited.insert(next).second) queue.push_back({next, cur.hop + 1});
    }
  }
  return entries;
}

}  // namespace citesum
