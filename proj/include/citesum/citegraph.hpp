#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citesum/corpus.hpp"

namespace citesum {

// Directed citation graph, citing -> cited. Adjacency order follows each
// record's citation list (stable from JSONL order) and carries no duplicates.
struct CitationGraph {
  std::vector<std::string> nodes;  // records first, then aux, uid-sorted within each
  std::unordered_map<std::string, std::vector<std::string>> adjacency;

  bool has_node(const std::string& uid) const { return adjacency.count(uid) != 0; }
};

struct RetrievedEntry {
  std::string uid;
  int hop = 0;

  bool operator==(const RetrievedEntry&) const = default;
};

// One node per record including aux, one edge per (record, citation) pair.
// Throws DanglingEdge when a citation does not resolve in the dataset.
CitationGraph build_graph(const Dataset& ds);

// Bounded breadth-first neighborhood. The seed comes out at hop 0; citations
// of a dequeued node enter the queue at hop+1 in adjacency order. Stops when
// the next dequeued hop exceeds hop_max or one more entry would exceed n_max.
std::vector<RetrievedEntry> extract_neighborhood(const CitationGraph& g,
                                                 const std::string& seed,
                                                 int hop_max, int n_max);

}  // namespace citesum
