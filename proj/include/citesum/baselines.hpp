#pragma once

#include <string>

#include "citesum/corpus.hpp"

namespace citesum {

// First min(3, sentence_count) document sentences, single-space joined.
std::string lead3(const PaperRecord& doc);

// Greedy extractive upper bound: repeatedly add the document sentence that
// maximizes the mean of ROUGE-1/2/L F-scores of the selection against the
// reference. The first round always selects the best sentence, even at score
// zero; later rounds require strict improvement. Output keeps document order.
std::string oracle_greedy(const PaperRecord& doc, const std::string& reference,
                          int max_sents = 10);

}  // namespace citesum
