#include "citesum/baselines.hpp"

#include <algorithm>

#include "citesum/errors.hpp"
#include "citesum/metrics.hpp"
#include "citesum/text.hpp"

namespace citesum {

std::string lead3(const PaperRecord& doc) {
  const auto sentences = text::split_sentences(doc.body_text());
  if (sentences.empty()) throw EmptyDocument("document " + doc.uid + " has no sentences");
  const std::size_t take = std::min<std::size_t>(3, sentences.size());
  return text::join({sentences.begin(), sentences.begin() + take}, " ");
}

namespace {

double mean_rouge_f(const std::string& candidate, const std::string& reference) {
  return (rouge_n(candidate, reference, 1).f1 + rouge_n(candidate, reference, 2).f1 +
          rouge_l(candidate, reference).f1) /
         3.0;
}

}  // namespace

std::string oracle_greedy(const PaperRecord& doc, const std::string& reference,
                          int max_sents) {
  if (max_sents < 1) throw std::invalid_argument("max_sents must be >= 1");
  const auto sentences = text::split_sentences(doc.body_text());
  if (sentences.empty()) throw EmptyDocument("document " + doc.uid + " has no sentences");
  if (text::metric_tokens(reference).empty())
    throw EmptyReference("reference summary carries no tokens");

  std::vector<bool> selected(sentences.size(), false);
  auto selection_text = [&](int extra = -1) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (selected[i] || static_cast<int>(i) == extra) parts.push_back(sentences[i]);
    }
    return text::join(parts, " ");
  };

  double current = 0.0;
  for (int picked = 0; picked < max_sents; ++picked) {
    // the first round always takes the best sentence, even at score zero;
    // afterwards only strict improvement extends the selection. Ties keep
    // the earliest sentence.
    double best_score = picked == 0 ? -1.0 : current;
    int best = -1;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (selected[i]) continue;
      const double score = mean_rouge_f(selection_text(static_cast<int>(i)), reference);
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;
    selected[best] = true;
    current = best_score;
  }
  return selection_text();
}

}  // namespace citesum
