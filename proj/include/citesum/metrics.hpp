#pragma once

#include <string>
#include <utility>
#include <vector>

#include "citesum/corpus.hpp"
#include "citesum/training.hpp"

namespace citesum {

struct RougeScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Clipped n-gram overlap, n in {1,2}, over lowercased alphanumeric tokens.
// Empty sides yield zeros.
RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n);

// Summary-level longest common subsequence over the same tokens.
RougeScore rouge_l(const std::string& candidate, const std::string& reference);

// 0.39 * words/sentences + 11.8 * syllables/words - 15.59
double flesch_kincaid(const std::string& text);
// 0.0588 * letters-per-100-words - 0.296 * sentences-per-100-words - 15.8
double coleman_liau(const std::string& text);

// exp of token-weighted teacher-forced mean NLL; identical to
// exp(batch loss) for a single batch.
double perplexity(const ModelParams& params,
                  const std::vector<TrainingInstance>& instances);

struct InstanceScores {
  std::string uid;
  RougeScore rouge1, rouge2, rougel;
  double flesch_kincaid = 0;
  double coleman_liau = 0;
};

struct ScoreReport {
  std::vector<InstanceScores> instances;
  InstanceScores mean;  // uid empty; arithmetic means of the fields above
  bool has_perplexity = false;
  double perplexity = 0;
};

// Joins predictions (uid, summary) with reference abstracts from the dataset.
// Throws MissingReference for a uid absent from the sample records.
// thread_count > 1 scores instances in parallel with an ordered merge.
ScoreReport evaluate(const std::vector<std::pair<std::string, std::string>>& predictions,
                     const Dataset& references, int thread_count = 1);

std::string report_to_json(const ScoreReport& report);

}  // namespace citesum
