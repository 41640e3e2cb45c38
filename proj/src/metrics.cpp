#include "citesum/metrics.hpp"

#include <algorithm>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "citesum/errors.hpp"
#include "citesum/text.hpp"

namespace citesum {

namespace {

RougeScore from_counts(long match, long cand, long ref) {
  RougeScore s;
  if (cand > 0) s.precision = static_cast<double>(match) / static_cast<double>(cand);
  if (ref > 0) s.recall = static_cast<double>(match) / static_cast<double>(ref);
  if (s.precision + s.recall > 0)
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

}  // namespace

RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("rouge_n supports n in {1,2}");
  const auto ct = text::metric_tokens(candidate);
  const auto rt = text::metric_tokens(reference);
  const long nc = static_cast<long>(ct.size()) - n + 1;
  const long nr = static_cast<long>(rt.size()) - n + 1;
  if (nc <= 0 || nr <= 0) return {};

  auto grams = [n](const std::vector<std::string>& toks) {
    std::map<std::string, long> counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      std::string g = toks[i];
      for (int k = 1; k < n; ++k) {
        g += '\x1f';
        g += toks[i + k];
      }
      ++counts[g];
    }
    return counts;
  };
  const auto cg = grams(ct);
  const auto rg = grams(rt);
  long match = 0;
  for (const auto& [g, c] : cg) {
    auto it = rg.find(g);
    if (it != rg.end()) match += std::min(c, it->second);  // clipped
  }
  return from_counts(match, nc, nr);
}

RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
  const auto ct = text::metric_tokens(candidate);
  const auto rt = text::metric_tokens(reference);
  if (ct.empty() || rt.empty()) return {};
  const std::size_t nc = ct.size(), nr = rt.size();
  std::vector<long> prev(nr + 1, 0), cur(nr + 1, 0);
  for (std::size_t i = 1; i <= nc; ++i) {
    for (std::size_t j = 1; j <= nr; ++j) {
      cur[j] = ct[i - 1] == rt[j - 1] ? prev[j - 1] + 1
                                      : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return from_counts(prev[nr], static_cast<long>(nc), static_cast<long>(nr));
}

namespace {

struct TextShape {
  long words = 0, sentences = 0, syllables = 0, letters = 0;
};

TextShape shape_of(const std::string& text) {
  TextShape s;
  const auto words = text::split_words(text);
  s.words = static_cast<long>(words.size());
  s.sentences = static_cast<long>(text::split_sentences(text).size());
  for (const auto& w : words) {
    s.syllables += text::count_syllables(w);
    s.letters += text::count_letters(w);
  }
  if (s.words == 0 || s.sentences == 0)
    throw EmptyText("readability needs at least one word and one sentence");
  return s;
}

}  // namespace

double flesch_kincaid(const std::string& text) {
  const TextShape s = shape_of(text);
  return 0.39 * (static_cast<double>(s.words) / static_cast<double>(s.sentences)) +
         11.8 * (static_cast<double>(s.syllables) / static_cast<double>(s.words)) - 15.59;
}

double coleman_liau(const std::string& text) {
  const TextShape s = shape_of(text);
  const double L = static_cast<double>(s.letters) / static_cast<double>(s.words) * 100.0;
  const double S = static_cast<double>(s.sentences) / static_cast<double>(s.words) * 100.0;
  return 0.0588 * L - 0.296 * S - 15.8;
}

double perplexity(const ModelParams& params,
                  const std::vector<TrainingInstance>& instances) {
  return teacher_forced_perplexity(params, instances);
}

ScoreReport evaluate(const std::vector<std::pair<std::string, std::string>>& predictions,
                     const Dataset& references, int thread_count) {
  ScoreReport report;
  report.instances.resize(predictions.size());

  // resolve references up front so a missing uid fails before any scoring
  std::vector<const PaperRecord*> refs(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto it = references.records.find(predictions[i].first);
    if (it == references.records.end())
      throw MissingReference("no reference record for uid " + predictions[i].first);
    refs[i] = &it->second;
  }

  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& [uid, summary] = predictions[i];
      InstanceScores s;
      s.uid = uid;
      s.rouge1 = rouge_n(summary, refs[i]->abstract, 1);
      s.rouge2 = rouge_n(summary, refs[i]->abstract, 2);
      s.rougel = rouge_l(summary, refs[i]->abstract);
      try {
        s.flesch_kincaid = flesch_kincaid(summary);
        s.coleman_liau = coleman_liau(summary);
      } catch (const EmptyText&) {
        s.flesch_kincaid = 0;  // empty candidate: readability pinned to 0
        s.coleman_liau = 0;
      }
      report.instances[i] = std::move(s);
    }
  };

  const int workers = std::max(1, thread_count);
  if (workers == 1 || predictions.size() < 2) {
    score_range(0, predictions.size());
  } else {
    // fixed slabs, results land at their own indices: order stays deterministic
    std::vector<std::thread> pool;
    const std::size_t slab =
        (predictions.size() + static_cast<std::size_t>(workers) - 1) /
        static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t b = static_cast<std::size_t>(w) * slab;
      if (b >= predictions.size()) break;
      const std::size_t e = std::min(predictions.size(), b + slab);
      pool.emplace_back(score_range, b, e);
    }
    for (auto& th : pool) th.join();
  }

  const double n = static_cast<double>(report.instances.size());
  if (n > 0) {
    auto& m = report.mean;
    for (const auto& s : report.instances) {
      m.rouge1.precision += s.rouge1.precision; m.rouge1.recall += s.rouge1.recall; m.rouge1.f1 += s.rouge1.f1;
      m.rouge2.precision += s.rouge2.precision; m.rouge2.recall += s.rouge2.recall; m.rouge2.f1 += s.rouge2.f1;
      m.rougel.precision += s.rougel.precision; m.rougel.recall += s.rougel.recall; m.rougel.f1 += s.rougel.f1;
      m.flesch_kincaid += s.flesch_kincaid;
      m.coleman_liau += s.coleman_liau;
    }
    m.rouge1.precision /= n; m.rouge1.recall /= n; m.rouge1.f1 /= n;
    m.rouge2.precision /= n; m.rouge2.recall /= n; m.rouge2.f1 /= n;
    m.rougel.precision /= n; m.rougel.recall /= n; m.rougel.f1 /= n;
    m.flesch_kincaid /= n;
    m.coleman_liau /= n;
  }
  return report;
}

namespace {

nlohmann::ordered_json rouge_json(const RougeScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::ordered_json instance_json(const InstanceScores& s, bool with_uid) {
  nlohmann::ordered_json j;
  if (with_uid) j["uid"] = s.uid;
  j["rouge1"] = rouge_json(s.rouge1);
  j["rouge2"] = rouge_json(s.rouge2);
  j["rougeL"] = rouge_json(s.rougel);
  j["flesch_kincaid"] = s.flesch_kincaid;
  j["coleman_liau"] = s.coleman_liau;
  return j;
}

}  // namespace

std::string report_to_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["count"] = report.instances.size();
  j["mean"] = instance_json(report.mean, false);
  if (report.has_perplexity) j["mean"]["perplexity"] = report.perplexity;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : report.instances) arr.push_back(instance_json(s, true));
  j["instances"] = std::move(arr);
  return j.dump(2) + "\n";
}

}  // namespace citesum
