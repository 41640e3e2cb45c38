#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "citesum/citegraph.hpp"
#include "citesum/corpus.hpp"
#include "citesum/metrics.hpp"
#include "citesum/model.hpp"
#include "citesum/training.hpp"

namespace citesum::pipeline {

// Every artifact gets a manifest carrying the seed and a hash of the
// resolved configuration; no timestamps, so reruns are byte-identical.
void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed, const std::map<std::string, std::string>& params);

struct BuildDatasetOptions {
  std::string input_path;
  std::string out_dir;
  int citation_limit = 3;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  FieldMap fields;
};

struct BuildDatasetCounts {
  long parsed = 0;
  long rejected = 0;
  long records = 0;
  long aux = 0;
  long train = 0, val = 0, test = 0;
};

BuildDatasetCounts run_build_dataset(const BuildDatasetOptions& opts);

Dataset load_dataset_dir(const std::string& dir);
// Accepts either a dataset directory or a single records JSONL file.
Dataset load_references(const std::string& path);

struct StatsOptions {
  std::string data_dir;
};
// Returns the stats JSON written at build time; recomputes from the records
// when stats.json is absent (mention counts then equal distinct counts).
std::string run_stats(const StatsOptions& opts);

struct GraphOptions {
  std::string data_dir;
  std::string seed_uid;
  int hop_max = 1;
  int n_max = 12;
  std::string out_path;
  std::uint64_t seed = 0;
};
std::vector<RetrievedEntry> run_extract_graph(const GraphOptions& opts);

struct TrainRunOptions {
  std::string data_dir;
  std::string out_dir;
  ModelConfig model;  // vocab_size ignored; filled from the trained vocabulary
  Hyper hyper;
  int vocab_size = 512;
  bool word_level_vocab = false;
  int hop_max = 1;
  int n_max = 12;
  std::uint64_t seed = 0;
};
struct TrainRunSummary {
  int steps = 0;
  double final_loss = 0;
  double best_val_ppl = 0;
};
TrainRunSummary run_train(const TrainRunOptions& opts);

struct GenerateRunOptions {
  std::string data_dir;
  std::string model_dir;
  std::string out_path;
  std::string split = "test";
  SamplingStrategy strategy = SamplingStrategy::GreedyArgmax;
  double temperature = 1.0;
  int max_len = 0;
  int hop_max = 1;
  int n_max = 12;
  std::uint64_t seed = 0;
};
void run_generate(const GenerateRunOptions& opts);

struct BaselineRunOptions {
  std::string data_dir;
  std::string out_path;
  std::string split = "test";
  std::string system = "lead3";  // lead3 | oracle
  int max_sents = 10;
  std::uint64_t seed = 0;
};
void run_baseline(const BaselineRunOptions& opts);

struct EvaluateRunOptions {
  std::string pred_path;
  std::string data_path;  // dataset dir or records JSONL
  std::string out_path;   // empty = no report file
  std::string model_dir;  // optional; adds teacher-forced perplexity
  int threads = 1;
  int hop_max = 1;
  int n_max = 12;
  std::uint64_t seed = 0;
};
ScoreReport run_evaluate(const EvaluateRunOptions& opts);

std::vector<std::pair<std::string, std::string>> load_predictions(const std::string& path);

// Shared by train/generate/evaluate: instance construction through the
// citation graph (hop >= 1 neighbors supply the abstracts).
std::vector<TrainingInstance> build_instances(const Dataset& ds, const CitationGraph& g,
                                              const std::vector<std::string>& uids,
                                              const Vocabulary& vocab,
                                              const ModelConfig& cfg, int hop_max,
                                              int n_max);

}  // namespace citesum::pipeline
