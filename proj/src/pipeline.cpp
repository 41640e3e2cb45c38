#include "citesum/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citesum/baselines.hpp"
#include "citesum/errors.hpp"
#include "citesum/util.hpp"

namespace citesum::pipeline {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string stats_to_json(const Dataset& ds) {
  nlohmann::ordered_json j;
  for (const char* split : {"train", "val", "test"}) {
    const CorpusStats st = compute_stats(ds, split);
    j[split] = {{"sample_count", st.sample_count},
                {"paper_count", st.paper_count},
                {"avg_distinct_citations", st.avg_distinct_citations},
                {"avg_total_citations", st.avg_total_citations},
                {"avg_chunks", st.avg_chunks},
                {"avg_doc_sentences", st.avg_doc_sentences},
                {"avg_doc_words", st.avg_doc_words},
                {"avg_summary_sentences", st.avg_summary_sentences},
                {"avg_summary_words", st.avg_summary_words}};
  }
  return j.dump(2) + "\n";
}

void write_records_jsonl(const std::string& path, const Dataset& ds,
                         const std::vector<std::string>& uids) {
  std::string out;
  for (const auto& uid : uids) {
    const PaperRecord* rec = ds.find(uid);
    if (!rec) throw UnknownSplit("uid " + uid + " missing while writing " + path);
    out += record_to_json_line(*rec);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace

void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed, const std::map<std::string, std::string>& params) {
  std::string canonical = "command=" + command + "\nseed=" + std::to_string(seed) + "\n";
  for (const auto& [k, v] : params) canonical += k + "=" + v + "\n";

  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_hash"] = fnv1a64_hex(canonical);
  nlohmann::ordered_json p;
  for (const auto& [k, v] : params) p[k] = v;
  j["params"] = std::move(p);
  write_file(path, j.dump(2) + "\n");
}

BuildDatasetCounts run_build_dataset(const BuildDatasetOptions& opts) {
  std::vector<RawPaperFile> corpus;
  long rejected = 0;
  for (const auto& line : read_lines(opts.input_path))
    corpus.push_back(parse_raw_entry(line, opts.fields));

  for (const auto& raw : corpus) {
    if (std::holds_alternative<Rejection>(qualify_paper(raw, opts.citation_limit)))
      ++rejected;
  }

  Dataset ds = build_dataset(corpus, opts.citation_limit);
  ds = split_dataset(std::move(ds), opts.ratios, opts.seed);
  ds.check_invariants();

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  write_records_jsonl((dir / "train.jsonl").string(), ds, ds.train);
  write_records_jsonl((dir / "val.jsonl").string(), ds, ds.val);
  write_records_jsonl((dir / "test.jsonl").string(), ds, ds.test);
  std::vector<std::string> aux_uids;
  for (const auto& [uid, rec] : ds.aux_records) aux_uids.push_back(uid);
  write_records_jsonl((dir / "aux.jsonl").string(), ds, aux_uids);
  write_file((dir / "stats.json").string(), stats_to_json(ds));

  BuildDatasetCounts counts;
  counts.parsed = static_cast<long>(corpus.size());
  counts.rejected = rejected;
  counts.records = static_cast<long>(ds.records.size());
  counts.aux = static_cast<long>(ds.aux_records.size());
  counts.train = static_cast<long>(ds.train.size());
  counts.val = static_cast<long>(ds.val.size());
  counts.test = static_cast<long>(ds.test.size());

  std::map<std::string, std::string> params = {
      {"citation_limit", std::to_string(opts.citation_limit)},
      {"ratio_train", std::to_string(opts.ratios[0])},
      {"ratio_val", std::to_string(opts.ratios[1])},
      {"ratio_test", std::to_string(opts.ratios[2])},
      {"input", opts.input_path},
      {"count_records", std::to_string(counts.records)},
      {"count_aux", std::to_string(counts.aux)},
      {"count_train", std::to_string(counts.train)},
      {"count_val", std::to_string(counts.val)},
      {"count_test", std::to_string(counts.test)},
  };
  write_manifest((dir / "manifest.json").string(), "build-dataset", opts.seed, params);
  return counts;
}

Dataset load_dataset_dir(const std::string& dir) {
  const fs::path d(dir);
  if (!fs::is_directory(d)) throw IoError(dir + " is not a dataset directory");
  Dataset ds;
  auto load_split = [&ds, &d](const char* name, std::vector<std::string>* split) {
    const std::string path = (d / (std::string(name) + ".jsonl")).string();
    if (!fs::exists(path)) {
      if (split) throw IoError("dataset is missing " + path);
      return;  // aux is optional on disk
    }
    for (const auto& line : read_lines(path)) {
      PaperRecord rec = record_from_json_line(line);
      const std::string uid = rec.uid;
      if (split) {
        split->push_back(uid);
        ds.records.emplace(uid, std::move(rec));
      } else {
        ds.aux_records.emplace(uid, std::move(rec));
      }
    }
  };
  load_split("train", &ds.train);
  load_split("val", &ds.val);
  load_split("test", &ds.test);
  load_split("aux", nullptr);
  ds.check_invariants();
  return ds;
}

Dataset load_references(const std::string& path) {
  if (fs::is_directory(path)) return load_dataset_dir(path);
  Dataset ds;
  for (const auto& line : read_lines(path)) {
    PaperRecord rec = record_from_json_line(line);
    std::string uid = rec.uid;
    ds.records.emplace(std::move(uid), std::move(rec));
  }
  if (ds.records.empty()) throw EmptyResult("no records in " + path);
  return ds;
}

std::string run_stats(const StatsOptions& opts) {
  const fs::path stats_file = fs::path(opts.data_dir) / "stats.json";
  if (fs::exists(stats_file)) return read_file(stats_file.string());
  return stats_to_json(load_dataset_dir(opts.data_dir));
}

std::vector<RetrievedEntry> run_extract_graph(const GraphOptions& opts) {
  Dataset ds = load_dataset_dir(opts.data_dir);
  CitationGraph g = build_graph(ds);
  auto entries = extract_neighborhood(g, opts.seed_uid, opts.hop_max, opts.n_max);
  if (!opts.out_path.empty()) {
    std::string out;
    for (const auto& e : entries) {
      nlohmann::ordered_json j;
      j["uid"] = e.uid;
      j["hop"] = e.hop;
      out += j.dump();
      out += '\n';
    }
    write_file(opts.out_path, out);
    write_manifest(opts.out_path + ".manifest.json", "extract-graph", opts.seed,
                   {{"seed_uid", opts.seed_uid},
                    {"hop_max", std::to_string(opts.hop_max)},
                    {"n_max", std::to_string(opts.n_max)},
                    {"data", opts.data_dir}});
  }
  return entries;
}

std::vector<TrainingInstance> build_instances(const Dataset& ds, const CitationGraph& g,
                                              const std::vector<std::string>& uids,
                                              const Vocabulary& vocab,
                                              const ModelConfig& cfg, int hop_max,
                                              int n_max) {
  std::vector<TrainingInstance> out;
  for (const auto& uid : uids) {
    const PaperRecord* rec = ds.find(uid);
    if (!rec) throw UnknownSplit("uid " + uid + " not in dataset");
    std::vector<std::string> abstracts;
    for (const auto& e : extract_neighborhood(g, uid, hop_max, n_max)) {
      if (e.hop == 0) continue;
      if (const PaperRecord* cited = ds.find(e.uid)) abstracts.push_back(cited->abstract);
    }
    if (abstracts.empty()) continue;  // nothing retrievable at this n_max
    if (vocab.encode(rec->body_text()).empty()) continue;

    TrainingInstance inst;
    inst.input = compose_inputs(*rec, abstracts, cfg, vocab);
    std::vector<int> target_ids = vocab.encode(rec->abstract);
    if (static_cast<int>(target_ids.size()) > cfg.max_target_len - 2)
      target_ids.resize(cfg.max_target_len - 2);
    inst.target.push_back(Vocabulary::kBos);
    inst.target.insert(inst.target.end(), target_ids.begin(), target_ids.end());
    inst.target.push_back(Vocabulary::kEos);
    out.push_back(std::move(inst));
  }
  return out;
}

TrainRunSummary run_train(const TrainRunOptions& opts) {
  Dataset ds = load_dataset_dir(opts.data_dir);
  CitationGraph g = build_graph(ds);

  std::vector<std::string> texts;
  for (const auto& uid : ds.train) {
    const PaperRecord& rec = ds.records.at(uid);
    texts.push_back(rec.body_text());
    texts.push_back(rec.abstract);
  }
  // citation abstracts feed the encoder too
  for (const auto& [uid, rec] : ds.aux_records) texts.push_back(rec.abstract);
  Vocabulary vocab = opts.word_level_vocab ? Vocabulary::word_level(texts)
                                           : Vocabulary::train_bpe(texts, opts.vocab_size);

  ModelConfig cfg = opts.model;
  cfg.vocab_size = vocab.size();
  cfg.seed = opts.seed;
  cfg.validate();

  Hyper hyper = opts.hyper;
  hyper.shuffle_seed = opts.seed;

  auto train_set = build_instances(ds, g, ds.train, vocab, cfg, opts.hop_max, opts.n_max);
  auto val_set = build_instances(ds, g, ds.val, vocab, cfg, opts.hop_max, opts.n_max);
  if (train_set.empty()) throw EmptyResult("no trainable instances");

  TrainResult result = train(train_set, val_set, cfg, hyper);

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  vocab.save((dir / "vocab.json").string());
  write_file((dir / "checkpoint.json").string(),
             result.best.to_json(vocab.fingerprint()));
  std::string log;
  for (const auto& e : result.log) {
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["loss"] = e.loss;
    if (std::isfinite(e.val_ppl)) j["val_ppl"] = e.val_ppl;
    else j["val_ppl"] = nullptr;
    log += j.dump();
    log += '\n';
  }
  write_file((dir / "train_log.jsonl").string(), log);
  write_manifest((dir / "manifest.json").string(), "train", opts.seed,
                 {{"data", opts.data_dir},
                  {"hidden_dim", std::to_string(cfg.hidden_dim)},
                  {"enc_layers", std::to_string(cfg.enc_layers)},
                  {"dec_layers", std::to_string(cfg.dec_layers)},
                  {"n_heads", std::to_string(cfg.n_heads)},
                  {"max_pair_len", std::to_string(cfg.max_pair_len)},
                  {"max_citations", std::to_string(cfg.max_citations)},
                  {"max_target_len", std::to_string(cfg.max_target_len)},
                  {"vocab_size", std::to_string(cfg.vocab_size)},
                  {"ff_dim", std::to_string(cfg.ff())},
                  {"word_level", opts.word_level_vocab ? "1" : "0"},
                  {"lr", std::to_string(hyper.lr)},
                  {"batch_size", std::to_string(hyper.batch_size)},
                  {"epochs", std::to_string(hyper.epochs)},
                  {"max_steps", std::to_string(hyper.max_steps)},
                  {"eval_every", std::to_string(hyper.eval_every)},
                  {"hop_max", std::to_string(opts.hop_max)},
                  {"n_max", std::to_string(opts.n_max)},
                  {"vocab_hash", vocab.fingerprint()}});

  TrainRunSummary s;
  s.steps = result.steps_run;
  s.final_loss = result.log.empty() ? 0.0 : result.log.back().loss;
  s.best_val_ppl = result.best_val_ppl;
  return s;
}

void run_generate(const GenerateRunOptions& opts) {
  Dataset ds = load_dataset_dir(opts.data_dir);
  CitationGraph g = build_graph(ds);

  const fs::path mdir(opts.model_dir);
  Vocabulary vocab = Vocabulary::load((mdir / "vocab.json").string());
  std::string expected_hash;
  ModelParams params = ModelParams::from_json(
      read_file((mdir / "checkpoint.json").string()), &expected_hash);
  if (expected_hash != vocab.fingerprint())
    throw Error("vocabulary fingerprint does not match the checkpoint");

  const auto& uids = ds.split(opts.split);
  std::string out;
  GenerationOptions gen;
  gen.strategy = opts.strategy;
  gen.temperature = opts.temperature;
  gen.seed = opts.seed;
  gen.max_len = opts.max_len;
  for (const auto& uid : uids) {
    const PaperRecord& rec = ds.records.at(uid);
    std::vector<std::string> abstracts;
    for (const auto& e : extract_neighborhood(g, uid, opts.hop_max, opts.n_max)) {
      if (e.hop == 0) continue;
      if (const PaperRecord* cited = ds.find(e.uid)) abstracts.push_back(cited->abstract);
    }
    std::string summary;
    if (!abstracts.empty()) {
      ComposedInput input = compose_inputs(rec, abstracts, params.config, vocab);
      summary = vocab.decode(generate(params, input, gen));
    }
    nlohmann::ordered_json j;
    j["uid"] = uid;
    j["summary"] = summary;
    out += j.dump();
    out += '\n';
  }
  write_file(opts.out_path, out);
  write_manifest(opts.out_path + ".manifest.json", "generate", opts.seed,
                 {{"data", opts.data_dir},
                  {"model", opts.model_dir},
                  {"split", opts.split},
                  {"strategy", opts.strategy == SamplingStrategy::GreedyArgmax
                                   ? "greedy"
                                   : "sample"},
                  {"temperature", std::to_string(opts.temperature)},
                  {"max_len", std::to_string(opts.max_len)},
                  {"hop_max", std::to_string(opts.hop_max)},
                  {"n_max", std::to_string(opts.n_max)}});
}

void run_baseline(const BaselineRunOptions& opts) {
  if (opts.system != "lead3" && opts.system != "oracle")
    throw std::invalid_argument("unknown baseline system '" + opts.system + "'");
  Dataset ds = load_dataset_dir(opts.data_dir);
  const auto& uids = ds.split(opts.split);
  std::string out;
  for (const auto& uid : uids) {
    const PaperRecord& rec = ds.records.at(uid);
    const std::string summary = opts.system == "lead3"
                                    ? lead3(rec)
                                    : oracle_greedy(rec, rec.abstract, opts.max_sents);
    nlohmann::ordered_json j;
    j["uid"] = uid;
    j["summary"] = summary;
    out += j.dump();
    out += '\n';
  }
  write_file(opts.out_path, out);
  write_manifest(opts.out_path + ".manifest.json", "baseline", opts.seed,
                 {{"data", opts.data_dir},
                  {"split", opts.split},
                  {"system", opts.system},
                  {"max_sents", std::to_string(opts.max_sents)}});
}

std::vector<std::pair<std::string, std::string>> load_predictions(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& line : read_lines(path)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedJson(std::string("predictions: ") + e.what());
    }
    out.emplace_back(j.at("uid").get<std::string>(), j.at("summary").get<std::string>());
  }
  return out;
}

ScoreReport run_evaluate(const EvaluateRunOptions& opts) {
  const auto predictions = load_predictions(opts.pred_path);
  Dataset refs = load_references(opts.data_path);
  ScoreReport report = evaluate(predictions, refs, opts.threads);

  if (!opts.model_dir.empty() && fs::is_directory(opts.data_path)) {
    const fs::path mdir(opts.model_dir);
    Vocabulary vocab = Vocabulary::load((mdir / "vocab.json").string());
    std::string expected_hash;
    ModelParams params = ModelParams::from_json(
        read_file((mdir / "checkpoint.json").string()), &expected_hash);
    if (expected_hash != vocab.fingerprint())
      throw Error("vocabulary fingerprint does not match the checkpoint");
    CitationGraph g = build_graph(refs);
    std::vector<std::string> uids;
    for (const auto& [uid, summary] : predictions) uids.push_back(uid);
    auto instances = build_instances(refs, g, uids, vocab, params.config,
                                     opts.hop_max, opts.n_max);
    if (!instances.empty()) {
      report.perplexity = perplexity(params, instances);
      report.has_perplexity = true;
    }
  }

  if (!opts.out_path.empty()) {
    write_file(opts.out_path, report_to_json(report));
    write_manifest(opts.out_path + ".manifest.json", "evaluate", opts.seed,
                   {{"pred", opts.pred_path},
                    {"data", opts.data_path},
                    {"model", opts.model_dir},
                    {"threads", std::to_string(opts.threads)}});
  }
  return report;
}

}  // namespace citesum::pipeline
