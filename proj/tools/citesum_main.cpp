// Command-line front end wiring the corpus, graph, model, baseline, and
// metric pipelines together. Flag > config file > default, and every
// artifact is reproducible from the recorded seed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "citesum/errors.hpp"
#include "citesum/pipeline.hpp"

namespace {

using citesum::pipeline::BaselineRunOptions;
using citesum::pipeline::BuildDatasetOptions;
using citesum::pipeline::EvaluateRunOptions;
using citesum::pipeline::GenerateRunOptions;
using citesum::pipeline::GraphOptions;
using citesum::pipeline::StatsOptions;
using citesum::pipeline::TrainRunOptions;

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw citesum::IoError("cannot open config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    trim(key);
    trim(value);
    if (!key.empty()) out[key] = value;
  }
  return out;
}

// config file fills anything the command line left at its default
template <typename T>
void apply_config(const CLI::App* cmd, const std::map<std::string, std::string>& cfg,
                  const std::string& flag, const std::string& key, T& target) {
  if (cmd->count(flag) > 0) return;
  auto it = cfg.find(key);
  if (it == cfg.end()) return;
  std::istringstream ss(it->second);
  T value;
  if constexpr (std::is_same_v<T, std::string>) {
    value = it->second;
  } else {
    if (!(ss >> value))
      throw std::invalid_argument("config key " + key + " has a bad value");
  }
  target = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citation-aware summarization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--seed", seed, "seed recorded in every manifest");
  app.add_option("--threads", threads, "worker threads for evaluation")
      ->check(CLI::PositiveNumber);

  // build-dataset
  BuildDatasetOptions bd;
  auto* cmd_bd = app.add_subcommand("build-dataset", "filter a raw corpus into a dataset");
  cmd_bd->add_option("--in", bd.input_path, "raw corpus JSONL")->required();
  cmd_bd->add_option("--out", bd.out_dir, "output dataset directory")->required();
  cmd_bd->add_option("--citation-limit", bd.citation_limit, "distinct-citation threshold");
  cmd_bd->add_option("--ratios", bd.ratios, "train val test ratios");

  // stats
  StatsOptions st;
  auto* cmd_st = app.add_subcommand("stats", "print dataset statistics");
  cmd_st->add_option("--data", st.data_dir, "dataset directory")->required();

  // extract-graph
  GraphOptions gr;
  auto* cmd_gr = app.add_subcommand("extract-graph", "BFS citation neighborhood");
  cmd_gr->add_option("--data", gr.data_dir, "dataset directory")->required();
  cmd_gr->add_option("--seed-uid", gr.seed_uid, "seed paper uid")->required();
  cmd_gr->add_option("--hop-max", gr.hop_max, "maximum hop distance");
  cmd_gr->add_option("--n-max", gr.n_max, "maximum retrieved papers");
  cmd_gr->add_option("--out", gr.out_path, "output JSONL (defaults to stdout)");

  // train
  TrainRunOptions tr;
  auto* cmd_tr = app.add_subcommand("train", "train the citation-aggregation model");
  cmd_tr->add_option("--data", tr.data_dir, "dataset directory")->required();
  cmd_tr->add_option("--out", tr.out_dir, "model output directory")->required();
  cmd_tr->add_option("--hidden-dim", tr.model.hidden_dim);
  cmd_tr->add_option("--enc-layers", tr.model.enc_layers);
  cmd_tr->add_option("--dec-layers", tr.model.dec_layers);
  cmd_tr->add_option("--heads", tr.model.n_heads);
  cmd_tr->add_option("--pair-len", tr.model.max_pair_len, "tokens per composed row");
  cmd_tr->add_option("--max-citations", tr.model.max_citations);
  cmd_tr->add_option("--target-len", tr.model.max_target_len);
  cmd_tr->add_option("--vocab-size", tr.vocab_size);
  cmd_tr->add_flag("--word-level", tr.word_level_vocab, "whitespace vocabulary");
  cmd_tr->add_option("--lr", tr.hyper.lr);
  cmd_tr->add_option("--batch", tr.hyper.batch_size);
  cmd_tr->add_option("--epochs", tr.hyper.epochs);
  cmd_tr->add_option("--max-steps", tr.hyper.max_steps, "stop after N optimizer steps");
  cmd_tr->add_option("--eval-every", tr.hyper.eval_every);
  cmd_tr->add_option("--hop-max", tr.hop_max);
  cmd_tr->add_option("--n-max", tr.n_max);

  // generate
  GenerateRunOptions ge;
  std::string strategy = "greedy";
  auto* cmd_ge = app.add_subcommand("generate", "decode summaries for a split");
  cmd_ge->add_option("--data", ge.data_dir, "dataset directory")->required();
  cmd_ge->add_option("--model", ge.model_dir, "trained model directory")->required();
  cmd_ge->add_option("--out", ge.out_path, "predictions JSONL")->required();
  cmd_ge->add_option("--split", ge.split)->check(CLI::IsMember({"train", "val", "test"}));
  cmd_ge->add_option("--strategy", strategy)->check(CLI::IsMember({"greedy", "sample"}));
  cmd_ge->add_option("--temperature", ge.temperature);
  cmd_ge->add_option("--max-len", ge.max_len);
  cmd_ge->add_option("--hop-max", ge.hop_max);
  cmd_ge->add_option("--n-max", ge.n_max);

  // baseline
  BaselineRunOptions ba;
  auto* cmd_ba = app.add_subcommand("baseline", "rule-based reference systems");
  cmd_ba->add_option("--data", ba.data_dir, "dataset directory")->required();
  cmd_ba->add_option("--out", ba.out_path, "predictions JSONL")->required();
  cmd_ba->add_option("--system", ba.system)->check(CLI::IsMember({"lead3", "oracle"}));
  cmd_ba->add_option("--split", ba.split)->check(CLI::IsMember({"train", "val", "test"}));
  cmd_ba->add_option("--max-sents", ba.max_sents, "oracle sentence budget");

  // evaluate
  EvaluateRunOptions ev;
  auto* cmd_ev = app.add_subcommand("evaluate", "score predictions against references");
  cmd_ev->add_option("--pred", ev.pred_path, "predictions JSONL")->required();
  cmd_ev->add_option("--data", ev.data_path, "dataset directory or records JSONL")->required();
  cmd_ev->add_option("--out", ev.out_path, "report JSON path");
  cmd_ev->add_option("--model", ev.model_dir, "model directory (adds perplexity)");
  cmd_ev->add_option("--hop-max", ev.hop_max);
  cmd_ev->add_option("--n-max", ev.n_max);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // unknown command / bad flag
  }

  try {
    const auto cfg = read_config_file(config_path);
    if (app.count("--seed") == 0) {
      auto it = cfg.find("seed");
      if (it != cfg.end()) seed = std::stoull(it->second);
    }

    if (cmd_bd->parsed()) {
      apply_config(cmd_bd, cfg, "--citation-limit", "citation_limit", bd.citation_limit);
      bd.seed = seed;
      if (cfg.count("field.uid")) bd.fields.uid = cfg.at("field.uid");
      if (cfg.count("field.title")) bd.fields.title = cfg.at("field.title");
      if (cfg.count("field.abstract")) bd.fields.abstract = cfg.at("field.abstract");
      if (cfg.count("field.body")) bd.fields.body = cfg.at("field.body");
      if (cfg.count("field.heading")) bd.fields.heading = cfg.at("field.heading");
      if (cfg.count("field.text")) bd.fields.text = cfg.at("field.text");
      if (cfg.count("field.citations")) bd.fields.citations = cfg.at("field.citations");
      if (cfg.count("field.citation_uid")) bd.fields.citation_uid = cfg.at("field.citation_uid");
      auto counts = citesum::pipeline::run_build_dataset(bd);
      std::cout << "records=" << counts.records << " aux=" << counts.aux
                << " train=" << counts.train << " val=" << counts.val
                << " test=" << counts.test << "\n";
    } else if (cmd_st->parsed()) {
      std::cout << citesum::pipeline::run_stats(st);
    } else if (cmd_gr->parsed()) {
      apply_config(cmd_gr, cfg, "--hop-max", "hop_max", gr.hop_max);
      apply_config(cmd_gr, cfg, "--n-max", "n_max", gr.n_max);
      gr.seed = seed;
      auto entries = citesum::pipeline::run_extract_graph(gr);
      if (gr.out_path.empty()) {
        for (const auto& e : entries)
          std::cout << "{\"uid\":\"" << e.uid << "\",\"hop\":" << e.hop << "}\n";
      }
    } else if (cmd_tr->parsed()) {
      apply_config(cmd_tr, cfg, "--lr", "lr", tr.hyper.lr);
      apply_config(cmd_tr, cfg, "--batch", "batch_size", tr.hyper.batch_size);
      apply_config(cmd_tr, cfg, "--epochs", "epochs", tr.hyper.epochs);
      apply_config(cmd_tr, cfg, "--hop-max", "hop_max", tr.hop_max);
      apply_config(cmd_tr, cfg, "--n-max", "n_max", tr.n_max);
      apply_config(cmd_tr, cfg, "--vocab-size", "vocab_size", tr.vocab_size);
      apply_config(cmd_tr, cfg, "--pair-len", "chunk", tr.model.max_pair_len);
      tr.seed = seed;
      auto summary = citesum::pipeline::run_train(tr);
      std::cout << "steps=" << summary.steps << " final_loss=" << summary.final_loss
                << " best_val_ppl=" << summary.best_val_ppl << "\n";
    } else if (cmd_ge->parsed()) {
      apply_config(cmd_ge, cfg, "--hop-max", "hop_max", ge.hop_max);
      apply_config(cmd_ge, cfg, "--n-max", "n_max", ge.n_max);
      ge.strategy = strategy == "sample" ? citesum::SamplingStrategy::Temperature
                                         : citesum::SamplingStrategy::GreedyArgmax;
      ge.seed = seed;
      citesum::pipeline::run_generate(ge);
    } else if (cmd_ba->parsed()) {
      ba.seed = seed;
      citesum::pipeline::run_baseline(ba);
    } else if (cmd_ev->parsed()) {
      ev.threads = threads;
      ev.seed = seed;
      auto report = citesum::pipeline::run_evaluate(ev);
      std::cout << "count=" << report.instances.size()
                << " rouge1_f=" << report.mean.rouge1.f1
                << " rouge2_f=" << report.mean.rouge2.f1
                << " rougeL_f=" << report.mean.rougel.f1;
      if (report.has_perplexity) std::cout << " ppl=" << report.perplexity;
      std::cout << "\n";
    }
  } catch (const citesum::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const citesum::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
