#include "citesum/model.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "citesum/errors.hpp"

namespace citesum {

void ModelConfig::validate() const {
  if (hidden_dim <= 0 || n_heads <= 0 || hidden_dim % n_heads != 0)
    throw std::invalid_argument("hidden_dim must be a positive multiple of n_heads");
  if (max_pair_len < 4) throw std::invalid_argument("max_pair_len must be >= 4");
  if (max_citations < 1) throw std::invalid_argument("max_citations must be >= 1");
  if (max_target_len < 2) throw std::invalid_argument("max_target_len must be >= 2");
  if (vocab_size <= Vocabulary::kNumSpecials)
    throw std::invalid_argument("vocab_size must exceed the special tokens");
  if (enc_layers < 1 || dec_layers < 1)
    throw std::invalid_argument("layer counts must be >= 1");
}

namespace {

// Box-Muller over explicit 53-bit uniforms; pinned so initialization does not
// depend on the standard library's normal_distribution.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double next(double stddev) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_ * stddev;
    }
    double u1 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a) * stddev;
  }

 private:
  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

constexpr double kInitStd = 0.02;

enum class InitKind { Gaussian, Zeros, Ones };

// Canonical walk over every tensor; the single source of truth for
// enumeration order (init draws, optimizer updates, serialization).
template <typename P, typename F>
void walk_tensors(P& params, F&& fn) {
  fn("tok_embed", params.tok_embed, InitKind::Gaussian);
  fn("pos_enc", params.pos_enc, InitKind::Gaussian);
  fn("pos_dec", params.pos_dec, InitKind::Gaussian);
  auto walk_ln = [&fn](const std::string& name, auto& ln) {
    fn(name + ".gain", ln.gain, InitKind::Ones);
    fn(name + ".bias", ln.bias, InitKind::Zeros);
  };
  auto walk_attn = [&fn](const std::string& name, auto& a) {
    fn(name + ".wq", a.wq, InitKind::Gaussian);
    fn(name + ".bq", a.bq, InitKind::Zeros);
    fn(name + ".wk", a.wk, InitKind::Gaussian);
    fn(name + ".bk", a.bk, InitKind::Zeros);
    fn(name + ".wv", a.wv, InitKind::Gaussian);
    fn(name + ".bv", a.bv, InitKind::Zeros);
    fn(name + ".wo", a.wo, InitKind::Gaussian);
    fn(name + ".bo", a.bo, InitKind::Zeros);
  };
  auto walk_ffn = [&fn](const std::string& name, auto& f) {
    fn(name + ".w1", f.w1, InitKind::Gaussian);
    fn(name + ".b1", f.b1, InitKind::Zeros);
    fn(name + ".w2", f.w2, InitKind::Gaussian);
    fn(name + ".b2", f.b2, InitKind::Zeros);
  };
  for (std::size_t i = 0; i < params.enc.size(); ++i) {
    const std::string p = "enc" + std::to_string(i);
    walk_ln(p + ".ln1", params.enc[i].ln1);
    walk_attn(p + ".attn", params.enc[i].attn);
    walk_ln(p + ".ln2", params.enc[i].ln2);
    walk_ffn(p + ".ffn", params.enc[i].ffn);
  }
  walk_ln("enc_final", params.enc_final);
  fn("pair_score", params.pair_score, InitKind::Gaussian);
  for (std::size_t i = 0; i < params.dec.size(); ++i) {
    const std::string p = "dec" + std::to_string(i);
    walk_ln(p + ".ln1", params.dec[i].ln1);
    walk_attn(p + ".self_attn", params.dec[i].self_attn);
    walk_ln(p + ".ln2", params.dec[i].ln2);
    walk_attn(p + ".cross_attn", params.dec[i].cross_attn);
    walk_ln(p + ".ln3", params.dec[i].ln3);
    walk_ffn(p + ".ffn", params.dec[i].ffn);
  }
  walk_ln("dec_final", params.dec_final);
  fn("out_proj", params.out_proj, InitKind::Gaussian);
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg) {
  cfg.validate();
  const int M = cfg.hidden_dim, F = cfg.ff(), V = cfg.vocab_size;

  ModelParams p;
  p.config = cfg;
  p.tok_embed.resize(V, M);
  p.pos_enc.resize(cfg.max_pair_len, M);
  p.pos_dec.resize(cfg.max_target_len, M);
  auto size_ln = [M](LayerNormWeights& ln) {
    ln.gain.resize(1, M);
    ln.bias.resize(1, M);
  };
  auto size_attn = [M](AttentionWeights& a) {
    a.wq.resize(M, M); a.wk.resize(M, M); a.wv.resize(M, M); a.wo.resize(M, M);
    a.bq.resize(1, M); a.bk.resize(1, M); a.bv.resize(1, M); a.bo.resize(1, M);
  };
  auto size_ffn = [M, F](FfnWeights& f) {
    f.w1.resize(M, F); f.b1.resize(1, F); f.w2.resize(F, M); f.b2.resize(1, M);
  };
  p.enc.resize(cfg.enc_layers);
  for (auto& l : p.enc) { size_ln(l.ln1); size_attn(l.attn); size_ln(l.ln2); size_ffn(l.ffn); }
  size_ln(p.enc_final);
  p.pair_score.resize(M, 1);
  p.dec.resize(cfg.dec_layers);
  for (auto& l : p.dec) {
    size_ln(l.ln1); size_attn(l.self_attn);
    size_ln(l.ln2); size_attn(l.cross_attn);
    size_ln(l.ln3); size_ffn(l.ffn);
  }
  size_ln(p.dec_final);
  p.out_proj.resize(M, V);

  GaussianSource gauss(cfg.seed);
  walk_tensors(p, [&gauss](const std::string&, Mat& m, InitKind kind) {
    switch (kind) {
      case InitKind::Gaussian:
        for (int r = 0; r < m.rows(); ++r)
          for (int c = 0; c < m.cols(); ++c) m(r, c) = gauss.next(kInitStd);
        break;
      case InitKind::Zeros: m.setZero(); break;
      case InitKind::Ones: m.setOnes(); break;
    }
  });
  return p;
}

std::vector<std::pair<std::string, Mat*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Mat*>> out;
  walk_tensors(*this, [&out](const std::string& name, Mat& m, InitKind) {
    out.emplace_back(name, &m);
  });
  return out;
}

std::vector<std::pair<std::string, const Mat*>> ModelParams::tensors() const {
  std::vector<std::pair<std::string, const Mat*>> out;
  walk_tensors(*this, [&out](const std::string& name, const Mat& m, InitKind) {
    out.emplace_back(name, &m);
  });
  return out;
}

std::int64_t ModelParams::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [name, m] : tensors()) n += m->size();
  return n;
}

std::string ModelParams::to_json(const std::string& vocab_fingerprint) const {
  nlohmann::ordered_json j;
  j["config"] = {{"hidden_dim", config.hidden_dim},
                 {"ff_dim", config.ff_dim},
                 {"enc_layers", config.enc_layers},
                 {"dec_layers", config.dec_layers},
                 {"n_heads", config.n_heads},
                 {"max_pair_len", config.max_pair_len},
                 {"max_citations", config.max_citations},
                 {"max_target_len", config.max_target_len},
                 {"vocab_size", config.vocab_size},
                 {"seed", config.seed}};
  j["vocab_hash"] = vocab_fingerprint;
  nlohmann::ordered_json tens;
  for (const auto& [name, m] : tensors()) {
    std::vector<double> data(m->size());
    for (int r = 0; r < m->rows(); ++r)
      for (int c = 0; c < m->cols(); ++c)
        data[static_cast<std::size_t>(r) * m->cols() + c] = (*m)(r, c);
    tens[name] = {{"rows", m->rows()}, {"cols", m->cols()}, {"data", data}};
  }
  j["tensors"] = std::move(tens);
  return j.dump();
}

ModelParams ModelParams::from_json(const std::string& text,
                                   std::string* vocab_fingerprint) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJson(std::string("checkpoint: ") + e.what());
  }
  ModelConfig cfg;
  const auto& c = j.at("config");
  cfg.hidden_dim = c.at("hidden_dim").get<int>();
  cfg.ff_dim = c.at("ff_dim").get<int>();
  cfg.enc_layers = c.at("enc_layers").get<int>();
  cfg.dec_layers = c.at("dec_layers").get<int>();
  cfg.n_heads = c.at("n_heads").get<int>();
  cfg.max_pair_len = c.at("max_pair_len").get<int>();
  cfg.max_citations = c.at("max_citations").get<int>();
  cfg.max_target_len = c.at("max_target_len").get<int>();
  cfg.vocab_size = c.at("vocab_size").get<int>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  if (vocab_fingerprint) *vocab_fingerprint = j.at("vocab_hash").get<std::string>();

  ModelParams p = ModelParams::init(cfg);
  for (auto& [name, m] : p.tensors()) {
    const auto& t = j.at("tensors").at(name);
    if (t.at("rows").get<int>() != m->rows() || t.at("cols").get<int>() != m->cols())
      throw ShapeMismatch("checkpoint tensor " + name + " has the wrong shape");
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<long>(data.size()) != m->size())
      throw ShapeMismatch("checkpoint tensor " + name + " has the wrong size");
    for (int r = 0; r < m->rows(); ++r)
      for (int cidx = 0; cidx < m->cols(); ++cidx)
        (*m)(r, cidx) = data[static_cast<std::size_t>(r) * m->cols() + cidx];
  }
  return p;
}

ComposedInput compose_inputs(const std::vector<int>& doc_ids,
                             const std::vector<std::vector<int>>& citation_abs_ids,
                             const ModelConfig& cfg) {
  cfg.validate();
  if (citation_abs_ids.empty())
    throw NoCitations("the framework needs at least one citation abstract");
  if (doc_ids.empty()) throw std::invalid_argument("document is empty");

  const int L = cfg.max_pair_len;
  const int budget = L - 2;
  const int doc_budget = (7 * budget + 9) / 10;  // ceil(0.7 * budget)
  const int doc_kept = std::min<int>(static_cast<int>(doc_ids.size()), doc_budget);
  const int abs_budget = budget - doc_kept;

  ComposedInput out;
  const int n = std::min<int>(static_cast<int>(citation_abs_ids.size()), cfg.max_citations);
  for (int jdx = 0; jdx < n; ++jdx) {
    const auto& abs_ids = citation_abs_ids[jdx];
    const int abs_kept = std::min<int>(static_cast<int>(abs_ids.size()), abs_budget);
    std::vector<int> row;
    row.reserve(L);
    row.push_back(Vocabulary::kCls);
    row.insert(row.end(), doc_ids.begin(), doc_ids.begin() + doc_kept);
    row.push_back(Vocabulary::kAbs);
    row.insert(row.end(), abs_ids.begin(), abs_ids.begin() + abs_kept);
    std::vector<unsigned char> m(row.size(), 1);
    row.resize(L, Vocabulary::kPad);
    m.resize(L, 0);
    out.rows.push_back(std::move(row));
    out.mask.push_back(std::move(m));
  }
  return out;
}

ComposedInput compose_inputs(const PaperRecord& doc,
                             const std::vector<std::string>& citation_abstracts,
                             const ModelConfig& cfg, const Vocabulary& vocab) {
  std::vector<std::vector<int>> abs_ids;
  abs_ids.reserve(citation_abstracts.size());
  for (const auto& a : citation_abstracts) abs_ids.push_back(vocab.encode(a));
  return compose_inputs(vocab.encode(doc.body_text()), abs_ids, cfg);
}

ParamVars bind_params(Tape& tape, const ModelParams& params) {
  ParamVars pv;
  auto next = [&tape, &pv](const Mat& m) {
    Var v = tape.leaf(m);
    pv.ordered.push_back(v);
    return v;
  };
  // must mirror walk_tensors order exactly; the gradient check pins this
  pv.tok_embed = next(params.tok_embed);
  pv.pos_enc = next(params.pos_enc);
  pv.pos_dec = next(params.pos_dec);
  auto bind_ln = [&next](const LayerNormWeights& w) {
    ParamVars::LayerNormVars v;
    v.gain = next(w.gain);
    v.bias = next(w.bias);
    return v;
  };
  auto bind_attn = [&next](const AttentionWeights& w) {
    ParamVars::AttentionVars v;
    v.wq = next(w.wq); v.bq = next(w.bq);
    v.wk = next(w.wk); v.bk = next(w.bk);
    v.wv = next(w.wv); v.bv = next(w.bv);
    v.wo = next(w.wo); v.bo = next(w.bo);
    return v;
  };
  auto bind_ffn = [&next](const FfnWeights& w) {
    ParamVars::FfnVars v;
    v.w1 = next(w.w1); v.b1 = next(w.b1);
    v.w2 = next(w.w2); v.b2 = next(w.b2);
    return v;
  };
  for (const auto& l : params.enc) {
    ParamVars::EncLayerVars lv;
    lv.ln1 = bind_ln(l.ln1);
    lv.attn = bind_attn(l.attn);
    lv.ln2 = bind_ln(l.ln2);
    lv.ffn = bind_ffn(l.ffn);
    pv.enc.push_back(lv);
  }
  pv.enc_final = bind_ln(params.enc_final);
  pv.pair_score = next(params.pair_score);
  for (const auto& l : params.dec) {
    ParamVars::DecLayerVars lv;
    lv.ln1 = bind_ln(l.ln1);
    lv.self_attn = bind_attn(l.self_attn);
    lv.ln2 = bind_ln(l.ln2);
    lv.cross_attn = bind_attn(l.cross_attn);
    lv.ln3 = bind_ln(l.ln3);
    lv.ffn = bind_ffn(l.ffn);
    pv.dec.push_back(lv);
  }
  pv.dec_final = bind_ln(params.dec_final);
  pv.out_proj = next(params.out_proj);
  return pv;
}

namespace {

Var attention(Tape& t, Var x_q, Var x_kv, const ParamVars::AttentionVars& w,
              int n_heads, const Mat& add_mask) {
  const int M = x_q.cols();
  const int dk = M / n_heads;
  Var q = t.add_rowvec(t.matmul(x_q, w.wq), w.bq);
  Var k = t.add_rowvec(t.matmul(x_kv, w.wk), w.bk);
  Var v = t.add_rowvec(t.matmul(x_kv, w.wv), w.bv);
  std::vector<Var> heads;
  heads.reserve(n_heads);
  for (int h = 0; h < n_heads; ++h) {
    Var qh = t.slice_cols(q, h * dk, dk);
    Var kh = t.slice_cols(k, h * dk, dk);
    Var vh = t.slice_cols(v, h * dk, dk);
    Var scores = t.scale(t.matmul_bt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dk)));
    scores = t.add_const(scores, add_mask);
    heads.push_back(t.matmul(t.softmax_rows(scores), vh));
  }
  Var o = n_heads == 1 ? heads[0] : t.concat_cols(heads);
  return t.add_rowvec(t.matmul(o, w.wo), w.bo);
}

Var ffn_block(Tape& t, Var x, const ParamVars::FfnVars& w) {
  Var h = t.gelu(t.add_rowvec(t.matmul(x, w.w1), w.b1));
  return t.add_rowvec(t.matmul(h, w.w2), w.b2);
}

Mat key_pad_mask(const std::vector<unsigned char>& mask) {
  const int L = static_cast<int>(mask.size());
  Mat m = Mat::Zero(L, L);
  for (int k = 0; k < L; ++k) {
    if (!mask[k]) m.col(k).setConstant(ad::kMaskedLogit);
  }
  return m;
}

Mat causal_mask(int t_len) {
  Mat m = Mat::Zero(t_len, t_len);
  for (int q = 0; q < t_len; ++q)
    for (int k = q + 1; k < t_len; ++k) m(q, k) = ad::kMaskedLogit;
  return m;
}

}  // namespace

EncodedFeatures encode_pairs(Tape& tape, const ParamVars& pv, const ComposedInput& input,
                             const ModelConfig& cfg) {
  if (input.rows.empty()) throw NoCitations("composed input has no rows");
  if (input.n_rows() > cfg.max_citations)
    throw ShapeMismatch("composed input carries more rows than max_citations");
  EncodedFeatures enc;
  for (int j = 0; j < input.n_rows(); ++j) {
    const auto& row = input.rows[j];
    const auto& mask = input.mask[j];
    if (static_cast<int>(row.size()) != cfg.max_pair_len ||
        mask.size() != row.size())
      throw ShapeMismatch("composed row is not max_pair_len wide");
    for (int id : row) {
      if (id < 0 || id >= cfg.vocab_size)
        throw ShapeMismatch("token id outside the vocabulary");
    }
    Var x = tape.add(tape.embed(pv.tok_embed, row), pv.pos_enc);
    const Mat pad_mask = key_pad_mask(mask);
    for (const auto& layer : pv.enc) {
      Var xn = tape.layer_norm(x, layer.ln1.gain, layer.ln1.bias);
      x = tape.add(x, attention(tape, xn, xn, layer.attn, cfg.n_heads, pad_mask));
      Var xf = tape.layer_norm(x, layer.ln2.gain, layer.ln2.bias);
      x = tape.add(x, ffn_block(tape, xf, layer.ffn));
    }
    enc.pair_states.push_back(
        tape.layer_norm(x, pv.enc_final.gain, pv.enc_final.bias));
  }
  return enc;
}

void aggregate(Tape& tape, const ParamVars& pv, EncodedFeatures& enc,
               const ModelConfig& cfg) {
  (void)cfg;
  if (enc.pair_states.empty()) throw NoCitations("no encoded rows to aggregate");
  std::vector<Var> cls_rows;
  cls_rows.reserve(enc.pair_states.size());
  for (Var q : enc.pair_states) cls_rows.push_back(tape.slice_rows(q, 0, 1));
  enc.cls_states =
      cls_rows.size() == 1 ? cls_rows[0] : tape.concat_rows(cls_rows);  // n x M
  Var logits = tape.matmul(enc.cls_states, pv.pair_score);              // n x 1
  // softmax over the citation axis; rows absent from the input contribute no
  // logit at all, which matches masking them to -inf
  enc.attn = tape.transpose(tape.softmax_rows(tape.transpose(logits)));
  enc.fused = tape.weighted_sum(enc.pair_states, enc.attn);
  enc.aggregated = true;
}

Var decoder_hidden(Tape& tape, const ParamVars& pv, const std::vector<int>& prefix,
                   Var fused, const ModelConfig& cfg) {
  if (prefix.empty()) throw std::invalid_argument("decoder prefix is empty");
  const int T = static_cast<int>(prefix.size());
  if (T > cfg.max_target_len)
    throw PrefixTooLong("prefix of " + std::to_string(T) + " exceeds max_target_len " +
                        std::to_string(cfg.max_target_len));
  for (int id : prefix) {
    if (id < 0 || id >= cfg.vocab_size)
      throw ShapeMismatch("prefix token id outside the vocabulary");
  }
  Var x = tape.add(tape.embed(pv.tok_embed, prefix), tape.slice_rows(pv.pos_dec, 0, T));
  const Mat self_mask = causal_mask(T);
  const Mat cross_mask = Mat::Zero(T, fused.rows());
  for (const auto& layer : pv.dec) {
    Var xn = tape.layer_norm(x, layer.ln1.gain, layer.ln1.bias);
    x = tape.add(x, attention(tape, xn, xn, layer.self_attn, cfg.n_heads, self_mask));
    Var xc = tape.layer_norm(x, layer.ln2.gain, layer.ln2.bias);
    x = tape.add(x, attention(tape, xc, fused, layer.cross_attn, cfg.n_heads, cross_mask));
    Var xf = tape.layer_norm(x, layer.ln3.gain, layer.ln3.bias);
    x = tape.add(x, ffn_block(tape, xf, layer.ffn));
  }
  return tape.layer_norm(x, pv.dec_final.gain, pv.dec_final.bias);
}

Eigen::VectorXd decode_step(const ModelParams& params, const DecoderState& state,
                            const Mat& fused) {
  if (state.prefix.empty() || state.prefix.front() != Vocabulary::kBos)
    throw std::invalid_argument("decoder prefix must begin with <bos>");
  Tape tape;
  ParamVars pv = bind_params(tape, params);
  Var f = tape.leaf(fused);
  Var hidden = decoder_hidden(tape, pv, state.prefix, f, params.config);
  Var last = tape.slice_rows(hidden, static_cast<int>(state.prefix.size()) - 1, 1);
  Var probs = tape.softmax_rows(tape.matmul(last, pv.out_proj));
  return probs.val().row(0).transpose();
}

Mat fuse_features(const ModelParams& params, const ComposedInput& input) {
  Tape tape;
  ParamVars pv = bind_params(tape, params);
  EncodedFeatures enc = encode_pairs(tape, pv, input, params.config);
  aggregate(tape, pv, enc, params.config);
  return enc.fused.val();
}

long count_target_tokens(const TrainingInstance& inst) {
  long n = 0;
  for (std::size_t t = 1; t < inst.target.size(); ++t) {
    if (inst.target[t] != Vocabulary::kPad) ++n;
  }
  return n;
}

Var instance_nll(Tape& tape, const ParamVars& pv, const TrainingInstance& inst,
                 const ModelConfig& cfg, double inv_normalizer, long* token_count) {
  if (inst.target.size() < 2 || inst.target.front() != Vocabulary::kBos)
    throw std::invalid_argument("target must be <bos> ... <eos>");
  EncodedFeatures enc = encode_pairs(tape, pv, inst.input, cfg);
  aggregate(tape, pv, enc, cfg);

  std::vector<int> dec_input(inst.target.begin(), inst.target.end() - 1);
  std::vector<int> predict(inst.target.begin() + 1, inst.target.end());
  std::vector<unsigned char> mask(predict.size());
  long count = 0;
  for (std::size_t t = 0; t < predict.size(); ++t) {
    mask[t] = predict[t] != Vocabulary::kPad;
    count += mask[t];
  }
  if (token_count) *token_count = count;

  Var hidden = decoder_hidden(tape, pv, dec_input, enc.fused, cfg);
  Var logits = tape.matmul(hidden, pv.out_proj);
  return tape.cross_entropy_sum(logits, predict, mask, inv_normalizer);
}

Var batch_loss(Tape& tape, const ParamVars& pv, const std::vector<TrainingInstance>& batch,
               const ModelConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  long total = 0;
  for (const auto& inst : batch) total += count_target_tokens(inst);
  if (total == 0) throw std::invalid_argument("batch has no unmasked target tokens");
  const double inv = 1.0 / static_cast<double>(total);
  Var loss = instance_nll(tape, pv, batch[0], cfg, inv, nullptr);
  for (std::size_t i = 1; i < batch.size(); ++i)
    loss = tape.add(loss, instance_nll(tape, pv, batch[i], cfg, inv, nullptr));
  return loss;
}

double loss_value(const ModelParams& params, const std::vector<TrainingInstance>& batch) {
  Tape tape;
  ParamVars pv = bind_params(tape, params);
  return batch_loss(tape, pv, batch, params.config).val()(0, 0);
}

std::vector<int> generate(const ModelParams& params, const ComposedInput& input,
                          const GenerationOptions& opts) {
  const ModelConfig& cfg = params.config;
  int max_len = opts.max_len > 0 ? opts.max_len : cfg.max_target_len - 1;
  max_len = std::min(max_len, cfg.max_target_len - 1);

  Tape tape;
  ParamVars pv = bind_params(tape, params);
  EncodedFeatures enc = encode_pairs(tape, pv, input, cfg);
  aggregate(tape, pv, enc, cfg);

  std::mt19937_64 rng(opts.seed);
  std::vector<int> prefix = {Vocabulary::kBos};
  std::vector<int> out;
  while (static_cast<int>(out.size()) < max_len) {
    Var hidden = decoder_hidden(tape, pv, prefix, enc.fused, cfg);
    Var last = tape.slice_rows(hidden, static_cast<int>(prefix.size()) - 1, 1);
    Eigen::RowVectorXd logits = (last.val() * params.out_proj).row(0);

    int next = 0;
    if (opts.strategy == SamplingStrategy::GreedyArgmax) {
      for (int i = 1; i < logits.size(); ++i) {
        if (logits(i) > logits(next)) next = i;  // ties keep the lowest id
      }
    } else {
      const double tau = opts.temperature > 0 ? opts.temperature : 1.0;
      Eigen::RowVectorXd scaled = logits / tau;
      double mx = scaled.maxCoeff();
      Eigen::RowVectorXd p = (scaled.array() - mx).exp();
      p /= p.sum();
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      double cum = 0.0;
      next = static_cast<int>(p.size()) - 1;
      for (int i = 0; i < p.size(); ++i) {
        cum += p(i);
        if (u < cum) {
          next = i;
          break;
        }
      }
    }
    if (next == Vocabulary::kEos) break;
    out.push_back(next);
    if (static_cast<int>(prefix.size()) + 1 > cfg.max_target_len) break;
    prefix.push_back(next);
  }
  return out;
}

}  // namespace citesum
