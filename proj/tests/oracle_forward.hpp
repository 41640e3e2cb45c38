// Straight-line reimplementation of the model forward pass with plain loops.
// Reads tensors from ModelParams but shares no computation code with src/;
// used to pin decode_step distributions and loss values.
#pragma once

#include <cmath>
#include <vector>

#include "citesum/model.hpp"

namespace fwd_oracle {

using DVec = std::vector<double>;
using DMat = std::vector<DVec>;
using citesum::ModelParams;

inline DMat zeros(std::size_t r, std::size_t c) { return DMat(r, DVec(c, 0.0)); }

inline DMat linear(const DMat& x, const citesum::Mat& w, const citesum::Mat& b) {
  DMat out = zeros(x.size(), static_cast<std::size_t>(w.cols()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      double acc = b(0, j);
      for (int k = 0; k < w.rows(); ++k) acc += x[i][static_cast<std::size_t>(k)] * w(k, j);
      out[i][static_cast<std::size_t>(j)] = acc;
    }
  }
  return out;
}

inline DMat layer_norm(const DMat& x, const citesum::Mat& gain, const citesum::Mat& bias) {
  const double eps = 1e-5;
  DMat out = zeros(x.size(), x[0].size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mu = 0;
    for (double v : x[i]) mu += v;
    mu /= static_cast<double>(x[i].size());
    double var = 0;
    for (double v : x[i]) var += (v - mu) * (v - mu);
    var /= static_cast<double>(x[i].size());
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < x[i].size(); ++j)
      out[i][j] = (x[i][j] - mu) * inv * gain(0, static_cast<int>(j)) +
                  bias(0, static_cast<int>(j));
  }
  return out;
}

inline double gelu1(double x) {
  return 0.5 * x * (1.0 + std::tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
}

// masked(q, k) -> true means key k is invisible to query q
template <typename MaskFn>
DMat mha(const DMat& xq, const DMat& xkv, const citesum::AttentionWeights& w,
         int n_heads, MaskFn masked) {
  const int M = static_cast<int>(xq[0].size());
  const int dk = M / n_heads;
  const DMat q = linear(xq, w.wq, w.bq);
  const DMat k = linear(xkv, w.wk, w.bk);
  const DMat v = linear(xkv, w.wv, w.bv);
  DMat concat = zeros(xq.size(), static_cast<std::size_t>(M));
  for (int h = 0; h < n_heads; ++h) {
    const int off = h * dk;
    for (std::size_t qi = 0; qi < xq.size(); ++qi) {
      // scores over visible keys
      DVec score(xkv.size(), 0.0);
      double mx = -1e300;
      for (std::size_t ki = 0; ki < xkv.size(); ++ki) {
        if (masked(qi, ki)) continue;
        double dot = 0;
        for (int d = 0; d < dk; ++d)
          dot += q[qi][static_cast<std::size_t>(off + d)] * k[ki][static_cast<std::size_t>(off + d)];
        score[ki] = dot / std::sqrt(static_cast<double>(dk));
        mx = std::max(mx, score[ki]);
      }
      double z = 0;
      DVec p(xkv.size(), 0.0);
      for (std::size_t ki = 0; ki < xkv.size(); ++ki) {
        if (masked(qi, ki)) continue;
        p[ki] = std::exp(score[ki] - mx);
        z += p[ki];
      }
      for (std::size_t ki = 0; ki < xkv.size(); ++ki) {
        if (p[ki] == 0.0) continue;
        const double weight = p[ki] / z;
        for (int d = 0; d < dk; ++d)
          concat[qi][static_cast<std::size_t>(off + d)] +=
              weight * v[ki][static_cast<std::size_t>(off + d)];
      }
    }
  }
  return linear(concat, w.wo, w.bo);
}

inline void add_into(DMat& x, const DMat& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x[i].size(); ++j) x[i][j] += y[i][j];
}

inline DMat ffn(const DMat& x, const citesum::FfnWeights& w) {
  DMat h = linear(x, w.w1, w.b1);
  for (auto& row : h)
    for (auto& v : row) v = gelu1(v);
  return linear(h, w.w2, w.b2);
}

inline DMat encode_row(const ModelParams& p, const std::vector<int>& row,
                       const std::vector<unsigned char>& mask) {
  const int M = p.config.hidden_dim;
  DMat x = zeros(row.size(), static_cast<std::size_t>(M));
  for (std::size_t i = 0; i < row.size(); ++i)
    for (int m = 0; m < M; ++m)
      x[i][static_cast<std::size_t>(m)] =
          p.tok_embed(row[i], m) + p.pos_enc(static_cast<int>(i), m);
  for (const auto& layer : p.enc) {
    DMat xn = layer_norm(x, layer.ln1.gain, layer.ln1.bias);
    add_into(x, mha(xn, xn, layer.attn, p.config.n_heads,
                    [&mask](std::size_t, std::size_t k) { return mask[k] == 0; }));
    DMat xf = layer_norm(x, layer.ln2.gain, layer.ln2.bias);
    add_into(x, ffn(xf, layer.ffn));
  }
  return layer_norm(x, p.enc_final.gain, p.enc_final.bias);
}

struct Aggregated {
  DVec attn;
  DMat fused;
};

inline Aggregated aggregate(const ModelParams& p, const std::vector<DMat>& rows) {
  const int M = p.config.hidden_dim;
  Aggregated out;
  DVec logits;
  for (const auto& q : rows) {
    double acc = 0;
    for (int m = 0; m < M; ++m) acc += q[0][static_cast<std::size_t>(m)] * p.pair_score(m, 0);
    logits.push_back(acc);
  }
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  double z = 0;
  for (double l : logits) z += std::exp(l - mx);
  for (double l : logits) out.attn.push_back(std::exp(l - mx) / z);
  out.fused = zeros(rows[0].size(), static_cast<std::size_t>(M));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t l = 0; l < rows[j].size(); ++l)
      for (int m = 0; m < M; ++m)
        out.fused[l][static_cast<std::size_t>(m)] +=
            out.attn[j] * rows[j][l][static_cast<std::size_t>(m)];
  return out;
}

inline DMat decoder(const ModelParams& p, const std::vector<int>& prefix,
                    const DMat& fused) {
  const int M = p.config.hidden_dim;
  DMat x = zeros(prefix.size(), static_cast<std::size_t>(M));
  for (std::size_t i = 0; i < prefix.size(); ++i)
    for (int m = 0; m < M; ++m)
      x[i][static_cast<std::size_t>(m)] =
          p.tok_embed(prefix[i], m) + p.pos_dec(static_cast<int>(i), m);
  for (const auto& layer : p.dec) {
    DMat xn = layer_norm(x, layer.ln1.gain, layer.ln1.bias);
    add_into(x, mha(xn, xn, layer.self_attn, p.config.n_heads,
                    [](std::size_t q, std::size_t k) { return k > q; }));
    DMat xc = layer_norm(x, layer.ln2.gain, layer.ln2.bias);
    add_into(x, mha(xc, fused, layer.cross_attn, p.config.n_heads,
                    [](std::size_t, std::size_t) { return false; }));
    DMat xf = layer_norm(x, layer.ln3.gain, layer.ln3.bias);
    add_into(x, ffn(xf, layer.ffn));
  }
  return layer_norm(x, p.dec_final.gain, p.dec_final.bias);
}

inline DMat encode_input(const ModelParams& p, const citesum::ComposedInput& input,
                         Aggregated* agg_out = nullptr) {
  std::vector<DMat> rows;
  for (int j = 0; j < input.n_rows(); ++j)
    rows.push_back(encode_row(p, input.rows[j], input.mask[j]));
  Aggregated agg = aggregate(p, rows);
  if (agg_out) *agg_out = agg;
  return agg.fused;
}

inline DVec next_distribution(const ModelParams& p, const citesum::ComposedInput& input,
                              const std::vector<int>& prefix) {
  const DMat fused = encode_input(p, input);
  const DMat h = decoder(p, prefix, fused);
  const int V = p.config.vocab_size;
  const DVec& last = h.back();
  DVec logits(static_cast<std::size_t>(V), 0.0);
  for (int v = 0; v < V; ++v) {
    double acc = 0;
    for (int m = 0; m < p.config.hidden_dim; ++m)
      acc += last[static_cast<std::size_t>(m)] * p.out_proj(m, v);
    logits[static_cast<std::size_t>(v)] = acc;
  }
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  double z = 0;
  for (double l : logits) z += std::exp(l - mx);
  DVec probs;
  for (double l : logits) probs.push_back(std::exp(l - mx) / z);
  return probs;
}

inline double loss(const ModelParams& p, const std::vector<citesum::TrainingInstance>& batch) {
  double total_nll = 0;
  long total_tokens = 0;
  for (const auto& inst : batch) {
    const DMat fused = encode_input(p, inst.input);
    std::vector<int> dec_in(inst.target.begin(), inst.target.end() - 1);
    const DMat h = decoder(p, dec_in, fused);
    for (std::size_t t = 0; t < dec_in.size(); ++t) {
      const int y = inst.target[t + 1];
      if (y == citesum::Vocabulary::kPad) continue;
      DVec logits(static_cast<std::size_t>(p.config.vocab_size), 0.0);
      for (int v = 0; v < p.config.vocab_size; ++v) {
        double acc = 0;
        for (int m = 0; m < p.config.hidden_dim; ++m)
          acc += h[t][static_cast<std::size_t>(m)] * p.out_proj(m, v);
        logits[static_cast<std::size_t>(v)] = acc;
      }
      double mx = logits[0];
      for (double l : logits) mx = std::max(mx, l);
      double z = 0;
      for (double l : logits) z += std::exp(l - mx);
      total_nll += (mx + std::log(z)) - logits[static_cast<std::size_t>(y)];
      ++total_tokens;
    }
  }
  return total_nll / static_cast<double>(total_tokens);
}

}  // namespace fwd_oracle
