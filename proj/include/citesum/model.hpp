#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citesum/autodiff.hpp"
#include "citesum/corpus.hpp"
#include "citesum/tokenizer.hpp"

namespace citesum {

using ad::Mat;
using ad::Tape;
using ad::Var;

struct ModelConfig {
  int hidden_dim = 32;       // M
  int ff_dim = 0;            // 0 = 4 * hidden_dim
  int enc_layers = 2;
  int dec_layers = 2;
  int n_heads = 4;
  int max_pair_len = 1024;   // L, one [cls] doc [abs] abstract row
  int max_citations = 12;    // N, rows per composed input
  int max_target_len = 32;   // decoder positions including <bos>
  int vocab_size = 0;        // V
  std::uint64_t seed = 0;

  int ff() const { return ff_dim > 0 ? ff_dim : 4 * hidden_dim; }
  void validate() const;  // M % heads == 0, L >= 4, N >= 1, V > specials
};

struct AttentionWeights {
  Mat wq, wk, wv, wo;  // M x M
  Mat bq, bk, bv, bo;  // 1 x M
};
struct LayerNormWeights {
  Mat gain, bias;  // 1 x M
};
struct FfnWeights {
  Mat w1, b1, w2, b2;  // M x F, 1 x F, F x M, 1 x M
};
struct EncoderLayerWeights {
  LayerNormWeights ln1;
  AttentionWeights attn;
  LayerNormWeights ln2;
  FfnWeights ffn;
};
struct DecoderLayerWeights {
  LayerNormWeights ln1;
  AttentionWeights self_attn;
  LayerNormWeights ln2;
  AttentionWeights cross_attn;
  LayerNormWeights ln3;
  FfnWeights ffn;
};

struct ModelParams {
  ModelConfig config;
  Mat tok_embed;  // V x M, shared by encoder and decoder inputs
  Mat pos_enc;    // L x M
  Mat pos_dec;    // max_target_len x M
  std::vector<EncoderLayerWeights> enc;
  LayerNormWeights enc_final;
  Mat pair_score;  // M x 1, scores each pair row's [cls] state
  std::vector<DecoderLayerWeights> dec;
  LayerNormWeights dec_final;
  Mat out_proj;  // M x V

  static ModelParams init(const ModelConfig& cfg);

  // Stable name -> tensor enumeration; fixes gradient-accumulation and
  // optimizer-update order.
  std::vector<std::pair<std::string, Mat*>> tensors();
  std::vector<std::pair<std::string, const Mat*>> tensors() const;
  std::int64_t parameter_count() const;

  std::string to_json(const std::string& vocab_fingerprint) const;
  static ModelParams from_json(const std::string& text,
                               std::string* vocab_fingerprint = nullptr);
};

// Fixed-width rows [cls] doc-prefix [abs] abstract-prefix padding, one row
// per citation abstract, plus the matching real-token mask.
struct ComposedInput {
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<unsigned char>> mask;

  int n_rows() const { return static_cast<int>(rows.size()); }
};

// The document keeps ceil(0.7 * (L-2)) positions; the abstract fills
// whatever the document left unused. Citations beyond max_citations are
// dropped in retrieval order. Throws NoCitations on an empty abstract list.
ComposedInput compose_inputs(const std::vector<int>& doc_ids,
                             const std::vector<std::vector<int>>& citation_abs_ids,
                             const ModelConfig& cfg);
ComposedInput compose_inputs(const PaperRecord& doc,
                             const std::vector<std::string>& citation_abstracts,
                             const ModelConfig& cfg, const Vocabulary& vocab);

// Tape-bound parameter handles, aligned with ModelParams::tensors() order.
struct ParamVars {
  std::vector<Var> ordered;
  Var tok_embed, pos_enc, pos_dec, pair_score, out_proj;
  struct AttentionVars { Var wq, wk, wv, wo, bq, bk, bv, bo; };
  struct LayerNormVars { Var gain, bias; };
  struct FfnVars { Var w1, b1, w2, b2; };
  struct EncLayerVars { LayerNormVars ln1; AttentionVars attn; LayerNormVars ln2; FfnVars ffn; };
  struct DecLayerVars {
    LayerNormVars ln1; AttentionVars self_attn;
    LayerNormVars ln2; AttentionVars cross_attn;
    LayerNormVars ln3; FfnVars ffn;
  };
  std::vector<EncLayerVars> enc;
  LayerNormVars enc_final;
  std::vector<DecLayerVars> dec;
  LayerNormVars dec_final;
};

ParamVars bind_params(Tape& tape, const ModelParams& params);

struct EncodedFeatures {
  std::vector<Var> pair_states;  // one L x M per citation row
  Var cls_states;                // n x M
  Var attn;                      // n x 1
  Var fused;                     // L x M
  bool aggregated = false;
};

// Per-row transformer encoding with pad keys masked out of self-attention.
// Throws ShapeMismatch when rows are not exactly L long or ids exceed V.
EncodedFeatures encode_pairs(Tape& tape, const ParamVars& pv, const ComposedInput& input,
                             const ModelConfig& cfg);

// First-pool the [cls] states, score them, softmax over the citation axis,
// and fuse the rows into one L x M feature matrix.
void aggregate(Tape& tape, const ParamVars& pv, EncodedFeatures& enc,
               const ModelConfig& cfg);

// Causal decoder over the prefix with cross-attention on the fused features;
// returns all positions' hidden states (T x M).
Var decoder_hidden(Tape& tape, const ParamVars& pv, const std::vector<int>& prefix,
                   Var fused, const ModelConfig& cfg);

struct DecoderState {
  std::vector<int> prefix;  // begins with <bos>
  int step() const { return static_cast<int>(prefix.size()) - 1; }
};

// Next-token distribution for the last prefix position. Throws PrefixTooLong
// past max_target_len.
Eigen::VectorXd decode_step(const ModelParams& params, const DecoderState& state,
                            const Mat& fused);

// Convenience: run encode+aggregate forward-only and return the fused matrix.
Mat fuse_features(const ModelParams& params, const ComposedInput& input);

struct TrainingInstance {
  ComposedInput input;
  std::vector<int> target;  // <bos> y_1 .. y_k <eos>, optionally padded
};

// Sum of masked next-token negative log-likelihoods, scaled by
// inv_normalizer; token_count reports the non-pad positions.
Var instance_nll(Tape& tape, const ParamVars& pv, const TrainingInstance& inst,
                 const ModelConfig& cfg, double inv_normalizer, long* token_count);

long count_target_tokens(const TrainingInstance& inst);

// Mean NLL per non-pad target token over the whole batch.
Var batch_loss(Tape& tape, const ParamVars& pv, const std::vector<TrainingInstance>& batch,
               const ModelConfig& cfg);
double loss_value(const ModelParams& params, const std::vector<TrainingInstance>& batch);

enum class SamplingStrategy { GreedyArgmax, Temperature };

struct GenerationOptions {
  SamplingStrategy strategy = SamplingStrategy::GreedyArgmax;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int max_len = 0;  // 0 = max_target_len - 1 content tokens
};

// Autoregressive generation from <bos>; returns content token ids (no <bos>,
// no <eos>). Greedy breaks ties toward the lowest id.
std::vector<int> generate(const ModelParams& params, const ComposedInput& input,
                          const GenerationOptions& opts);

}  // namespace citesum
