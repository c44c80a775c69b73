#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "towe/autodiff.hpp"

namespace towe::nn {

using ad::Mat;
using ad::Parameter;
using ad::Segment;
using ad::Tape;
using ad::Var;

/// N(0, stddev) init from the named "init" stream; independent of creation order.
Mat normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, std::uint64_t master_seed,
                const std::string& param_name);

/// Token-id sequences flattened into one row-packed batch.
struct PackedBatch {
  std::vector<int> ids;           // all token ids, sentence after sentence
  std::vector<int> positions;     // 0..n-1 within each sentence
  std::vector<Segment> segments;  // one per sentence, in input order

  std::size_t total_tokens() const { return ids.size(); }
  std::size_t sentences() const { return segments.size(); }
};

PackedBatch pack(const std::vector<std::vector<int>>& id_seqs);

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out, std::uint64_t seed);

  Var apply(Tape& t, Var x);
  void collect(std::vector<Parameter*>& out);

  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, Eigen::Index dim);

  Var apply(Tape& t, Var x);
  void collect(std::vector<Parameter*>& out);

  Parameter gain;  // 1 x dim
  Parameter bias;  // 1 x dim
};

/// Pre-norm transformer block: x + MHA(LN(x)), then x + FFN(LN(x)).
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(const std::string& name, Eigen::Index dim, int heads, Eigen::Index ffn_dim,
                   std::uint64_t seed);

  Var apply(Tape& t, Var x, const std::vector<Segment>& segments);
  void collect(std::vector<Parameter*>& out);

  int heads = 0;
  LayerNorm ln_attn, ln_ffn;
  Linear wq, wk, wv, wo, ffn_in, ffn_out;
};

struct TransformerConfig {
  Eigen::Index dim = 64;
  int layers = 2;
  int heads = 4;
  Eigen::Index ffn_dim = 256;
  Eigen::Index max_len = 64;
};

/// Token + learned position embeddings, a block stack, and a final norm.
/// Produces one row per input token (packed across the batch).
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(const std::string& name, Eigen::Index vocab_size,
                     const TransformerConfig& cfg, std::uint64_t seed);

  Var apply(Tape& t, const PackedBatch& batch);
  void collect(std::vector<Parameter*>& out);

  TransformerConfig config;
  Parameter tok_emb;  // vocab x dim
  Parameter pos_emb;  // max_len x dim
  std::vector<TransformerBlock> blocks;
  LayerNorm final_norm;
};

/// Decoupled-weight-decay Adam. Parameters are updated in place.
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.01)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  struct Group {
    std::vector<Parameter*> params;
    double lr = 1e-3;
  };

  void step(std::vector<Group>& groups);
  void zero_grad(std::vector<Group>& groups);
  long step_count() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  long t_ = 0;
};

}  // namespace towe::nn
