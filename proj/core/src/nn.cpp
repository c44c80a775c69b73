#include "towe/nn.hpp"

#include "towe/errors.hpp"
#include "towe/rng.hpp"

namespace towe::nn {

Mat normal_init(Eigen::Index rows, Eigen::Index cols, double stddev, std::uint64_t master_seed,
                const std::string& param_name) {
  auto rng = make_rng(stream_seed(master_seed, "init", hash_str(param_name)));
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

PackedBatch pack(const std::vector<std::vector<int>>& id_seqs) {
  PackedBatch b;
  int offset = 0;
  for (const auto& seq : id_seqs) {
    b.segments.push_back({offset, static_cast<int>(seq.size())});
    for (std::size_t i = 0; i < seq.size(); ++i) {
      b.ids.push_back(seq[i]);
      b.positions.push_back(static_cast<int>(i));
    }
    offset += static_cast<int>(seq.size());
  }
  return b;
}

Linear::Linear(const std::string& name, Eigen::Index in, Eigen::Index out, std::uint64_t seed)
    : weight(name + ".weight", normal_init(in, out, 0.02, seed, name + ".weight")),
      bias(name + ".bias", Mat::Zero(1, out)) {}

Var Linear::apply(Tape& t, Var x) {
  return t.add_row_broadcast(t.matmul(x, t.param(weight)), t.param(bias));
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

LayerNorm::LayerNorm(const std::string& name, Eigen::Index dim)
    : gain(name + ".gain", Mat::Ones(1, dim)), bias(name + ".bias", Mat::Zero(1, dim)) {}

Var LayerNorm::apply(Tape& t, Var x) {
  return t.layer_norm(x, t.param(gain), t.param(bias));
}

void LayerNorm::collect(std::vector<Parameter*>& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

TransformerBlock::TransformerBlock(const std::string& name, Eigen::Index dim, int heads_,
                                   Eigen::Index ffn_dim, std::uint64_t seed)
    : heads(heads_),
      ln_attn(name + ".ln_attn", dim),
      ln_ffn(name + ".ln_ffn", dim),
      wq(name + ".wq", dim, dim, seed),
      wk(name + ".wk", dim, dim, seed),
      wv(name + ".wv", dim, dim, seed),
      wo(name + ".wo", dim, dim, seed),
      ffn_in(name + ".ffn_in", dim, ffn_dim, seed),
      ffn_out(name + ".ffn_out", ffn_dim, dim, seed) {}

Var TransformerBlock::apply(Tape& t, Var x, const std::vector<Segment>& segments) {
  Var a = ln_attn.apply(t, x);
  Var attn = t.multihead_attention(wq.apply(t, a), wk.apply(t, a), wv.apply(t, a), segments,
                                   heads);
  x = t.add(x, wo.apply(t, attn));
  Var f = ln_ffn.apply(t, x);
  Var ffn = ffn_out.apply(t, t.gelu(ffn_in.apply(t, f)));
  return t.add(x, ffn);
}

void TransformerBlock::collect(std::vector<Parameter*>& out) {
  ln_attn.collect(out);
  ln_ffn.collect(out);
  wq.collect(out);
  wk.collect(out);
  wv.collect(out);
  wo.collect(out);
  ffn_in.collect(out);
  ffn_out.collect(out);
}

TransformerEncoder::TransformerEncoder(const std::string& name, Eigen::Index vocab_size,
                                       const TransformerConfig& cfg, std::uint64_t seed)
    : config(cfg),
      tok_emb(name + ".tok_emb", normal_init(vocab_size, cfg.dim, 0.02, seed, name + ".tok_emb")),
      pos_emb(name + ".pos_emb",
              normal_init(cfg.max_len, cfg.dim, 0.02, seed, name + ".pos_emb")),
      final_norm(name + ".final_norm", cfg.dim) {
  for (int l = 0; l < cfg.layers; ++l) {
    blocks.emplace_back(name + ".block" + std::to_string(l), cfg.dim, cfg.heads, cfg.ffn_dim,
                        seed);
  }
}

Var TransformerEncoder::apply(Tape& t, const PackedBatch& batch) {
  for (const Segment& seg : batch.segments) {
    if (seg.length > config.max_len) {
      throw ValidationError("sentence of " + std::to_string(seg.length) +
                            " tokens exceeds encoder maximum " + std::to_string(config.max_len));
    }
  }
  Var x = t.add(t.gather_rows(t.param(tok_emb), batch.ids),
                t.gather_rows(t.param(pos_emb), batch.positions));
  for (auto& block : blocks) x = block.apply(t, x, batch.segments);
  return final_norm.apply(t, x);
}

void TransformerEncoder::collect(std::vector<Parameter*>& out) {
  out.push_back(&tok_emb);
  out.push_back(&pos_emb);
  for (auto& b : blocks) b.collect(out);
  final_norm.collect(out);
}

void AdamW::step(std::vector<Group>& groups) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Group& g : groups) {
    for (Parameter* p : g.params) {
      p->m = beta1_ * p->m + (1.0 - beta1_) * p->grad;
      p->v = beta2_ * p->v + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
      Mat mhat = p->m / bc1;
      Mat vhat = p->v / bc2;
      p->value -=
          g.lr * (mhat.array() / (vhat.array().sqrt() + eps_) + weight_decay_ * p->value.array())
                     .matrix();
    }
  }
}

void AdamW::zero_grad(std::vector<Group>& groups) {
  for (Group& g : groups) {
    for (Parameter* p : g.params) p->zero_grad();
  }
}

}  // namespace towe::nn
