#pragma once

#include <string>
#include <vector>

#include "towe/nn.hpp"
#include "towe/vocab.hpp"

namespace towe {

enum class EncoderVariant { kSmall, kPretrained };

std::string variant_name(EncoderVariant v);
EncoderVariant variant_from_name(const std::string& s);

/// Architecture per variant. The small variant exists so training and the
/// full test suite run on a CPU in minutes; the pretrained variant matches
/// the 512-dim configuration and is populated from a checkpoint.
nn::TransformerConfig encoder_arch(EncoderVariant v);

/// Uniform interface over contextual encoders: n tokens in, n vectors of
/// hidden_dim out, same pipeline for either variant.
class EncoderHandle {
 public:
  EncoderHandle() = default;
  EncoderHandle(EncoderVariant variant, Vocabulary vocab, std::uint64_t seed,
                const std::string& param_prefix = "enc");

  EncoderVariant variant() const { return variant_; }
  Eigen::Index hidden_dim() const { return net_.config.dim; }
  Eigen::Index max_len() const { return net_.config.max_len; }
  bool trainable() const { return trainable_; }
  void set_trainable(bool t) { trainable_ = t; }
  const Vocabulary& vocab() const { return vocab_; }

  /// Inference for one sentence: n x hidden_dim, deterministic. Throws
  /// ValidationError naming the limit when the sentence is over-length.
  nn::Mat encode(const std::vector<std::string>& tokens);

  /// Tape-building form used by the models that own this handle.
  nn::Var apply(nn::Tape& t, const nn::PackedBatch& batch);

  nn::PackedBatch pack_tokens(const std::vector<std::vector<std::string>>& sentences) const;
  void collect(std::vector<nn::Parameter*>& out);

 private:
  EncoderVariant variant_ = EncoderVariant::kSmall;
  bool trainable_ = true;
  Vocabulary vocab_;
  nn::TransformerEncoder net_;
};

}  // namespace towe
