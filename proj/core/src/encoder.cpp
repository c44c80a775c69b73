#include "towe/encoder.hpp"

#include "towe/errors.hpp"

namespace towe {

std::string variant_name(EncoderVariant v) {
  return v == EncoderVariant::kSmall ? "small" : "pretrained";
}

EncoderVariant variant_from_name(const std::string& s) {
  if (s == "small") return EncoderVariant::kSmall;
  if (s == "pretrained") return EncoderVariant::kPretrained;
  throw UsageError("unknown encoder variant: " + s + " (want small|pretrained)");
}

nn::TransformerConfig encoder_arch(EncoderVariant v) {
  nn::TransformerConfig cfg;
  if (v == EncoderVariant::kSmall) {
    cfg.dim = 64;
    cfg.layers = 2;
    cfg.heads = 4;
    cfg.ffn_dim = 256;
    cfg.max_len = 64;
  } else {
    cfg.dim = 512;
    cfg.layers = 4;
    cfg.heads = 8;
    cfg.ffn_dim = 2048;
    cfg.max_len = 128;
  }
  return cfg;
}

EncoderHandle::EncoderHandle(EncoderVariant variant, Vocabulary vocab, std::uint64_t seed,
                             const std::string& param_prefix)
    : variant_(variant),
      vocab_(std::move(vocab)),
      net_(param_prefix, static_cast<Eigen::Index>(vocab_.size()), encoder_arch(variant), seed) {}

nn::Mat EncoderHandle::encode(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ValidationError("encode: empty token list");
  nn::Tape t(false);
  auto batch = pack_tokens({tokens});
  return t.value(apply(t, batch));
}

nn::Var EncoderHandle::apply(nn::Tape& t, const nn::PackedBatch& batch) {
  return net_.apply(t, batch);
}

nn::PackedBatch EncoderHandle::pack_tokens(
    const std::vector<std::vector<std::string>>& sentences) const {
  std::vector<std::vector<int>> ids;
  ids.reserve(sentences.size());
  for (const auto& s : sentences) ids.push_back(vocab_.ids(s));
  return nn::pack(ids);
}

void EncoderHandle::collect(std::vector<nn::Parameter*>& out) { net_.collect(out); }

}  // namespace towe
