#include "towe/vocab.hpp"

#include <algorithm>

#include "towe/errors.hpp"
#include "towe/rng.hpp"

namespace towe {

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences,
                             std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent) ++counts[tok];
  }
  std::vector<std::string> kept;
  kept.push_back(kUnkSymbol);
  kept.push_back(kMaskSymbol);
  for (const auto& [tok, c] : counts) {
    if (c >= min_count && tok != kUnkSymbol && tok != kMaskSymbol) kept.push_back(tok);
  }
  return from_tokens(std::move(kept));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  if (tokens.size() < 2 || tokens[0] != kUnkSymbol || tokens[1] != kMaskSymbol) {
    throw ValidationError("vocabulary must start with <unk>, <mask>");
  }
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate vocabulary token: " + v.tokens_[i]);
    }
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unk_id() : it->second;
}

const std::string& Vocabulary::token(int id) const {
  return tokens_.at(static_cast<std::size_t>(id));
}

std::vector<int> Vocabulary::ids(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = hash_str("vocab");
  for (const auto& t : tokens_) h = hash_combine(h, hash_str(t));
  return h;
}

}  // namespace towe
