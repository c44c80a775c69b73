#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "towe/autodiff.hpp"
#include "towe/vocab.hpp"

namespace towe {

/// Sidecar contents written next to every checkpoint blob as <path>.json.
struct CheckpointMeta {
  std::string variant;  // "small" | "pretrained"
  int hidden_dim = 0;
  std::string vocab_hash;
  int version = 1;
  nlohmann::json extra;  // model-specific fields (pos_dim, refiner_layers, ...)
};

/// Binary blob: versioned magic, vocabulary tokens, then named f64 tensors.
void save_checkpoint(const std::string& path, const Vocabulary& vocab,
                     const std::vector<ad::Parameter*>& params, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  Vocabulary vocab;
  std::map<std::string, ad::Mat> tensors;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

/// Copies tensors into matching parameters; throws ValidationError on missing
/// names or shape mismatches.
void assign_params(const std::map<std::string, ad::Mat>& tensors,
                   const std::vector<ad::Parameter*>& params);

}  // namespace towe
