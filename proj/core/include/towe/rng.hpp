#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace towe {

// All randomness in a run flows from one master seed. Independent streams are
// derived by hashing (master_seed, stream name, indices...) so that adding or
// skipping work in one stream never shifts another. Streams in use:
//   "init", param name          — parameter initialization
//   "labeled_epoch", epoch      — labeled batch shuffling
//   "unlabeled_cycle", cycle    — unlabeled pool shuffling
//   "perturb", step, sentence   — perturbation randomness
//   "split"                     — train/valid split
//   "synth"                     — synthetic corpus generation

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_str(std::string_view s);

std::uint64_t stream_seed(std::uint64_t master, std::string_view name);
std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t a);
std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t a,
                          std::uint64_t b);

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace towe
