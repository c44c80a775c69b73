#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "towe/corpus.hpp"
#include "towe/vocab.hpp"

namespace towe {

struct PerturbConfig {
  double mask_rate = 0.15;
  double synonym_rate = 0.15;
  std::string mask_symbol = kMaskSymbol;
  std::uint64_t seed = 0;
};

void validate_perturb_config(const PerturbConfig& cfg);

/// Lowercased word -> single-token replacement candidates. Multi-token
/// synonyms and self-entries are dropped at load (counted in the stats).
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  struct LoadStats {
    std::size_t entries = 0;
    std::size_t dropped_synonyms = 0;  // multi-token or self
    std::size_t dropped_entries = 0;   // left with no usable synonym
  };

  static SynonymLexicon load(const std::string& path, LoadStats* stats = nullptr);
  static SynonymLexicon from_map(std::map<std::string, std::vector<std::string>> entries);

  const std::vector<std::string>* lookup(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

/// The perturbing function: picks mask or synonym replacement uniformly per
/// sentence, then applies it independently per token at the configured rate.
/// Length and target span are preserved; target tokens are never touched.
UnlabeledInstance perturb(const UnlabeledInstance& instance, const PerturbConfig& cfg,
                          const SynonymLexicon& lexicon, std::uint64_t step_seed);

}  // namespace towe
