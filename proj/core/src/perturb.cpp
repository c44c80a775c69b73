#include "towe/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "towe/errors.hpp"
#include "towe/rng.hpp"

namespace towe {

namespace {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool single_token(const std::string& s) {
  return !s.empty() && s.find(' ') == std::string::npos && s.find('\t') == std::string::npos;
}

}  // namespace

void validate_perturb_config(const PerturbConfig& cfg) {
  if (cfg.mask_rate < 0.0 || cfg.mask_rate > 1.0 || cfg.synonym_rate < 0.0 ||
      cfg.synonym_rate > 1.0) {
    throw ValidationError("perturbation rates must lie in [0, 1]");
  }
  if (cfg.mask_symbol.empty()) throw ValidationError("mask symbol must be nonempty");
}

SynonymLexicon SynonymLexicon::load(const std::string& path, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon: " + path);
  std::map<std::string, std::vector<std::string>> entries;
  LoadStats st;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!rec.contains("word") || !rec.contains("synonyms")) {
      throw ParseError("lexicon line " + std::to_string(line_no) +
                       ": record needs \"word\" and \"synonyms\"");
    }
    std::string word = lowercase(rec["word"].get<std::string>());
    std::vector<std::string> syns;
    for (const auto& s : rec["synonyms"]) {
      std::string syn = s.get<std::string>();
      if (!single_token(syn) || lowercase(syn) == word) {
        ++st.dropped_synonyms;
        continue;
      }
      syns.push_back(syn);
    }
    if (syns.empty()) {
      ++st.dropped_entries;
      continue;
    }
    entries[word] = std::move(syns);
  }
  st.entries = entries.size();
  if (stats) *stats = st;
  return from_map(std::move(entries));
}

SynonymLexicon SynonymLexicon::from_map(std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [word, syns] : entries) {
    if (syns.empty()) throw ValidationError("lexicon entry with no synonyms: " + word);
    for (const auto& s : syns) {
      if (!single_token(s)) throw ValidationError("multi-token synonym for " + word);
    }
    if (syns.size() == 1 && lowercase(syns[0]) == word) {
      throw ValidationError("word is its own sole synonym: " + word);
    }
  }
  SynonymLexicon lex;
  lex.entries_ = std::move(entries);
  return lex;
}

const std::vector<std::string>* SynonymLexicon::lookup(const std::string& word) const {
  auto it = entries_.find(lowercase(word));
  return it == entries_.end() ? nullptr : &it->second;
}

UnlabeledInstance perturb(const UnlabeledInstance& instance, const PerturbConfig& cfg,
                          const SynonymLexicon& lexicon, std::uint64_t step_seed) {
  validate_perturb_config(cfg);
  validate_unlabeled(instance);

  auto rng = make_rng(hash_combine(stream_seed(cfg.seed, "perturb"), step_seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const bool use_mask = unit(rng) < 0.5;
  const double rate = use_mask ? cfg.mask_rate : cfg.synonym_rate;

  UnlabeledInstance out = instance;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    const bool in_target = i >= out.target_span.start && i < out.target_span.end;
    const double roll = unit(rng);  // drawn for every token to keep streams aligned
    if (in_target || roll >= rate) continue;
    if (use_mask) {
      out.tokens[i] = cfg.mask_symbol;
    } else {
      const auto* syns = lexicon.lookup(out.tokens[i]);
      if (!syns) continue;
      std::uniform_int_distribution<std::size_t> pick(0, syns->size() - 1);
      out.tokens[i] = (*syns)[pick(rng)];
    }
  }
  return out;
}

}  // namespace towe
