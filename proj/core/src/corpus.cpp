#include "towe/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "towe/errors.hpp"
#include "towe/rng.hpp"

namespace towe {

namespace {

using nlohmann::json;

Span parse_span(const json& j, const char* what, std::size_t line_no) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                     " must be an integer pair");
  }
  long long s = j[0].get<long long>();
  long long e = j[1].get<long long>();
  if (s < 0 || e < 0) {
    throw ValidationError("line " + std::to_string(line_no) + ": negative index in " + what);
  }
  return Span{static_cast<std::size_t>(s), static_cast<std::size_t>(e)};
}

void check_span_range(const Span& sp, std::size_t n, const char* what,
                      const std::string& where) {
  if (sp.start >= sp.end || sp.end > n) {
    throw ValidationError(where + ": " + what + " [" + std::to_string(sp.start) + ", " +
                          std::to_string(sp.end) + ") out of range for " + std::to_string(n) +
                          " tokens");
  }
}

}  // namespace

bool validate_instance(const ToweInstance& inst) {
  const std::size_t n = inst.tokens.size();
  if (n == 0) throw ValidationError("instance has no tokens");
  check_span_range(inst.target_span, n, "target_span", "instance");
  if (inst.labels.size() != n) {
    throw ValidationError("instance has " + std::to_string(inst.labels.size()) + " labels for " +
                          std::to_string(n) + " tokens");
  }
  for (std::size_t i = inst.target_span.start; i < inst.target_span.end; ++i) {
    if (inst.labels[i] != Tag::O) {
      throw ValidationError("opinion label inside target span at token " + std::to_string(i));
    }
  }
  return is_well_formed(inst.labels);
}

void validate_unlabeled(const UnlabeledInstance& inst) {
  if (inst.tokens.empty()) throw ValidationError("unlabeled instance has no tokens");
  check_span_range(inst.target_span, inst.tokens.size(), "target_span", "unlabeled instance");
}

std::vector<ToweInstance> load_labeled(const std::string& path, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labeled file: " + path);

  std::vector<ToweInstance> out;
  std::map<std::vector<std::string>, int> seen_sentences;
  std::string line;
  std::size_t line_no = 0;
  LoadStats st;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("tokens") || !rec.contains("target_span")) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": record needs \"tokens\" and \"target_span\"");
    }
    ToweInstance inst;
    for (const auto& t : rec["tokens"]) {
      if (!t.is_string()) {
        throw ParseError("line " + std::to_string(line_no) + ": tokens must be strings");
      }
      inst.tokens.push_back(t.get<std::string>());
    }
    if (inst.tokens.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": empty token list");
    }
    inst.target_span = parse_span(rec["target_span"], "target_span", line_no);

    const std::string where = "line " + std::to_string(line_no);
    check_span_range(inst.target_span, inst.tokens.size(), "target_span", where);

    if (rec.contains("labels")) {
      for (const auto& l : rec["labels"]) {
        if (!l.is_string() || l.get<std::string>().size() != 1) {
          throw ParseError(where + ": labels must be single-character strings");
        }
        try {
          inst.labels.push_back(tag_from_char(l.get<std::string>()[0]));
        } catch (const ParseError& e) {
          throw ParseError(where + ": " + e.what());
        }
      }
    } else if (rec.contains("opinion_spans")) {
      SpanSet spans;
      for (const auto& s : rec["opinion_spans"]) {
        spans.push_back(parse_span(s, "opinion span", line_no));
      }
      for (const Span& sp : spans) check_span_range(sp, inst.tokens.size(), "opinion span", where);
      try {
        inst.labels = encode_bio(inst.tokens.size(), spans);
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    } else {
      throw ParseError(where + ": record needs \"opinion_spans\" or \"labels\"");
    }

    try {
      if (!validate_instance(inst)) ++st.ill_formed;
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (seen_sentences.emplace(inst.tokens, 1).second) ++st.sentences;
    out.push_back(std::move(inst));
    ++st.records;
  }
  if (stats) *stats = st;
  return out;
}

std::string labeled_record_json(const ToweInstance& inst) {
  json rec;
  rec["tokens"] = inst.tokens;
  rec["target_span"] = {inst.target_span.start, inst.target_span.end};
  json spans = json::array();
  for (const Span& sp : inst.opinion_spans()) spans.push_back({sp.start, sp.end});
  rec["opinion_spans"] = spans;
  return rec.dump();
}

void save_labeled(const std::vector<ToweInstance>& instances, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write labeled file: " + path);
  for (const ToweInstance& inst : instances) out << labeled_record_json(inst) << '\n';
}

std::vector<std::string> tokenize_raw(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string chunk;
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (ss >> chunk) {
    std::size_t lo = 0, hi = chunk.size();
    while (lo < hi && is_punct(chunk[lo])) ++lo;
    while (hi > lo && is_punct(chunk[hi - 1])) --hi;
    for (std::size_t i = 0; i < lo; ++i) tokens.push_back(std::string(1, chunk[i]));
    if (lo < hi) tokens.push_back(chunk.substr(lo, hi - lo));
    for (std::size_t i = hi; i < chunk.size(); ++i) tokens.push_back(std::string(1, chunk[i]));
  }
  return tokens;
}

namespace {

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = s[i];
    std::size_t extra;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      if ((c & 0x1E) == 0) return i;  // overlong
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
    } else {
      return i;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= s.size() || (static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return i;
    }
    i += extra + 1;
  }
  return std::string::npos;
}

}  // namespace

std::vector<std::vector<std::string>> load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raw file: " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t bad = find_invalid_utf8(line);
    if (bad != std::string::npos) {
      throw ParseError("invalid UTF-8 at byte offset " + std::to_string(offset + bad));
    }
    auto tokens = tokenize_raw(line);
    if (!tokens.empty()) out.push_back(std::move(tokens));
    offset += line.size() + 1;
  }
  return out;
}

DatasetSplit split_train_valid(const std::vector<ToweInstance>& instances, std::uint64_t seed,
                               double valid_fraction) {
  // Group by token sequence so all targets of one sentence land together.
  std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) groups[instances[i].tokens].push_back(i);

  const std::size_t n_sentences = groups.size();
  if (n_sentences < 5) {
    throw ValidationError("need at least 5 distinct sentences to split, got " +
                          std::to_string(n_sentences));
  }
  std::vector<std::vector<std::size_t>> sentence_groups;
  sentence_groups.reserve(n_sentences);
  for (auto& [tokens, idx] : groups) sentence_groups.push_back(idx);

  auto rng = make_rng(stream_seed(seed, "split"));
  std::shuffle(sentence_groups.begin(), sentence_groups.end(), rng);

  const std::size_t n_valid =
      static_cast<std::size_t>(std::floor(valid_fraction * static_cast<double>(n_sentences) + 0.5));

  DatasetSplit split;
  split.split_seed = seed;
  for (std::size_t g = 0; g < sentence_groups.size(); ++g) {
    auto& dst = (g < n_valid) ? split.valid : split.train;
    for (std::size_t idx : sentence_groups[g]) dst.push_back(instances[idx]);
  }
  return split;
}

BatchSampler::BatchSampler(std::size_t labeled_size, std::size_t unlabeled_size,
                           std::size_t labeled_batch, std::size_t unlabeled_batch,
                           std::uint64_t seed)
    : labeled_size_(labeled_size),
      unlabeled_size_(unlabeled_size),
      labeled_batch_(labeled_batch),
      unlabeled_batch_(unlabeled_batch),
      seed_(seed) {
  if (labeled_size_ == 0) throw ValidationError("labeled pool is empty");
  start_epoch();
  if (unlabeled_size_ > 0) reshuffle_unlabeled();
}

std::size_t BatchSampler::steps_per_epoch() const {
  return (labeled_size_ + labeled_batch_ - 1) / labeled_batch_;
}

void BatchSampler::start_epoch() {
  labeled_order_.resize(labeled_size_);
  for (std::size_t i = 0; i < labeled_size_; ++i) labeled_order_[i] = i;
  auto rng = make_rng(stream_seed(seed_, "labeled_epoch", epoch_));
  std::shuffle(labeled_order_.begin(), labeled_order_.end(), rng);
  labeled_pos_ = 0;
  ++epoch_;
}

void BatchSampler::reshuffle_unlabeled() {
  unlabeled_order_.resize(unlabeled_size_);
  for (std::size_t i = 0; i < unlabeled_size_; ++i) unlabeled_order_[i] = i;
  auto rng = make_rng(stream_seed(seed_, "unlabeled_cycle", cycle_));
  std::shuffle(unlabeled_order_.begin(), unlabeled_order_.end(), rng);
  unlabeled_pos_ = 0;
  ++cycle_;
}

BatchPair BatchSampler::next() {
  BatchPair bp;
  for (std::size_t k = 0; k < labeled_batch_ && labeled_pos_ < labeled_size_; ++k) {
    bp.labeled.push_back(labeled_order_[labeled_pos_++]);
  }
  if (bp.labeled.empty()) {
    start_epoch();
    for (std::size_t k = 0; k < labeled_batch_ && labeled_pos_ < labeled_size_; ++k) {
      bp.labeled.push_back(labeled_order_[labeled_pos_++]);
    }
  }
  for (std::size_t k = 0; unlabeled_size_ > 0 && k < unlabeled_batch_; ++k) {
    if (unlabeled_pos_ >= unlabeled_size_) reshuffle_unlabeled();
    bp.unlabeled.push_back(unlabeled_order_[unlabeled_pos_++]);
  }
  return bp;
}

}  // namespace towe
