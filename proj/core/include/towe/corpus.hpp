#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "towe/bio.hpp"

namespace towe {

/// One labeled training unit: a tokenized sentence, one opinion target in it,
/// and gold BIO labels marking the opinion words of that target. A sentence
/// with k targets appears as k instances sharing the same tokens.
struct ToweInstance {
  std::vector<std::string> tokens;
  Span target_span;
  std::vector<Tag> labels;

  std::size_t size() const { return tokens.size(); }
  SpanSet opinion_spans() const { return decode_bio(labels); }
};

/// A raw sentence carrying a pseudo opinion target and no gold labels.
struct UnlabeledInstance {
  std::vector<std::string> tokens;
  Span target_span;
  std::string source_id;  // opaque id of the raw-corpus line

  std::size_t size() const { return tokens.size(); }
};

/// Throws ValidationError on broken index invariants or on opinion labels
/// overlapping the target span. Returns false (well-formedness warning) when
/// some I is not preceded by B or I; such instances are kept by the loader.
bool validate_instance(const ToweInstance& inst);
void validate_unlabeled(const UnlabeledInstance& inst);

struct DatasetSplit {
  std::vector<ToweInstance> train;
  std::vector<ToweInstance> valid;
  std::uint64_t split_seed = 0;
};

struct LoadStats {
  std::size_t records = 0;
  std::size_t sentences = 0;
  std::size_t ill_formed = 0;  // kept, but reported
};

/// Reads labeled JSONL: {"tokens": [...], "target_span": [s, e],
/// "opinion_spans": [[s, e], ...]}. Records may instead carry an explicit
/// "labels" array of "B"/"I"/"O" strings; ill-formed label sequences are
/// kept and counted in stats.ill_formed.
std::vector<ToweInstance> load_labeled(const std::string& path, LoadStats* stats = nullptr);

/// Canonical serialization; load -> save round-trips modulo whitespace.
void save_labeled(const std::vector<ToweInstance>& instances, const std::string& path);
std::string labeled_record_json(const ToweInstance& inst);

/// Whitespace tokenization after detaching leading/trailing ASCII punctuation
/// from each chunk. Interior punctuation ("don't", "e.g.") stays attached.
std::vector<std::string> tokenize_raw(const std::string& line);

/// One raw sentence per line, UTF-8; empty lines are skipped. Throws
/// ParseError with a byte offset on invalid UTF-8.
std::vector<std::vector<std::string>> load_raw(const std::string& path);

/// Sentence-granular 80/20 split: instances sharing a token sequence always
/// land on the same side. Valid sentence count = round half-up of 0.2 * total.
DatasetSplit split_train_valid(const std::vector<ToweInstance>& instances, std::uint64_t seed,
                               double valid_fraction = 0.2);

struct BatchPair {
  std::vector<std::size_t> labeled;    // indices into the labeled pool
  std::vector<std::size_t> unlabeled;  // indices into the unlabeled pool
};

/// Yields one (labeled, unlabeled) index batch per step. The labeled pool is
/// sampled without replacement per epoch; the unlabeled pool cycles on its
/// own shuffle, independent of epoch boundaries. Single-consumer.
class BatchSampler {
 public:
  BatchSampler(std::size_t labeled_size, std::size_t unlabeled_size, std::size_t labeled_batch,
               std::size_t unlabeled_batch, std::uint64_t seed);

  /// Batches per labeled epoch: ceil(labeled_size / labeled_batch).
  std::size_t steps_per_epoch() const;
  BatchPair next();
  void start_epoch();  // reshuffles the labeled pool

 private:
  std::size_t labeled_size_, unlabeled_size_;
  std::size_t labeled_batch_, unlabeled_batch_;
  std::uint64_t seed_;
  std::vector<std::size_t> labeled_order_, unlabeled_order_;
  std::size_t labeled_pos_ = 0, unlabeled_pos_ = 0;
  std::size_t epoch_ = 0, cycle_ = 0;

  void reshuffle_unlabeled();
};

}  // namespace towe
