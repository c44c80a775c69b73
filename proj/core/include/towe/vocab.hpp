#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace towe {

inline constexpr const char* kUnkSymbol = "<unk>";
inline constexpr const char* kMaskSymbol = "<mask>";

/// Token <-> id table. Ids 0 and 1 are reserved for <unk> and <mask>; the
/// remaining tokens are sorted, so the table is independent of insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;
  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences,
                          std::size_t min_count = 1);
  static Vocabulary from_tokens(std::vector<std::string> tokens);  // exact table, for loading

  int id(const std::string& token) const;  // unk id when absent
  const std::string& token(int id) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  std::size_t size() const { return tokens_.size(); }
  int unk_id() const { return 0; }
  int mask_id() const { return 1; }

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<int> ids(const std::vector<std::string>& tokens) const;

  /// Stable content hash used by checkpoint sidecars.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

}  // namespace towe
