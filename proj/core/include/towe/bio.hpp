#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace towe {

/// BIO tag. The numeric order B < I < O is the documented argmax tie-break.
enum class Tag : int { B = 0, I = 1, O = 2 };

char tag_char(Tag t);
Tag tag_from_char(char c);  // throws ParseError on anything but B/I/O

/// Half-open token span [start, end), start < end.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
  std::size_t length() const { return end - start; }
};

/// Sorted, pairwise disjoint, nonempty spans.
using SpanSet = std::vector<Span>;

/// Span [s,e) becomes B at s, I at s+1..e-1; everything else O.
/// Throws ValidationError on out-of-range or overlapping spans.
std::vector<Tag> encode_bio(std::size_t n, const SpanSet& spans);

/// Total inverse of encode_bio: maximal B(I)* runs become spans; an I at the
/// start of the sequence or right after O opens a new span.
SpanSet decode_bio(const std::vector<Tag>& labels);

/// True when every I is directly preceded by B or I.
bool is_well_formed(const std::vector<Tag>& labels);

std::string tags_to_string(const std::vector<Tag>& labels);

}  // namespace towe
