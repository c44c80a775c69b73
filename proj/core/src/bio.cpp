#include "towe/bio.hpp"

#include <algorithm>

#include "towe/errors.hpp"

namespace towe {

char tag_char(Tag t) {
  switch (t) {
    case Tag::B: return 'B';
    case Tag::I: return 'I';
    case Tag::O: return 'O';
  }
  return '?';
}

Tag tag_from_char(char c) {
  switch (c) {
    case 'B': return Tag::B;
    case 'I': return Tag::I;
    case 'O': return Tag::O;
    default: throw ParseError(std::string("invalid BIO tag '") + c + "'");
  }
}

std::vector<Tag> encode_bio(std::size_t n, const SpanSet& spans) {
  SpanSet sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const Span& sp = sorted[k];
    if (sp.start >= sp.end) {
      throw ValidationError("empty span [" + std::to_string(sp.start) + ", " +
                            std::to_string(sp.end) + ")");
    }
    if (sp.end > n) {
      throw ValidationError("span [" + std::to_string(sp.start) + ", " +
                            std::to_string(sp.end) + ") exceeds length " + std::to_string(n));
    }
    if (k > 0 && sp.start < sorted[k - 1].end) {
      throw ValidationError("overlapping spans at token " + std::to_string(sp.start));
    }
  }
  std::vector<Tag> labels(n, Tag::O);
  for (const Span& sp : sorted) {
    labels[sp.start] = Tag::B;
    for (std::size_t i = sp.start + 1; i < sp.end; ++i) labels[i] = Tag::I;
  }
  return labels;
}

SpanSet decode_bio(const std::vector<Tag>& labels) {
  SpanSet spans;
  bool open = false;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    if (open) spans.push_back({start, end});
    open = false;
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (labels[i]) {
      case Tag::B:
        close(i);
        open = true;
        start = i;
        break;
      case Tag::I:
        if (!open) {  // ill-formed I: begins a new span
          open = true;
          start = i;
        }
        break;
      case Tag::O:
        close(i);
        break;
    }
  }
  close(labels.size());
  return spans;
}

bool is_well_formed(const std::vector<Tag>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Tag::I && (i == 0 || labels[i - 1] == Tag::O)) return false;
  }
  return true;
}

std::string tags_to_string(const std::vector<Tag>& labels) {
  std::string s;
  s.reserve(labels.size());
  for (Tag t : labels) s.push_back(tag_char(t));
  return s;
}

}  // namespace towe
