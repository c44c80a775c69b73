#include "towe/rng.hpp"

namespace towe {

namespace {
constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix(h ^ mix(v)); }

std::uint64_t stream_seed(std::uint64_t master, std::string_view name) {
  return hash_combine(mix(master), hash_str(name));
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t a) {
  return hash_combine(stream_seed(master, name), a);
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t a,
                          std::uint64_t b) {
  return hash_combine(stream_seed(master, name, a), b);
}

}  // namespace towe
