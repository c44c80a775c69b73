#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace towe {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const void* data, std::size_t len);

/// Reproducibility record: command, full config snapshot, seed, and content
/// hashes of every input file. Deliberately carries no timestamps so equal
/// runs produce byte-equal manifests.
struct Manifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, sha256)

  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace towe
