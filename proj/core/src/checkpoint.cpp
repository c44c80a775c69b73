#include "towe/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "towe/errors.hpp"

namespace towe {

namespace {

constexpr char kMagic[8] = {'T', 'O', 'W', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kBlobVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw ParseError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  std::uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ParseError("checkpoint truncated");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Vocabulary& vocab,
                     const std::vector<ad::Parameter*>& params, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kBlobVersion);
  write_u32(out, static_cast<std::uint32_t>(vocab.size()));
  for (const auto& tok : vocab.tokens()) write_string(out, tok);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const ad::Parameter* p : params) {
    write_string(out, p->name);
    write_u64(out, static_cast<std::uint64_t>(p->value.rows()));
    write_u64(out, static_cast<std::uint64_t>(p->value.cols()));
    // row-major stream of IEEE doubles
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        double d = p->value(r, c);
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof(bits));
        write_u64(out, bits);
      }
    }
  }
  if (!out) throw IoError("write failed: " + path);
  out.close();

  nlohmann::json side;
  side["variant"] = meta.variant;
  side["hidden_dim"] = meta.hidden_dim;
  side["vocab_hash"] = meta.vocab_hash;
  side["version"] = meta.version;
  if (!meta.extra.is_null()) side["extra"] = meta.extra;
  std::ofstream sout(path + ".json");
  if (!sout) throw IoError("cannot write sidecar: " + path + ".json");
  sout << side.dump(2) << '\n';
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a checkpoint file: " + path);
  }
  std::uint32_t version = read_u32(in);
  if (version != kBlobVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  LoadedCheckpoint ck;
  std::uint32_t n_tokens = read_u32(in);
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint32_t i = 0; i < n_tokens; ++i) tokens.push_back(read_string(in));
  ck.vocab = Vocabulary::from_tokens(std::move(tokens));

  std::uint32_t n_params = read_u32(in);
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name = read_string(in);
    auto rows = static_cast<Eigen::Index>(read_u64(in));
    auto cols = static_cast<Eigen::Index>(read_u64(in));
    ad::Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::uint64_t bits = read_u64(in);
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        m(r, c) = d;
      }
    }
    ck.tensors.emplace(std::move(name), std::move(m));
  }

  std::ifstream sin(path + ".json");
  if (sin) {
    nlohmann::json side = nlohmann::json::parse(sin, nullptr, false);
    if (!side.is_discarded()) {
      ck.meta.variant = side.value("variant", "");
      ck.meta.hidden_dim = side.value("hidden_dim", 0);
      ck.meta.vocab_hash = side.value("vocab_hash", "");
      ck.meta.version = side.value("version", 1);
      if (side.contains("extra")) ck.meta.extra = side["extra"];
    }
  }
  return ck;
}

void assign_params(const std::map<std::string, ad::Mat>& tensors,
                   const std::vector<ad::Parameter*>& params) {
  for (ad::Parameter* p : params) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) throw ValidationError("checkpoint missing tensor: " + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw ValidationError("checkpoint shape mismatch for " + p->name);
    }
    p->value = it->second;
  }
}

}  // namespace towe
