#include "udrl/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "udrl/errors.hpp"

namespace udrl::nn {

namespace {

constexpr std::array<char, 8> kMagic = {'U', 'D', 'R', 'L', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw IoError("checkpoint: unexpected end of file");
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  read_exact(in, reinterpret_cast<char*>(b.data()), b.size());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  read_exact(in, reinterpret_cast<char*>(b.data()), b.size());
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return std::bit_cast<double>(v);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, ckpt.flags);
  put_u32(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  out.write(ckpt.metadata.data(), static_cast<std::streamsize>(ckpt.metadata.size()));
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (const auto& t : ckpt.tensors) {
    for (double d : t.data) put_f64(out, d);
  }
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  read_exact(in, magic.data(), magic.size());
  if (magic != kMagic) throw IoError("checkpoint: bad magic bytes");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.flags = get_u32(in);
  const auto meta_len = get_u32(in);
  ckpt.metadata.resize(meta_len);
  if (meta_len > 0) read_exact(in, ckpt.metadata.data(), meta_len);
  const auto count = get_u32(in);
  std::vector<std::vector<std::size_t>> shapes(count);
  for (auto& s : shapes) {
    const auto rank = get_u32(in);
    if (rank == 0 || rank > 8) throw IoError("checkpoint: invalid tensor rank");
    s.resize(rank);
    for (auto& d : s) d = get_u32(in);
  }
  for (auto& s : shapes) {
    std::size_t n = 0;
    try {
      n = Tensor::element_count(s);
    } catch (const std::invalid_argument& e) {
      throw IoError(std::string("checkpoint: ") + e.what());
    }
    std::vector<double> data(n);
    for (auto& d : data) d = get_f64(in);
    ckpt.tensors.emplace_back(std::move(s), std::move(data));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace udrl::nn
