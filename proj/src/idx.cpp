#include "phasebind/idx.hpp"

#include <fstream>
#include <stdexcept>

namespace phasebind {

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(path + ": truncated IDX header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

std::ifstream open_idx(const std::string& path, std::uint32_t want_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  const std::uint32_t magic = read_u32_be(in, path);
  if (magic != want_magic)
    throw std::runtime_error(path + ": bad IDX magic " + std::to_string(magic));
  return in;
}

}  // namespace

std::vector<GrayImage> read_idx_images(const std::string& path) {
  std::ifstream in = open_idx(path, 0x00000803u);
  const std::uint32_t count = read_u32_be(in, path);
  const std::uint32_t rows = read_u32_be(in, path);
  const std::uint32_t cols = read_u32_be(in, path);
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw std::runtime_error(path + ": implausible IDX dimensions");
  std::vector<GrayImage> out(count);
  const std::size_t n_px = std::size_t(rows) * cols;
  for (auto& img : out) {
    img.height = static_cast<int>(rows);
    img.width = static_cast<int>(cols);
    img.pixels.resize(n_px);
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n_px)))
      throw std::runtime_error(path + ": truncated IDX pixel data");
  }
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  std::ifstream in = open_idx(path, 0x00000801u);
  const std::uint32_t count = read_u32_be(in, path);
  std::vector<std::uint8_t> out(count);
  if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count)))
    throw std::runtime_error(path + ": truncated IDX label data");
  return out;
}

BinaryImage binarize(const GrayImage& gray, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("binarize: threshold must be in [0,1]");
  BinaryImage out(gray.height, gray.width);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i)
    out.pixels[i] = gray.pixels[i] / 255.0 >= threshold ? 1 : 0;
  return out;
}

std::vector<BinaryImage> binarize(const std::vector<GrayImage>& grays, double threshold) {
  std::vector<BinaryImage> out;
  out.reserve(grays.size());
  for (const auto& g : grays) out.push_back(binarize(g, threshold));
  return out;
}

}  // namespace phasebind
