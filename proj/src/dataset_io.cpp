#include "phasebind/dataset_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phasebind {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

void save_images(const std::string& path, const std::vector<BinaryImage>& images) {
  if (images.empty()) throw std::invalid_argument("save_images: empty set");
  const int w = images.front().width;
  const int h = images.front().height;
  for (const auto& img : images)
    if (img.width != w || img.height != h)
      throw std::invalid_argument("save_images: mixed image sizes");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "PBIMG v1 " << images.size() << " " << h << " " << w << "\n";
  const int n_px = w * h;
  std::string line((static_cast<std::size_t>(n_px) + 3) / 4, '0');
  for (const auto& img : images) {
    std::fill(line.begin(), line.end(), '0');
    for (int i = 0; i < n_px; ++i)
      if (img.pixels[static_cast<std::size_t>(i)]) {
        const int nibble = i / 4;
        line[static_cast<std::size_t>(nibble)] =
            kHexDigits[hex_value(line[static_cast<std::size_t>(nibble)]) | (8 >> (i % 4))];
      }
    out << line << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<BinaryImage> load_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(path + ": empty file");
  std::istringstream hs(header);
  std::string tag, version;
  long long count = -1, h = -1, w = -1;
  if (!(hs >> tag >> version >> count >> h >> w) || tag != "PBIMG" || version != "v1" ||
      count < 0 || h <= 0 || w <= 0)
    throw std::runtime_error(path + ": bad header '" + header + "'");
  const int n_px = static_cast<int>(w * h);
  const std::size_t want_len = (static_cast<std::size_t>(n_px) + 3) / 4;
  std::vector<BinaryImage> out(static_cast<std::size_t>(count));
  std::string line;
  for (auto& img : out) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated image data");
    if (line.size() != want_len)
      throw std::runtime_error(path + ": bad image line length " + std::to_string(line.size()));
    img = BinaryImage(static_cast<int>(h), static_cast<int>(w));
    for (int i = 0; i < n_px; ++i) {
      const int v = hex_value(line[static_cast<std::size_t>(i / 4)]);
      if (v < 0) throw std::runtime_error(path + ": non-hex image data");
      img.pixels[static_cast<std::size_t>(i)] = (v & (8 >> (i % 4))) ? 1 : 0;
    }
  }
  return out;
}

void save_truth(const std::string& path, const std::vector<GroundTruth>& truths) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  for (const auto& truth : truths) {
    for (std::size_t o = 0; o < truth.object_pixels.size(); ++o) {
      if (o) out << ' ';
      out << o << ':';
      const auto& px = truth.object_pixels[o];
      for (std::size_t k = 0; k < px.size(); ++k) {
        if (k) out << ',';
        out << px[k];
      }
    }
    out << "\n";  // an image without objects is an empty line
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<GroundTruth> load_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::vector<GroundTruth> out;
  std::string line;
  while (std::getline(in, line)) {
    GroundTruth truth;
    std::istringstream ls(line);
    std::string token;
    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw std::runtime_error(path + ": bad token " + token);
      const int id = std::stoi(token.substr(0, colon));
      if (id != static_cast<int>(truth.object_pixels.size()))
        throw std::runtime_error(path + ": object ids must be consecutive from 0");
      std::vector<int> px;
      std::istringstream ps(token.substr(colon + 1));
      std::string num;
      while (std::getline(ps, num, ',')) px.push_back(std::stoi(num));
      truth.object_pixels.push_back(std::move(px));
    }
    truth.object_count = static_cast<int>(truth.object_pixels.size());
    out.push_back(std::move(truth));
  }
  return out;
}

void save_labeled(const std::string& image_path, const std::string& truth_path,
                  const std::vector<LabeledImage>& items) {
  std::vector<BinaryImage> images;
  std::vector<GroundTruth> truths;
  images.reserve(items.size());
  truths.reserve(items.size());
  for (const auto& item : items) {
    images.push_back(item.image);
    truths.push_back(item.truth);
  }
  save_images(image_path, images);
  save_truth(truth_path, truths);
}

std::vector<LabeledImage> load_labeled(const std::string& image_path,
                                       const std::string& truth_path) {
  auto images = load_images(image_path);
  auto truths = load_truth(truth_path);
  if (images.size() != truths.size())
    throw std::runtime_error("load_labeled: image/truth count mismatch");
  std::vector<LabeledImage> out(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out[i].image = std::move(images[i]);
    out[i].truth = std::move(truths[i]);
  }
  return out;
}

}  // namespace phasebind
