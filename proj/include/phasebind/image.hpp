#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "phasebind/types.hpp"

namespace phasebind {

/// Binary pixel grid, row-major, values in {0,1}.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  BinaryImage() = default;
  BinaryImage(int h, int w) : width(w), height(h), pixels(static_cast<std::size_t>(h) * w, 0) {}

  int size() const { return width * height; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }

  bool operator==(const BinaryImage& other) const = default;

  template <typename Scalar>
  VectorX<Scalar> to_vector() const {
    VectorX<Scalar> v(size());
    for (int i = 0; i < size(); ++i) v[i] = Scalar(pixels[static_cast<std::size_t>(i)]);
    return v;
  }
};

/// Per-object pixel membership for one image. Pixels may belong to several
/// objects (bars cross, shapes overlap); background pixels belong to none.
struct GroundTruth {
  int object_count = 0;
  std::vector<std::vector<int>> object_pixels;  // sorted pixel indices per object

  bool operator==(const GroundTruth& other) const = default;

  /// Number of objects each pixel belongs to.
  std::vector<int> membership_counts(int n_pixels) const {
    std::vector<int> counts(static_cast<std::size_t>(n_pixels), 0);
    for (const auto& px : object_pixels)
      for (int p : px) counts[static_cast<std::size_t>(p)]++;
    return counts;
  }
};

struct LabeledImage {
  BinaryImage image;
  GroundTruth truth;
};

/// Grayscale image with 0-255 pixel values, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

}  // namespace phasebind
