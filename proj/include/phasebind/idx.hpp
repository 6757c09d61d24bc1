#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasebind/image.hpp"

namespace phasebind {

/// Reads an IDX image file (magic 0x00000803, unsigned byte pixels,
/// big-endian dimensions). Throws std::runtime_error on bad magic,
/// truncation, or dimension overflow.
std::vector<GrayImage> read_idx_images(const std::string& path);

/// Reads an IDX label file (magic 0x00000801).
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

/// Thresholds gray pixels: pixel = 1 iff gray/255 >= threshold.
BinaryImage binarize(const GrayImage& gray, double threshold = 0.5);

std::vector<BinaryImage> binarize(const std::vector<GrayImage>& grays, double threshold = 0.5);

}  // namespace phasebind
