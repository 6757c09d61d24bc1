#pragma once

#include <string>
#include <vector>

#include "phasebind/image.hpp"

namespace phasebind {

/// Text container for binary image sets: header line
/// `PBIMG v1 <count> <height> <width>`, then one hex-encoded MSB-first
/// bitset line per image.
void save_images(const std::string& path, const std::vector<BinaryImage>& images);
std::vector<BinaryImage> load_images(const std::string& path);

/// Per-image object membership, sibling file to the image set: one line per
/// image of space-separated `id:px,px,...` tokens (empty line for an image
/// with no objects).
void save_truth(const std::string& path, const std::vector<GroundTruth>& truths);
std::vector<GroundTruth> load_truth(const std::string& path);

void save_labeled(const std::string& image_path, const std::string& truth_path,
                  const std::vector<LabeledImage>& items);
std::vector<LabeledImage> load_labeled(const std::string& image_path,
                                       const std::string& truth_path);

}  // namespace phasebind
