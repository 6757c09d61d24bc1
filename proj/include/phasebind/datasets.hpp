#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasebind/image.hpp"

namespace phasebind {

enum class DatasetKind { bars, corners, three_shapes, mnist_plus_shape };

DatasetKind dataset_kind_from_string(const std::string& name);
std::string to_string(DatasetKind kind);

/// Generator request. The side defaults to the reference value for the kind
/// (bars / three_shapes: 20, corners / mnist_plus_shape: 28); only the bars
/// generator accepts other sides.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::bars;
  int side = 0;  // 0 = kind default
  int count = 1;
  std::uint64_t seed = 0;

  int resolved_side() const;
};

/// Bars images: `bars_per_orientation` distinct single-pixel vertical bars
/// spanning the full height and as many horizontal bars spanning the full
/// width, positions drawn without replacement per orientation. Objects are
/// the individual bars (verticals first).
std::vector<LabeledImage> gen_bars(const DatasetSpec& spec, int bars_per_orientation = 6);

/// Corners images (28x28): four L-shaped corner glyphs arranged as an
/// axis-aligned square (one object) plus four independently placed glyphs of
/// random orientation (one object each).
std::vector<LabeledImage> gen_corners(const DatasetSpec& spec);

/// Three-shapes images (20x20): three outlines drawn independently and
/// uniformly from {square, triangle, rotated triangle} at random in-frame
/// positions. Shapes may overlap; shared pixels carry both object ids.
std::vector<LabeledImage> gen_three_shapes(const DatasetSpec& spec);

/// MNIST+shape images (28x28): one random digit from `mnist` with
/// probability `p_digit` and one random shape glyph at a random position
/// with probability `p_shape`, composited by union. 0-2 objects per image.
std::vector<LabeledImage> gen_mnist_plus_shape(const DatasetSpec& spec,
                                               const std::vector<BinaryImage>& mnist,
                                               double p_digit = 0.8, double p_shape = 0.8);

std::vector<LabeledImage> generate_dataset(const DatasetSpec& spec,
                                           const std::vector<BinaryImage>& mnist = {},
                                           int bars_per_orientation = 6);

/// Shape glyph pixel sets used by three_shapes and mnist_plus_shape, as
/// (row, col) offsets within a 7x7 bounding box.
enum class ShapeGlyph { square, triangle, rotated_triangle };
const std::vector<std::pair<int, int>>& shape_glyph_pixels(ShapeGlyph glyph);
inline constexpr int kShapeGlyphSide = 7;

/// Corner glyph offsets relative to the corner pixel; `orientation` selects
/// which corner of a square the glyph forms (0 = top-left, 1 = top-right,
/// 2 = bottom-left, 3 = bottom-right). Arm length 4, thickness 1.
const std::vector<std::pair<int, int>>& corner_glyph_pixels(int orientation);
inline constexpr int kCornerArm = 4;
inline constexpr int kCornerSquareSide = 12;  // pixels between glyph corners

}  // namespace phasebind
