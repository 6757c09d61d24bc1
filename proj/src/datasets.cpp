#include "phasebind/datasets.hpp"

#include <algorithm>
#include <stdexcept>

#include "phasebind/rng.hpp"

namespace phasebind {

namespace {

/// Draws n distinct integers from [0, limit) via partial Fisher-Yates.
std::vector<int> sample_distinct(Rng& rng, int n, int limit) {
  std::vector<int> pool(static_cast<std::size_t>(limit));
  for (int i = 0; i < limit; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(limit - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return out;
}

void add_object(LabeledImage& item, const std::vector<int>& pixels) {
  std::vector<int> sorted = pixels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int p : sorted) item.image.pixels[static_cast<std::size_t>(p)] = 1;
  item.truth.object_pixels.push_back(std::move(sorted));
  item.truth.object_count = static_cast<int>(item.truth.object_pixels.size());
}

std::vector<int> stamp_pixels(const std::vector<std::pair<int, int>>& offsets, int row, int col,
                              int side) {
  std::vector<int> out;
  out.reserve(offsets.size());
  for (auto [dr, dc] : offsets) {
    const int r = row + dr;
    const int c = col + dc;
    if (r < 0 || r >= side || c < 0 || c >= side)
      throw std::logic_error("glyph stamped outside the frame");
    out.push_back(r * side + c);
  }
  return out;
}

}  // namespace

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "bars") return DatasetKind::bars;
  if (name == "corners") return DatasetKind::corners;
  if (name == "three_shapes") return DatasetKind::three_shapes;
  if (name == "mnist_plus_shape") return DatasetKind::mnist_plus_shape;
  throw std::invalid_argument("unknown dataset kind: " + name);
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::bars: return "bars";
    case DatasetKind::corners: return "corners";
    case DatasetKind::three_shapes: return "three_shapes";
    case DatasetKind::mnist_plus_shape: return "mnist_plus_shape";
  }
  return "?";
}

int DatasetSpec::resolved_side() const {
  if (side > 0) return side;
  switch (kind) {
    case DatasetKind::bars:
    case DatasetKind::three_shapes: return 20;
    case DatasetKind::corners:
    case DatasetKind::mnist_plus_shape: return 28;
  }
  return 0;
}

std::vector<LabeledImage> gen_bars(const DatasetSpec& spec, int bars_per_orientation) {
  const int side = spec.resolved_side();
  if (bars_per_orientation < 1) throw std::invalid_argument("gen_bars: need at least one bar");
  if (side < 2 * bars_per_orientation)
    throw std::invalid_argument("gen_bars: side too small to place " +
                                std::to_string(bars_per_orientation) + " distinct bars");
  std::vector<LabeledImage> out(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(spec.seed, static_cast<std::uint64_t>(i));
    LabeledImage& item = out[static_cast<std::size_t>(i)];
    item.image = BinaryImage(side, side);
    const std::vector<int> cols = sample_distinct(rng, bars_per_orientation, side);
    const std::vector<int> rows = sample_distinct(rng, bars_per_orientation, side);
    for (int c : cols) {
      std::vector<int> px(static_cast<std::size_t>(side));
      for (int r = 0; r < side; ++r) px[static_cast<std::size_t>(r)] = r * side + c;
      add_object(item, px);
    }
    for (int r : rows) {
      std::vector<int> px(static_cast<std::size_t>(side));
      for (int c = 0; c < side; ++c) px[static_cast<std::size_t>(c)] = r * side + c;
      add_object(item, px);
    }
  }
  return out;
}

const std::vector<std::pair<int, int>>& corner_glyph_pixels(int orientation) {
  static const auto make = [](int dr, int dc) {
    std::vector<std::pair<int, int>> px = {{0, 0}};
    for (int a = 1; a < kCornerArm; ++a) {
      px.emplace_back(0, a * dc);
      px.emplace_back(a * dr, 0);
    }
    return px;
  };
  static const std::vector<std::pair<int, int>> glyphs[4] = {
      make(1, 1),    // top-left corner: arms right and down
      make(1, -1),   // top-right: arms left and down
      make(-1, 1),   // bottom-left: arms right and up
      make(-1, -1),  // bottom-right: arms left and up
  };
  if (orientation < 0 || orientation > 3)
    throw std::invalid_argument("corner_glyph_pixels: orientation must be 0..3");
  return glyphs[orientation];
}

std::vector<LabeledImage> gen_corners(const DatasetSpec& spec) {
  const int side = spec.resolved_side();
  if (side != 28) throw std::invalid_argument("gen_corners: side must be 28");
  const int span = kCornerSquareSide;        // distance between glyph corner pixels
  const int bbox = span + 1;                 // arrangement bounding box
  const int arm = kCornerArm;
  std::vector<LabeledImage> out(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(spec.seed, static_cast<std::uint64_t>(i));
    LabeledImage& item = out[static_cast<std::size_t>(i)];
    item.image = BinaryImage(side, side);

    // Square arrangement: glyphs at the four corners, arms along the edges.
    const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - bbox + 1)));
    const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - bbox + 1)));
    std::vector<int> square_px;
    const int corner_pos[4][2] = {{r0, c0}, {r0, c0 + span}, {r0 + span, c0},
                                  {r0 + span, c0 + span}};
    for (int o = 0; o < 4; ++o) {
      // orientation o matches the corner it sits at (0 tl, 1 tr, 2 bl, 3 br)
      const int orient = (o == 1) ? 1 : (o == 2) ? 2 : (o == 3) ? 3 : 0;
      auto px = stamp_pixels(corner_glyph_pixels(orient), corner_pos[o][0], corner_pos[o][1], side);
      square_px.insert(square_px.end(), px.begin(), px.end());
    }
    add_object(item, square_px);

    // Four independent glyphs, random orientation and position.
    for (int g = 0; g < 4; ++g) {
      const int orient = static_cast<int>(rng.below(4));
      // place the glyph so its 4x4 bounding box stays in frame
      const int br = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - arm + 1)));
      const int bc = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - arm + 1)));
      // corner pixel position within the bounding box depends on orientation
      const int r = orient < 2 ? br : br + arm - 1;
      const int c = (orient % 2 == 0) ? bc : bc + arm - 1;
      add_object(item, stamp_pixels(corner_glyph_pixels(orient), r, c, side));
    }
  }
  return out;
}

const std::vector<std::pair<int, int>>& shape_glyph_pixels(ShapeGlyph glyph) {
  static const auto square = [] {
    std::vector<std::pair<int, int>> px;
    for (int k = 0; k < kShapeGlyphSide; ++k) {
      px.emplace_back(0, k);
      px.emplace_back(kShapeGlyphSide - 1, k);
      if (k > 0 && k < kShapeGlyphSide - 1) {
        px.emplace_back(k, 0);
        px.emplace_back(k, kShapeGlyphSide - 1);
      }
    }
    return px;
  }();
  static const auto triangle = [] {
    // apex on top, staircase sides, full base row
    std::vector<std::pair<int, int>> px;
    const int mid = kShapeGlyphSide / 2;
    for (int r = 0; r < kShapeGlyphSide - 1; ++r) {
      const int half = (r + 1) / 2;
      px.emplace_back(r, mid - half);
      if (half > 0) px.emplace_back(r, mid + half);
    }
    for (int c = 0; c < kShapeGlyphSide; ++c) px.emplace_back(kShapeGlyphSide - 1, c);
    return px;
  }();
  static const auto rotated = [] {
    std::vector<std::pair<int, int>> px;
    for (auto [r, c] : triangle) px.emplace_back(kShapeGlyphSide - 1 - r, c);
    return px;
  }();
  switch (glyph) {
    case ShapeGlyph::square: return square;
    case ShapeGlyph::triangle: return triangle;
    case ShapeGlyph::rotated_triangle: return rotated;
  }
  throw std::invalid_argument("shape_glyph_pixels: bad glyph");
}

namespace {

std::vector<int> stamp_random_shape(Rng& rng, int side) {
  const auto glyph = static_cast<ShapeGlyph>(rng.below(3));
  const int range = side - kShapeGlyphSide + 1;
  const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(range)));
  const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(range)));
  return stamp_pixels(shape_glyph_pixels(glyph), r, c, side);
}

}  // namespace

std::vector<LabeledImage> gen_three_shapes(const DatasetSpec& spec) {
  const int side = spec.resolved_side();
  if (side != 20) throw std::invalid_argument("gen_three_shapes: side must be 20");
  std::vector<LabeledImage> out(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(spec.seed, static_cast<std::uint64_t>(i));
    LabeledImage& item = out[static_cast<std::size_t>(i)];
    item.image = BinaryImage(side, side);
    for (int s = 0; s < 3; ++s) add_object(item, stamp_random_shape(rng, side));
  }
  return out;
}

std::vector<LabeledImage> gen_mnist_plus_shape(const DatasetSpec& spec,
                                               const std::vector<BinaryImage>& mnist,
                                               double p_digit, double p_shape) {
  const int side = spec.resolved_side();
  if (side != 28) throw std::invalid_argument("gen_mnist_plus_shape: side must be 28");
  if (mnist.empty()) throw std::invalid_argument("gen_mnist_plus_shape: empty mnist source");
  for (const auto& d : mnist)
    if (d.width != 28 || d.height != 28)
      throw std::invalid_argument("gen_mnist_plus_shape: mnist images must be 28x28");
  std::vector<LabeledImage> out(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(spec.seed, static_cast<std::uint64_t>(i));
    LabeledImage& item = out[static_cast<std::size_t>(i)];
    item.image = BinaryImage(side, side);
    const bool has_digit = rng.bernoulli(p_digit);
    const bool has_shape = rng.bernoulli(p_shape);
    if (has_digit) {
      const auto& digit = mnist[rng.below(mnist.size())];
      std::vector<int> px;
      for (int p = 0; p < digit.size(); ++p)
        if (digit.pixels[static_cast<std::size_t>(p)]) px.push_back(p);
      add_object(item, px);
    }
    if (has_shape) add_object(item, stamp_random_shape(rng, side));
  }
  return out;
}

std::vector<LabeledImage> generate_dataset(const DatasetSpec& spec,
                                           const std::vector<BinaryImage>& mnist,
                                           int bars_per_orientation) {
  switch (spec.kind) {
    case DatasetKind::bars: return gen_bars(spec, bars_per_orientation);
    case DatasetKind::corners: return gen_corners(spec);
    case DatasetKind::three_shapes: return gen_three_shapes(spec);
    case DatasetKind::mnist_plus_shape: return gen_mnist_plus_shape(spec, mnist);
  }
  throw std::invalid_argument("generate_dataset: bad kind");
}

}  // namespace phasebind
