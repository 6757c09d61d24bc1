#pragma once

#include <array>
#include <ostream>
#include <string>

#include "phasebind/readout.hpp"
#include "phasebind/synchrony.hpp"

namespace phasebind {

struct RgbImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // 3 bytes per pixel, row-major

  RgbImage() = default;
  RgbImage(int h, int w) : width(w), height(h), pixels(static_cast<std::size_t>(h) * w * 3, 0) {}

  void set(int row, int col, std::array<std::uint8_t, 3> rgb) {
    const std::size_t at = (static_cast<std::size_t>(row) * width + col) * 3;
    pixels[at] = rgb[0];
    pixels[at + 1] = rgb[1];
    pixels[at + 2] = rgb[2];
  }
};

/// h, s, v in [0,1] (h wraps) -> 8-bit RGB.
std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v);

/// Phase-colored raster of a grid layer: hue = (phi+pi)/2pi, saturation 1,
/// value = rate; units with rate below the threshold are black. Channels are
/// tiled side by side, so the raster is grid_h x (grid_w * grid_c).
RgbImage render_phase_image(const ComplexLayerState<float>& layer, int grid_h, int grid_w,
                            int grid_c, double off_threshold = kOffThreshold);

/// Segmentation raster: background black, cluster c at hue c/k.
RgbImage render_label_image(const Segmentation& seg);

/// Bar raster of a phase histogram (white bars on black, bins left to right).
RgbImage render_histogram(const PhaseHistogram& hist, int bar_width = 6, int height = 100);

/// CSV rows `bin_center,count`, one per bin, after a header line.
void write_histogram_csv(std::ostream& out, const PhaseHistogram& hist);

/// CSV rows `delta_phi,mixed,sync_only` at 17 significant digits.
void write_response_csv(std::ostream& out, const std::vector<PhaseResponseRow<double>>& rows);

/// Grayscale raster of activations in [0,1] (e.g. decoded images).
RgbImage render_gray(const VectorX<float>& values, int height, int width);

/// Binary P6 PPM writer.
void write_ppm(const std::string& path, const RgbImage& image);

}  // namespace phasebind
