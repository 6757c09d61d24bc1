#include "phasebind/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace phasebind {

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  h -= std::floor(h);  // wrap hue into [0,1)
  s = std::clamp(s, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  const double h6 = h * 6.0;
  const int sector = std::min(5, static_cast<int>(h6));
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    case 5: r = v; g = p; b = q; break;
  }
  const auto to8 = [](double x) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
  };
  return {to8(r), to8(g), to8(b)};
}

RgbImage render_phase_image(const ComplexLayerState<float>& layer, int grid_h, int grid_w,
                            int grid_c, double off_threshold) {
  if (grid_h < 1 || grid_w < 1 || grid_c < 1 || grid_h * grid_w * grid_c != layer.size())
    throw std::invalid_argument("render_phase_image: layer does not map onto the grid");
  RgbImage img(grid_h, grid_w * grid_c);
  for (int i = 0; i < grid_h; ++i)
    for (int j = 0; j < grid_w; ++j)
      for (int c = 0; c < grid_c; ++c) {
        const int unit = (i * grid_w + j) * grid_c + c;
        const double rate = layer.rates[unit];
        if (rate < off_threshold) continue;  // stays black
        const double hue = (static_cast<double>(layer.phases[unit]) + kPi) / (2.0 * kPi);
        img.set(i, c * grid_w + j, hsv_to_rgb(hue, 1.0, rate));
      }
  return img;
}

RgbImage render_label_image(const Segmentation& seg) {
  RgbImage img(seg.height, seg.width);
  for (int i = 0; i < seg.height; ++i)
    for (int j = 0; j < seg.width; ++j) {
      const int label = seg.labels[static_cast<std::size_t>(i) * seg.width + j];
      if (label == seg.background) continue;
      img.set(i, j, hsv_to_rgb(static_cast<double>(label) / seg.k, 1.0, 1.0));
    }
  return img;
}

RgbImage render_histogram(const PhaseHistogram& hist, int bar_width, int height) {
  if (bar_width < 1 || height < 2) throw std::invalid_argument("render_histogram: bad size");
  const int bins = hist.bins();
  RgbImage img(height, bins * bar_width);
  const int peak = std::max(1, *std::max_element(hist.counts.begin(), hist.counts.end()));
  for (int b = 0; b < bins; ++b) {
    const int bar = hist.counts[static_cast<std::size_t>(b)] * (height - 1) / peak;
    for (int y = 0; y < bar; ++y)
      for (int x = 0; x < bar_width; ++x)
        img.set(height - 1 - y, b * bar_width + x, {255, 255, 255});
  }
  return img;
}

void write_histogram_csv(std::ostream& out, const PhaseHistogram& hist) {
  out << "bin_center,count\n";
  for (int b = 0; b < hist.bins(); ++b)
    out << hist.bin_center(b) << ',' << hist.counts[static_cast<std::size_t>(b)] << '\n';
}

void write_response_csv(std::ostream& out, const std::vector<PhaseResponseRow<double>>& rows) {
  out << "delta_phi,mixed,sync_only\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.delta_phi, row.mixed, row.sync_only);
    out << buf;
  }
}

RgbImage render_gray(const VectorX<float>& values, int height, int width) {
  if (height * width != values.size())
    throw std::invalid_argument("render_gray: values do not map onto the grid");
  RgbImage img(height, width);
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      const double v = std::clamp(static_cast<double>(values[i * width + j]), 0.0, 1.0);
      const auto g = static_cast<std::uint8_t>(std::lround(v * 255.0));
      img.set(i, j, {g, g, g});
    }
  return img;
}

void write_ppm(const std::string& path, const RgbImage& image) {
  if (image.width < 1 || image.height < 1) throw std::invalid_argument("write_ppm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace phasebind
