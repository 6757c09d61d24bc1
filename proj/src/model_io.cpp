#include "phasebind/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "phasebind/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

namespace phasebind {

namespace {

void put_floats(std::string& buf, const float* data, std::size_t count) {
  const std::size_t at = buf.size();
  buf.resize(at + count * sizeof(float));
  std::memcpy(buf.data() + at, data, count * sizeof(float));
}

void put_mask_bits(std::string& buf, const MatrixX<float>& mask) {
  const std::size_t n_bits = static_cast<std::size_t>(mask.rows()) * mask.cols();
  std::string bytes((n_bits + 7) / 8, '\0');
  std::size_t bit = 0;
  for (Eigen::Index r = 0; r < mask.rows(); ++r)
    for (Eigen::Index c = 0; c < mask.cols(); ++c, ++bit)
      if (mask(r, c) != 0.0f) bytes[bit / 8] |= static_cast<char>(0x80u >> (bit % 8));
  buf += bytes;
}

class PayloadReader {
 public:
  PayloadReader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

  void get_floats(float* out, std::size_t count) {
    const std::size_t bytes = count * sizeof(float);
    require(bytes);
    std::memcpy(out, buf_.data() + at_, bytes);
    at_ += bytes;
  }

  void get_mask_bits(MatrixX<float>& mask) {
    const std::size_t n_bits = static_cast<std::size_t>(mask.rows()) * mask.cols();
    const std::size_t bytes = (n_bits + 7) / 8;
    require(bytes);
    std::size_t bit = 0;
    for (Eigen::Index r = 0; r < mask.rows(); ++r)
      for (Eigen::Index c = 0; c < mask.cols(); ++c, ++bit)
        mask(r, c) = (buf_[at_ + bit / 8] & static_cast<char>(0x80u >> (bit % 8))) ? 1.0f : 0.0f;
    at_ += bytes;
  }

  void expect_end() const {
    if (at_ != buf_.size()) throw std::runtime_error(path_ + ": trailing payload bytes");
  }

 private:
  void require(std::size_t bytes) const {
    if (at_ + bytes > buf_.size()) throw std::runtime_error(path_ + ": truncated payload");
  }

  const std::string& buf_;
  const std::string& path_;
  std::size_t at_ = 0;
};

std::string geometry_field(int h, int w, int c) {
  return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

void parse_geometry_field(const std::string& field, int& h, int& w, int& c,
                          const std::string& path) {
  char x1 = 0, x2 = 0;
  std::istringstream ss(field);
  if (!(ss >> h >> x1 >> w >> x2 >> c) || x1 != 'x' || x2 != 'x' || h < 1 || w < 1 || c < 1)
    throw std::runtime_error(path + ": bad geometry field " + field);
}

std::string expect_key(std::istringstream& ss, const std::string& key, const std::string& path) {
  std::string token;
  if (!(ss >> token) || token.rfind(key + "=", 0) != 0)
    throw std::runtime_error(path + ": expected " + key + "= field");
  return token.substr(key.size() + 1);
}

}  // namespace

void save_model(const DbmModel<float>& model, const std::string& path) {
  model.validate();
  std::ostringstream manifest;
  manifest << "PBMODEL v1\n";
  manifest << "layers " << model.layer_count() << "\n";
  std::string payload;
  for (int l = 0; l < model.layer_count(); ++l) {
    const auto& layer = model.layers[static_cast<std::size_t>(l)];
    const auto& g = layer.geometry;
    manifest << "layer " << l << " vis=" << g.visible_units() << " hid=" << g.hidden_units()
             << " rf=" << g.rf << " in=" << geometry_field(g.in_h, g.in_w, g.in_c)
             << " grid=" << geometry_field(g.hid_h, g.hid_w, g.hid_c) << "\n";
    // W is stored row-major regardless of the in-memory layout
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      const VectorX<float> row = layer.W.row(r);
      put_floats(payload, row.data(), static_cast<std::size_t>(row.size()));
    }
    put_floats(payload, layer.b_v.data(), static_cast<std::size_t>(layer.b_v.size()));
    put_floats(payload, layer.b_h.data(), static_cast<std::size_t>(layer.b_h.size()));
    put_mask_bits(payload, layer.mask);
  }
  manifest << "DATA\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << manifest.str();
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  const std::uint64_t checksum = fnv1a64(payload);
  char tail[8];
  std::memcpy(tail, &checksum, 8);
  out.write(tail, 8);
  if (!out) throw std::runtime_error(path + ": write failed");
}

DbmModel<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line != "PBMODEL v1") throw std::runtime_error(path + ": version mismatch: '" + line + "'");
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing layer count");
  int n_layers = 0;
  {
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key >> n_layers) || key != "layers" || n_layers < 1)
      throw std::runtime_error(path + ": bad layers line '" + line + "'");
  }

  std::vector<LayerGeometry> geoms;
  for (int l = 0; l < n_layers; ++l) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing layer header");
    std::istringstream ss(line);
    std::string key;
    int index = -1;
    if (!(ss >> key >> index) || key != "layer" || index != l)
      throw std::runtime_error(path + ": bad layer header '" + line + "'");
    const std::string vis = expect_key(ss, "vis", path);
    const std::string hid = expect_key(ss, "hid", path);
    const std::string rf = expect_key(ss, "rf", path);
    const std::string in_field = expect_key(ss, "in", path);
    const std::string grid_field = expect_key(ss, "grid", path);
    LayerGeometry g;
    g.rf = std::stoi(rf);
    parse_geometry_field(in_field, g.in_h, g.in_w, g.in_c, path);
    parse_geometry_field(grid_field, g.hid_h, g.hid_w, g.hid_c, path);
    if (g.visible_units() != std::stoi(vis) || g.hidden_units() != std::stoi(hid))
      throw std::runtime_error(path + ": layer header dims inconsistent");
    if (!g.is_fully_connected() &&
        (g.hid_h != g.in_h - g.rf + 1 || g.hid_w != g.in_w - g.rf + 1))
      throw std::runtime_error(path + ": layer grid violates the valid-window rule");
    geoms.push_back(g);
  }
  if (!std::getline(in, line) || line != "DATA")
    throw std::runtime_error(path + ": missing DATA separator");

  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (rest.size() < 8) throw std::runtime_error(path + ": truncated checksum");
  std::uint64_t stored = 0;
  std::memcpy(&stored, rest.data() + rest.size() - 8, 8);
  rest.resize(rest.size() - 8);
  if (fnv1a64(rest) != stored) throw std::runtime_error(path + ": checksum failure");

  PayloadReader reader(rest, path);
  DbmModel<float> model;
  for (const auto& g : geoms) {
    RbmLayer<float> layer;
    layer.geometry = g;
    const int nh = g.hidden_units();
    const int nv = g.visible_units();
    layer.W.resize(nh, nv);
    for (int r = 0; r < nh; ++r) {
      VectorX<float> row(nv);
      reader.get_floats(row.data(), static_cast<std::size_t>(nv));
      layer.W.row(r) = row;
    }
    layer.b_v.resize(nv);
    reader.get_floats(layer.b_v.data(), static_cast<std::size_t>(nv));
    layer.b_h.resize(nh);
    reader.get_floats(layer.b_h.data(), static_cast<std::size_t>(nh));
    layer.mask.resize(nh, nv);
    reader.get_mask_bits(layer.mask);
    for (int r = 0; r < nh; ++r)
      for (int c = 0; c < nv; ++c)
        if (layer.mask(r, c) == 0.0f && layer.W(r, c) != 0.0f)
          throw std::runtime_error(path + ": nonzero weight outside the mask");
    model.layers.push_back(std::move(layer));
  }
  reader.expect_end();
  model.validate();
  return model;
}

}  // namespace phasebind
