#include "phasebind/trajectory_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "trajectory container assumes a little-endian host");

namespace phasebind {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  char buf[4];
  if (!in.read(buf, 4)) throw std::runtime_error(path + ": truncated record");
  std::uint32_t v = 0;
  std::memcpy(&v, buf, 4);
  return v;
}

void write_f32s(std::ostream& out, const ArrayX<float>& a) {
  out.write(reinterpret_cast<const char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(float)));
}

void read_f32s(std::istream& in, ArrayX<float>& a, const std::string& path) {
  if (!in.read(reinterpret_cast<char*>(a.data()),
               static_cast<std::streamsize>(a.size() * sizeof(float))))
    throw std::runtime_error(path + ": truncated record");
}

}  // namespace

void save_trajectory(const std::string& path, const std::string& model_name,
                     const InferenceConfig& config,
                     const std::vector<NetworkState<float>>& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("save_trajectory: empty trajectory");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  const auto& first = trajectory.front();
  out << "PBTRAJ v1\n";
  out << "model " << model_name << "\n";
  out << "mode " << (config.mode == ActivationMode::deterministic ? "det" : "stoch")
      << " iterations " << config.iterations << " stride " << config.record_stride << " seed "
      << config.seed << " sync_mix " << config.sync_mix << "\n";
  out << "layers " << first.layers.size() << " sizes";
  for (const auto& layer : first.layers) out << " " << layer.size();
  out << "\n";
  out << "records " << trajectory.size() << "\n";
  out << "DATA\n";
  for (const auto& state : trajectory) {
    if (state.layers.size() != first.layers.size())
      throw std::invalid_argument("save_trajectory: inconsistent layer counts");
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      write_u32(out, static_cast<std::uint32_t>(l));
      write_f32s(out, state.layers[l].rates);
      write_f32s(out, state.layers[l].phases);
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

TrajectoryFile load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != "PBTRAJ v1")
    throw std::runtime_error(path + ": version mismatch");
  TrajectoryFile file;
  if (!std::getline(in, line) || line.rfind("model ", 0) != 0)
    throw std::runtime_error(path + ": missing model line");
  file.model_name = line.substr(6);
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing config line");
  {
    std::istringstream ss(line);
    std::string k_mode, mode, k_iter, k_stride, k_seed, k_mix;
    if (!(ss >> k_mode >> mode >> k_iter >> file.config.iterations >> k_stride >>
          file.config.record_stride >> k_seed >> file.config.seed >> k_mix >>
          file.config.sync_mix) ||
        k_mode != "mode" || k_iter != "iterations" || k_stride != "stride" || k_seed != "seed" ||
        k_mix != "sync_mix" || (mode != "det" && mode != "stoch"))
      throw std::runtime_error(path + ": bad config line '" + line + "'");
    file.config.mode = mode == "det" ? ActivationMode::deterministic : ActivationMode::stochastic;
    file.config.record_trajectory = true;
  }
  std::size_t n_layers = 0, n_records = 0;
  std::vector<int> sizes;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing layers line");
  {
    std::istringstream ss(line);
    std::string k_layers, k_sizes;
    if (!(ss >> k_layers >> n_layers >> k_sizes) || k_layers != "layers" || k_sizes != "sizes")
      throw std::runtime_error(path + ": bad layers line '" + line + "'");
    int s = 0;
    while (ss >> s) sizes.push_back(s);
    if (sizes.size() != n_layers) throw std::runtime_error(path + ": layer size list mismatch");
  }
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing records line");
  {
    std::istringstream ss(line);
    std::string k;
    if (!(ss >> k >> n_records) || k != "records")
      throw std::runtime_error(path + ": bad records line '" + line + "'");
  }
  if (!std::getline(in, line) || line != "DATA")
    throw std::runtime_error(path + ": missing DATA separator");

  file.trajectory.resize(n_records);
  for (auto& state : file.trajectory) {
    state.layers.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (read_u32(in, path) != l) throw std::runtime_error(path + ": layer index out of order");
      auto& layer = state.layers[l];
      layer.rates.resize(sizes[l]);
      layer.phases.resize(sizes[l]);
      read_f32s(in, layer.rates, path);
      read_f32s(in, layer.phases, path);
    }
    state.layers[0].clamped = true;
  }
  return file;
}

}  // namespace phasebind
