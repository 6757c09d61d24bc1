#pragma once

#include <string>
#include <vector>

#include "phasebind/synchrony.hpp"

namespace phasebind {

/// PBTRAJ v1 container for recorded inference states: a text manifest
/// naming the model and the run configuration, a `DATA` separator, then per
/// recorded step one binary record per layer: uint32 layer index, the rate
/// vector and the phase vector as little-endian float32.
void save_trajectory(const std::string& path, const std::string& model_name,
                     const InferenceConfig& config,
                     const std::vector<NetworkState<float>>& trajectory);

struct TrajectoryFile {
  std::string model_name;
  InferenceConfig config;
  std::vector<NetworkState<float>> trajectory;
};

TrajectoryFile load_trajectory(const std::string& path);

}  // namespace phasebind
