#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "phasebind/complex_unit.hpp"
#include "phasebind/image.hpp"
#include "phasebind/rbm.hpp"
#include "phasebind/rng.hpp"
#include "phasebind/types.hpp"

namespace phasebind {

/// Complex state z = r e^{i phi} of one layer. Clamped layers keep their
/// rates fixed for the whole run (the visible layer under an input image).
template <typename Scalar>
struct ComplexLayerState {
  ArrayX<Scalar> rates;
  ArrayX<Scalar> phases;
  bool clamped = false;

  int size() const { return static_cast<int>(rates.size()); }
};

/// Layer states in bottom-up order, [0] = visible, plus the sweep counter.
template <typename Scalar>
struct NetworkState {
  std::vector<ComplexLayerState<Scalar>> layers;
  int iteration = 0;
};

struct InferenceConfig {
  int iterations = 100;
  ActivationMode mode = ActivationMode::deterministic;
  std::uint64_t seed = 0;
  bool record_trajectory = false;
  int record_stride = 1;
  double sync_mix = kDefaultSyncMix;
};

/// Initial state: visible rates clamped to the image with phases ~ U[-pi,pi);
/// hidden rates at their bias activation logistic(b_h) with random phases.
/// Phases are drawn layer by layer from the visible layer up, unit order.
template <typename Scalar>
NetworkState<Scalar> init_state(const DbmModel<Scalar>& model, const BinaryImage& image,
                                Rng& rng) {
  model.validate();
  if (image.size() != model.visible_units())
    throw std::invalid_argument("init_state: image does not match visible geometry");
  NetworkState<Scalar> state;
  state.layers.resize(static_cast<std::size_t>(model.layer_count()) + 1);
  auto& visible = state.layers[0];
  visible.rates = image.to_vector<Scalar>().array();
  visible.phases = ArrayX<Scalar>(image.size());
  for (int i = 0; i < image.size(); ++i) visible.phases[i] = Scalar(rng.uniform_angle());
  visible.clamped = true;
  for (int l = 1; l <= model.layer_count(); ++l) {
    auto& hidden = state.layers[static_cast<std::size_t>(l)];
    const auto& layer = model.layers[static_cast<std::size_t>(l - 1)];
    hidden.rates = phasebind::logistic(layer.b_h.array());
    hidden.phases = ArrayX<Scalar>(layer.hidden_units());
    for (int i = 0; i < layer.hidden_units(); ++i) hidden.phases[i] = Scalar(rng.uniform_angle());
  }
  return state;
}

/// Reference per-unit drive: messages from both adjacent layers (bottom-up
/// through the weight row, top-down through the weight column). The visible
/// layer receives only top-down messages from the first hidden layer.
template <typename Scalar>
ComplexDrive<Scalar> layer_drive(const DbmModel<Scalar>& model, const NetworkState<Scalar>& state,
                                 int l, int unit) {
  if (l < 0 || l > model.layer_count()) throw std::invalid_argument("layer_drive: bad layer");
  std::vector<InputMessage<Scalar>> messages;
  if (l > 0) {
    const auto& below = state.layers[static_cast<std::size_t>(l - 1)];
    const auto& W = model.layers[static_cast<std::size_t>(l - 1)].W;
    for (int i = 0; i < below.size(); ++i)
      messages.push_back({W(unit, i), below.rates[i], below.phases[i]});
  }
  if (l < model.layer_count()) {
    const auto& above = state.layers[static_cast<std::size_t>(l + 1)];
    const auto& W = model.layers[static_cast<std::size_t>(l)].W;
    for (int j = 0; j < above.size(); ++j)
      messages.push_back({W(j, unit), above.rates[j], above.phases[j]});
  }
  return accumulate_drive(messages);
}

namespace detail {

template <typename Scalar>
struct LayerDrives {
  ArrayX<Scalar> zre, zim, chi;
};

/// Vectorized drives for every unit of layer l at once (three GEMVs per
/// adjacent layer).
template <typename Scalar>
LayerDrives<Scalar> drives_for_layer(const DbmModel<Scalar>& model,
                                     const NetworkState<Scalar>& state, int l) {
  const int n = state.layers[static_cast<std::size_t>(l)].size();
  LayerDrives<Scalar> d;
  d.zre = ArrayX<Scalar>::Zero(n);
  d.zim = ArrayX<Scalar>::Zero(n);
  d.chi = ArrayX<Scalar>::Zero(n);
  if (l > 0) {
    const auto& below = state.layers[static_cast<std::size_t>(l - 1)];
    const auto& W = model.layers[static_cast<std::size_t>(l - 1)].W;
    d.zre += (W * (below.rates * below.phases.cos()).matrix()).array();
    d.zim += (W * (below.rates * below.phases.sin()).matrix()).array();
    d.chi += (W * below.rates.matrix()).array();
  }
  if (l < model.layer_count()) {
    const auto& above = state.layers[static_cast<std::size_t>(l + 1)];
    const auto& W = model.layers[static_cast<std::size_t>(l)].W;
    d.zre += (W.transpose() * (above.rates * above.phases.cos()).matrix()).array();
    d.zim += (W.transpose() * (above.rates * above.phases.sin()).matrix()).array();
    d.chi += (W.transpose() * above.rates.matrix()).array();
  }
  return d;
}

/// In-place phase update from accumulated drives: arg(zeta) where
/// |zeta| >= kPhaseEps, previous phase elsewhere.
template <typename Scalar>
void update_phases(ComplexLayerState<Scalar>& layer, const LayerDrives<Scalar>& d) {
  for (int i = 0; i < layer.size(); ++i) {
    const Scalar mag = std::hypot(d.zre[i], d.zim[i]);
    if (mag >= Scalar(kPhaseEps)) layer.phases[i] = wrap_phase(std::atan2(d.zim[i], d.zre[i]));
  }
}

}  // namespace detail

/// One inference iteration: hidden layers update in bottom-to-top order,
/// in place (fresh lower-layer states feed the layers above within the same
/// sweep), then the visible layer updates its phases from the top-down
/// drive. Clamped rates never change; phases always follow arg(zeta) with
/// the zero-drive fallback. Stochastic mode resamples every unclamped rate
/// as Bernoulli(logistic(preactivation)), unit order within each layer.
template <typename Scalar>
void sweep(const DbmModel<Scalar>& model, NetworkState<Scalar>& state,
           const InferenceConfig& config, Rng& rng) {
  const Scalar mix = Scalar(config.sync_mix);
  for (int l = 1; l <= model.layer_count(); ++l) {
    auto& layer = state.layers[static_cast<std::size_t>(l)];
    const auto d = detail::drives_for_layer(model, state, l);
    if (!layer.clamped) {
      const auto& b_h = model.layers[static_cast<std::size_t>(l - 1)].b_h;
      const ArrayX<Scalar> pre = mix * (d.zre.square() + d.zim.square()).sqrt() +
                                 (Scalar(1) - mix) * d.chi + b_h.array();
      const ArrayX<Scalar> p = phasebind::logistic(pre);
      if (config.mode == ActivationMode::deterministic) {
        layer.rates = p;
      } else {
        for (int i = 0; i < layer.size(); ++i)
          layer.rates[i] = rng.bernoulli(static_cast<double>(p[i])) ? Scalar(1) : Scalar(0);
      }
    }
    detail::update_phases(layer, d);
  }
  auto& visible = state.layers[0];
  detail::update_phases(visible, detail::drives_for_layer(model, state, 0));
  ++state.iteration;
}

template <typename Scalar>
struct InferenceResult {
  NetworkState<Scalar> state;
  std::vector<NetworkState<Scalar>> trajectory;  // initial state, then every record_stride sweeps
};

/// Full run on one image: init_state from stream (seed, stream), then
/// `iterations` sweeps. Every image index can own its own stream, so a
/// batch of images gives identical results whether run serially or in
/// parallel.
template <typename Scalar>
InferenceResult<Scalar> run_inference(const DbmModel<Scalar>& model, const BinaryImage& image,
                                      const InferenceConfig& config, std::uint64_t stream = 0) {
  if (config.iterations < 1 || config.record_stride < 1)
    throw std::invalid_argument("run_inference: iterations and record_stride must be >= 1");
  Rng rng(config.seed, stream);
  InferenceResult<Scalar> out;
  out.state = init_state(model, image, rng);
  if (config.record_trajectory) out.trajectory.push_back(out.state);
  for (int it = 1; it <= config.iterations; ++it) {
    sweep(model, out.state, config, rng);
    if (config.record_trajectory && it % config.record_stride == 0)
      out.trajectory.push_back(out.state);
  }
  return out;
}

/// Rotates every phase in the state by delta (rates untouched).
template <typename Scalar>
NetworkState<Scalar> rotate_state(const NetworkState<Scalar>& state, Scalar delta) {
  NetworkState<Scalar> out = state;
  for (auto& layer : out.layers)
    for (int i = 0; i < layer.size(); ++i) layer.phases[i] = wrap_phase(layer.phases[i] + delta);
  return out;
}

/// Mean absolute wrapped phase change between two states (diagnostic;
/// stability of the phase assignment is not a gated property).
template <typename Scalar>
double phase_drift(const NetworkState<Scalar>& before, const NetworkState<Scalar>& after) {
  double acc = 0.0;
  long count = 0;
  for (std::size_t l = 0; l < before.layers.size(); ++l)
    for (int i = 0; i < before.layers[l].size(); ++i) {
      acc += std::abs(static_cast<double>(
          wrap_phase(static_cast<double>(after.layers[l].phases[i]) -
                     static_cast<double>(before.layers[l].phases[i]))));
      ++count;
    }
  return count ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace phasebind
