#include <doctest.h>

#include <cmath>

#include "phasebind/synchrony.hpp"

using namespace phasebind;

namespace {

double circ_diff(double a, double b) { return std::abs(wrap_phase(a - b)); }

DbmModel<double> random_model(const std::vector<LayerGeometry>& geoms, std::uint64_t seed,
                              double weight_scale, double bias) {
  DbmModel<double> model = build_model<double>(geoms, seed);
  Rng rng(seed, 100);
  for (auto& layer : model.layers) {
    for (int h = 0; h < layer.W.rows(); ++h)
      for (int v = 0; v < layer.W.cols(); ++v)
        if (layer.mask(h, v) != 0.0) layer.W(h, v) = rng.uniform(-weight_scale, weight_scale);
    layer.b_v.setConstant(bias);
    layer.b_h.setConstant(bias);
  }
  return model;
}

BinaryImage checker_image(int h, int w) {
  BinaryImage img(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img.at(r, c) = (r + c) % 2 == 0 ? 1 : 0;
  return img;
}

}  // namespace

TEST_CASE("init_state clamps the image and seeds hidden rates from the biases") {
  const auto model = random_model({LayerGeometry::fully_connected(6, 4)}, 3, 1.0, -0.7);
  BinaryImage image(2, 3);
  image.pixels = {1, 0, 1, 1, 0, 0};
  Rng rng(9, 2);
  const auto state = init_state(model, image, rng);
  REQUIRE(state.layers.size() == 2);
  CHECK(state.layers[0].clamped);
  CHECK_FALSE(state.layers[1].clamped);
  for (int i = 0; i < 6; ++i)
    CHECK(state.layers[0].rates[i] == double(image.pixels[static_cast<std::size_t>(i)]));
  for (int j = 0; j < 4; ++j)
    CHECK(state.layers[1].rates[j] ==
          doctest::Approx(1.0 / (1.0 + std::exp(0.7))).epsilon(1e-14));
  for (const auto& layer : state.layers)
    for (int i = 0; i < layer.size(); ++i) {
      CHECK(layer.phases[i] >= -kPi);
      CHECK(layer.phases[i] < kPi);
    }

  Rng r2(9, 2);
  const auto replay = init_state(model, image, r2);
  CHECK((replay.layers[0].phases == state.layers[0].phases).all());
  CHECK((replay.layers[1].phases == state.layers[1].phases).all());
  Rng r3(9, 3);
  const auto other = init_state(model, image, r3);
  CHECK((other.layers[0].phases != state.layers[0].phases).any());

  BinaryImage wrong(3, 3);
  Rng r4(1);
  CHECK_THROWS(init_state(model, wrong, r4));

  BinaryImage blank(2, 3);
  Rng r5(4);
  const auto zero_state = init_state(model, blank, r5);
  CHECK((zero_state.layers[0].rates == 0.0).all());
}

TEST_CASE("zero-weight model is a fixed point of the sweep") {
  auto model = random_model({LayerGeometry::fully_connected(4, 3)}, 5, 1.0, -0.4);
  model.layers[0].W.setZero();
  BinaryImage image(2, 2);
  image.pixels = {1, 1, 0, 1};
  Rng rng(2, 0);
  auto state = init_state(model, image, rng);
  const auto initial = state;
  InferenceConfig config;
  Rng dummy(0);
  sweep(model, state, config, dummy);
  CHECK(state.iteration == 1);
  // no drive anywhere: phases stay, rates stay at logistic(bias)
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    CHECK((state.layers[l].phases == initial.layers[l].phases).all());
    CHECK((state.layers[l].rates == initial.layers[l].rates).all());
  }
  const auto after1 = state;
  sweep(model, state, config, dummy);
  for (std::size_t l = 0; l < state.layers.size(); ++l)
    CHECK((state.layers[l].rates == after1.layers[l].rates).all());
}

TEST_CASE("per-unit drives agree with the vectorized path") {
  const auto model = random_model(
      {LayerGeometry::convolutional(3, 3, 1, 2, 2), LayerGeometry::fully_connected(8, 3)}, 7, 1.2,
      -0.3);
  Rng rng(11, 4);
  auto state = init_state(model, checker_image(3, 3), rng);
  // give hidden layers non-trivial rates before comparing
  InferenceConfig config;
  Rng dummy(0);
  sweep(model, state, config, dummy);
  for (int l = 0; l <= model.layer_count(); ++l) {
    const auto d = detail::drives_for_layer(model, state, l);
    for (int u = 0; u < state.layers[static_cast<std::size_t>(l)].size(); ++u) {
      const auto single = layer_drive(model, state, l, u);
      CHECK(std::abs(single.sync.real() - d.zre[u]) < 1e-12);
      CHECK(std::abs(single.sync.imag() - d.zim[u]) < 1e-12);
      CHECK(std::abs(single.classic - d.chi[u]) < 1e-12);
    }
  }
  CHECK_THROWS(layer_drive(model, state, 5, 0));
}

TEST_CASE("phase-aligned nonnegative weights reduce to classic mean-field") {
  auto model = random_model(
      {LayerGeometry::convolutional(3, 3, 1, 2, 2), LayerGeometry::fully_connected(8, 3)}, 13, 1.0,
      -1.0);
  for (auto& layer : model.layers) layer.W = layer.W.cwiseAbs();

  const BinaryImage image = checker_image(3, 3);
  Rng rng(3, 1);
  auto state = init_state(model, image, rng);
  for (auto& layer : state.layers) layer.phases.setZero();

  // hand-rolled reference: sequential bottom-up rate updates, then nothing
  // for the clamped visible rates
  std::vector<ArrayX<double>> rates;
  for (const auto& layer : state.layers) rates.push_back(layer.rates);
  const int sweeps = 7;
  for (int t = 0; t < sweeps; ++t) {
    for (int l = 1; l <= model.layer_count(); ++l) {
      const auto& lower_w = model.layers[static_cast<std::size_t>(l - 1)].W;
      ArrayX<double> pre =
          (lower_w * rates[static_cast<std::size_t>(l - 1)].matrix()).array() +
          model.layers[static_cast<std::size_t>(l - 1)].b_h.array();
      if (l < model.layer_count()) {
        const auto& upper_w = model.layers[static_cast<std::size_t>(l)].W;
        pre += (upper_w.transpose() * rates[static_cast<std::size_t>(l + 1)].matrix()).array();
      }
      rates[static_cast<std::size_t>(l)] = 1.0 / (1.0 + (-pre).exp());
    }
  }

  InferenceConfig config;
  Rng dummy(0);
  for (int t = 0; t < sweeps; ++t) sweep(model, state, config, dummy);
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    CHECK((state.layers[l].rates - rates[l]).abs().maxCoeff() < 1e-12);
    CHECK(state.layers[l].phases.abs().maxCoeff() == 0.0);  // real drive keeps phase 0
  }
}

TEST_CASE("global phase rotation commutes with inference sweeps") {
  const auto model = random_model(
      {LayerGeometry::fully_connected(5, 4), LayerGeometry::fully_connected(4, 2)}, 17, 1.5, -0.5);
  BinaryImage image(5, 1);
  image.pixels = {1, 1, 0, 1, 1};
  InferenceConfig config;
  Rng dummy(0);

  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(23, trial);
    auto base = init_state(model, image, rng);
    const double delta = Rng(29, trial).uniform(-kPi, kPi);
    auto rotated = rotate_state(base, delta);
    for (int t = 0; t < 4; ++t) {
      sweep(model, base, config, dummy);
      sweep(model, rotated, config, dummy);
    }
    for (std::size_t l = 0; l < base.layers.size(); ++l) {
      CHECK((base.layers[l].rates - rotated.layers[l].rates).abs().maxCoeff() < 1e-12);
      for (int i = 0; i < base.layers[l].size(); ++i)
        CHECK(circ_diff(rotated.layers[l].phases[i], base.layers[l].phases[i] + delta) < 1e-9);
    }
  }
}

TEST_CASE("run_inference streams are deterministic and independent") {
  const auto model = random_model({LayerGeometry::fully_connected(6, 5)}, 19, 1.0, -0.6);
  BinaryImage image(3, 2);
  image.pixels = {1, 0, 1, 1, 1, 0};
  InferenceConfig config;
  config.iterations = 20;

  const auto a = run_inference(model, image, config, 4);
  const auto b = run_inference(model, image, config, 4);
  CHECK((a.state.layers[0].phases == b.state.layers[0].phases).all());
  CHECK((a.state.layers[1].rates == b.state.layers[1].rates).all());
  CHECK(a.state.iteration == 20);
  CHECK(a.state.layers[0].clamped);

  const auto c = run_inference(model, image, config, 5);
  CHECK((a.state.layers[0].phases != c.state.layers[0].phases).any());

  InferenceConfig reseeded = config;
  reseeded.seed = 1;
  const auto d = run_inference(model, image, reseeded, 4);
  CHECK((a.state.layers[0].phases != d.state.layers[0].phases).any());

  InferenceConfig bad = config;
  bad.iterations = 0;
  CHECK_THROWS(run_inference(model, image, bad));
}

TEST_CASE("stochastic mode samples binary rates but keeps the clamp") {
  const auto model = random_model({LayerGeometry::fully_connected(6, 8)}, 23, 1.0, 0.0);
  BinaryImage image(3, 2);
  image.pixels = {1, 0, 0, 1, 1, 0};
  InferenceConfig config;
  config.iterations = 9;
  config.mode = ActivationMode::stochastic;

  const auto result = run_inference(model, image, config, 2);
  for (int i = 0; i < 6; ++i)
    CHECK(result.state.layers[0].rates[i] == double(image.pixels[static_cast<std::size_t>(i)]));
  for (int j = 0; j < 8; ++j) {
    const double r = result.state.layers[1].rates[j];
    CHECK((r == 0.0 || r == 1.0));
  }
  const auto replay = run_inference(model, image, config, 2);
  CHECK((replay.state.layers[1].rates == result.state.layers[1].rates).all());
  CHECK((replay.state.layers[1].phases == result.state.layers[1].phases).all());
}

TEST_CASE("trajectory recording keeps the initial state and the stride") {
  const auto model = random_model({LayerGeometry::fully_connected(4, 3)}, 29, 1.0, -0.2);
  BinaryImage image(2, 2);
  image.pixels = {1, 1, 1, 0};
  InferenceConfig config;
  config.iterations = 5;
  config.record_trajectory = true;
  config.record_stride = 2;
  const auto result = run_inference(model, image, config, 0);
  REQUIRE(result.trajectory.size() == 3);
  CHECK(result.trajectory[0].iteration == 0);
  CHECK(result.trajectory[1].iteration == 2);
  CHECK(result.trajectory[2].iteration == 4);
  CHECK(result.state.iteration == 5);

  InferenceConfig off = config;
  off.record_trajectory = false;
  CHECK(run_inference(model, image, off, 0).trajectory.empty());
}

TEST_CASE("phase_drift measures mean wrapped phase motion") {
  const auto model = random_model({LayerGeometry::fully_connected(4, 3)}, 31, 1.0, -0.2);
  BinaryImage image(2, 2);
  image.pixels = {1, 0, 1, 1};
  Rng rng(1, 0);
  const auto state = init_state(model, image, rng);
  CHECK(phase_drift(state, state) == 0.0);
  const auto rotated = rotate_state(state, 0.3);
  CHECK(phase_drift(state, rotated) == doctest::Approx(0.3).epsilon(1e-12));
  const auto neg = rotate_state(state, -1.1);
  CHECK(phase_drift(state, neg) == doctest::Approx(1.1).epsilon(1e-12));
}
