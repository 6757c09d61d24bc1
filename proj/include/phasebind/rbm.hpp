#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasebind/complex_unit.hpp"
#include "phasebind/datasets.hpp"
#include "phasebind/image.hpp"
#include "phasebind/rng.hpp"
#include "phasebind/types.hpp"

namespace phasebind {

/// Shape of one layer: visible grid (height, width, channels), receptive
/// field side, and hidden grid derived by stride-1 valid placement
/// (hidden side = input side - rf + 1). rf = 0 marks a fully connected
/// layer (all-ones mask). Unit order everywhere is channel-minor:
/// (row i, col j, channel c) -> (i*width + j)*channels + c.
struct LayerGeometry {
  int in_h = 0, in_w = 0, in_c = 1;
  int hid_h = 0, hid_w = 0, hid_c = 1;
  int rf = 0;

  static LayerGeometry convolutional(int in_h, int in_w, int in_c, int rf, int hid_c) {
    if (rf < 1 || in_c < 1 || hid_c < 1 || in_h < rf || in_w < rf)
      throw std::invalid_argument("LayerGeometry: invalid convolutional shape");
    LayerGeometry g;
    g.in_h = in_h;
    g.in_w = in_w;
    g.in_c = in_c;
    g.rf = rf;
    g.hid_c = hid_c;
    g.hid_h = in_h - rf + 1;
    g.hid_w = in_w - rf + 1;
    return g;
  }

  static LayerGeometry fully_connected(int n_visible, int n_hidden) {
    if (n_visible < 1 || n_hidden < 1)
      throw std::invalid_argument("LayerGeometry: invalid fully connected shape");
    LayerGeometry g;
    g.in_h = n_visible;
    g.in_w = 1;
    g.in_c = 1;
    g.hid_h = n_hidden;
    g.hid_w = 1;
    g.hid_c = 1;
    g.rf = 0;
    return g;
  }

  bool is_fully_connected() const { return rf == 0; }
  int visible_units() const { return in_h * in_w * in_c; }
  int hidden_units() const { return hid_h * hid_w * hid_c; }

  bool operator==(const LayerGeometry&) const = default;
};

/// {0,1} connectivity mask, hidden x visible: hidden unit (i,j,*) sees the
/// rf x rf window of visible sites with top-left (i,j), all input channels.
template <typename Scalar>
MatrixX<Scalar> receptive_field_mask(const LayerGeometry& g) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(g.hidden_units(), g.visible_units());
  if (g.is_fully_connected()) {
    m.setOnes();
    return m;
  }
  for (int i = 0; i < g.hid_h; ++i)
    for (int j = 0; j < g.hid_w; ++j)
      for (int c = 0; c < g.hid_c; ++c) {
        const int h = (i * g.hid_w + j) * g.hid_c + c;
        for (int r = i; r < i + g.rf; ++r)
          for (int s = j; s < j + g.rf; ++s)
            for (int d = 0; d < g.in_c; ++d) m(h, (r * g.in_w + s) * g.in_c + d) = Scalar(1);
      }
  return m;
}

template <typename Scalar>
struct RbmLayer {
  LayerGeometry geometry;
  MatrixX<Scalar> W;     // hidden x visible, zero outside the mask
  MatrixX<Scalar> mask;  // {0,1}
  VectorX<Scalar> b_v;
  VectorX<Scalar> b_h;

  int visible_units() const { return geometry.visible_units(); }
  int hidden_units() const { return geometry.hidden_units(); }
};

inline constexpr double kInitWeightScale = 0.05;
inline constexpr double kInitBias = -4.0;

/// Fresh layer: in-mask weights ~ U[-0.05, 0.05] drawn in row-major order,
/// all biases -4 (sparse-coding regime).
template <typename Scalar>
RbmLayer<Scalar> init_layer(const LayerGeometry& g, Rng& rng) {
  RbmLayer<Scalar> layer;
  layer.geometry = g;
  layer.mask = receptive_field_mask<Scalar>(g);
  layer.W = MatrixX<Scalar>::Zero(g.hidden_units(), g.visible_units());
  for (int h = 0; h < g.hidden_units(); ++h)
    for (int v = 0; v < g.visible_units(); ++v)
      if (layer.mask(h, v) != Scalar(0))
        layer.W(h, v) = Scalar(rng.uniform(-kInitWeightScale, kInitWeightScale));
  layer.b_v = VectorX<Scalar>::Constant(g.visible_units(), Scalar(kInitBias));
  layer.b_h = VectorX<Scalar>::Constant(g.hidden_units(), Scalar(kInitBias));
  return layer;
}

template <typename Scalar>
RbmLayer<Scalar> init_layer(const LayerGeometry& g, std::uint64_t seed) {
  Rng rng(seed);
  return init_layer<Scalar>(g, rng);
}

/// p(h=1 | v) = logistic(W v + b_h), columns are samples.
template <typename Scalar>
MatrixX<Scalar> hidden_probs(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& v) {
  if (v.rows() != layer.W.cols())
    throw std::invalid_argument("hidden_probs: visible dimension mismatch");
  return phasebind::logistic(((layer.W * v).colwise() + layer.b_h).array()).matrix();
}

/// p(v=1 | h) = logistic(W^T h + b_v), columns are samples.
template <typename Scalar>
MatrixX<Scalar> visible_probs(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& h) {
  if (h.rows() != layer.W.rows())
    throw std::invalid_argument("visible_probs: hidden dimension mismatch");
  return phasebind::logistic(((layer.W.transpose() * h).colwise() + layer.b_v).array()).matrix();
}

/// Elementwise Bernoulli sample, drawn column-major so a column (one sample)
/// consumes a contiguous run of the stream.
template <typename Scalar>
MatrixX<Scalar> sample_bernoulli(const MatrixX<Scalar>& probs, Rng& rng) {
  MatrixX<Scalar> out(probs.rows(), probs.cols());
  for (Eigen::Index c = 0; c < probs.cols(); ++c)
    for (Eigen::Index r = 0; r < probs.rows(); ++r)
      out(r, c) = rng.bernoulli(static_cast<double>(probs(r, c))) ? Scalar(1) : Scalar(0);
  return out;
}

template <typename Scalar>
struct GibbsResult {
  MatrixX<Scalar> v_sample, h_sample;  // final samples
  MatrixX<Scalar> v_prob, h_prob;      // final-step conditional probabilities
};

/// k alternating steps h ~ p(h|v), v ~ p(v|h) starting from v0 (columns are
/// independent chains).
template <typename Scalar>
GibbsResult<Scalar> gibbs_chain(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& v0, int k,
                                Rng& rng) {
  if (k < 1) throw std::invalid_argument("gibbs_chain: k must be >= 1");
  GibbsResult<Scalar> r;
  MatrixX<Scalar> v = v0;
  for (int step = 0; step < k; ++step) {
    r.h_prob = hidden_probs(layer, v);
    r.h_sample = sample_bernoulli(r.h_prob, rng);
    r.v_prob = visible_probs(layer, r.h_sample);
    r.v_sample = sample_bernoulli(r.v_prob, rng);
    v = r.v_sample;
  }
  return r;
}

template <typename Scalar>
struct RbmGradient {
  MatrixX<Scalar> dW;
  VectorX<Scalar> db_v, db_h;
};

/// CD-k: positive statistics from the data, negative statistics from the
/// k-step reconstruction (sampled visibles, mean hidden probabilities).
/// recon_err, when requested, is the mean squared error between the batch
/// and the final-step visible probabilities.
template <typename Scalar>
RbmGradient<Scalar> cd_gradient(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& batch, int k,
                                Rng& rng, double* recon_err = nullptr) {
  if (k < 1) throw std::invalid_argument("cd_gradient: k must be >= 1");
  const auto n = batch.cols();
  if (n < 1) throw std::invalid_argument("cd_gradient: empty batch");
  const MatrixX<Scalar> h0_prob = hidden_probs(layer, batch);
  MatrixX<Scalar> hk_prob = h0_prob;
  MatrixX<Scalar> vk = batch;
  MatrixX<Scalar> vk_prob;
  for (int step = 0; step < k; ++step) {
    const MatrixX<Scalar> h_sample = sample_bernoulli(hk_prob, rng);
    vk_prob = visible_probs(layer, h_sample);
    vk = sample_bernoulli(vk_prob, rng);
    hk_prob = hidden_probs(layer, vk);
  }
  const Scalar inv_n = Scalar(1) / Scalar(n);
  RbmGradient<Scalar> g;
  g.dW = ((h0_prob * batch.transpose() - hk_prob * vk.transpose()) * inv_n)
             .cwiseProduct(layer.mask);
  g.db_v = (batch - vk).rowwise().sum() * inv_n;
  g.db_h = (h0_prob - hk_prob).rowwise().sum() * inv_n;
  if (recon_err)
    *recon_err = static_cast<double>((batch - vk_prob).squaredNorm()) /
                 static_cast<double>(batch.size());
  return g;
}

/// PCD-k: negative statistics from persistent chains advanced k more steps
/// (chains hold visible samples and are updated in place). recon_err, when
/// requested, is the mean-field one-step reconstruction error of the batch
/// (diagnostic only; the chains do not reconstruct the batch).
template <typename Scalar>
RbmGradient<Scalar> pcd_gradient(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& batch,
                                 MatrixX<Scalar>& chains, int k, Rng& rng,
                                 double* recon_err = nullptr) {
  if (k < 1) throw std::invalid_argument("pcd_gradient: k must be >= 1");
  if (chains.cols() < 1 || chains.rows() != layer.W.cols())
    throw std::invalid_argument("pcd_gradient: bad chain shape");
  const auto n = batch.cols();
  if (n < 1) throw std::invalid_argument("pcd_gradient: empty batch");
  const MatrixX<Scalar> h0_prob = hidden_probs(layer, batch);
  MatrixX<Scalar> hk_prob;
  for (int step = 0; step < k; ++step) {
    hk_prob = hidden_probs(layer, chains);
    const MatrixX<Scalar> h_sample = sample_bernoulli(hk_prob, rng);
    chains = sample_bernoulli(visible_probs(layer, h_sample), rng);
  }
  hk_prob = hidden_probs(layer, chains);
  const Scalar inv_n = Scalar(1) / Scalar(n);
  const Scalar inv_c = Scalar(1) / Scalar(chains.cols());
  RbmGradient<Scalar> g;
  g.dW = (h0_prob * batch.transpose() * inv_n - hk_prob * chains.transpose() * inv_c)
             .cwiseProduct(layer.mask);
  g.db_v = batch.rowwise().sum() * inv_n - chains.rowwise().sum() * inv_c;
  g.db_h = h0_prob.rowwise().sum() * inv_n - hk_prob.rowwise().sum() * inv_c;
  if (recon_err)
    *recon_err =
        static_cast<double>((batch - visible_probs(layer, h0_prob)).squaredNorm()) /
        static_cast<double>(batch.size());
  return g;
}

enum class TrainAlgorithm { cd, pcd };

struct TrainConfig {
  TrainAlgorithm algorithm = TrainAlgorithm::cd;
  int gibbs_steps = 1;
  double learning_rate = 0.1;
  double momentum = 0.5;
  double weight_decay = 1e-4;
  int epochs = 60;
  int batch_size = 100;
  double lr_decay = 1.0;  // lr is divided by this after every minibatch
  int chain_count = 100;
  std::uint64_t seed = 0;

  /// Reference settings: CD-1, lr 0.1, momentum 0.5, weight decay 1e-4,
  /// 60 epochs of minibatches of 100.
  static TrainConfig cd1() { return {}; }

  /// Reference settings for the hardest dataset: PCD-5, lr 0.005 with decay
  /// factor 1 + 1.5e-5 per minibatch.
  static TrainConfig pcd5() {
    TrainConfig c;
    c.algorithm = TrainAlgorithm::pcd;
    c.gibbs_steps = 5;
    c.learning_rate = 0.005;
    c.lr_decay = 1.0 + 1.5e-5;
    return c;
  }
};

template <typename Scalar>
struct OptimizerState {
  MatrixX<Scalar> vW;
  VectorX<Scalar> vb_v, vb_h;
  double lr = 0.0;

  static OptimizerState zero(const RbmLayer<Scalar>& layer, double lr0) {
    OptimizerState s;
    s.vW = MatrixX<Scalar>::Zero(layer.W.rows(), layer.W.cols());
    s.vb_v = VectorX<Scalar>::Zero(layer.b_v.size());
    s.vb_h = VectorX<Scalar>::Zero(layer.b_h.size());
    s.lr = lr0;
    return s;
  }
};

/// Momentum update with L2 weight decay on W only; weights are re-masked so
/// out-of-field entries stay exactly zero. The learning rate is divided by
/// the decay factor after each call when decay is enabled.
template <typename Scalar>
void apply_update(RbmLayer<Scalar>& layer, const RbmGradient<Scalar>& g,
                  OptimizerState<Scalar>& opt, const TrainConfig& cfg) {
  const Scalar lr = Scalar(opt.lr);
  const Scalar mom = Scalar(cfg.momentum);
  const Scalar wd = Scalar(cfg.weight_decay);
  opt.vW = mom * opt.vW + lr * (g.dW - wd * layer.W);
  layer.W = (layer.W + opt.vW).cwiseProduct(layer.mask);
  opt.vb_v = mom * opt.vb_v + lr * g.db_v;
  layer.b_v += opt.vb_v;
  opt.vb_h = mom * opt.vb_h + lr * g.db_h;
  layer.b_h += opt.vb_h;
  if (cfg.lr_decay > 1.0) opt.lr /= cfg.lr_decay;
}

/// Trains one layer on `data` (visible x samples). Weight init draws from
/// stream (seed, 0), training noise from stream (seed, 1). Emits one log
/// line per epoch: `epoch=<n> recon_err=<mse> lr=<value>`.
template <typename Scalar>
RbmLayer<Scalar> train_layer(const MatrixX<Scalar>& data, const LayerGeometry& g,
                             const TrainConfig& cfg, std::ostream* log = nullptr,
                             std::vector<double>* recon_history = nullptr) {
  if (data.rows() != g.visible_units())
    throw std::invalid_argument("train_layer: data/geometry size mismatch");
  if (data.cols() < 1) throw std::invalid_argument("train_layer: empty dataset");
  if (cfg.learning_rate <= 0 || cfg.batch_size < 1 || cfg.epochs < 1 || cfg.lr_decay < 1.0)
    throw std::invalid_argument("train_layer: bad config");
  Rng init_rng(cfg.seed, 0);
  RbmLayer<Scalar> layer = init_layer<Scalar>(g, init_rng);
  Rng rng(cfg.seed, 1);
  OptimizerState<Scalar> opt = OptimizerState<Scalar>::zero(layer, cfg.learning_rate);

  const auto n = data.cols();
  MatrixX<Scalar> chains;
  if (cfg.algorithm == TrainAlgorithm::pcd) {
    if (cfg.chain_count < 1) throw std::invalid_argument("train_layer: bad chain count");
    MatrixX<Scalar> seed_cols(data.rows(), cfg.chain_count);
    for (int c = 0; c < cfg.chain_count; ++c) seed_cols.col(c) = data.col(c % n);
    chains = sample_bernoulli(seed_cols, rng);
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double err_sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const auto width = std::min<Eigen::Index>(cfg.batch_size, n - start);
      const MatrixX<Scalar> batch = data.middleCols(start, width);
      double err = 0.0;
      RbmGradient<Scalar> grad =
          cfg.algorithm == TrainAlgorithm::cd
              ? cd_gradient(layer, batch, cfg.gibbs_steps, rng, &err)
              : pcd_gradient(layer, batch, chains, cfg.gibbs_steps, rng, &err);
      apply_update(layer, grad, opt, cfg);
      err_sum += err;
      ++batches;
    }
    const double mean_err = err_sum / batches;
    if (recon_history) recon_history->push_back(mean_err);
    if (log) *log << "epoch=" << epoch << " recon_err=" << mean_err << " lr=" << opt.lr << "\n";
  }
  return layer;
}

/// Mean hidden activations for the next layer's training data (probabilities,
/// not samples).
template <typename Scalar>
MatrixX<Scalar> propagate_up(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& data) {
  return hidden_probs(layer, data);
}

template <typename Scalar>
struct DbmModel {
  std::vector<RbmLayer<Scalar>> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }
  int visible_units() const { return layers.front().visible_units(); }
  int top_units() const { return layers.back().hidden_units(); }

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("DbmModel: no layers");
    for (std::size_t l = 1; l < layers.size(); ++l)
      if (layers[l].visible_units() != layers[l - 1].hidden_units())
        throw std::invalid_argument("DbmModel: adjacent layer dimension mismatch");
  }
};

/// Untrained model with freshly initialized layers (layer l draws from
/// stream (seed, l)).
template <typename Scalar>
DbmModel<Scalar> build_model(const std::vector<LayerGeometry>& geoms, std::uint64_t seed) {
  DbmModel<Scalar> model;
  for (std::size_t l = 0; l < geoms.size(); ++l) {
    Rng rng(seed, l);
    model.layers.push_back(init_layer<Scalar>(geoms[l], rng));
  }
  model.validate();
  return model;
}

/// Layer-wise stack training: layer 1 on the data, each next layer on the
/// mean activations of the previous one. One config per layer, or a single
/// config reused. No joint fine-tuning.
template <typename Scalar>
DbmModel<Scalar> train_stack(const MatrixX<Scalar>& data, const std::vector<LayerGeometry>& geoms,
                             const std::vector<TrainConfig>& configs,
                             std::ostream* log = nullptr) {
  if (geoms.empty()) throw std::invalid_argument("train_stack: no geometries");
  if (configs.size() != geoms.size() && configs.size() != 1)
    throw std::invalid_argument("train_stack: need one config total or one per layer");
  for (std::size_t l = 1; l < geoms.size(); ++l)
    if (geoms[l].visible_units() != geoms[l - 1].hidden_units())
      throw std::invalid_argument("train_stack: geometries not chain-compatible");
  DbmModel<Scalar> model;
  MatrixX<Scalar> cur = data;
  for (std::size_t l = 0; l < geoms.size(); ++l) {
    const TrainConfig& cfg = configs.size() == 1 ? configs[0] : configs[l];
    if (log) *log << "layer=" << l + 1 << " nv=" << geoms[l].visible_units()
                  << " nh=" << geoms[l].hidden_units() << "\n";
    RbmLayer<Scalar> layer = train_layer(cur, geoms[l], cfg, log);
    if (l + 1 < geoms.size()) cur = propagate_up(layer, cur);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

template <typename Scalar>
struct SampleRun {
  std::vector<VectorX<Scalar>> means;     // visible-layer mean at each record point
  std::vector<BinaryImage> frames;        // Bernoulli samples of the means
};

/// Generates from the model: alternating Gibbs steps in the top layer's RBM
/// (visible initialized from Bernoulli(logistic(b_v))), projecting mean
/// activations down through the stack at every record point.
template <typename Scalar>
SampleRun<Scalar> sample_model(const DbmModel<Scalar>& model, int steps, int record_stride,
                               Rng& rng) {
  model.validate();
  if (steps < 1 || record_stride < 1)
    throw std::invalid_argument("sample_model: steps and record_stride must be >= 1");
  const RbmLayer<Scalar>& top = model.layers.back();
  const MatrixX<Scalar> prior = phasebind::logistic(top.b_v.array()).matrix();
  MatrixX<Scalar> v = sample_bernoulli(prior, rng);
  MatrixX<Scalar> v_prob = prior;
  const int image_h = model.layers.front().geometry.in_h;
  const int image_w = model.layers.front().geometry.in_w;
  SampleRun<Scalar> out;
  for (int step = 1; step <= steps; ++step) {
    GibbsResult<Scalar> r = gibbs_chain(top, v, 1, rng);
    v = r.v_sample;
    v_prob = r.v_prob;
    if (step % record_stride == 0 || step == steps) {
      MatrixX<Scalar> x = v_prob;
      for (int l = model.layer_count() - 2; l >= 0; --l) x = visible_probs(model.layers[l], x);
      VectorX<Scalar> mean = x.col(0);
      BinaryImage frame(image_h, image_w);
      const MatrixX<Scalar> px = sample_bernoulli(x, rng);
      for (int i = 0; i < mean.size(); ++i)
        frame.pixels[static_cast<std::size_t>(i)] = px(i, 0) != Scalar(0) ? 1 : 0;
      out.means.push_back(std::move(mean));
      out.frames.push_back(std::move(frame));
    }
  }
  return out;
}

namespace detail {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

/// -F(v) = b_v.v + sum_j softplus(w_j.v + b_h_j), in doubles.
template <typename Scalar>
double negative_free_energy(const RbmLayer<Scalar>& layer, const VectorX<double>& v) {
  const VectorX<double> w = layer.W.template cast<double>() * v;
  double acc = layer.b_v.template cast<double>().dot(v);
  for (Eigen::Index j = 0; j < w.size(); ++j)
    acc += softplus(w[j] + static_cast<double>(layer.b_h[j]));
  return acc;
}

}  // namespace detail

/// log Z by explicit enumeration of every visible configuration (the hidden
/// sum folds into the free energy). Requires nv + nh <= 20.
template <typename Scalar>
double exact_log_partition(const RbmLayer<Scalar>& layer) {
  const int nv = layer.visible_units();
  const int nh = layer.hidden_units();
  if (nv + nh > 20) throw std::invalid_argument("exact_log_partition: model too large");
  std::vector<double> terms;
  terms.reserve(std::size_t(1) << nv);
  VectorX<double> v(nv);
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << nv); ++bits) {
    for (int i = 0; i < nv; ++i) v[i] = (bits >> i) & 1 ? 1.0 : 0.0;
    terms.push_back(detail::negative_free_energy(layer, v));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - m);
  return m + std::log(sum);
}

/// Mean exact log-likelihood of the dataset columns. Requires nv + nh <= 20.
template <typename Scalar>
double exact_loglik(const RbmLayer<Scalar>& layer, const MatrixX<Scalar>& data) {
  if (data.cols() < 1) throw std::invalid_argument("exact_loglik: empty dataset");
  if (data.rows() != layer.visible_units())
    throw std::invalid_argument("exact_loglik: dimension mismatch");
  const double log_z = exact_log_partition(layer);
  double acc = 0.0;
  for (Eigen::Index c = 0; c < data.cols(); ++c)
    acc += detail::negative_free_energy(layer, data.col(c).template cast<double>().eval()) - log_z;
  return acc / static_cast<double>(data.cols());
}

/// Reference layer shapes: one entry per dataset, derived by the stride-1
/// valid-window rule.
inline std::vector<LayerGeometry> architecture_for(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::bars:
      return {LayerGeometry::convolutional(20, 20, 1, 7, 3)};
    case DatasetKind::corners:
    case DatasetKind::mnist_plus_shape:
      return {LayerGeometry::convolutional(28, 28, 1, 7, 2),
              LayerGeometry::convolutional(22, 22, 2, 10, 4),
              LayerGeometry::convolutional(13, 13, 4, 13, 676)};
    case DatasetKind::three_shapes:
      return {LayerGeometry::convolutional(20, 20, 1, 7, 3),
              LayerGeometry::convolutional(14, 14, 3, 7, 10),
              LayerGeometry::convolutional(8, 8, 10, 8, 676)};
  }
  throw std::invalid_argument("architecture_for: bad kind");
}

}  // namespace phasebind
