#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "phasebind/complex_unit.hpp"
#include "phasebind/image.hpp"
#include "phasebind/rbm.hpp"
#include "phasebind/rng.hpp"
#include "phasebind/synchrony.hpp"

namespace phasebind {

/// A unit is counted active ("on") when its rate reaches this threshold.
inline constexpr double kOffThreshold = 0.5;

struct PhaseClusters {
  int k = 0;
  std::vector<int> assignments;                 // per unit
  std::vector<std::complex<double>> centroids;  // means of member activity vectors
};

/// Index of the designated background cluster: smallest centroid magnitude.
inline int background_cluster(const PhaseClusters& clusters) {
  int best = 0;
  for (int c = 1; c < clusters.k; ++c)
    if (std::abs(clusters.centroids[static_cast<std::size_t>(c)]) <
        std::abs(clusters.centroids[static_cast<std::size_t>(best)]))
      best = c;
  return best;
}

/// Lloyd's k-means over the activity vectors r_i e^{i phi_i} in the complex
/// plane, seeded k-means++ style from `seed`. Empty clusters are repaired by
/// stealing the point farthest from its centroid. Stops when assignments
/// stabilize or after max_iters rounds. The within-cluster sum of squares
/// after each round is appended to *objective when given (non-increasing).
/// Throws when the points have fewer than k distinct values.
template <typename Scalar>
PhaseClusters kmeans_complex(const ComplexLayerState<Scalar>& layer, int k, std::uint64_t seed,
                             int max_iters = 100, std::vector<double>* objective = nullptr) {
  const int n = layer.size();
  if (k < 1) throw std::invalid_argument("kmeans_complex: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans_complex: fewer points than clusters");
  std::vector<std::complex<double>> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = static_cast<double>(layer.rates[i]);
    const double phi = static_cast<double>(layer.phases[i]);
    pts[static_cast<std::size_t>(i)] = std::polar(r, phi);
  }
  {
    std::vector<std::complex<double>> distinct = pts;
    std::sort(distinct.begin(), distinct.end(), [](const auto& a, const auto& b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<int>(distinct.size()) < k)
      throw std::invalid_argument("kmeans_complex: fewer than k distinct points");
  }

  Rng rng(seed);
  std::vector<std::complex<double>> centers;
  centers.push_back(pts[rng.below(static_cast<std::uint64_t>(n))]);
  std::vector<double> d2(static_cast<std::size_t>(n));
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::norm(pts[static_cast<std::size_t>(i)] - centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c)
        best = std::min(best, std::norm(pts[static_cast<std::size_t>(i)] - centers[c]));
      d2[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    double target = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      target -= d2[static_cast<std::size_t>(i)];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(pts[static_cast<std::size_t>(pick)]);
  }

  PhaseClusters out;
  out.k = k;
  out.assignments.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);
  for (int round = 0; round < max_iters; ++round) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::norm(pts[static_cast<std::size_t>(i)] - centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = std::norm(pts[static_cast<std::size_t>(i)] - centers[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      out.assignments[static_cast<std::size_t>(i)] = best;
    }
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : out.assignments) sizes[static_cast<std::size_t>(a)]++;
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      // empty cluster: steal the point farthest from its current centroid
      int far = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        const int a = out.assignments[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(a)] <= 1) continue;
        const double d =
            std::norm(pts[static_cast<std::size_t>(i)] - centers[static_cast<std::size_t>(a)]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) throw std::runtime_error("kmeans_complex: cannot repair empty cluster");
      sizes[static_cast<std::size_t>(out.assignments[static_cast<std::size_t>(far)])]--;
      out.assignments[static_cast<std::size_t>(far)] = c;
      sizes[static_cast<std::size_t>(c)] = 1;
    }
    std::vector<std::complex<double>> sums(static_cast<std::size_t>(k), {0.0, 0.0});
    for (int i = 0; i < n; ++i)
      sums[static_cast<std::size_t>(out.assignments[static_cast<std::size_t>(i)])] +=
          pts[static_cast<std::size_t>(i)];
    for (int c = 0; c < k; ++c)
      centers[static_cast<std::size_t>(c)] =
          sums[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    if (objective) {
      double obj = 0.0;
      for (int i = 0; i < n; ++i)
        obj += std::norm(pts[static_cast<std::size_t>(i)] -
                         centers[static_cast<std::size_t>(
                             out.assignments[static_cast<std::size_t>(i)])]);
      objective->push_back(obj);
    }
    if (out.assignments == prev) break;
    prev = out.assignments;
  }
  out.centroids = std::move(centers);
  return out;
}

struct ClusterMasks {
  std::vector<std::vector<std::uint8_t>> masks;  // per cluster, per unit
  int background = 0;
};

/// Unit belongs to mask c iff it is assigned to c and active. Masks of
/// distinct clusters are disjoint and jointly cover the active units.
template <typename Scalar>
ClusterMasks masks_from_clusters(const PhaseClusters& clusters,
                                 const ComplexLayerState<Scalar>& layer,
                                 double off_threshold = kOffThreshold) {
  if (static_cast<int>(clusters.assignments.size()) != layer.size())
    throw std::invalid_argument("masks_from_clusters: size mismatch");
  ClusterMasks out;
  out.background = background_cluster(clusters);
  out.masks.assign(static_cast<std::size_t>(clusters.k),
                   std::vector<std::uint8_t>(static_cast<std::size_t>(layer.size()), 0));
  for (int i = 0; i < layer.size(); ++i)
    if (static_cast<double>(layer.rates[i]) >= off_threshold)
      out.masks[static_cast<std::size_t>(clusters.assignments[static_cast<std::size_t>(i)])]
               [static_cast<std::size_t>(i)] = 1;
  return out;
}

struct Segmentation {
  int width = 0, height = 0;
  int k = 0;
  int background = 0;          // reserved background label
  std::vector<int> labels;     // per pixel
};

/// Clusters the visible layer and paints per-pixel labels; inactive pixels
/// get the background label. A state with no active pixel is all background
/// without clustering.
template <typename Scalar>
Segmentation segment_visible(const NetworkState<Scalar>& state, int width, int height, int k,
                             std::uint64_t seed, double off_threshold = kOffThreshold) {
  const auto& visible = state.layers.at(0);
  if (visible.size() != width * height)
    throw std::invalid_argument("segment_visible: geometry mismatch");
  Segmentation seg;
  seg.width = width;
  seg.height = height;
  seg.k = k;
  bool any_active = false;
  for (int i = 0; i < visible.size(); ++i)
    if (static_cast<double>(visible.rates[i]) >= off_threshold) {
      any_active = true;
      break;
    }
  if (!any_active) {
    seg.background = 0;
    seg.labels.assign(static_cast<std::size_t>(visible.size()), 0);
    return seg;
  }
  const PhaseClusters clusters = kmeans_complex(visible, k, seed);
  seg.background = background_cluster(clusters);
  seg.labels.assign(static_cast<std::size_t>(visible.size()), seg.background);
  for (int i = 0; i < visible.size(); ++i)
    if (static_cast<double>(visible.rates[i]) >= off_threshold)
      seg.labels[static_cast<std::size_t>(i)] = clusters.assignments[static_cast<std::size_t>(i)];
  return seg;
}

struct PhaseHistogram {
  std::vector<double> edges;  // bins+1 edges spanning [-pi, pi]
  std::vector<int> counts;    // per bin, active units only
  int total_active = 0;

  int bins() const { return static_cast<int>(counts.size()); }
  double bin_center(int b) const { return 0.5 * (edges[static_cast<std::size_t>(b)] + edges[static_cast<std::size_t>(b) + 1]); }
};

/// Circular histogram of the phases of active units.
template <typename Scalar>
PhaseHistogram phase_histogram(const ComplexLayerState<Scalar>& layer, int bins,
                               double off_threshold = kOffThreshold) {
  if (bins < 1) throw std::invalid_argument("phase_histogram: bins must be >= 1");
  PhaseHistogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[static_cast<std::size_t>(b)] = -kPi + 2.0 * kPi * b / bins;
  for (int i = 0; i < layer.size(); ++i) {
    if (static_cast<double>(layer.rates[i]) < off_threshold) continue;
    const double phi = static_cast<double>(layer.phases[i]);
    int b = static_cast<int>((phi + kPi) / (2.0 * kPi) * bins);
    b = std::clamp(b, 0, bins - 1);
    h.counts[static_cast<std::size_t>(b)]++;
    h.total_active++;
  }
  return h;
}

/// Peak bins: maximal circular runs of equal counts that strictly exceed
/// their neighbors and lie above the uniform expectation total/bins. Each
/// run is reported by its middle bin. A histogram with all counts equal and
/// nonzero is one peak (fully synchronized state).
inline std::vector<int> histogram_peaks(const PhaseHistogram& hist) {
  const int bins = hist.bins();
  std::vector<int> peaks;
  if (hist.total_active == 0) return peaks;
  const double expectation = static_cast<double>(hist.total_active) / bins;
  const auto count = [&](int b) {
    return hist.counts[static_cast<std::size_t>((b % bins + bins) % bins)];
  };
  bool all_equal = true;
  for (int b = 1; b < bins; ++b)
    if (hist.counts[static_cast<std::size_t>(b)] != hist.counts[0]) all_equal = false;
  if (all_equal) {
    for (int b = 0; b < bins; ++b)
      if (hist.counts[static_cast<std::size_t>(b)] > 0) return {b};
    return peaks;
  }
  for (int b = 0; b < bins; ++b) {
    if (count(b - 1) == count(b)) continue;  // not the start of a run
    int len = 1;
    while (len < bins && count(b + len) == count(b)) ++len;
    if (count(b - 1) < count(b) && count(b + len) < count(b) &&
        static_cast<double>(count(b)) > expectation)
      peaks.push_back((b + len / 2) % bins);
  }
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

/// Absolute circular distance in [0, pi].
inline double circular_distance(double a, double b) {
  return std::abs(wrap_phase(a - b));
}

struct PeakMasks {
  std::vector<double> peak_phases;                // bin centers of the peaks
  std::vector<std::vector<std::uint8_t>> masks;   // per peak, per unit; may overlap
};

/// Histogram-peak readout: every active unit within `peak_window` radians of
/// a peak's bin center joins that peak's mask (units can join several).
template <typename Scalar>
PeakMasks histogram_peak_masks(const ComplexLayerState<Scalar>& layer, int bins,
                               double peak_window, double off_threshold = kOffThreshold) {
  if (bins < 8) throw std::invalid_argument("histogram_peak_masks: bins must be >= 8");
  const PhaseHistogram hist = phase_histogram(layer, bins, off_threshold);
  PeakMasks out;
  for (int b : histogram_peaks(hist)) {
    out.peak_phases.push_back(hist.bin_center(b));
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(layer.size()), 0);
    for (int i = 0; i < layer.size(); ++i)
      if (static_cast<double>(layer.rates[i]) >= off_threshold &&
          circular_distance(static_cast<double>(layer.phases[i]), out.peak_phases.back()) <=
              peak_window)
        mask[static_cast<std::size_t>(i)] = 1;
    out.masks.push_back(std::move(mask));
  }
  return out;
}

/// Top-down decode of a top-layer assembly: masked rates (others zero), then
/// one deterministic pass down the stack with doubled weights,
/// logistic(2 W^T h + b_v) at every layer. Returns visible activations.
template <typename Scalar>
VectorX<Scalar> decode_cluster(const DbmModel<Scalar>& model,
                               const std::vector<std::uint8_t>& mask,
                               const ComplexLayerState<Scalar>& top_state) {
  model.validate();
  if (top_state.size() != model.top_units() ||
      static_cast<int>(mask.size()) != model.top_units())
    throw std::invalid_argument("decode_cluster: mask/state must cover the top layer");
  VectorX<Scalar> h(top_state.size());
  for (int i = 0; i < top_state.size(); ++i)
    h[i] = mask[static_cast<std::size_t>(i)] ? top_state.rates[i] : Scalar(0);
  for (int l = model.layer_count() - 1; l >= 0; --l) {
    const auto& layer = model.layers[static_cast<std::size_t>(l)];
    h = phasebind::logistic((Scalar(2) * (layer.W.transpose() * h) + layer.b_v).array()).matrix();
  }
  return h;
}

struct ObjectCoherence {
  int object_id = 0;
  double resultant = 0.0;   // R over active single-membership pixels
  double mean_phase = 0.0;  // circular mean of those pixels
  int n_pixels = 0;         // how many pixels entered the sum
};

struct PhaseSeparation {
  int object_a = 0, object_b = 0;
  double distance = 0.0;  // circular distance of the mean phases
};

struct CoherenceMetrics {
  std::vector<ObjectCoherence> objects;
  std::vector<PhaseSeparation> separations;  // pairs with defined means only
  int peak_count = 0;
};

/// Ground-truth comparison on the visible layer: per object the resultant
/// length of e^{i phi} over its active single-membership pixels (overlap
/// pixels are ambiguous and excluded), circular distances between object
/// mean phases, and the histogram peak count.
template <typename Scalar>
CoherenceMetrics coherence_metrics(const NetworkState<Scalar>& state, const GroundTruth& truth,
                                   int bins = 16, double off_threshold = kOffThreshold) {
  const auto& visible = state.layers.at(0);
  const std::vector<int> membership = truth.membership_counts(visible.size());
  CoherenceMetrics out;
  for (std::size_t o = 0; o < truth.object_pixels.size(); ++o) {
    ObjectCoherence oc;
    oc.object_id = static_cast<int>(o);
    double re = 0.0, im = 0.0;
    for (int p : truth.object_pixels[o]) {
      if (p < 0 || p >= visible.size())
        throw std::invalid_argument("coherence_metrics: truth pixel out of range");
      if (membership[static_cast<std::size_t>(p)] != 1) continue;
      if (static_cast<double>(visible.rates[p]) < off_threshold) continue;
      re += std::cos(static_cast<double>(visible.phases[p]));
      im += std::sin(static_cast<double>(visible.phases[p]));
      ++oc.n_pixels;
    }
    if (oc.n_pixels > 0) {
      oc.resultant = std::hypot(re, im) / oc.n_pixels;
      oc.mean_phase = wrap_phase(std::atan2(im, re));
    }
    out.objects.push_back(oc);
  }
  for (std::size_t a = 0; a < out.objects.size(); ++a)
    for (std::size_t b = a + 1; b < out.objects.size(); ++b) {
      if (out.objects[a].n_pixels == 0 || out.objects[b].n_pixels == 0) continue;
      out.separations.push_back(
          {static_cast<int>(a), static_cast<int>(b),
           circular_distance(out.objects[a].mean_phase, out.objects[b].mean_phase)});
    }
  out.peak_count = static_cast<int>(
      histogram_peaks(phase_histogram(visible, bins, off_threshold)).size());
  return out;
}

/// One CSV row per object: image_id,object_id,R,mean_phase,n_pixels.
inline void append_metrics_csv(std::ostream& out, int image_id, const CoherenceMetrics& m) {
  for (const auto& o : m.objects)
    out << image_id << ',' << o.object_id << ',' << o.resultant << ',' << o.mean_phase << ','
        << o.n_pixels << '\n';
}

/// Relabels `clusters` so its cluster ids line up with `reference` by
/// greedily matching centroid phases (used to align independently clustered
/// layers before decoding).
inline void align_clusters(const PhaseClusters& reference, PhaseClusters& clusters) {
  if (reference.k != clusters.k)
    throw std::invalid_argument("align_clusters: cluster counts differ");
  const int k = clusters.k;
  std::vector<int> perm(static_cast<std::size_t>(k), -1);  // old id -> new id
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (int step = 0; step < k; ++step) {
    int best_old = -1, best_ref = -1;
    double best_d = 0.0;
    for (int c = 0; c < k; ++c) {
      if (perm[static_cast<std::size_t>(c)] != -1) continue;
      for (int r = 0; r < k; ++r) {
        if (used[static_cast<std::size_t>(r)]) continue;
        const double d = circular_distance(std::arg(clusters.centroids[static_cast<std::size_t>(c)]),
                                           std::arg(reference.centroids[static_cast<std::size_t>(r)]));
        if (best_old < 0 || d < best_d) {
          best_d = d;
          best_old = c;
          best_ref = r;
        }
      }
    }
    perm[static_cast<std::size_t>(best_old)] = best_ref;
    used[static_cast<std::size_t>(best_ref)] = true;
  }
  std::vector<std::complex<double>> new_centroids(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c)
    new_centroids[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])] =
        clusters.centroids[static_cast<std::size_t>(c)];
  clusters.centroids = std::move(new_centroids);
  for (auto& a : clusters.assignments) a = perm[static_cast<std::size_t>(a)];
}

}  // namespace phasebind
