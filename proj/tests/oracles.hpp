#pragma once

// Slow reference implementations used only by the tests. Everything here is
// computed by direct enumeration or closed form, independently of the library
// code it checks against.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Joint Boltzmann probabilities p(v, h) ~ exp(b_v.v + b_h.h + h.W.v) by
/// direct enumeration; index = v_bits + (h_bits << nv), bit i of v_bits is
/// unit i.
inline std::vector<double> boltzmann_joint(const MatrixXd& W, const VectorXd& b_v,
                                           const VectorXd& b_h) {
  const int nv = static_cast<int>(b_v.size());
  const int nh = static_cast<int>(b_h.size());
  if (nv + nh > 24) throw std::invalid_argument("boltzmann_joint: too large");
  std::vector<double> log_p;
  log_p.reserve(std::size_t(1) << (nv + nh));
  for (std::uint64_t hb = 0; hb < (std::uint64_t(1) << nh); ++hb)
    for (std::uint64_t vb = 0; vb < (std::uint64_t(1) << nv); ++vb) {
      double e = 0.0;
      for (int i = 0; i < nv; ++i)
        if ((vb >> i) & 1) e += b_v[i];
      for (int j = 0; j < nh; ++j)
        if ((hb >> j) & 1) {
          e += b_h[j];
          for (int i = 0; i < nv; ++i)
            if ((vb >> i) & 1) e += W(j, i);
        }
      log_p.push_back(e);
    }
  double m = log_p[0];
  for (double e : log_p) m = std::max(m, e);
  double z = 0.0;
  for (double e : log_p) z += std::exp(e - m);
  std::vector<double> p(log_p.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_p[i] - m) / z;
  return p;
}

/// Marginal p(v) from the joint table.
inline std::vector<double> boltzmann_visible(const MatrixXd& W, const VectorXd& b_v,
                                             const VectorXd& b_h) {
  const auto joint = boltzmann_joint(W, b_v, b_h);
  const std::size_t nstates_v = std::size_t(1) << b_v.size();
  std::vector<double> p(nstates_v, 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i) p[i % nstates_v] += joint[i];
  return p;
}

struct ExactGradient {
  MatrixXd dW;
  VectorXd db_v, db_h;
};

/// Exact gradient of the mean log-likelihood of `data` columns: data moments
/// minus model moments, the latter by full enumeration of visible states.
inline ExactGradient exact_gradient(const MatrixXd& W, const VectorXd& b_v, const VectorXd& b_h,
                                    const MatrixXd& data) {
  const int nv = static_cast<int>(b_v.size());
  const int nh = static_cast<int>(b_h.size());
  if (nv > 20) throw std::invalid_argument("exact_gradient: too many visible units");

  ExactGradient g;
  g.dW = MatrixXd::Zero(nh, nv);
  g.db_v = VectorXd::Zero(nv);
  g.db_h = VectorXd::Zero(nh);
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const VectorXd v = data.col(c);
    VectorXd h(nh);
    for (int j = 0; j < nh; ++j) h[j] = sigmoid(W.row(j).dot(v) + b_h[j]);
    g.dW += h * v.transpose();
    g.db_v += v;
    g.db_h += h;
  }
  g.dW /= static_cast<double>(data.cols());
  g.db_v /= static_cast<double>(data.cols());
  g.db_h /= static_cast<double>(data.cols());

  // p(v) over all visible configurations, then E_model[h v^T] etc.
  std::vector<double> log_w;
  log_w.reserve(std::size_t(1) << nv);
  VectorXd v(nv);
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << nv); ++bits) {
    for (int i = 0; i < nv; ++i) v[i] = (bits >> i) & 1 ? 1.0 : 0.0;
    double lw = b_v.dot(v);
    for (int j = 0; j < nh; ++j) {
      const double a = W.row(j).dot(v) + b_h[j];
      lw += a > 30.0 ? a : std::log1p(std::exp(a));
    }
    log_w.push_back(lw);
  }
  double m = log_w[0];
  for (double lw : log_w) m = std::max(m, lw);
  double z = 0.0;
  for (double lw : log_w) z += std::exp(lw - m);

  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << nv); ++bits) {
    for (int i = 0; i < nv; ++i) v[i] = (bits >> i) & 1 ? 1.0 : 0.0;
    const double p = std::exp(log_w[bits] - m) / z;
    VectorXd h(nh);
    for (int j = 0; j < nh; ++j) h[j] = sigmoid(W.row(j).dot(v) + b_h[j]);
    g.dW -= p * (h * v.transpose());
    g.db_v -= p * v;
    g.db_h -= p * h;
  }
  return g;
}

/// E_model[h v^T] by enumeration (for checking negative-phase statistics).
inline MatrixXd exact_model_moment(const MatrixXd& W, const VectorXd& b_v, const VectorXd& b_h) {
  const ExactGradient g =
      exact_gradient(W, b_v, b_h, MatrixXd::Zero(b_v.size(), 1));  // data term is h(0)*0^T = 0
  return -g.dW;
}

/// Best within-cluster sum of squares over all 2-partitions of the points
/// (empty parts excluded).
inline double best_two_partition_objective(const std::vector<std::complex<double>>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 2 || n > 20) throw std::invalid_argument("best_two_partition_objective: bad size");
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t bits = 1; bits < (1u << n) - 1; ++bits) {
    std::complex<double> sum0{0, 0}, sum1{0, 0};
    int n0 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) {
      if ((bits >> i) & 1) {
        sum1 += pts[static_cast<std::size_t>(i)];
        ++n1;
      } else {
        sum0 += pts[static_cast<std::size_t>(i)];
        ++n0;
      }
    }
    const std::complex<double> c0 = sum0 / double(n0), c1 = sum1 / double(n1);
    double obj = 0.0;
    for (int i = 0; i < n; ++i)
      obj += std::norm(pts[static_cast<std::size_t>(i)] - (((bits >> i) & 1) ? c1 : c0));
    best = std::min(best, obj);
  }
  return best;
}

/// Closed-form two-input response for arbitrary weights/rates: input 1 at
/// phase 0, input 2 at delta.
inline double closed_form_mixed(double w1, double r1, double w2, double r2, double delta) {
  const double a = w1 * r1, b = w2 * r2;
  const double zeta = std::sqrt(a * a + b * b + 2.0 * a * b * std::cos(delta));
  return 0.5 * zeta + 0.5 * (a + b);
}

inline double closed_form_sync_only(double w1, double r1, double w2, double r2, double delta) {
  const double a = w1 * r1, b = w2 * r2;
  return std::sqrt(a * a + b * b + 2.0 * a * b * std::cos(delta));
}

}  // namespace oracles
