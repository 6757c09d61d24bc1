#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "phasebind/rng.hpp"
#include "phasebind/types.hpp"

namespace phasebind {

inline constexpr double kPi = 3.14159265358979323846;

/// |zeta| below this keeps the previous output phase (arg(0) is undefined).
inline constexpr double kPhaseEps = 1e-12;

/// Relative weight of the synchrony term in the preactivation; the classic
/// term gets (1 - mix). Equal halves recover the reference formulation.
inline constexpr double kDefaultSyncMix = 0.5;

enum class ActivationMode { deterministic, stochastic };

/// Wraps an angle into the canonical range [-pi, pi). Idempotent.
template <typename Scalar>
Scalar wrap_phase(Scalar angle) {
  if (!std::isfinite(angle)) throw std::invalid_argument("wrap_phase: non-finite angle");
  constexpr Scalar pi = Scalar(kPi);
  Scalar r = std::remainder(angle, Scalar(2) * pi);
  if (r >= pi) r -= Scalar(2) * pi;
  return r;
}

/// A unit's total postsynaptic input: synchrony term zeta (complex) and
/// classic term chi (real).
template <typename Scalar>
struct ComplexDrive {
  std::complex<Scalar> sync{0, 0};  // zeta = w . z
  Scalar classic{0};                // chi  = w . |z|
};

/// One presynaptic message: connection weight, sender rate and phase.
template <typename Scalar>
struct InputMessage {
  Scalar weight{0};
  Scalar rate{0};
  Scalar phase{0};
};

template <typename Scalar>
struct UnitOutput {
  Scalar rate{0};   // in [0,1]; {0,1} in stochastic mode
  Scalar phase{0};  // wrapped radians
};

/// Sums messages in the complex plane: zeta = sum w r e^{i phi} and
/// chi = sum w r. An empty list yields the zero drive.
template <typename Scalar>
ComplexDrive<Scalar> accumulate_drive(std::span<const InputMessage<Scalar>> messages) {
  ComplexDrive<Scalar> d;
  for (const auto& m : messages) {
    if (!std::isfinite(m.weight) || !std::isfinite(m.rate) || !std::isfinite(m.phase))
      throw std::invalid_argument("accumulate_drive: non-finite message");
    const Scalar wr = m.weight * m.rate;
    d.sync += std::complex<Scalar>(wr * std::cos(m.phase), wr * std::sin(m.phase));
    d.classic += wr;
  }
  return d;
}

template <typename Scalar>
ComplexDrive<Scalar> accumulate_drive(const std::vector<InputMessage<Scalar>>& messages) {
  return accumulate_drive(std::span<const InputMessage<Scalar>>(messages));
}

/// Mixed preactivation: mix*|zeta| + (1-mix)*chi + bias. The bias is a real
/// shift of the activation argument and never influences the phase.
template <typename Scalar>
Scalar preactivation(const ComplexDrive<Scalar>& d, Scalar bias,
                     Scalar sync_mix = Scalar(kDefaultSyncMix)) {
  return sync_mix * std::abs(d.sync) + (Scalar(1) - sync_mix) * d.classic + bias;
}

/// Synchrony-only baseline |zeta| (no classic term; cancels fully at
/// antiphase).
template <typename Scalar>
Scalar synchrony_only_preactivation(const ComplexDrive<Scalar>& d) {
  return std::abs(d.sync);
}

template <typename Scalar>
  requires std::is_arithmetic_v<Scalar>
Scalar logistic(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

/// Elementwise logistic as an Eigen expression.
template <typename Derived>
auto logistic(const Eigen::ArrayBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return S(1) / (S(1) + (-x).exp());
}

/// Computes a unit's output from its drive. The phase follows arg(zeta)
/// whenever |zeta| >= kPhaseEps and otherwise keeps prev_phase. The rate is
/// logistic(preactivation) deterministically, or a Bernoulli sample of it.
template <typename Scalar>
UnitOutput<Scalar> activate(const ComplexDrive<Scalar>& d, Scalar bias, ActivationMode mode,
                            Scalar prev_phase, Rng& rng,
                            Scalar sync_mix = Scalar(kDefaultSyncMix)) {
  UnitOutput<Scalar> out;
  const Scalar mag = std::abs(d.sync);
  out.phase = mag >= Scalar(kPhaseEps)
                  ? wrap_phase(std::atan2(d.sync.imag(), d.sync.real()))
                  : prev_phase;
  const Scalar p = logistic(preactivation(d, bias, sync_mix));
  out.rate = mode == ActivationMode::deterministic ? p : Scalar(rng.bernoulli(p) ? 1 : 0);
  return out;
}

template <typename Scalar>
struct PhaseResponseRow {
  Scalar delta_phi{0};
  Scalar mixed{0};      // mixed preactivation for the two-input probe
  Scalar sync_only{0};  // |zeta| baseline
};

/// Tabulates the two-input response: input 1 at phase 0, input 2 at phase
/// delta_phi, for delta_phi sampled uniformly on [0, pi].
template <typename Scalar>
std::vector<PhaseResponseRow<Scalar>> phase_response_table(Scalar w1, Scalar w2, Scalar r1,
                                                           Scalar r2, int n_points) {
  if (n_points < 2) throw std::invalid_argument("phase_response_table: n_points must be >= 2");
  std::vector<PhaseResponseRow<Scalar>> rows;
  rows.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const Scalar delta = Scalar(kPi) * Scalar(i) / Scalar(n_points - 1);
    const std::vector<InputMessage<Scalar>> msgs = {{w1, r1, Scalar(0)},
                                                    {w2, r2, wrap_phase(delta)}};
    const ComplexDrive<Scalar> d = accumulate_drive(msgs);
    rows.push_back({delta, preactivation(d, Scalar(0)), synchrony_only_preactivation(d)});
  }
  return rows;
}

}  // namespace phasebind
