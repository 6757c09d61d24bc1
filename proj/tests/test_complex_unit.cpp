#include <doctest.h>

#include <cmath>
#include <vector>

#include "phasebind/complex_unit.hpp"
#include "phasebind/rng.hpp"

using namespace phasebind;

namespace {

double circ_diff(double a, double b) { return std::abs(wrap_phase(a - b)); }

std::vector<InputMessage<double>> random_messages(Rng& rng, int n) {
  std::vector<InputMessage<double>> msgs;
  for (int i = 0; i < n; ++i)
    msgs.push_back({rng.uniform(-2.0, 2.0), rng.uniform(), rng.uniform_angle()});
  return msgs;
}

}  // namespace

TEST_CASE("wrap_phase maps onto [-pi, pi)") {
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(kPi) == -kPi);
  CHECK(wrap_phase(3.0 * kPi) == -kPi);
  CHECK(wrap_phase(-5.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0).epsilon(1e-14));
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_phase(a);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(wrap_phase(w) == w);                      // idempotent
    CHECK(circ_diff(w, a) < 1e-12);                 // same angle mod 2pi
  }
  CHECK_THROWS(wrap_phase(std::numeric_limits<double>::quiet_NaN()));
  CHECK_THROWS(wrap_phase(std::numeric_limits<double>::infinity()));
}

TEST_CASE("accumulate_drive sums synchrony and classic terms") {
  SUBCASE("aligned phases") {
    const auto d = accumulate_drive<double>({{1, 1, 0}, {1, 1, 0}});
    CHECK(d.sync.real() == 2.0);
    CHECK(d.sync.imag() == 0.0);
    CHECK(d.classic == 2.0);
  }
  SUBCASE("antiphase pair cancels the synchrony term only") {
    const auto d = accumulate_drive<double>({{1, 1, 0}, {1, 1, kPi}});
    CHECK(d.sync.real() == 0.0);
    CHECK(std::abs(d.sync.imag()) < 1e-15);
    CHECK(d.classic == 2.0);
  }
  SUBCASE("negative weight equals opposite-phase excitation") {
    const auto d = accumulate_drive<double>({{-1, 1, 0}});
    CHECK(d.sync.real() == -1.0);
    CHECK(d.sync.imag() == 0.0);
    CHECK(d.classic == -1.0);
  }
  SUBCASE("empty input") {
    const auto d = accumulate_drive(std::vector<InputMessage<double>>{});
    CHECK(d.sync.real() == 0.0);
    CHECK(d.sync.imag() == 0.0);
    CHECK(d.classic == 0.0);
  }
  SUBCASE("non-finite input rejected") {
    CHECK_THROWS(accumulate_drive<double>({{1, std::numeric_limits<double>::infinity(), 0}}));
  }
}

TEST_CASE("preactivation averages synchrony magnitude and classic term") {
  CHECK(preactivation<double>({{2, 0}, 2}, 0.0) == 2.0);
  CHECK(preactivation<double>({{0, 0}, 2}, 0.0) == 1.0);
  CHECK(preactivation<double>({{1, 1}, 2}, 0.0) ==
        doctest::Approx(1.7071067811865475).epsilon(1e-15));
  CHECK(preactivation<double>({{-1, 0}, -1}, 0.0) == 0.0);
  CHECK(preactivation<double>({{2, 0}, 2}, -1.5) == 0.5);  // bias adds to the argument
}

TEST_CASE("logistic") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  CHECK(logistic(-4.0) == doctest::Approx(0.017986209962091559).epsilon(1e-15));
  for (double x = -10.0; x <= 10.0; x += 0.25) CHECK(logistic(x) < logistic(x + 0.25));
}

TEST_CASE("synchrony_only_preactivation is |zeta|") {
  CHECK(synchrony_only_preactivation<double>({{0, 0}, 7}) == 0.0);
  CHECK(synchrony_only_preactivation<double>({{2, 0}, 0}) == 2.0);
  CHECK(synchrony_only_preactivation<double>({{1, 1}, 0}) ==
        doctest::Approx(1.4142135623730951).epsilon(1e-15));
}

TEST_CASE("activate: rate from preactivation, phase from arg(zeta)") {
  Rng rng(0);
  SUBCASE("deterministic two-input example") {
    const ComplexDrive<double> d{{1, -1}, std::sqrt(2.0)};
    const auto out = activate(d, 0.0, ActivationMode::deterministic, 0.0, rng);
    CHECK(out.phase == doctest::Approx(-kPi / 4.0).epsilon(1e-15));
    CHECK(out.rate == doctest::Approx(0.8044296825069569).epsilon(1e-15));
  }
  SUBCASE("zero drive keeps the previous phase") {
    const auto out = activate<double>({{0, 0}, 0}, 0.0, ActivationMode::deterministic, 1.0, rng);
    CHECK(out.phase == 1.0);
    CHECK(out.rate == 0.5);
  }
  SUBCASE("stochastic mode is reproducible under a fixed stream") {
    const ComplexDrive<double> d{{0.3, 0.4}, 0.6};
    Rng a(42), b(42);
    for (int i = 0; i < 64; ++i) {
      const auto oa = activate(d, 0.1, ActivationMode::stochastic, 0.0, a);
      const auto ob = activate(d, 0.1, ActivationMode::stochastic, 0.0, b);
      CHECK(oa.rate == ob.rate);
      CHECK((oa.rate == 0.0 || oa.rate == 1.0));
      CHECK(oa.phase == ob.phase);
    }
  }
  SUBCASE("bias does not influence the phase") {
    const ComplexDrive<double> d{{1, 1}, 0};
    const auto lo = activate(d, -20.0, ActivationMode::deterministic, 0.0, rng);
    const auto hi = activate(d, 20.0, ActivationMode::deterministic, 0.0, rng);
    CHECK(lo.phase == hi.phase);
    CHECK(lo.rate < 1e-6);
    CHECK(hi.rate > 1.0 - 1e-6);
  }
}

TEST_CASE("phase_response_table matches the closed form") {
  const auto rows = phase_response_table(1.0, 1.0, 1.0, 1.0, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].delta_phi == 0.0);
  CHECK(rows[0].mixed == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rows[0].sync_only == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rows[1].delta_phi == doctest::Approx(kPi / 2.0).epsilon(1e-15));
  CHECK(rows[1].mixed == doctest::Approx(1.7071067811865475).epsilon(1e-12));
  CHECK(rows[1].sync_only == doctest::Approx(1.4142135623730951).epsilon(1e-12));
  CHECK(rows[2].delta_phi == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(rows[2].mixed == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(rows[2].sync_only) < 1e-12);

  // w*r*(|cos(d/2)|+1) and 2*w*r*|cos(d/2)| for equal inputs
  const auto fine = phase_response_table(0.7, 0.7, 0.9, 0.9, 33);
  for (const auto& r : fine) {
    const double c = std::abs(std::cos(r.delta_phi / 2.0));
    CHECK(r.mixed == doctest::Approx(0.7 * 0.9 * (c + 1.0)).epsilon(1e-12));
    CHECK(r.sync_only == doctest::Approx(2.0 * 0.7 * 0.9 * c).epsilon(1e-12));
  }
  CHECK_THROWS(phase_response_table(1.0, 1.0, 1.0, 1.0, 1));
}

TEST_CASE("mixed preactivation is non-increasing in phase dispersion") {
  const auto rows = phase_response_table(1.3, 0.8, 0.6, 0.9, 181);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].mixed <= rows[i - 1].mixed + 1e-15);
}

TEST_CASE("classic reduction: zero phases with nonnegative classic term") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<InputMessage<double>> msgs;
    const int n = 1 + static_cast<int>(rng.below(5));
    for (int i = 0; i < n; ++i) msgs.push_back({rng.uniform(0.0, 2.0), rng.uniform(), 0.0});
    const auto d = accumulate_drive(msgs);
    const double b = rng.uniform(-1.0, 1.0);
    CHECK(preactivation(d, b) == d.classic + b);  // exact, not approximate
  }
}

TEST_CASE("inhibition alone never drives the unit above zero") {
  Rng rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<InputMessage<double>> msgs;
    const int n = 1 + static_cast<int>(rng.below(5));
    for (int i = 0; i < n; ++i)
      msgs.push_back({rng.uniform(-2.0, 0.0), rng.uniform(), rng.uniform_angle()});
    CHECK(preactivation(accumulate_drive(msgs), 0.0) <= 1e-15);
  }
}

TEST_CASE("gating: an antiphase message weaker than zeta contributes nothing") {
  Rng rng(23);
  int checked = 0;
  while (checked < 10000) {
    const auto msgs = random_messages(rng, 1 + static_cast<int>(rng.below(5)));
    const auto base = accumulate_drive(msgs);
    const double mag = std::abs(base.sync);
    if (mag < 1e-6) continue;
    const double phi = std::arg(base.sync);

    const double w2 = rng.uniform(0.05, 1.0);
    const double r2 = rng.uniform(0.0, 0.999) * std::min(1.0, mag / w2);
    if (w2 * r2 <= 0.0) continue;
    auto extended = msgs;
    extended.push_back({w2, r2, wrap_phase(phi + kPi)});
    const auto d2 = accumulate_drive(extended);

    Rng dummy(0);
    const auto before = activate(base, 0.0, ActivationMode::deterministic, 0.0, dummy);
    const auto after = activate(d2, 0.0, ActivationMode::deterministic, before.phase, dummy);
    CHECK(std::abs(preactivation(d2, 0.0) - preactivation(base, 0.0)) < 1e-12);
    CHECK(circ_diff(after.phase, before.phase) < 1e-12);
    ++checked;
  }
}

TEST_CASE("global phase equivariance") {
  Rng rng(24);
  int checked = 0;
  while (checked < 10000) {
    const auto msgs = random_messages(rng, 1 + static_cast<int>(rng.below(5)));
    const auto base = accumulate_drive(msgs);
    if (std::abs(base.sync) < 0.01) continue;
    const double delta = rng.uniform_angle();
    auto rotated = msgs;
    for (auto& m : rotated) m.phase = wrap_phase(m.phase + delta);
    const auto rot = accumulate_drive(rotated);

    Rng dummy(0);
    const auto a = activate(base, 0.2, ActivationMode::deterministic, 0.0, dummy);
    const auto b = activate(rot, 0.2, ActivationMode::deterministic, 0.0, dummy);
    CHECK(std::abs(preactivation(rot, 0.2) - preactivation(base, 0.2)) < 1e-12);
    CHECK(a.rate == doctest::Approx(b.rate).epsilon(1e-12));
    CHECK(circ_diff(b.phase, a.phase + delta) < 1e-12);
    ++checked;
  }
}
