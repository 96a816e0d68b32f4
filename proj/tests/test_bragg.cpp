#include <doctest.h>

#include "homsim/bragg.hpp"

#include <cmath>

using namespace homsim;

namespace {

PulseSchedule two_pulse_schedule(double k_r, double t2, double t3, double tau) {
  PulseSchedule s;
  s.lattice_vector = {k_r, 0.0, 0.0};
  s.segments = {PulseSegment::from_area(t2, tau, pi),
                PulseSegment::from_area(t3, tau, pi / 2.0)};
  return s;
}

}  // namespace

TEST_CASE("pulse area") {
  // tau_pi = sqrt(2 pi)/V0 makes the area exactly pi
  const double v0 = 2.86;
  const auto s = PulseSegment::from_depth(10.0, std::sqrt(2.0 * pi) / v0, v0);
  CHECK(pulse_area(s) == doctest::Approx(pi).epsilon(1e-14));

  CHECK(pulse_area(PulseSegment::from_depth(0.0, 1.0, 0.0)) == 0.0);

  // halving the duration halves the area
  const auto h = PulseSegment::from_depth(10.0, std::sqrt(2.0 * pi) / (2.0 * v0), v0);
  CHECK(pulse_area(h) == doctest::Approx(pi / 2.0).epsilon(1e-14));

  // from_area derives the matching depth
  const auto a = PulseSegment::from_area(0.0, 0.7, pi);
  CHECK(a.depth == doctest::Approx(2.0 * pi / (0.7 * std::sqrt(2.0 * pi))));
  CHECK(pulse_area(a) == doctest::Approx(pi).epsilon(1e-14));
}

TEST_CASE("lattice potential") {
  const auto s = two_pulse_schedule(0.95, 20.0, 50.0, 0.8);
  const double v0 = s.segments[0].depth;

  SUBCASE("zero beyond the 6 tau truncation") {
    CHECK(s.envelope(0.0) == 0.0);
    CHECK(s.envelope(20.0 + 6.0 * 0.8 + 1e-6) == 0.0);
    CHECK(s.envelope(35.0) == 0.0);  // between the pulses
    CHECK(s.potential(0.0, {0.3, 0.1, 0.0}) == 0.0);
    CHECK_FALSE(s.active(0.0));
    CHECK(s.active(20.0));
  }

  SUBCASE("peak of the first hump at the origin is V0/2") {
    CHECK(s.potential(20.0, {0.0, 0.0, 0.0}) == doctest::Approx(0.5 * v0));
  }

  SUBCASE("spatial period along x is pi / |k_L|") {
    const double period = pi / 0.95;
    const double v1 = s.potential(20.0, {0.37, 0.0, 0.0});
    const double v2 = s.potential(20.0, {0.37 + period, 0.0, 0.0});
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
    const double v3 = s.potential(20.0, {0.37 + 0.5 * period, 0.0, 0.0});
    CHECK(v3 == doctest::Approx(-v1).epsilon(1e-12));
  }

  SUBCASE("validation") {
    CHECK_NOTHROW(s.validate(0.95));
    CHECK_THROWS_AS(s.validate(0.90), ValidationError);
    auto bad = s;
    bad.segments[0].area *= 1.5;  // depth/tau now inconsistent with the area
    CHECK_THROWS_AS(bad.validate(0.95), ValidationError);
  }
}

TEST_CASE("bragg detuning") {
  const std::array<double, 3> kl{0.95, 0.0, 0.0};

  // resonant pair k1 = k_r x, partner -k_r x
  CHECK(bragg_detuning({0.95, 0.0, 0.0}, kl) == doctest::Approx(0.0));

  // rotated modes detune, and the detuning grows with theta
  double prev = 0.0;
  for (double theta : {0.1, 0.2, 0.4, 0.8, 1.2}) {
    const std::array<double, 3> k{0.95 * std::cos(theta), 0.95 * std::sin(theta),
                                  0.0};
    const double d = std::abs(bragg_detuning(k, kl));
    // analytic: |k|^2 - |k - 2 kl|^2 = -4 k_r^2 (1 - cos theta)
    CHECK(bragg_detuning(k, kl) ==
          doctest::Approx(-2.0 * 0.95 * 0.95 * (1.0 - std::cos(theta)))
              .epsilon(1e-12));
    CHECK(d > prev);
    prev = d;
  }

  // k_L -> -k_L reflects the partner but keeps |detuning|
  const std::array<double, 3> k{0.95 * std::cos(0.3), 0.95 * std::sin(0.3), 0.0};
  const std::array<double, 3> kln{-0.95, 0.0, 0.0};
  CHECK(std::abs(bragg_detuning(k, kln)) ==
        doctest::Approx(std::abs(bragg_detuning(
            {-k[0], k[1], k[2]}, kl))).epsilon(1e-12));
}

TEST_CASE("two-mode rabi transfer") {
  CHECK(two_mode_rabi_transfer(pi, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(two_mode_rabi_transfer(pi / 2.0, 0.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two_mode_rabi_transfer(0.0, 0.0, 1.0) == 0.0);

  SUBCASE("detuned micro-oracle approaches the resonant value as delta -> 0") {
    const double t = two_mode_rabi_transfer(pi, 1e-8, 0.9);
    CHECK(t == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("transfer decreases monotonically with |detuning| at area pi") {
    const double tau = 0.9;
    double prev = 1.1;
    for (double delta : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5}) {
      const double t = two_mode_rabi_transfer(pi, delta, tau);
      CHECK(t < prev);
      prev = t;
    }
  }

  SUBCASE("large detuning suppresses the transfer") {
    CHECK(two_mode_rabi_transfer(pi, 8.0, 0.9) < 0.01);
  }
}
