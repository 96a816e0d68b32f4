#include <doctest.h>

#include "homsim/oracles.hpp"

#include <cmath>

using namespace homsim;
using namespace homsim::oracles;

TEST_CASE("spdc mean occupation") {
  CHECK(spdc_mean_occupation(0.5, 0.0) == 0.0);
  CHECK(spdc_mean_occupation(0.0, 3.0) == 0.0);

  // invert <n> = 0.1: gt = asinh(sqrt(0.1)), alpha = tanh(gt) = x/sqrt(1+x^2)
  const double gt = std::asinh(std::sqrt(0.1));
  CHECK(spdc_mean_occupation(1.0, gt) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(gt == doctest::Approx(0.3111).epsilon(1e-3));
  const double alpha = std::sqrt(0.1) / std::sqrt(1.1);
  CHECK(std::tanh(gt) == doctest::Approx(alpha).epsilon(1e-13));
  CHECK(alpha == doctest::Approx(0.3014).epsilon(2e-3));

  // weak-gain limit: <n> = (gt)^2 up to O((gt)^4)
  const double small = 0.01;
  CHECK(std::abs(spdc_mean_occupation(1.0, small) - small * small) <
        small * small * small * small);
}

TEST_CASE("spdc closed forms") {
  CHECK(spdc_hom_g2(0.1, SpdcBranch::dip, SpdcState::full) == 1.0);
  CHECK(spdc_hom_g2(0.1, SpdcBranch::wings, SpdcState::full) ==
        doctest::Approx(7.0).epsilon(1e-14));
  CHECK(spdc_hom_g2(0.1, SpdcBranch::dip, SpdcState::truncated) == 0.0);
  CHECK(spdc_hom_g2(0.1, SpdcBranch::wings, SpdcState::truncated) ==
        doctest::Approx(5.0).epsilon(1e-14));

  CHECK(spdc_visibility(0.1, SpdcState::full) ==
        doctest::Approx(6.0 / 7.0).epsilon(1e-13));
  CHECK(spdc_visibility(0.1, SpdcState::truncated) == 1.0);

  // limit <n> -> inf approaches the classical threshold 1/2
  CHECK(spdc_visibility(1e9, SpdcState::full) == doctest::Approx(0.5).epsilon(1e-8));
  // weak gain: V ~ 1 - 2<n>
  CHECK(spdc_visibility(1e-4, SpdcState::full) ==
        doctest::Approx(1.0 - 2e-4).epsilon(1e-6));

  CHECK_THROWS_AS(spdc_visibility(0.0, SpdcState::full), ValidationError);
}

TEST_CASE("spdc visibility is monotonically decreasing in the occupation") {
  double prev = 1.0;
  for (double nbar = 0.01; nbar < 10.0; nbar *= 1.5) {
    const double v = spdc_visibility(nbar, SpdcState::full);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("fock truncation rule") {
  for (double alpha : {0.1, 0.3, 0.6}) {
    const int n = fock_truncation_order(alpha);
    CHECK(std::pow(alpha, 2.0 * (n + 1)) < 1e-10);
    CHECK(n <= 40);  // stays desk-sized
  }
  CHECK_THROWS_AS(
      fock_hom_g2(TwoModeSqueezedSpec::from_alpha(0.6), 3,
                  FockGeometry::indistinguishable),
      ValidationError);
}

TEST_CASE("fock brute force reproduces the closed forms") {
  for (double alpha : {0.1, 0.3, 0.6}) {
    const auto spec = TwoModeSqueezedSpec::from_alpha(alpha);
    const double nbar = spec.mean_occupation();
    const FockHomResult r = fock_hom_bruteforce(spec);
    CHECK(r.dip_g2 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.wings_g2 ==
          doctest::Approx(spdc_hom_g2(nbar, SpdcBranch::wings, SpdcState::full))
              .epsilon(1e-8));
    CHECK(r.visibility ==
          doctest::Approx(spdc_visibility(nbar, SpdcState::full)).epsilon(1e-8));
  }
}

TEST_CASE("twin Fock input bunches at the splitter") {
  int dim = 0;
  const auto p = beam_splitter_number_distribution(1, 1, &dim);
  REQUIRE(dim == 3);
  CHECK(p[1 * dim + 1] == doctest::Approx(0.0).epsilon(1e-14));  // coincidence
  CHECK(p[2 * dim + 0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[0 * dim + 2] == doctest::Approx(0.5).epsilon(1e-12));

  // a single particle cannot coincide with itself
  const auto q = beam_splitter_number_distribution(1, 0, &dim);
  CHECK(q[1 * dim + 1] == 0.0);
  CHECK(q[1 * dim + 0] + q[0 * dim + 1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform-pump Bogoliubov oracle") {
  SUBCASE("vacuum at t = 0") {
    for (double k : {0.0, 0.5, 1.0}) {
      const auto m = bogoliubov_uniform_oracle(k, 2.0, 0.25, 0.0);
      CHECK(m.n_k == 0.0);
      CHECK(std::abs(m.pair_m) == 0.0);
    }
  }

  SUBCASE("pair symmetry k <-> -k") {
    const auto a = bogoliubov_uniform_oracle(0.7, 2.0, 0.25, 1.3);
    const auto b = bogoliubov_uniform_oracle(-0.7, 2.0, 0.25, 1.3);
    CHECK(a.n_k == doctest::Approx(b.n_k).epsilon(1e-14));
  }

  SUBCASE("gain-matched mode grows as sinh^2") {
    const double kappa = 0.4, t = 1.7;
    const auto m = bogoliubov_uniform_oracle(0.0, 1.0, kappa, t, false);
    CHECK(m.n_k == doctest::Approx(spdc_mean_occupation(kappa, t)).epsilon(1e-12));
  }

  SUBCASE("pure squeezed pair: n(n+1) = |m|^2 to 1e-10") {
    for (double k : {0.0, 0.3927, 0.785, 1.5}) {
      for (double t : {0.3, 1.44, 4.0}) {
        const auto m = bogoliubov_uniform_oracle(k, 1.0, 0.5, t);
        const double lhs = m.n_k * (m.n_k + 1.0);
        const double rhs = std::norm(m.pair_m);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        CHECK(m.symplectic_defect < 1e-10);
      }
    }
  }

  SUBCASE("mean-field shift keeps every mode oscillatory") {
    // eps = k^2/2 + 2 kappa > kappa, so occupations stay bounded by
    // kappa^2/(eps^2 - kappa^2)
    const double kappa = 0.5;
    for (double k : {0.0, 0.3927}) {
      const double eps = 0.5 * k * k + 2.0 * kappa;
      const double bound = kappa * kappa / (eps * eps - kappa * kappa);
      for (double t : {0.5, 2.0, 8.0, 32.0}) {
        const auto m = bogoliubov_uniform_oracle(k, 1.0, kappa, t);
        CHECK(m.n_k <= bound * (1.0 + 1e-9));
      }
    }
  }
}
