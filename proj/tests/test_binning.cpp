#include <doctest.h>

#include "homsim/binning.hpp"

#include <cmath>

using namespace homsim;

TEST_CASE("bin positions") {
  const double k_r = 0.95;

  SUBCASE("theta = 0 collapses onto the resonant pair") {
    const auto c = bin_positions(0.0, k_r);
    CHECK(c[0][0] == doctest::Approx(k_r));   // k3 = k1
    CHECK(c[0][1] == 0.0);
    CHECK(c[2][0] == doctest::Approx(k_r));   // k5 = k1
    CHECK(c[1][0] == doctest::Approx(-k_r));  // k4 = k2
    CHECK(c[3][0] == doctest::Approx(-k_r));  // k6 = k2
  }

  SUBCASE("k4 = -k3 and k5 = -k6 for all theta") {
    for (double theta : {0.1, 0.35, 0.7, pi / 2}) {
      const auto c = bin_positions(theta, k_r);
      for (int a = 0; a < 3; ++a) {
        CHECK(c[1][a] == doctest::Approx(-c[0][a]));
        CHECK(c[2][a] == doctest::Approx(-c[3][a]));
      }
    }
  }

  SUBCASE("theta = pi/2: partners leave the halo sphere") {
    const auto c = bin_positions(pi / 2, k_r);
    CHECK(c[0][0] == doctest::Approx(0.0).scale(1.0));
    CHECK(c[0][1] == doctest::Approx(k_r));
    CHECK(c[3][0] == doctest::Approx(-2.0 * k_r));  // k6 = k3 - 2 k1
    CHECK(c[3][1] == doctest::Approx(k_r));
    const double k6_mag = std::hypot(c[3][0], c[3][1]);
    CHECK(k6_mag == doctest::Approx(k_r * std::sqrt(5.0)));
  }
}

TEST_CASE("detection bin overlap fractions") {
  DetectionBin bin{{0.0, 0.0, 0.0}, {0.1, 0.2, 0.0}};
  const std::array<double, 3> dk{0.1, 0.1, 1.0};

  // cell fully inside
  CHECK(bin.overlap_fraction({0.0, 0.0, 0.0}, dk, 2) == doctest::Approx(1.0));
  // cell sharing exactly half its width
  CHECK(bin.overlap_fraction({0.1, 0.0, 0.0}, dk, 2) == doctest::Approx(0.5));
  // corner cell: quarter coverage
  CHECK(bin.overlap_fraction({0.1, 0.2, 0.0}, dk, 2) == doctest::Approx(0.25));
  // outside
  CHECK(bin.overlap_fraction({0.5, 0.0, 0.0}, dk, 2) == 0.0);

  CHECK(bin.volume(2) == doctest::Approx(0.2 * 0.4));
}

TEST_CASE("bin plan weights") {
  auto grid = Grid::make(2, {64, 64, 1}, {2.0 * pi * 64 / 3.8, 2.0 * pi * 64 / 3.8, 1.0});
  const std::array<double, 3> widths{0.12, 0.24, 0.0};

  SUBCASE("bin integral of a constant density recovers the bin volume") {
    const BinPlan plan = BinPlan::build({0.3}, 0.95, widths, *grid);
    std::vector<double> ones(grid->cell_count(), 1.0);
    for (int b = 0; b < 4; ++b) {
      const double integral =
          integrate_weights(plan.bins[0][b], ones, grid->k_cell_volume());
      CHECK(integral == doctest::Approx(0.12 * 0.24).epsilon(1e-12));
    }
  }

  SUBCASE("theta = 0: coincident same-port bins merge into their union") {
    const BinPlan plan = BinPlan::build({0.0}, 0.95, widths, *grid);
    std::vector<double> ones(grid->cell_count(), 1.0);
    // union of two coincident bins is a single bin volume, not twice it
    const double r = integrate_weights(plan.port_right[0], ones, grid->k_cell_volume());
    const double l = integrate_weights(plan.port_left[0], ones, grid->k_cell_volume());
    CHECK(r == doctest::Approx(0.12 * 0.24).epsilon(1e-12));
    CHECK(l == doctest::Approx(0.12 * 0.24).epsilon(1e-12));
  }

  SUBCASE("small theta: partially overlapping bins are counted once") {
    // at theta = 0.05 the k3 and k5 boxes still overlap along the scan axis
    const double theta = 0.05;
    const BinPlan plan = BinPlan::build({theta}, 0.95, widths, *grid);
    std::vector<double> ones(grid->cell_count(), 1.0);
    const double dz = 2.0 * 0.95 * std::sin(theta);           // k3 - k5, scan axis
    const double dx = 0.95 * 2.0 * (1.0 - std::cos(theta));   // k5 - k3, Bragg axis
    REQUIRE(dz < 0.24);  // geometry premise of this subcase
    // inclusion-exclusion for two offset boxes
    const double expect = 2.0 * 0.12 * 0.24 - (0.12 - dx) * (0.24 - dz);
    const double r = integrate_weights(plan.port_right[0], ones, grid->k_cell_volume());
    CHECK(r == doctest::Approx(expect).epsilon(1e-6));
  }

  SUBCASE("well separated theta: port unions are plain sums") {
    const BinPlan plan = BinPlan::build({0.5}, 0.95, widths, *grid);
    std::vector<double> ones(grid->cell_count(), 1.0);
    const double r = integrate_weights(plan.port_right[0], ones, grid->k_cell_volume());
    CHECK(r == doctest::Approx(2.0 * 0.12 * 0.24).epsilon(1e-9));
  }

  SUBCASE("bin exiting the grid coverage is refused") {
    auto tiny = Grid::make(2, {16, 16, 1}, {2.0 * pi * 16 / 1.6, 2.0 * pi * 16 / 1.6, 1.0});
    // k5/k6 sit near 2 k_r - need |k| up to ~1.9 + bin; tiny grid caps at 1.6
    CHECK_THROWS_AS(BinPlan::build({0.4}, 0.95, widths, *tiny), ValidationError);
  }
}
