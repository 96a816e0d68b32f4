#include <doctest.h>

#include "homsim/grid.hpp"

#include <cmath>
#include <random>

using namespace homsim;

namespace {

GridPtr grid_1d(int n, double length) {
  return Grid::make(1, {n, 1, 1}, {length, 1.0, 1.0});
}

std::mt19937_64 rng(12345);

void fill_random(ComplexField& f) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : f.data()) v = cplx(u(rng), u(rng));
}

}  // namespace

TEST_CASE("grid construction and momentum lattice") {
  auto g = grid_1d(256, 50.0);
  CHECK(g->dk(0) == doctest::Approx(2.0 * pi / 50.0).epsilon(1e-15));
  CHECK(g->dk(0) == doctest::Approx(0.1257).epsilon(1e-3));
  CHECK(g->kmax(0) == doctest::Approx(16.1).epsilon(1e-2));
  CHECK(g->cell_volume() == doctest::Approx(50.0 / 256).epsilon(1e-15));

  // wraparound ordering: k[0] = 0, ascending to the Nyquist row, then negatives
  CHECK(g->k_axis(0)[0] == 0.0);
  CHECK(g->k_axis(0)[1] == doctest::Approx(g->dk(0)));
  CHECK(g->k_axis(0)[128] == doctest::Approx(-g->kmax(0)));
  CHECK(g->k_axis(0)[255] == doctest::Approx(-g->dk(0)));

  // unequal 3D axes get per-axis dk = 2 pi / L
  auto g3 = Grid::make(3, {16, 32, 64}, {10.0, 20.0, 80.0});
  CHECK(g3->dk(0) == doctest::Approx(2.0 * pi / 10.0));
  CHECK(g3->dk(1) == doctest::Approx(2.0 * pi / 20.0));
  CHECK(g3->dk(2) == doctest::Approx(2.0 * pi / 80.0));

  CHECK_THROWS_AS(Grid::make(1, {4, 1, 1}, {10.0, 1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(Grid::make(1, {16, 1, 1}, {-1.0, 1.0, 1.0}), ValidationError);
}

TEST_CASE("momentum coverage check") {
  // n = 8, L = 100: max|k| = pi * 8 / 100 = 0.25 < 1.5
  CHECK_THROWS_AS(Grid::make(1, {8, 1, 1}, {100.0, 1.0, 1.0}, {0}),
                  ValidationError);
  CHECK_NOTHROW(Grid::make(1, {8, 1, 1}, {100.0, 1.0, 1.0}));  // unchecked axis
  CHECK_NOTHROW(Grid::make(1, {256, 1, 1}, {50.0, 1.0, 1.0}, {0}));
}

TEST_CASE("plane wave transforms to a single lattice point") {
  auto g = grid_1d(64, 16.0);
  ComplexField f(g, Space::position);
  const double kj = 5.0 * g->dk(0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = g->x_axis(0)[i];
    f[i] = std::exp(cplx(0.0, kj * x));
  }
  forward(f);
  CHECK(f.space() == Space::momentum);
  // F(k_j) = L / sqrt(2 pi); all other amplitudes vanish
  const double expect = 16.0 / std::sqrt(2.0 * pi);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g->k_axis(0)[i] == doctest::Approx(kj).epsilon(1e-14)) {
      CHECK(f[i].real() == doctest::Approx(expect).epsilon(1e-12));
      CHECK(std::abs(f[i].imag()) < 1e-12 * expect);
    } else {
      CHECK(std::abs(f[i]) < 1e-12 * expect);
    }
  }
}

TEST_CASE("gaussian transform pair") {
  auto g = grid_1d(512, 80.0);
  const double sigma = 2.5;
  ComplexField f(g, Space::position);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = g->x_axis(0)[i];
    f[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  forward(f);
  // analytic pair: sigma * exp(-k^2 sigma^2 / 2), rms width 1/sigma
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double k = g->k_axis(0)[i];
    const double expect = sigma * std::exp(-k * k * sigma * sigma / 2.0);
    CHECK(f[i].real() == doctest::Approx(expect).epsilon(1e-10).scale(sigma));
    CHECK(std::abs(f[i].imag()) < 1e-10 * sigma);
  }
}

TEST_CASE("round trip is the identity to 1e-13") {
  auto g = Grid::make(2, {32, 48, 1}, {12.0, 20.0, 1.0});
  ComplexField f(g, Space::position);
  fill_random(f);
  const ComplexField ref = f;
  forward(f);
  inverse(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    worst = std::max(worst, std::abs(f[i] - ref[i]));
  CHECK(worst < 1e-13);
}

TEST_CASE("parseval equality on random fields") {
  auto g = Grid::make(2, {64, 32, 1}, {25.0, 11.0, 1.0});
  ComplexField f(g, Space::position);
  fill_random(f);
  const double pos = f.norm_squared();
  forward(f);
  const double mom = f.norm_squared();
  CHECK(mom == doctest::Approx(pos).epsilon(1e-12));
}

TEST_CASE("transform linearity") {
  auto g = grid_1d(128, 30.0);
  ComplexField f(g, Space::position), h(g, Space::position);
  fill_random(f);
  fill_random(h);
  const cplx alpha(0.7, -0.3), beta(-1.2, 0.4);
  ComplexField combo(g, Space::position);
  for (std::size_t i = 0; i < combo.size(); ++i)
    combo[i] = alpha * f[i] + beta * h[i];
  forward(f);
  forward(h);
  forward(combo);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    worst = std::max(worst, std::abs(combo[i] - (alpha * f[i] + beta * h[i])));
    scale = std::max(scale, std::abs(combo[i]));
  }
  CHECK(worst < 1e-12 * scale);
}

TEST_CASE("space tags are enforced") {
  auto g = grid_1d(16, 10.0);
  ComplexField f(g, Space::position);
  CHECK_THROWS_AS(inverse(f), ValidationError);
  forward(f);
  CHECK_THROWS_AS(forward(f), ValidationError);
}

TEST_CASE("negated index maps k to -k") {
  auto g = Grid::make(2, {16, 24, 1}, {8.0, 12.0, 1.0});
  for (std::size_t i = 0; i < g->cell_count(); ++i) {
    const auto k = g->k_vector(i);
    const auto kn = g->k_vector(g->negated_index(i));
    for (int a = 0; a < 2; ++a) {
      const bool nyquist = k[a] == -g->kmax(a);
      if (nyquist)
        CHECK(kn[a] == k[a]);  // Nyquist row is its own image
      else
        CHECK(kn[a] == -k[a]);
    }
  }
}
