#include <doctest.h>

#include "homsim/meanfield.hpp"

#include <cmath>
#include <random>

using namespace homsim;

namespace {

// Bare-bones parameter sets for solver tests; the config layer is exercised
// in test_units.
SimulationParams bare_params(int dims, double u, std::array<double, 3> omega) {
  SimulationParams p;
  p.dims = dims;
  p.interaction_u = u;
  p.storage_omega = omega;
  p.trap_omega = omega;
  p.atom_number = 1.0;
  p.halo_radius = 0.95;
  p.schedule.lattice_vector = {0.95, 0.0, 0.0};
  return p;
}

double rms_width(const MeanField& mf, int axis) {
  const Grid& g = *mf.psi.grid();
  KahanSum num, den;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double d = std::norm(mf.psi[i]);
    const double x = g.x_vector(i)[axis];
    num.add(x * x * d);
    den.add(d);
  }
  return std::sqrt(num.value() / den.value());
}

}  // namespace

TEST_CASE("non-interacting ground state is the oscillator gaussian") {
  auto p = bare_params(2, 0.0, {0.5, 0.3, 0.0});
  p.atom_number = 250.0;
  auto grid = Grid::make(2, {64, 64, 1}, {14.0, 18.0, 1.0});
  const MeanField mf = ground_state(p, grid);

  CHECK(mf.norm() == doctest::Approx(250.0).epsilon(1e-12));

  // overlap with the analytic gaussian above 1 - 1e-8
  KahanSum olap_re, olap_im, norm_a;
  for (std::size_t i = 0; i < grid->cell_count(); ++i) {
    const auto x = grid->x_vector(i);
    const double phi = std::exp(-0.25 * (x[0] * x[0] / (1.0 / (2.0 * 0.5)) +
                                          x[1] * x[1] / (1.0 / (2.0 * 0.3))));
    olap_re.add(phi * mf.psi[i].real());
    olap_im.add(phi * mf.psi[i].imag());
    norm_a.add(phi * phi);
  }
  const double overlap =
      (olap_re.value() * olap_re.value() + olap_im.value() * olap_im.value()) /
      (norm_a.value() * mf.norm() / grid->cell_volume());
  CHECK(overlap > 1.0 - 1e-8);

  // rms widths sqrt(1/(2 w)); the overlap above is the precise criterion
  CHECK(rms_width(mf, 0) == doctest::Approx(1.0 / std::sqrt(2.0 * 0.5)).epsilon(1e-4));
  CHECK(rms_width(mf, 1) == doctest::Approx(1.0 / std::sqrt(2.0 * 0.3)).epsilon(1e-4));
}

TEST_CASE("grid resolution precondition") {
  auto p = bare_params(1, 0.0, {1.0, 0.0, 0.0});
  auto coarse = Grid::make(1, {16, 1, 1}, {16.0, 1.0, 1.0});  // dx = 1 > 1/6
  CHECK_THROWS_AS(ground_state(p, coarse), ValidationError);
}

TEST_CASE("interacting 2D ground state approaches its thomas-fermi mu") {
  // reduced-scale pancake: mu_TF = sqrt(N U wx wz / pi)
  auto p = bare_params(2, 0.09, {0.00856, 0.01713, 0.0});
  p.atom_number = 200.0;
  p.tf_chemical_potential =
      thomas_fermi_mu_2d(p.atom_number, p.interaction_u, 0.00856, 0.01713);
  auto grid = Grid::make(2, {96, 64, 1}, {96.0, 48.0, 1.0});
  const MeanField mf = ground_state(p, grid);
  const double mu = chemical_potential(mf, p);
  CHECK(mu == doctest::Approx(p.tf_chemical_potential).epsilon(0.05));
  CHECK(mf.norm() == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("split condensate") {
  auto p = bare_params(2, 0.09, {0.00856, 0.01713, 0.0});
  p.atom_number = 200.0;
  p.tf_chemical_potential =
      thomas_fermi_mu_2d(p.atom_number, p.interaction_u, 0.00856, 0.01713);
  auto grid = Grid::make(2, {96, 128, 1}, {96.0, 2.0 * pi * 16, 1.0});
  MeanField mf = ground_state(p, grid);
  const MeanField before = mf;
  const double n0 = mf.norm();
  split_condensate(mf, p);

  SUBCASE("norm preserved to 1e-12") {
    CHECK(mf.norm() == doctest::Approx(n0).epsilon(1e-12));
  }

  SUBCASE("position density gains the cos^2 modulation") {
    // rho_split = rho0 * 2 cos^2(k0 z) up to the tiny renormalisation shift
    for (std::size_t i = 0; i < grid->cell_count(); i += 97) {
      const double z = grid->x_vector(i)[1];
      const double expect = std::norm(before.psi[i]) * 2.0 * std::cos(z) * std::cos(z);
      CHECK(std::norm(mf.psi[i]) == doctest::Approx(expect).epsilon(1e-9).scale(
                                        std::norm(before.psi[i]) + 1e-6));
    }
  }

  SUBCASE("momentum peaks at +-k0 carry N/2 each to 1%") {
    ComplexField kspace = mf.psi;
    forward(kspace);
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
      const double kz = grid->k_vector(i)[1];
      const double w = std::norm(kspace[i]) * grid->k_cell_volume();
      if (std::abs(kz - 1.0) < 0.45) plus += w;
      if (std::abs(kz + 1.0) < 0.45) minus += w;
    }
    CHECK(plus == doctest::Approx(n0 / 2).epsilon(0.01));
    CHECK(minus == doctest::Approx(n0 / 2).epsilon(0.01));
  }
}

TEST_CASE("free gaussian dispersion matches the analytic width") {
  auto p = bare_params(1, 0.0, {0.0, 0.0, 0.0});
  auto grid = Grid::make(1, {512, 1, 1}, {80.0, 1.0, 1.0});
  MeanField mf(grid);
  for (std::size_t i = 0; i < grid->cell_count(); ++i) {
    const double x = grid->x_axis(0)[i];
    mf.psi[i] = std::exp(-x * x / (2.0 * 3.0 * 3.0));
  }
  // sigma(t) = sigma0 sqrt(1 + t^2/(4 sigma0^4)) for the density rms width
  const double sigma0 = rms_width(mf, 0);
  GpePropagator gpe(p, grid);
  const double t_end = 10.0;
  gpe.propagate(mf, t_end, 0.00195, {}, [](const MeanField&) {});
  const double expect =
      sigma0 * std::sqrt(1.0 + t_end * t_end /
                         (4.0 * sigma0 * sigma0 * sigma0 * sigma0));
  CHECK(rms_width(mf, 0) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("kinetic-only evolution leaves the momentum density invariant") {
  auto p = bare_params(1, 0.0, {0.0, 0.0, 0.0});
  auto grid = Grid::make(1, {128, 1, 1}, {40.0, 1.0, 1.0});
  MeanField mf(grid);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : mf.psi.data()) v = cplx(u(rng), u(rng));

  ComplexField k0 = mf.psi;
  forward(k0);
  GpePropagator gpe(p, grid);
  gpe.propagate(mf, 3.0, 0.0075, {}, [](const MeanField&) {});
  ComplexField k1 = mf.psi;
  forward(k1);
  for (std::size_t i = 0; i < grid->cell_count(); ++i)
    CHECK(std::norm(k1[i]) ==
          doctest::Approx(std::norm(k0[i])).epsilon(1e-12).scale(1.0));
}

TEST_CASE("norm drift below 1e-10 per 1000 steps with pulses on") {
  auto p = bare_params(2, 0.05, {0.0, 0.0, 0.0});
  p.schedule.segments = {PulseSegment::from_area(1.0, 0.3, pi)};
  auto grid = Grid::make(2, {48, 48, 1}, {24.0, 24.0, 1.0});
  MeanField mf(grid);
  for (std::size_t i = 0; i < grid->cell_count(); ++i) {
    const auto x = grid->x_vector(i);
    mf.psi[i] = 4.0 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 18.0) *
                std::exp(cplx(0.0, 0.4 * x[0]));
  }
  const double n0 = mf.norm();
  GpePropagator gpe(p, grid);
  gpe.propagate(mf, 2.0, 0.002, {}, [](const MeanField&) {});  // 1000 steps
  CHECK(std::abs(mf.norm() - n0) / n0 < 1e-10);
}

TEST_CASE("energy conservation without pulses") {
  auto p = bare_params(2, 0.06, {0.02, 0.04, 0.0});
  p.atom_number = 150.0;
  p.tf_chemical_potential = thomas_fermi_mu_2d(150.0, 0.06, 0.02, 0.04);
  auto grid = Grid::make(2, {64, 64, 1}, {60.0, 48.0, 1.0});
  MeanField mf = ground_state(p, grid);

  // release from the trap and let it expand; E = kinetic + interaction
  const double e0 = gpe_energy(mf, p, false);
  GpePropagator gpe(p, grid);
  gpe.propagate(mf, 10.0, 0.002, {}, [](const MeanField&) {});
  const double e1 = gpe_energy(mf, p, false);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-8);
}

TEST_CASE("second-order convergence under step halving") {
  auto p = bare_params(1, 0.08, {0.0, 0.0, 0.0});
  p.schedule.segments = {PulseSegment::from_area(2.5, 0.5, pi)};
  auto grid = Grid::make(1, {64, 1, 1}, {40.0, 1.0, 1.0});  // kmax ~ 5

  auto initial = [&]() {
    MeanField mf(grid);
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
      const double x = grid->x_axis(0)[i];
      mf.psi[i] = 2.0 * std::exp(-x * x / 8.0) * std::exp(cplx(0.0, 0.95 * x));
    }
    return mf;
  };

  GpePropagator gpe(p, grid);
  auto run = [&](double dt) {
    MeanField mf = initial();
    gpe.propagate(mf, 5.0, dt, {}, [](const MeanField&) {});
    return mf;
  };

  const MeanField a = run(0.02);
  const MeanField b = run(0.01);
  const MeanField c = run(0.005);
  double e_ab = 0.0, e_bc = 0.0;
  for (std::size_t i = 0; i < grid->cell_count(); ++i) {
    e_ab += std::norm(a.psi[i] - b.psi[i]);
    e_bc += std::norm(b.psi[i] - c.psi[i]);
  }
  const double order = std::log2(std::sqrt(e_ab / e_bc));
  CHECK(order >= 1.9);
  CHECK(order < 2.5);
}

TEST_CASE("stability bound is enforced") {
  auto p = bare_params(1, 0.0, {0.0, 0.0, 0.0});
  auto grid = Grid::make(1, {128, 1, 1}, {20.0, 1.0, 1.0});  // kmax = 20.1
  MeanField mf(grid);
  mf.psi.fill(1.0);
  GpePropagator gpe(p, grid);
  // dt kmax^2/2 = 0.4 boundary: bound = 0.8/kmax^2
  CHECK_THROWS_AS(
      gpe.propagate(mf, 1.0, 1.01 * gpe.stability_dt_bound(), {}, [](const MeanField&) {}),
      ValidationError);
  CHECK_NOTHROW(gpe.propagate(mf, 0.01, 0.99 * gpe.stability_dt_bound(), {},
                              [](const MeanField&) {}));
}
