#include <doctest.h>

#include "homsim/units.hpp"

#include <cmath>
#include <cstdio>
#include <string>

using namespace homsim;

namespace {

// Collision parameters of a metastable-helium experiment: 4.7e4 atoms,
// a = 5.3 nm, trap (64, 1150, 1150) Hz, k0 = 4.7e6 m^-1.
std::string helium_3d_config(const std::string& tweak = "") {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "grid_length_x_k0inv = %.17g\n"
                "grid_length_y_k0inv = 50\n"
                "grid_length_z_k0inv = %.17g\n",
                pi * 60 / 0.95, 2.0 * pi * 80);
  std::string cfg =
      "# helium collision, full 3D\n"
      "atom_mass_kg = 6.646477e-27\n"
      "scattering_length_m = 5.3e-9\n"
      "atom_number = 4.7e4\n"
      "trap_freq_x_hz = 64\n"
      "trap_freq_y_hz = 1150\n"
      "trap_freq_z_hz = 1150\n"
      "collision_wavenumber_per_m = 4.7e6\n"
      "halo_radius_fraction = 0.95\n"
      "t1_s = 65e-6\n"
      "t2_s = 75e-6\n"
      "t3_s = 160e-6\n"
      "tau_pi_s = 2.5e-6\n"
      "tau_pi_half_s = 2.5e-6\n"
      "pulse_area_pi_rad = 3.14159265358979323846\n"
      "pulse_area_pi_half_rad = 1.57079632679489661923\n"
      "dimensions = 3\n"
      "grid_points_x = 128\n"
      "grid_points_y = 64\n"
      "grid_points_z = 512\n" +
      std::string(buf) +
      "trajectories = 1000\n"
      "seed = 7\n";
  cfg += tweak;
  return cfg;
}

}  // namespace

TEST_CASE("full helium parameter set is accepted") {
  const ExperimentConfig c = load_config(helium_3d_config());
  CHECK(c.atom_number == 4.7e4);
  CHECK(c.scattering_length_m == 5.3e-9);
  CHECK(c.trap_freq_hz[0] == 64.0);
  CHECK(c.trap_freq_hz[1] == 1150.0);
  CHECK(c.trap_freq_hz[2] == 1150.0);
  CHECK(c.collision_wavenumber_per_m == 4.7e6);
  CHECK(c.halo_radius_fraction == 0.95);
  CHECK(c.trajectories == 1000);
}

TEST_CASE("validation failures name the violated invariant") {
  // t2 < t1
  auto bad_order = helium_3d_config();
  bad_order.replace(bad_order.find("t2_s = 75e-6"), 12, "t2_s = 60e-6");
  CHECK_THROWS_WITH_AS(load_config(bad_order),
                       doctest::Contains("timeline ordering"), ValidationError);

  // zero atom number
  auto zero_n = helium_3d_config();
  zero_n.replace(zero_n.find("atom_number = 4.7e4"), 19, "atom_number = 0");
  CHECK_THROWS_WITH_AS(load_config(zero_n), doctest::Contains("strictly positive"),
                       ValidationError);

  // both pulse depth and areas
  CHECK_THROWS_WITH_AS(load_config(helium_3d_config("pulse_depth_j = 1e-30\n")),
                       doctest::Contains("exactly one"), ValidationError);

  // momentum coverage below 1.5 k0 on the Bragg axis
  auto small_grid = helium_3d_config();
  small_grid.replace(small_grid.find("grid_points_x = 128"), 19,
                     "grid_points_x = 64");
  CHECK_THROWS_WITH_AS(load_config(small_grid), doctest::Contains("Bragg axis"),
                       ValidationError);

  // k0 off the z lattice
  auto off_lattice = helium_3d_config();
  const auto zpos = off_lattice.find("grid_length_z_k0inv");
  off_lattice.replace(zpos, off_lattice.find('\n', zpos) - zpos,
                      "grid_length_z_k0inv = 500.0");
  CHECK_THROWS_WITH_AS(load_config(off_lattice), doctest::Contains("z momentum lattice"),
                       ValidationError);

  // malformed document
  CHECK_THROWS_AS(load_config("this is not a config"), ParseError);
  CHECK_THROWS_AS(load_config(helium_3d_config("unknown_key = 1\n")), ParseError);
}

TEST_CASE("internal units") {
  const ExperimentConfig c = load_config(helium_3d_config());
  const SimulationParams p = to_internal_units(c);

  SUBCASE("scattering length a k0") {
    CHECK(p.scattering_length == doctest::Approx(0.02491).epsilon(1e-12));
  }

  SUBCASE("time unit m/(hbar k0^2) near 2.85 us; t1 = 65 us near 22.8") {
    CHECK(p.time_unit_s == doctest::Approx(2.85e-6).epsilon(2e-3));
    CHECK(p.t1 == doctest::Approx(22.8).epsilon(2e-3));
    CHECK(p.t1 == doctest::Approx(65e-6 / p.time_unit_s).epsilon(1e-15));
  }

  SUBCASE("collision wavenumber is exactly 1 by construction") {
    CHECK(p.k0_per_m * p.length_unit_m == 1.0);
  }

  SUBCASE("interaction constant two ways to 1e-12") {
    const double u_direct = 4.0 * pi * p.scattering_length;
    const double u_si = 4.0 * pi * hbar_si * hbar_si * c.scattering_length_m /
                        c.atom_mass_kg;
    const double u_norm = u_si / (p.energy_unit_j * p.length_unit_m *
                                  p.length_unit_m * p.length_unit_m);
    CHECK(p.interaction_u3d == doctest::Approx(u_direct).epsilon(1e-15));
    CHECK(u_norm == doctest::Approx(u_direct).epsilon(1e-12));
  }

  SUBCASE("pulse areas resolve depth and duration consistently") {
    REQUIRE(p.schedule.segments.size() == 2);
    CHECK(p.schedule.segments[0].area == doctest::Approx(pi).epsilon(1e-14));
    CHECK(p.schedule.segments[1].area == doctest::Approx(pi / 2).epsilon(1e-14));
    // depth tau sqrt(2 pi) / 2 = area
    for (const auto& s : p.schedule.segments)
      CHECK(0.5 * s.depth * s.tau * std::sqrt(2.0 * pi) ==
            doctest::Approx(s.area).epsilon(1e-13));
  }

  SUBCASE("beam-splitter window bracket") {
    CHECK(p.t3_pre == doctest::Approx(p.t3 - 6.0 * p.tau_pi_half));
    CHECK(p.t4 == doctest::Approx(p.t3 + 6.0 * p.tau_pi_half));
  }
}

TEST_CASE("round trip to SI reproduces the inputs to 1e-12") {
  const ExperimentConfig c = load_config(helium_3d_config());
  const SimulationParams p = to_internal_units(c);
  const ExperimentConfig back = from_internal_units(p);

  CHECK(back.atom_mass_kg == doctest::Approx(c.atom_mass_kg).epsilon(1e-12));
  CHECK(back.scattering_length_m ==
        doctest::Approx(c.scattering_length_m).epsilon(1e-12));
  CHECK(back.atom_number == doctest::Approx(c.atom_number).epsilon(1e-12));
  for (int a = 0; a < 3; ++a)
    CHECK(back.trap_freq_hz[a] == doctest::Approx(c.trap_freq_hz[a]).epsilon(1e-12));
  CHECK(back.collision_wavenumber_per_m ==
        doctest::Approx(c.collision_wavenumber_per_m).epsilon(1e-12));
  CHECK(back.t1_s == doctest::Approx(c.t1_s).epsilon(1e-12));
  CHECK(back.t2_s == doctest::Approx(c.t2_s).epsilon(1e-12));
  CHECK(back.t3_s == doctest::Approx(c.t3_s).epsilon(1e-12));
  CHECK(back.tau_pi_s == doctest::Approx(c.tau_pi_s).epsilon(1e-12));
  CHECK(back.tau_pi_half_s == doctest::Approx(c.tau_pi_half_s).epsilon(1e-12));

  // and the re-resolved parameters agree with the originals
  const SimulationParams p2 = to_internal_units(back);
  CHECK(p2.interaction_u == doctest::Approx(p.interaction_u).epsilon(1e-12));
  CHECK(p2.t4 == doctest::Approx(p.t4).epsilon(1e-12));

  // identical text, identical hash
  const SimulationParams p3 = to_internal_units(load_config(helium_3d_config()));
  CHECK(p3.config_hash == p.config_hash);
}

TEST_CASE("pulse depth mode derives the paper envelope") {
  // depth mode: humps (V0, V0/2); tau_pi = sqrt(2 pi)/V0 makes the first
  // hump's area exactly pi
  const ExperimentConfig c0 = load_config(helium_3d_config());
  const SimulationParams p0 = to_internal_units(c0);
  const double tau_pi_int = p0.tau_pi;
  const double v0_int = std::sqrt(2.0 * pi) / tau_pi_int;
  const double v0_j = v0_int * p0.energy_unit_j;

  auto cfg = helium_3d_config();
  const auto apos = cfg.find("pulse_area_pi_rad");
  cfg.erase(apos, cfg.find('\n', cfg.find("pulse_area_pi_half_rad")) - apos + 1);
  char buf[64];
  std::snprintf(buf, sizeof buf, "pulse_depth_j = %.17g\n", v0_j);
  cfg += buf;

  const SimulationParams p = to_internal_units(load_config(cfg));
  CHECK(p.schedule.segments[0].depth == doctest::Approx(v0_int).epsilon(1e-12));
  CHECK(p.schedule.segments[0].area == doctest::Approx(pi).epsilon(1e-12));
  CHECK(p.schedule.segments[1].depth == doctest::Approx(0.5 * v0_int).epsilon(1e-12));
  CHECK(p.schedule.segments[1].area == doctest::Approx(pi / 2).epsilon(1e-12));
}

TEST_CASE("2D reduction rescales the coupling by the transverse width") {
  auto cfg = helium_3d_config();
  cfg.replace(cfg.find("dimensions = 3"), 14, "dimensions = 2");
  const SimulationParams p = to_internal_units(load_config(cfg));
  CHECK(p.dims == 2);
  CHECK(p.sigma_transverse ==
        doctest::Approx(1.0 / std::sqrt(2.0 * p.trap_omega[1])).epsilon(1e-14));
  CHECK(p.interaction_u ==
        doctest::Approx(p.interaction_u3d /
                        (std::sqrt(2.0 * pi) * p.sigma_transverse))
            .epsilon(1e-13));
  // storage axes are (x, z)
  CHECK(p.grid_points[0] == 128);
  CHECK(p.grid_points[1] == 512);
  CHECK(p.storage_omega[0] == doctest::Approx(p.trap_omega[0]));
  CHECK(p.storage_omega[1] == doctest::Approx(p.trap_omega[2]));
}

TEST_CASE("thomas-fermi chemical potential formula") {
  // mu_TF = (15 N a wx wy wz)^(2/5) / 2 evaluated for the helium parameters
  const SimulationParams p = to_internal_units(load_config(helium_3d_config()));
  const double direct =
      0.5 * std::pow(15.0 * 4.7e4 * p.scattering_length * p.trap_omega[0] *
                         p.trap_omega[1] * p.trap_omega[2],
                     0.4);
  CHECK(p.tf_chemical_potential == doctest::Approx(direct).epsilon(1e-13));
  CHECK(p.pair_gain_rate == doctest::Approx(p.tf_chemical_potential).epsilon(1e-13));
}
