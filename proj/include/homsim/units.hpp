#ifndef HOMSIM_UNITS_HPP
#define HOMSIM_UNITS_HPP

#include "homsim/bragg.hpp"
#include "homsim/common.hpp"

#include <array>
#include <string>
#include <vector>

namespace homsim {

/// 2018 CODATA reduced Planck constant, J s. The atom mass comes from the
/// config, so this is the only physical constant baked into the code.
inline constexpr double hbar_si = 1.054571817e-34;

/**
 * Experiment description in SI units, parsed from a flat key = value text
 * document (see configs/SCHEMA.md for the key list).
 *
 * Axis conventions: the condensates counter-propagate along z, the Bragg
 * lattice points along x, and the correlation scan rotates from x towards
 * the remaining in-plane axis (y in 3D, z in the 2D reduction, whose
 * simulation plane is x-z with y integrated out).
 */
struct ExperimentConfig {
  double atom_mass_kg = 0.0;
  double scattering_length_m = 0.0;
  double atom_number = 0.0;
  std::array<double, 3> trap_freq_hz{0.0, 0.0, 0.0};  // omega_i / 2 pi
  double collision_wavenumber_per_m = 0.0;            // k0
  double halo_radius_fraction = 0.95;                 // k_r / k0

  double t1_s = 0.0, t2_s = 0.0, t3_s = 0.0;
  double tau_pi_s = 0.0, tau_pi_half_s = 0.0;

  // Exactly one of {pulse_depth_j, pulse areas} is given. In depth mode the
  // two humps have peak depths (V0, V0/2); in area mode depths are derived.
  bool pulse_by_area = true;
  double pulse_depth_j = 0.0;
  double pulse_area_pi_rad = 0.0;
  double pulse_area_pi_half_rad = 0.0;

  int dimensions = 0;  // 2 or 3
  std::array<int, 3> grid_points{0, 0, 0};          // x, y, z (y unused in 2D)
  std::array<double, 3> grid_length_k0inv{0, 0, 0};  // extents, units of 1/k0

  std::uint64_t trajectories = 0;
  std::uint64_t seed = 0;

  std::array<double, 3> bin_dk_k0{0.01, 0.19, 0.19};  // detection bin sides / k0

  double theta_min_rad = 0.0;
  double theta_max_rad = pi / 4.0;
  int theta_count = 33;
  double wing_threshold_rad = pi / 8.0;

  double dt_internal = 0.0;  // 0 selects the largest stable step
  bool dump_density = false;
};

/// Parses and validates a config document; throws ParseError on malformed
/// text and ValidationError naming the violated invariant otherwise.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/**
 * The same experiment in the internal unit system hbar = m = 1 with length
 * unit 1/k0 (time unit m/(hbar k0^2), energy unit hbar^2 k0^2/m). The
 * collision wavenumber is exactly 1 by construction.
 *
 * Storage axes: dims = 3 keeps (x, y, z); dims = 2 keeps (x, z), so storage
 * axis 0 is always the Bragg axis, axis dims-1 the collision axis and axis 1
 * the scan axis.
 */
struct SimulationParams {
  int dims = 0;
  double atom_mass_kg = 0.0;        // retained for the SI round trip
  double k0_per_m = 0.0;
  double length_unit_m = 0.0;
  double time_unit_s = 0.0;
  double energy_unit_j = 0.0;

  double atom_number = 0.0;
  double scattering_length = 0.0;  // a k0
  double interaction_u3d = 0.0;    // 4 pi a (internal)
  double interaction_u = 0.0;      // dims-reduced coupling used by the solvers
  double sigma_transverse = 0.0;   // rms ground-state width of the integrated axis (2D)

  std::array<double, 3> trap_omega{0.0, 0.0, 0.0};  // internal, physical x/y/z
  std::array<double, 3> storage_omega{0.0, 0.0, 0.0};
  double halo_radius = 0.95;  // k_r in units of k0

  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  double t3_pre = 0.0;  // start of the beam-splitter pulse window
  double t4 = 0.0;      // end of the beam-splitter pulse window
  double tau_pi = 0.0, tau_pi_half = 0.0;

  PulseSchedule schedule;

  std::array<int, 3> grid_points{1, 1, 1};        // storage axes
  std::array<double, 3> grid_lengths{1.0, 1.0, 1.0};

  std::uint64_t trajectories = 0;
  std::uint64_t seed = 0;

  std::array<double, 3> bin_widths{0.0, 0.0, 0.0};  // storage axes, units of k0
  std::vector<double> theta_list;
  double wing_threshold = 0.0;
  double dt = 0.0;
  bool dump_density = false;

  // Thomas-Fermi estimates recorded for the run manifest.
  double tf_chemical_potential = 0.0;
  double tf_peak_density = 0.0;
  double pair_gain_rate = 0.0;  // U rho0(0)

  std::string canonical_echo;  // resolved configuration, key-sorted
  std::uint64_t config_hash = 0;

  int scan_axis() const { return 1; }
  int collision_axis() const { return dims - 1; }
  int bragg_axis() const { return 0; }
};

SimulationParams to_internal_units(const ExperimentConfig& cfg);

/// Inverse of to_internal_units; the round trip reproduces the SI inputs to
/// relative 1e-12.
ExperimentConfig from_internal_units(const SimulationParams& p);

/// Thomas-Fermi chemical potential (15 N a wx wy wz)^(2/5) / 2 in internal
/// units (3D), and its 2D analogue sqrt(N U2 wx wz / pi).
double thomas_fermi_mu_3d(double n_atoms, double a_internal,
                          const std::array<double, 3>& omega);
double thomas_fermi_mu_2d(double n_atoms, double u2, double omega_x, double omega_z);

}  // namespace homsim

#endif
