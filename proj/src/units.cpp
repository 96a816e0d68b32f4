#include "homsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace homsim {

namespace {

std::map<std::string, std::string> tokenize(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("config line " + std::to_string(lineno) +
                       ": empty key or value");
    if (kv.count(key))
      throw ParseError("duplicate config key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  double number(const std::string& key) {
    const std::string v = take(key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ParseError("config key '" + key + "': '" + v + "' is not a number");
    return x;
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  long long integer(const std::string& key) {
    const double x = number(key);
    const long long i = static_cast<long long>(std::llround(x));
    if (std::abs(x - static_cast<double>(i)) > 1e-9)
      throw ParseError("config key '" + key + "' must be an integer");
    return i;
  }

  long long integer_or(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }

  bool flag_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = take(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("config key '" + key + "' must be a boolean");
  }

  void finish() const {
    if (!taken_all()) {
      std::string unknown;
      for (const auto& [k, v] : kv_)
        if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
      throw ParseError("unknown config keys: " + unknown);
    }
  }

 private:
  std::string take(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ParseError("missing config key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  bool taken_all() const {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) return false;
    return true;
  }

  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0))
    throw ValidationError(std::string(what) + " must be strictly positive");
}

}  // namespace

ExperimentConfig load_config(const std::string& text) {
  KeyReader r(tokenize(text));
  ExperimentConfig c;

  c.atom_mass_kg = r.number("atom_mass_kg");
  c.scattering_length_m = r.number("scattering_length_m");
  c.atom_number = r.number("atom_number");
  c.trap_freq_hz = {r.number("trap_freq_x_hz"), r.number("trap_freq_y_hz"),
                    r.number("trap_freq_z_hz")};
  c.collision_wavenumber_per_m = r.number("collision_wavenumber_per_m");
  c.halo_radius_fraction = r.number_or("halo_radius_fraction", 0.95);

  c.t1_s = r.number("t1_s");
  c.t2_s = r.number("t2_s");
  c.t3_s = r.number("t3_s");
  c.tau_pi_s = r.number("tau_pi_s");
  c.tau_pi_half_s = r.number("tau_pi_half_s");

  const bool has_depth = r.has("pulse_depth_j");
  const bool has_area = r.has("pulse_area_pi_rad") || r.has("pulse_area_pi_half_rad");
  if (has_depth == has_area)
    throw ValidationError(
        "exactly one of pulse_depth_j or pulse areas "
        "(pulse_area_pi_rad, pulse_area_pi_half_rad) must be given");
  c.pulse_by_area = has_area;
  if (has_depth) {
    c.pulse_depth_j = r.number("pulse_depth_j");
  } else {
    c.pulse_area_pi_rad = r.number("pulse_area_pi_rad");
    c.pulse_area_pi_half_rad = r.number("pulse_area_pi_half_rad");
  }

  c.dimensions = static_cast<int>(r.integer("dimensions"));
  c.grid_points[0] = static_cast<int>(r.integer("grid_points_x"));
  c.grid_points[2] = static_cast<int>(r.integer("grid_points_z"));
  c.grid_length_k0inv[0] = r.number("grid_length_x_k0inv");
  c.grid_length_k0inv[2] = r.number("grid_length_z_k0inv");
  if (c.dimensions == 3) {
    c.grid_points[1] = static_cast<int>(r.integer("grid_points_y"));
    c.grid_length_k0inv[1] = r.number("grid_length_y_k0inv");
  } else {
    c.grid_points[1] = static_cast<int>(r.integer_or("grid_points_y", 0));
    c.grid_length_k0inv[1] = r.number_or("grid_length_y_k0inv", 0.0);
  }

  c.trajectories = static_cast<std::uint64_t>(r.integer("trajectories"));
  c.seed = static_cast<std::uint64_t>(r.integer("seed"));

  c.bin_dk_k0 = {r.number_or("bin_dkx_k0", 0.01), r.number_or("bin_dky_k0", 0.19),
                 r.number_or("bin_dkz_k0", 0.19)};

  c.theta_min_rad = r.number_or("theta_min_rad", 0.0);
  c.theta_max_rad = r.number_or("theta_max_rad", pi / 4.0);
  c.theta_count = static_cast<int>(r.integer_or("theta_count", 33));
  c.wing_threshold_rad = r.number_or("wing_threshold_rad", pi / 8.0);
  c.dt_internal = r.number_or("dt_internal", 0.0);
  c.dump_density = r.flag_or("dump_density", false);

  r.finish();

  // -- invariants ----------------------------------------------------------
  require_positive(c.atom_mass_kg, "atom_mass_kg");
  require_positive(c.scattering_length_m, "scattering_length_m");
  require_positive(c.atom_number, "atom_number");
  for (int a = 0; a < 3; ++a) require_positive(c.trap_freq_hz[a], "trap frequency");
  require_positive(c.collision_wavenumber_per_m, "collision_wavenumber_per_m");
  if (!(c.halo_radius_fraction > 0.0 && c.halo_radius_fraction <= 1.0))
    throw ValidationError("halo_radius_fraction must lie in (0, 1]");
  require_positive(c.t1_s, "t1_s");
  if (!(c.t1_s < c.t2_s && c.t2_s < c.t3_s))
    throw ValidationError("timeline ordering violated: need t1 < t2 < t3");
  require_positive(c.tau_pi_s, "tau_pi_s");
  require_positive(c.tau_pi_half_s, "tau_pi_half_s");
  if (c.pulse_by_area) {
    if (c.pulse_area_pi_rad < 0.0 || c.pulse_area_pi_half_rad < 0.0)
      throw ValidationError("pulse areas must be non-negative");
  } else {
    require_positive(c.pulse_depth_j, "pulse_depth_j");
  }
  if (c.dimensions != 2 && c.dimensions != 3)
    throw ValidationError("dimensions must be 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (c.dimensions == 2 && a == 1) continue;
    if (c.grid_points[a] < 8)
      throw ValidationError("grid needs at least 8 points per axis");
    require_positive(c.grid_length_k0inv[a], "grid length");
  }
  if (c.trajectories < 2) throw ValidationError("trajectories must be at least 2");
  for (int a = 0; a < 3; ++a) require_positive(c.bin_dk_k0[a], "bin side");
  if (c.theta_count < 1) throw ValidationError("theta_count must be at least 1");
  if (c.theta_min_rad != 0.0)
    throw ValidationError("theta_min_rad must be 0 (the dip point is required)");
  if (c.theta_count > 1 && !(c.theta_max_rad > c.theta_min_rad))
    throw ValidationError("theta_max_rad must exceed theta_min_rad");
  if (!(c.wing_threshold_rad > 0.0))
    throw ValidationError("wing_threshold_rad must be positive");
  if (c.dt_internal < 0.0) throw ValidationError("dt_internal must be non-negative");

  // Momentum coverage, in units of k0: need max|k| >= 1.5 k0 on the
  // Bragg-coupled axis and on the collision axis.
  auto coverage = [&](int a) { return pi * c.grid_points[a] / c.grid_length_k0inv[a]; };
  if (coverage(0) < 1.5)
    throw ValidationError(
        "grid momentum coverage on the Bragg axis x is below 1.5 k0: max|k| = " +
        format_double(coverage(0)));
  if (coverage(2) < 1.5)
    throw ValidationError(
        "grid momentum coverage on the collision axis z is below 1.5 k0: max|k| = " +
        format_double(coverage(2)));

  // The split mask exp(+-i k0 z) and the lattice cos(2 k_L x) must be
  // periodic on the box, i.e. k0 and 2 k_r must be momentum lattice points.
  auto lattice_misfit = [](double k, double length) {
    const double cycles = k * length / (2.0 * pi);
    return std::abs(cycles - std::round(cycles));
  };
  if (lattice_misfit(1.0, c.grid_length_k0inv[2]) > 1e-9)
    throw ValidationError(
        "collision wavenumber k0 must lie on the z momentum lattice "
        "(grid_length_z_k0inv must be an integer multiple of 2 pi)");
  if (lattice_misfit(2.0 * c.halo_radius_fraction, c.grid_length_k0inv[0]) > 1e-9)
    throw ValidationError(
        "the lattice recoil 2 k_r must lie on the x momentum lattice "
        "(grid_length_x_k0inv * halo_radius_fraction / pi must be an integer)");

  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

SimulationParams to_internal_units(const ExperimentConfig& c) {
  SimulationParams p;
  p.dims = c.dimensions;
  p.atom_mass_kg = c.atom_mass_kg;
  p.k0_per_m = c.collision_wavenumber_per_m;
  p.length_unit_m = 1.0 / p.k0_per_m;
  p.time_unit_s = c.atom_mass_kg / (hbar_si * p.k0_per_m * p.k0_per_m);
  p.energy_unit_j = hbar_si / p.time_unit_s;

  p.atom_number = c.atom_number;
  p.scattering_length = c.scattering_length_m * p.k0_per_m;
  p.interaction_u3d = 4.0 * pi * p.scattering_length;

  for (int a = 0; a < 3; ++a)
    p.trap_omega[a] = 2.0 * pi * c.trap_freq_hz[a] * p.time_unit_s;

  if (p.dims == 3) {
    p.interaction_u = p.interaction_u3d;
    p.sigma_transverse = 0.0;
    p.storage_omega = p.trap_omega;
  } else {
    // 2D reduction: integrate out y against the harmonic ground state of the
    // tight transverse trap; |phi(y)|^2 is a normalised Gaussian of rms
    // sigma_y = 1/sqrt(2 w_y), so U2 = U3 * integral |phi|^4 dy
    //                                = U3 / (sqrt(2 pi) sigma_y).
    p.sigma_transverse = 1.0 / std::sqrt(2.0 * p.trap_omega[1]);
    p.interaction_u =
        p.interaction_u3d / (std::sqrt(2.0 * pi) * p.sigma_transverse);
    p.storage_omega = {p.trap_omega[0], p.trap_omega[2], 0.0};
  }

  p.halo_radius = c.halo_radius_fraction;

  p.t1 = c.t1_s / p.time_unit_s;
  p.t2 = c.t2_s / p.time_unit_s;
  p.t3 = c.t3_s / p.time_unit_s;
  p.tau_pi = c.tau_pi_s / p.time_unit_s;
  p.tau_pi_half = c.tau_pi_half_s / p.time_unit_s;
  p.t3_pre = p.t3 - 6.0 * p.tau_pi_half;
  p.t4 = p.t3 + 6.0 * p.tau_pi_half;
  if (!(p.t3_pre > p.t2))
    throw ValidationError(
        "beam-splitter pulse window overlaps the mirror pulse centre "
        "(need t3 - 6 tau_pi_half > t2)");

  p.schedule.lattice_vector = {p.halo_radius, 0.0, 0.0};
  p.schedule.relative_phase = 0.0;
  if (c.pulse_by_area) {
    p.schedule.segments = {
        PulseSegment::from_area(p.t2, p.tau_pi, c.pulse_area_pi_rad),
        PulseSegment::from_area(p.t3, p.tau_pi_half, c.pulse_area_pi_half_rad)};
  } else {
    const double v0 = c.pulse_depth_j / p.energy_unit_j;
    p.schedule.segments = {PulseSegment::from_depth(p.t2, p.tau_pi, v0),
                           PulseSegment::from_depth(p.t3, p.tau_pi_half, 0.5 * v0)};
  }
  p.schedule.validate(p.halo_radius);

  if (p.dims == 3) {
    p.grid_points = c.grid_points;
    p.grid_lengths = c.grid_length_k0inv;
  } else {
    p.grid_points = {c.grid_points[0], c.grid_points[2], 1};
    p.grid_lengths = {c.grid_length_k0inv[0], c.grid_length_k0inv[2], 1.0};
  }

  p.trajectories = c.trajectories;
  p.seed = c.seed;

  if (p.dims == 3) {
    p.bin_widths = c.bin_dk_k0;
  } else {
    p.bin_widths = {c.bin_dk_k0[0], c.bin_dk_k0[2], 0.0};
  }

  p.theta_list.resize(c.theta_count);
  for (int i = 0; i < c.theta_count; ++i)
    p.theta_list[i] =
        c.theta_count == 1
            ? c.theta_min_rad
            : c.theta_min_rad + (c.theta_max_rad - c.theta_min_rad) * i /
                                    static_cast<double>(c.theta_count - 1);
  p.wing_threshold = c.wing_threshold_rad;

  double k2max = 0.0;
  for (int a = 0; a < p.dims; ++a) {
    const double km = pi * p.grid_points[a] / p.grid_lengths[a];
    k2max += km * km;
  }
  const double dt_bound = 0.8 / k2max;  // dt max|k|^2 / 2 <= 0.4
  p.dt = c.dt_internal > 0.0 ? c.dt_internal : 0.98 * dt_bound;
  if (p.dt > dt_bound * (1.0 + 1e-12))
    throw ValidationError("dt_internal violates the kinetic stability bound dt max|k|^2/2 <= 0.4: dt <= " +
                          format_double(dt_bound));
  p.dump_density = c.dump_density;

  if (p.dims == 3) {
    p.tf_chemical_potential =
        thomas_fermi_mu_3d(p.atom_number, p.scattering_length, p.trap_omega);
  } else {
    p.tf_chemical_potential = thomas_fermi_mu_2d(
        p.atom_number, p.interaction_u, p.storage_omega[0], p.storage_omega[1]);
  }
  p.tf_peak_density = p.tf_chemical_potential / p.interaction_u;
  p.pair_gain_rate = p.interaction_u * p.tf_peak_density;

  // Canonical echo: the resolved configuration, key-sorted, excluding the
  // trajectory count (which names a range, not an experiment).
  std::map<std::string, std::string> echo;
  echo["atom_mass_kg"] = format_double(c.atom_mass_kg);
  echo["scattering_length_m"] = format_double(c.scattering_length_m);
  echo["atom_number"] = format_double(c.atom_number);
  echo["trap_freq_x_hz"] = format_double(c.trap_freq_hz[0]);
  echo["trap_freq_y_hz"] = format_double(c.trap_freq_hz[1]);
  echo["trap_freq_z_hz"] = format_double(c.trap_freq_hz[2]);
  echo["collision_wavenumber_per_m"] = format_double(c.collision_wavenumber_per_m);
  echo["halo_radius_fraction"] = format_double(c.halo_radius_fraction);
  echo["t1_s"] = format_double(c.t1_s);
  echo["t2_s"] = format_double(c.t2_s);
  echo["t3_s"] = format_double(c.t3_s);
  echo["tau_pi_s"] = format_double(c.tau_pi_s);
  echo["tau_pi_half_s"] = format_double(c.tau_pi_half_s);
  echo["pulse_area_pi_rad"] = format_double(p.schedule.segments[0].area);
  echo["pulse_area_pi_half_rad"] = format_double(p.schedule.segments[1].area);
  echo["pulse_depth_pi_internal"] = format_double(p.schedule.segments[0].depth);
  echo["pulse_depth_pi_half_internal"] = format_double(p.schedule.segments[1].depth);
  echo["dimensions"] = std::to_string(c.dimensions);
  echo["grid_points_x"] = std::to_string(c.grid_points[0]);
  echo["grid_points_y"] = std::to_string(c.grid_points[1]);
  echo["grid_points_z"] = std::to_string(c.grid_points[2]);
  echo["grid_length_x_k0inv"] = format_double(c.grid_length_k0inv[0]);
  echo["grid_length_y_k0inv"] = format_double(c.grid_length_k0inv[1]);
  echo["grid_length_z_k0inv"] = format_double(c.grid_length_k0inv[2]);
  echo["seed"] = std::to_string(c.seed);
  echo["bin_dkx_k0"] = format_double(c.bin_dk_k0[0]);
  echo["bin_dky_k0"] = format_double(c.bin_dk_k0[1]);
  echo["bin_dkz_k0"] = format_double(c.bin_dk_k0[2]);
  echo["wing_threshold_rad"] = format_double(c.wing_threshold_rad);
  echo["dt_internal"] = format_double(p.dt);
  {
    std::string thetas;
    for (double th : p.theta_list) {
      if (!thetas.empty()) thetas += ",";
      thetas += format_double(th);
    }
    echo["theta_list_rad"] = thetas;
  }
  std::string canon;
  for (const auto& [k, v] : echo) canon += k + "=" + v + "\n";
  p.canonical_echo = canon;
  p.config_hash = fnv1a64(canon);

  return p;
}

ExperimentConfig from_internal_units(const SimulationParams& p) {
  ExperimentConfig c;
  c.atom_mass_kg = p.atom_mass_kg;
  c.collision_wavenumber_per_m = p.k0_per_m;
  c.scattering_length_m = p.scattering_length / p.k0_per_m;
  c.atom_number = p.atom_number;
  for (int a = 0; a < 3; ++a)
    c.trap_freq_hz[a] = p.trap_omega[a] / (2.0 * pi * p.time_unit_s);
  c.halo_radius_fraction = p.halo_radius;
  c.t1_s = p.t1 * p.time_unit_s;
  c.t2_s = p.t2 * p.time_unit_s;
  c.t3_s = p.t3 * p.time_unit_s;
  c.tau_pi_s = p.tau_pi * p.time_unit_s;
  c.tau_pi_half_s = p.tau_pi_half * p.time_unit_s;
  c.pulse_by_area = true;
  c.pulse_area_pi_rad = p.schedule.segments.at(0).area;
  c.pulse_area_pi_half_rad = p.schedule.segments.at(1).area;
  c.dimensions = p.dims;
  if (p.dims == 3) {
    c.grid_points = p.grid_points;
    c.grid_length_k0inv = p.grid_lengths;
  } else {
    c.grid_points = {p.grid_points[0], 0, p.grid_points[1]};
    c.grid_length_k0inv = {p.grid_lengths[0], 0.0, p.grid_lengths[1]};
  }
  c.trajectories = p.trajectories;
  c.seed = p.seed;
  if (p.dims == 3) {
    c.bin_dk_k0 = p.bin_widths;
  } else {
    c.bin_dk_k0 = {p.bin_widths[0], 0.19, p.bin_widths[1]};
  }
  c.theta_min_rad = p.theta_list.front();
  c.theta_max_rad = p.theta_list.back();
  c.theta_count = static_cast<int>(p.theta_list.size());
  c.wing_threshold_rad = p.wing_threshold;
  c.dt_internal = p.dt;
  c.dump_density = p.dump_density;
  return c;
}

double thomas_fermi_mu_3d(double n_atoms, double a_internal,
                          const std::array<double, 3>& omega) {
  return 0.5 *
         std::pow(15.0 * n_atoms * a_internal * omega[0] * omega[1] * omega[2], 0.4);
}

double thomas_fermi_mu_2d(double n_atoms, double u2, double omega_x, double omega_z) {
  return std::sqrt(n_atoms * u2 * omega_x * omega_z / pi);
}

}  // namespace homsim
