#include "homsim/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace homsim {

namespace {

double sample_stderr(double sum, double sumsq, std::uint64_t n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean);
  return std::sqrt(var / (n - 1));
}

struct PortTotals {
  double r = 0.0, l = 0.0, rl = 0.0;
};

PortTotals port_totals(const EnsembleMoments& m, std::size_t itheta) {
  PortTotals t;
  for (std::size_t b = 0; b < jackknife_blocks; ++b) {
    t.r += m.jk_port_r(itheta, b).real();
    t.l += m.jk_port_l(itheta, b).real();
    t.rl += m.jk_port_rl(itheta, b).real();
  }
  return t;
}

}  // namespace

Estimate binned_count(const EnsembleMoments& m, int time_tag, std::size_t itheta,
                      int bin) {
  const std::uint64_t n = m.trajectories();
  if (n == 0) throw ValidationError("no trajectories accumulated");
  Estimate e;
  e.value = m.bin_sum(time_tag, itheta, bin).real() / n;
  if (n >= 2)
    e.error = sample_stderr(m.bin_sum(time_tag, itheta, bin).real(),
                            m.bin_sumsq(time_tag, itheta, bin), n);
  return e;
}

Estimate g2_rl(const EnsembleMoments& m, std::size_t itheta) {
  const std::uint64_t n = m.trajectories();
  if (n == 0) throw ValidationError("no trajectories accumulated");
  const PortTotals tot = port_totals(m, itheta);
  const double mr = tot.r / n, ml = tot.l / n, mrl = tot.rl / n;
  if (!(mr != 0.0) || !(ml != 0.0))
    throw RuntimeFailure("empty output port: g2 undefined");

  Estimate e;
  e.value = mrl / (mr * ml);
  if (n < 100) return e;  // too few trajectories for a jackknife error bar

  // Delete-one-block jackknife over the trajectory blocks.
  std::vector<double> loo;
  loo.reserve(jackknife_blocks);
  for (std::size_t b = 0; b < jackknife_blocks; ++b) {
    const double cb = m.jk_count(b);
    if (cb <= 0.0) continue;
    const double nn = static_cast<double>(n) - cb;
    if (nn <= 0.0) continue;
    const double r = (tot.r - m.jk_port_r(itheta, b).real()) / nn;
    const double l = (tot.l - m.jk_port_l(itheta, b).real()) / nn;
    const double rl = (tot.rl - m.jk_port_rl(itheta, b).real()) / nn;
    if (r != 0.0 && l != 0.0) loo.push_back(rl / (r * l));
  }
  if (loo.size() >= 2) {
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= loo.size();
    double var = 0.0;
    for (double v : loo) var += (v - mean) * (v - mean);
    const double bcount = static_cast<double>(loo.size());
    e.error = std::sqrt(var * (bcount - 1.0) / bcount);
  }
  return e;
}

CorrelationCurve dip_scan(const EnsembleMoments& m,
                          const std::vector<double>& theta_list,
                          std::uint64_t config_hash) {
  if (theta_list.size() != m.thetas())
    throw DataError("theta list does not match the accumulated moments");
  CorrelationCurve c;
  c.theta = theta_list;
  c.trajectories = m.trajectories();
  c.config_hash = config_hash;
  for (std::size_t i = 0; i < theta_list.size(); ++i) {
    const Estimate e = g2_rl(m, i);
    c.g2.push_back(e.value);
    c.g2_err.push_back(e.error);
  }
  return c;
}

namespace {

std::size_t theta_zero_index(const CorrelationCurve& curve) {
  for (std::size_t i = 0; i < curve.theta.size(); ++i)
    if (std::abs(curve.theta[i]) < 1e-12) return i;
  throw ValidationError("curve does not cover theta = 0");
}

std::vector<std::size_t> wing_indices(const CorrelationCurve& curve,
                                      double wing_threshold) {
  std::vector<std::size_t> w;
  for (std::size_t i = 0; i < curve.theta.size(); ++i)
    if (std::abs(curve.theta[i]) >= wing_threshold - 1e-12) w.push_back(i);
  return w;
}

}  // namespace

VisibilityResult visibility(const CorrelationCurve& curve, double wing_threshold) {
  if (curve.theta.size() < 2)
    throw ValidationError("visibility needs more than one curve point");
  const std::size_t i0 = theta_zero_index(curve);
  const auto wings = wing_indices(curve, wing_threshold);
  if (wings.size() < 5)
    throw ValidationError("insufficient wing coverage: need at least 5 points at "
                          "theta >= the wing threshold");

  VisibilityResult r;
  r.dip = curve.g2[i0];
  r.dip_err = curve.g2_err[i0].value_or(0.0);
  r.wing_points = static_cast<int>(wings.size());
  double mean = 0.0;
  for (std::size_t i : wings) mean += curve.g2[i];
  mean /= wings.size();
  double var = 0.0;
  for (std::size_t i : wings) var += (curve.g2[i] - mean) * (curve.g2[i] - mean);
  r.wings_mean = mean;
  r.wings_spread = std::sqrt(var / std::max<std::size_t>(1, wings.size() - 1));
  if (!(mean > 0.0)) throw RuntimeFailure("wing mean is not positive");

  r.visibility = 1.0 - r.dip / mean;
  // The dip error propagates directly; the wing level carries its full
  // point-to-point fluctuation, not the error of the mean.
  const double d_dip = r.dip_err / mean;
  const double d_wing = r.dip * r.wings_spread / (mean * mean);
  r.error = std::sqrt(d_dip * d_dip + d_wing * d_wing);
  return r;
}

double dip_width(const CorrelationCurve& curve, double wing_threshold) {
  const std::size_t i0 = theta_zero_index(curve);
  const VisibilityResult vis = visibility(curve, wing_threshold);
  const double level = vis.dip + 0.5 * (vis.wings_mean - vis.dip);
  if (!(vis.wings_mean > vis.dip))
    throw RuntimeFailure("unresolved dip: no depth below the wing level");

  // Walk outward from theta = 0 to the first upward crossing on each side.
  auto crossing = [&](int dir) -> std::optional<double> {
    double prev_t = curve.theta[i0], prev_g = curve.g2[i0];
    for (std::size_t s = 1;; ++s) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i0) + dir * s;
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(curve.theta.size())) break;
      const double t = curve.theta[idx], g = curve.g2[idx];
      if (g >= level) {
        const double f = (level - prev_g) / (g - prev_g);
        return prev_t + f * (t - prev_t);
      }
      prev_t = t;
      prev_g = g;
    }
    return std::nullopt;
  };

  const auto right = crossing(+1);
  const auto left = crossing(-1);
  double width;
  if (right && left) {
    width = *right - *left;
  } else if (right) {
    width = 2.0 * std::abs(*right);  // one-sided scan, dip symmetric about 0
  } else if (left) {
    width = 2.0 * std::abs(*left);
  } else {
    throw RuntimeFailure("unresolved dip: no half-depth crossing in the scan range");
  }

  int inside = 0;
  for (std::size_t i = 0; i < curve.theta.size(); ++i)
    if (curve.g2[i] < level && std::abs(curve.theta[i]) <= 0.75 * width) ++inside;
  if (inside < 8 && curve.theta.size() >= 8)
    throw RuntimeFailure("unresolved dip: fewer than 8 samples inside the dip");
  if (curve.theta.size() < 8)
    throw ValidationError("dip width needs the dip resolved by at least 8 points");
  return width;
}

namespace {

double track_radial_offset(double theta, double k_r) {
  return k_r * (std::sqrt(5.0 - 4.0 * std::cos(theta)) - 1.0);
}

}  // namespace

HaloWidthResult halo_angular_width(const EnsembleMoments& m,
                                   const SimulationParams& params,
                                   const Grid& grid) {
  const std::vector<double> dens = density_mean(m, 1);
  const double theta_max = *std::max_element(params.theta_list.begin(),
                                             params.theta_list.end());
  const int n_samples = 241;

  HaloWidthResult r;
  std::array<double, 3> half{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.dims(); ++a) half[a] = 0.5 * params.bin_widths[a];

  for (int i = 0; i < n_samples; ++i) {
    const double theta = theta_max * i / static_cast<double>(n_samples - 1);
    const auto centres = bin_positions(theta, params.halo_radius);
    double d = 0.0;
    for (int b : {2, 3}) {  // the two Bragg-partner positions k5, k6
      DetectionBin bin{centres[b], half};
      WeightList w;
      for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const double f = bin.overlap_fraction(grid.k_vector(c),
                                              {grid.dk(0), grid.dk(1), grid.dk(2)},
                                              grid.dims());
        if (f > 0.0) w.push(static_cast<std::uint32_t>(c), f);
      }
      d += 0.5 * integrate_weights(w, dens, grid.k_cell_volume());
    }
    r.track_theta.push_back(theta);
    r.track_density.push_back(d);
  }

  const double peak = r.track_density.front();
  const double floor = *std::min_element(r.track_density.begin(),
                                         r.track_density.end());
  if (!(peak > 0.0) || !(peak > floor)) {
    r.degenerate = true;
    r.width = 2.0 * theta_max;
    return r;
  }
  const double level = floor + 0.5 * (peak - floor);
  for (int i = 1; i < n_samples; ++i) {
    if (r.track_density[i] < level) {
      const double f = (level - r.track_density[i - 1]) /
                       (r.track_density[i] - r.track_density[i - 1]);
      const double theta_half =
          r.track_theta[i - 1] + f * (r.track_theta[i] - r.track_theta[i - 1]);
      r.width = 2.0 * theta_half;  // the track is symmetric under theta -> -theta
      return r;
    }
  }
  r.degenerate = true;
  r.width = 2.0 * theta_max;
  return r;
}

FringeResult fringe_period(const CorrelationCurve& curve,
                           const SimulationParams& params, double wing_threshold) {
  FringeResult out;
  const auto wings = wing_indices(curve, wing_threshold);
  if (wings.size() < 8) return out;

  std::vector<double> u, y;
  for (std::size_t i : wings) {
    u.push_back(track_radial_offset(std::abs(curve.theta[i]), params.halo_radius));
    y.push_back(curve.g2[i]);
  }

  // Detrend with a least-squares line in u.
  const std::size_t n = u.size();
  double su = 0, sy = 0, suu = 0, suy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    su += u[i];
    sy += y[i];
    suu += u[i] * u[i];
    suy += u[i] * y[i];
  }
  const double det = n * suu - su * su;
  const double slope = det != 0.0 ? (n * suy - su * sy) / det : 0.0;
  const double icept = (sy - slope * su) / n;
  std::vector<double> resid(n);
  double power_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    resid[i] = y[i] - (icept + slope * u[i]);
    power_total += resid[i] * resid[i];
  }
  if (!(power_total > 0.0)) return out;

  const double span = u.back() - u.front();
  if (!(span > 0.0)) return out;
  double mean_du = span / (n - 1);

  // Periodogram of the irregularly sampled residuals; at least two periods
  // must fit in the window and the peak has to dominate the median power.
  const int n_freq = 512;
  const double f_lo = 2.0 / span;            // >= 2 periods in the window
  const double f_hi = 0.5 / mean_du;          // Nyquist-like cap
  if (!(f_hi > f_lo)) return out;
  std::vector<double> power(n_freq);
  double best_p = 0.0, best_f = 0.0;
  for (int j = 0; j < n_freq; ++j) {
    const double f = f_lo + (f_hi - f_lo) * j / static_cast<double>(n_freq - 1);
    cplx z(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = -2.0 * pi * f * u[i];
      z += resid[i] * cplx(std::cos(ph), std::sin(ph));
    }
    power[j] = std::norm(z) / (power_total * n);
    if (power[j] > best_p) {
      best_p = power[j];
      best_f = f;
    }
  }
  std::vector<double> sorted = power;
  std::nth_element(sorted.begin(), sorted.begin() + n_freq / 2, sorted.end());
  const double median_p = sorted[n_freq / 2];
  if (median_p > 0.0 && best_p / median_p < 6.0) return out;
  if (best_f <= 0.0) return out;

  out.found = true;
  out.period_dk_k0 = 1.0 / best_f;
  out.period_theta_rad = out.period_dk_k0 / params.halo_radius;
  out.peak_power_ratio = median_p > 0.0 ? best_p / median_p : 0.0;
  return out;
}

double fringe_reference_dk(const SimulationParams& params) {
  return pi / (params.halo_radius * (params.t3 - params.t2));
}

std::vector<double> density_mean(const EnsembleMoments& m, int time_tag) {
  const std::uint64_t n = std::max<std::uint64_t>(1, m.trajectories());
  std::vector<double> out(m.cells());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = m.density_sum(time_tag, c).real() / n;
  return out;
}

std::vector<double> density_stderr(const EnsembleMoments& m, int time_tag) {
  const std::uint64_t n = m.trajectories();
  std::vector<double> out(m.cells(), 0.0);
  if (n < 2) return out;
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = sample_stderr(m.density_sum(time_tag, c).real(),
                           m.density_sumsq(time_tag, c), n);
  return out;
}

Estimate scattered_number(const EnsembleMoments& m, const Grid& grid, int time_tag) {
  const std::vector<double> dens = density_mean(m, time_tag);
  KahanSum s;
  for (double v : dens) s.add(v);
  Estimate e;
  e.value = s.value() * grid.k_cell_volume();
  return e;
}

Estimate mode_occupation(const EnsembleMoments& m) {
  // theta = 0: bins 0 and 1 sit exactly on k1 and k2.
  const Estimate a = binned_count(m, 1, 0, 0);
  const Estimate b = binned_count(m, 1, 0, 1);
  Estimate e;
  e.value = 0.5 * (a.value + b.value);
  if (a.error && b.error)
    e.error = 0.5 * std::sqrt(*a.error * *a.error + *b.error * *b.error);
  return e;
}

FluxCheck flux_conservation(const EnsembleMoments& m, std::size_t itheta) {
  const std::uint64_t n = m.trajectories();
  FluxCheck f;
  double before = 0.0, after = 0.0;
  for (int b = 0; b < 4; ++b) {
    before += m.bin_sum(3, itheta, b).real();
    after += m.bin_sum(4, itheta, b).real();
  }
  f.before.value = before / n;
  f.after.value = after / n;
  f.before.error = sample_stderr(before, m.flux_sumsq(3, itheta), n);
  f.after.error = sample_stderr(after, m.flux_sumsq(4, itheta), n);
  return f;
}

// --- writers ----------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // '\n' line endings everywhere
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_dip_csv(const std::string& path, const CorrelationCurve& curve) {
  auto out = open_out(path);
  out << "theta_rad,g2,g2_err\n";
  for (std::size_t i = 0; i < curve.theta.size(); ++i) {
    out << format_double(curve.theta[i]) << "," << format_double(curve.g2[i]) << ",";
    if (curve.g2_err[i])
      out << format_double(*curve.g2_err[i]);
    else
      out << "nan";
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_density_csv(const std::string& path, const Grid& grid,
                       const std::vector<double>& mean,
                       const std::vector<double>* stderr_per_cell) {
  auto out = open_out(path);
  const bool slice3d = grid.dims() == 3;
  out << (slice3d ? "kx_k0,ky_k0" : (grid.dims() == 2 ? "kx_k0,kz_k0" : "kx_k0"));
  out << ",n_mean";
  if (stderr_per_cell) out << ",n_stderr";
  out << "\n";

  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto idx = grid.unflatten(c);
    if (slice3d && idx[2] != 0) continue;  // equatorial slice k_z = 0
    const auto k = grid.k_vector(c);
    out << format_double(k[0]);
    if (grid.dims() >= 2) out << "," << format_double(k[1]);
    out << "," << format_double(mean[c]);
    if (stderr_per_cell) out << "," << format_double((*stderr_per_cell)[c]);
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_halo_track_csv(const std::string& path, const HaloWidthResult& halo) {
  auto out = open_out(path);
  out << "theta_rad,density\n";
  for (std::size_t i = 0; i < halo.track_theta.size(); ++i)
    out << format_double(halo.track_theta[i]) << ","
        << format_double(halo.track_density[i]) << "\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string summary_json(const EnsembleMoments& m, const SimulationParams& params,
                         const Grid& grid) {
  using json = nlohmann::ordered_json;
  json j;
  j["n_trajectories"] = m.trajectories();
  j["n_flagged"] = m.flagged();
  j["flagged_fraction"] = m.flagged_fraction();
  j["reliable"] = m.flagged_fraction() <= 0.01;
  j["config_hash"] = to_hex(params.config_hash);

  const CorrelationCurve curve = dip_scan(m, params.theta_list, params.config_hash);

  auto metric = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      j[std::string(name) + "_error"] = e.what();
    }
  };

  metric("visibility", [&] {
    const VisibilityResult v = visibility(curve, params.wing_threshold);
    j["visibility"] = v.visibility;
    j["visibility_err"] = v.error;
    j["dip_g2"] = v.dip;
    j["dip_g2_err"] = v.dip_err;
    j["wings_mean_g2"] = v.wings_mean;
    j["wings_spread"] = v.wings_spread;
    j["wing_points"] = v.wing_points;
  });
  metric("dip_width", [&] {
    j["dip_width_rad"] = dip_width(curve, params.wing_threshold);
  });
  metric("halo_width", [&] {
    const HaloWidthResult h = halo_angular_width(m, params, grid);
    j["halo_width_rad"] = h.width;
    j["halo_width_degenerate"] = h.degenerate;
  });
  metric("fringe", [&] {
    const FringeResult f = fringe_period(curve, params, params.wing_threshold);
    j["fringe_found"] = f.found;
    if (f.found) {
      j["fringe_period_dk_k0"] = f.period_dk_k0;
      j["fringe_period_rad"] = f.period_theta_rad;
    }
    j["fringe_reference_dk_k0"] = fringe_reference_dk(params);
  });
  metric("occupation", [&] {
    const Estimate n1 = mode_occupation(m);
    j["mode_occupation_t1"] = n1.value;
    if (n1.error) j["mode_occupation_t1_err"] = *n1.error;
  });
  metric("scattered", [&] {
    const Estimate s1 = scattered_number(m, grid, 1);
    j["scattered_number_t1"] = s1.value;
    j["scattered_fraction_t1"] = s1.value / params.atom_number;
  });
  metric("flux", [&] {
    const FluxCheck f = flux_conservation(m, 0);
    j["flux_t3pre"] = f.before.value;
    j["flux_t3pre_err"] = *f.before.error;
    j["flux_t4"] = f.after.value;
    j["flux_t4_err"] = *f.after.error;
  });

  j["theta_rad"] = params.theta_list;
  j["g2"] = curve.g2;
  {
    json errs = json::array();
    for (const auto& e : curve.g2_err) {
      if (e)
        errs.push_back(*e);
      else
        errs.push_back(nullptr);
    }
    j["g2_err"] = errs;
  }
  return j.dump(2) + "\n";
}

}  // namespace homsim
