#ifndef HOMSIM_ANALYSIS_HPP
#define HOMSIM_ANALYSIS_HPP

#include "homsim/binning.hpp"
#include "homsim/stochastic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace homsim {

/// A measured quantity with its sampling standard error (absent when fewer
/// than 100 trajectories are available for the jackknife).
struct Estimate {
  double value = 0.0;
  std::optional<double> error;
};

/// The normalised cross-port correlation curve over the scan angles.
struct CorrelationCurve {
  std::vector<double> theta;
  std::vector<double> g2;
  std::vector<std::optional<double>> g2_err;
  std::uint64_t trajectories = 0;
  std::uint64_t config_hash = 0;
};

/// Mean +- standard error of the count in one detection bin (grid-cell
/// quadrature with partial cells weighted by overlap fraction).
Estimate binned_count(const EnsembleMoments& m, int time_tag, std::size_t itheta,
                      int bin);

/// g2_RL(theta) = <N_R N_L> / (<N_R><N_L>) with the normally ordered
/// numerator taken directly from the positive-P port products; the error bar
/// is a delete-one-block jackknife over trajectory blocks.
Estimate g2_rl(const EnsembleMoments& m, std::size_t itheta);

/// Assembles the dip curve; the requested theta list must match the one the
/// moments were accumulated with.
CorrelationCurve dip_scan(const EnsembleMoments& m,
                          const std::vector<double>& theta_list,
                          std::uint64_t config_hash);

struct VisibilityResult {
  double visibility = 0.0;
  double error = 0.0;
  double dip = 0.0;
  double dip_err = 0.0;
  double wings_mean = 0.0;
  double wings_spread = 0.0;  // full std of the wing points about their mean
  int wing_points = 0;
};

/// V = 1 - g2(0) / mean{g2 : theta >= wing_threshold}. The error combines the
/// jackknife error of the dip point with the full wing fluctuation spread.
VisibilityResult visibility(const CorrelationCurve& curve, double wing_threshold);

/// Full width of the dip at half depth between the wing mean and the minimum,
/// by linear interpolation between samples.
double dip_width(const CorrelationCurve& curve, double wing_threshold);

struct HaloWidthResult {
  double width = 0.0;
  bool degenerate = false;  // no half crossing inside the scan range
  std::vector<double> track_theta;
  std::vector<double> track_density;
};

/**
 * Angular width of the scattering halo in the direction the dip scan probes:
 * the t1 density is integrated in a detection-sized box that follows the
 * Bragg-partner track k6(theta) = k3 - 2 k1 (and its mirror k5), and the
 * FWHM of that profile relative to the theta = 0 value is returned. An
 * isotropic profile never crosses half and is reported as degenerate with
 * the full scan range.
 */
HaloWidthResult halo_angular_width(const EnsembleMoments& m,
                                   const SimulationParams& params, const Grid& grid);

struct FringeResult {
  bool found = false;
  double period_dk_k0 = 0.0;  // period against the radial offset |k6| - k_r
  double period_theta_rad = 0.0;  // period_dk / k_r
  double peak_power_ratio = 0.0;
};

/**
 * Dominant oscillation period of the detrended wing signal. The wing samples
 * are analysed against the radial offset u(theta) = |k6(theta)| - k_r, the
 * variable the free-propagation phase dispersion is periodic in; a discrete
 * spectral peak is accepted when it stands a factor above the median power
 * and at least two periods fit in the window.
 */
FringeResult fringe_period(const CorrelationCurve& curve,
                           const SimulationParams& params, double wing_threshold);

/// pi m / (hbar k_r dt_free) in internal units: pi / (k_r (t3 - t2)).
double fringe_reference_dk(const SimulationParams& params);

/// Total scattered number at t1 or t4: integral of the mean density.
Estimate scattered_number(const EnsembleMoments& m, const Grid& grid, int time_tag);

/// Mean halo-mode occupation at t1: average of the theta = 0 counts in the
/// k1 and k2 bins (the bins approximate the mode volume).
Estimate mode_occupation(const EnsembleMoments& m);

/// Four-bin flux totals before and after the beam splitter, with errors.
struct FluxCheck {
  Estimate before;  // t3_pre
  Estimate after;   // t4
};
FluxCheck flux_conservation(const EnsembleMoments& m, std::size_t itheta);

// --- output writers --------------------------------------------------------

void write_dip_csv(const std::string& path, const CorrelationCurve& curve);

/// Momentum-density map (2D: full plane, 3D: equatorial slice k_collision=0);
/// columns and units per configs/SCHEMA.md. stderr_per_cell may be null.
void write_density_csv(const std::string& path, const Grid& grid,
                       const std::vector<double>& mean,
                       const std::vector<double>* stderr_per_cell);

void write_halo_track_csv(const std::string& path, const HaloWidthResult& halo);

/// The summary document cmd_analyze emits; deterministic byte-for-byte for a
/// given checkpoint (no timestamps).
std::string summary_json(const EnsembleMoments& m, const SimulationParams& params,
                         const Grid& grid);

/// Per-cell mean density and standard error from the accumulators.
std::vector<double> density_mean(const EnsembleMoments& m, int time_tag);
std::vector<double> density_stderr(const EnsembleMoments& m, int time_tag);

}  // namespace homsim

#endif
