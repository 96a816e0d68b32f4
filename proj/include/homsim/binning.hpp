#ifndef HOMSIM_BINNING_HPP
#define HOMSIM_BINNING_HPP

#include "homsim/grid.hpp"
#include "homsim/units.hpp"

#include <array>
#include <vector>

namespace homsim {

/// Rectangular momentum-space detection box.
struct DetectionBin {
  std::array<double, 3> centre{0.0, 0.0, 0.0};
  std::array<double, 3> half_width{0.0, 0.0, 0.0};

  /// Fraction of the grid cell centred on k_cell covered by this bin
  /// (axis-aligned overlap, exact for rectangular cells).
  double overlap_fraction(const std::array<double, 3>& k_cell,
                          const std::array<double, 3>& dk, int dims) const;

  double volume(int dims) const;
};

/**
 * The four probed momenta for scan angle theta: k3 = k_r (cos, sin, 0) in the
 * (Bragg, scan) plane, k4 = -k3, and the Bragg partners k6 = k3 - 2 k1,
 * k5 = k4 + 2 k1 = -k6 with k1 = k_r e_x. Right port {k3, k5}, left {k4, k6}.
 */
std::array<std::array<double, 3>, 4> bin_positions(double theta, double k_r);

/// Sparse cell weights of one integration region on a given grid.
struct WeightList {
  std::vector<std::uint32_t> cell;
  std::vector<double> weight;

  void push(std::uint32_t c, double w) {
    cell.push_back(c);
    weight.push_back(w);
  }
};

/**
 * Precomputed integration weights for every scan angle: the four detection
 * bins plus the two output-port unions. Coincident or partially overlapping
 * same-port bins (the theta = 0 degeneracy and its neighbourhood) are merged
 * into their set union by inclusion-exclusion so no cell is double counted.
 * Construction fails if a bin leaves the grid's momentum coverage or the two
 * ports overlap.
 */
struct BinPlan {
  std::vector<double> theta;
  std::vector<std::array<WeightList, 4>> bins;  // [theta][k3, k4, k5, k6]
  std::vector<WeightList> port_right;           // V3 u V5
  std::vector<WeightList> port_left;            // V4 u V6

  static BinPlan build(const SimulationParams& params, const Grid& grid);
  static BinPlan build(const std::vector<double>& theta_list, double k_r,
                       const std::array<double, 3>& bin_widths, const Grid& grid);
};

/// Integral of a per-cell momentum-space density over a weight list,
/// including the dK measure.
double integrate_weights(const WeightList& w, const std::vector<double>& density,
                         double k_cell_volume);

}  // namespace homsim

#endif
