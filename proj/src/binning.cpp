#include "homsim/binning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homsim {

namespace {

double axis_overlap(double cell_centre, double dv, double lo, double hi) {
  const double a = std::max(cell_centre - 0.5 * dv, lo);
  const double b = std::min(cell_centre + 0.5 * dv, hi);
  return std::max(0.0, b - a);
}

struct Box {
  std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};

  static Box of(const DetectionBin& b, int dims) {
    Box box;
    for (int a = 0; a < dims; ++a) {
      box.lo[a] = b.centre[a] - b.half_width[a];
      box.hi[a] = b.centre[a] + b.half_width[a];
    }
    return box;
  }

  bool empty(int dims) const {
    for (int a = 0; a < dims; ++a)
      if (!(hi[a] > lo[a])) return true;
    return false;
  }

  static Box intersect(const Box& x, const Box& y, int dims) {
    Box b;
    for (int a = 0; a < dims; ++a) {
      b.lo[a] = std::max(x.lo[a], y.lo[a]);
      b.hi[a] = std::min(x.hi[a], y.hi[a]);
    }
    return b;
  }

  double cell_fraction(const std::array<double, 3>& kc,
                       const std::array<double, 3>& dk, int dims) const {
    double f = 1.0;
    for (int a = 0; a < dims; ++a)
      f *= axis_overlap(kc[a], dk[a], lo[a], hi[a]) / dk[a];
    return f;
  }
};

void check_coverage(const DetectionBin& bin, const Grid& g, int dims) {
  for (int a = 0; a < dims; ++a) {
    const double span_lo = -g.kmax(a) - 0.5 * g.dk(a);
    const double span_hi = g.kmax(a) - 0.5 * g.dk(a);
    if (bin.centre[a] - bin.half_width[a] < span_lo - 1e-12 ||
        bin.centre[a] + bin.half_width[a] > span_hi + 1e-12) {
      std::ostringstream os;
      os << "detection bin exits the grid momentum coverage on axis " << a
         << ": bin [" << bin.centre[a] - bin.half_width[a] << ", "
         << bin.centre[a] + bin.half_width[a] << "], grid [" << span_lo << ", "
         << span_hi << "]";
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

double DetectionBin::overlap_fraction(const std::array<double, 3>& k_cell,
                                      const std::array<double, 3>& dk,
                                      int dims) const {
  return Box::of(*this, dims).cell_fraction(k_cell, dk, dims);
}

double DetectionBin::volume(int dims) const {
  double v = 1.0;
  for (int a = 0; a < dims; ++a) v *= 2.0 * half_width[a];
  return v;
}

std::array<std::array<double, 3>, 4> bin_positions(double theta, double k_r) {
  const double c = std::cos(theta), s = std::sin(theta);
  const std::array<double, 3> k3{k_r * c, k_r * s, 0.0};
  const std::array<double, 3> k4{-k_r * c, -k_r * s, 0.0};
  const std::array<double, 3> k6{k_r * (c - 2.0), k_r * s, 0.0};
  const std::array<double, 3> k5{k_r * (2.0 - c), -k_r * s, 0.0};
  return {k3, k4, k5, k6};
}

BinPlan BinPlan::build(const SimulationParams& params, const Grid& grid) {
  return build(params.theta_list, params.halo_radius, params.bin_widths, grid);
}

BinPlan BinPlan::build(const std::vector<double>& theta_list, double k_r,
                       const std::array<double, 3>& bin_widths, const Grid& grid) {
  const int dims = grid.dims();
  BinPlan plan;
  plan.theta = theta_list;

  std::array<double, 3> dk{1.0, 1.0, 1.0};
  for (int a = 0; a < dims; ++a) dk[a] = grid.dk(a);
  std::array<double, 3> half{0.0, 0.0, 0.0};
  for (int a = 0; a < dims; ++a) half[a] = 0.5 * bin_widths[a];

  for (double theta : theta_list) {
    const auto centres = bin_positions(theta, k_r);
    std::array<DetectionBin, 4> bins;
    std::array<Box, 4> boxes;
    for (int i = 0; i < 4; ++i) {
      bins[i] = DetectionBin{centres[i], half};
      check_coverage(bins[i], grid, dims);
      boxes[i] = Box::of(bins[i], dims);
    }

    // Right port holds bins {k3, k5} (indices 0, 2), left {k4, k6} (1, 3).
    // Opposite-port boxes must stay disjoint or the normally ordered product
    // estimator would need subtraction terms.
    for (int ri : {0, 2}) {
      for (int li : {1, 3}) {
        if (!Box::intersect(boxes[ri], boxes[li], dims).empty(dims)) {
          std::ostringstream os;
          os << "right/left detection bins overlap at theta = " << theta;
          throw ValidationError(os.str());
        }
      }
    }

    std::array<WeightList, 4> wl;
    WeightList wr, wlft;
    const Box r_olap = Box::intersect(boxes[0], boxes[2], dims);
    const Box l_olap = Box::intersect(boxes[1], boxes[3], dims);
    const bool r_merged = !r_olap.empty(dims);
    const bool l_merged = !l_olap.empty(dims);

    for (std::size_t cidx = 0; cidx < grid.cell_count(); ++cidx) {
      const auto kc = grid.k_vector(cidx);
      std::array<double, 4> f{};
      bool any = false;
      for (int i = 0; i < 4; ++i) {
        f[i] = boxes[i].cell_fraction(kc, dk, dims);
        if (f[i] > 0.0) any = true;
      }
      if (!any) continue;
      for (int i = 0; i < 4; ++i)
        if (f[i] > 0.0) wl[i].push(static_cast<std::uint32_t>(cidx), f[i]);
      double fr = f[0] + f[2];
      if (r_merged) fr -= r_olap.cell_fraction(kc, dk, dims);
      double fl = f[1] + f[3];
      if (l_merged) fl -= l_olap.cell_fraction(kc, dk, dims);
      if (fr > 0.0) wr.push(static_cast<std::uint32_t>(cidx), fr);
      if (fl > 0.0) wlft.push(static_cast<std::uint32_t>(cidx), fl);
    }
    plan.bins.push_back(std::move(wl));
    plan.port_right.push_back(std::move(wr));
    plan.port_left.push_back(std::move(wlft));
  }
  return plan;
}

double integrate_weights(const WeightList& w, const std::vector<double>& density,
                         double k_cell_volume) {
  KahanSum s;
  for (std::size_t i = 0; i < w.cell.size(); ++i)
    s.add(w.weight[i] * density[w.cell[i]]);
  return s.value() * k_cell_volume;
}

}  // namespace homsim
