#ifndef HOMSIM_GRID_HPP
#define HOMSIM_GRID_HPP

#include "homsim/common.hpp"

#include <array>
#include <memory>
#include <vector>

namespace homsim {

/**
 * Periodic rectangular grid with its conjugate momentum lattice.
 *
 * Coordinates are cell-centred on x_j = (j - n/2) dx, so the box is
 * [-L/2, L/2) per axis. The momentum lattice k_m = 2 pi f(m) / L uses the
 * standard FFT wraparound ordering (f(m) = m for m < n/2, m - n otherwise).
 *
 * Transforms follow the unitary-in-integral convention
 *     F(k) = (2 pi)^(-d/2) integral f(x) exp(-i k x) dx,
 * so that sum |f|^2 dV = sum |F|^2 dK exactly up to rounding and momentum
 * densities integrate to particle number with the same measure the detection
 * bins use.
 *
 * Grids are immutable and shared; transforms are reentrant (the FFTW plans
 * are created once at construction and executed with the new-array
 * interface), so concurrent transforms on distinct fields are safe.
 */
class Grid {
 public:
  /// Axes whose momentum coverage must reach |k| >= 1.5 (internal units) may
  /// be listed in coverage_axes; make() fails otherwise.
  static std::shared_ptr<const Grid> make(int dims, std::array<int, 3> points,
                                          std::array<double, 3> lengths,
                                          std::vector<int> coverage_axes = {});

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int dims() const { return dims_; }
  int points(int axis) const { return points_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double dx(int axis) const { return lengths_[axis] / points_[axis]; }
  double dk(int axis) const { return 2.0 * pi / lengths_[axis]; }
  double kmax(int axis) const { return pi * points_[axis] / lengths_[axis]; }

  std::size_t cell_count() const { return cell_count_; }
  double cell_volume() const { return cell_volume_; }
  double k_cell_volume() const { return k_cell_volume_; }

  const std::vector<double>& k_axis(int axis) const { return k_axis_[axis]; }
  const std::vector<double>& x_axis(int axis) const { return x_axis_[axis]; }

  /// Flat index layout is row-major over (axis0, axis1, axis2).
  std::size_t flat_index(int i0, int i1, int i2) const;
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::array<double, 3> k_vector(std::size_t flat) const;
  std::array<double, 3> x_vector(std::size_t flat) const;

  /// Flat index of the lattice point at -k (Nyquist rows map to themselves).
  std::size_t negated_index(std::size_t flat) const;

  /// In-place unnormalised FFT execution used by ComplexField transforms.
  void execute_forward(cplx* data) const;
  void execute_backward(cplx* data) const;

  /// (-1)^(index parity) factor that recentres phases for the offset origin.
  double centre_sign(std::size_t flat) const;

 private:
  Grid() = default;

  int dims_ = 0;
  std::array<int, 3> points_{1, 1, 1};
  std::array<double, 3> lengths_{1.0, 1.0, 1.0};
  std::size_t cell_count_ = 0;
  double cell_volume_ = 0.0;
  double k_cell_volume_ = 0.0;
  std::array<std::vector<double>, 3> k_axis_;
  std::array<std::vector<double>, 3> x_axis_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

enum class Space { position, momentum };

/// Complex amplitude per grid point, tagged with the space it lives in.
class ComplexField {
 public:
  ComplexField(GridPtr grid, Space space)
      : grid_(std::move(grid)), space_(space), data_(grid_->cell_count()) {}

  const GridPtr& grid() const { return grid_; }
  Space space() const { return space_; }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }
  std::size_t size() const { return data_.size(); }

  void fill(cplx v) { std::fill(data_.begin(), data_.end(), v); }

  /// sum |f|^2 dV (position) or sum |F|^2 dK (momentum).
  double norm_squared() const;

  friend void forward(ComplexField& f);
  friend void inverse(ComplexField& f);

 private:
  GridPtr grid_;
  Space space_;
  std::vector<cplx> data_;
};

/// Position -> momentum, in place. Throws on a space-tag mismatch.
void forward(ComplexField& f);
/// Momentum -> position, in place. Throws on a space-tag mismatch.
void inverse(ComplexField& f);

}  // namespace homsim

#endif
