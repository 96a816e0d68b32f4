#include "homsim/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace homsim {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::shared_ptr<const Grid> Grid::make(int dims, std::array<int, 3> points,
                                       std::array<double, 3> lengths,
                                       std::vector<int> coverage_axes) {
  if (dims < 1 || dims > 3) throw ValidationError("grid dims must be 1, 2 or 3");
  for (int a = 0; a < dims; ++a) {
    if (points[a] < 8)
      throw ValidationError("grid needs at least 8 points per axis");
    if (points[a] % 2 != 0)
      throw ValidationError("grid points per axis must be even");
    if (!(lengths[a] > 0.0))
      throw ValidationError("grid lengths must be positive");
  }
  for (int a : coverage_axes) {
    if (a < 0 || a >= dims) throw ValidationError("coverage axis out of range");
    const double have = pi * points[a] / lengths[a];
    if (have < 1.5) {
      std::ostringstream os;
      os << "momentum coverage on axis " << a << " too small: required max|k| >= 1.5"
         << " (in units of k0), available " << have;
      throw ValidationError(os.str());
    }
  }

  auto grid = std::shared_ptr<Grid>(new Grid());
  grid->dims_ = dims;
  grid->points_ = points;
  grid->lengths_ = lengths;
  for (int a = dims; a < 3; ++a) {
    grid->points_[a] = 1;
    grid->lengths_[a] = 1.0;
  }

  grid->cell_count_ = 1;
  grid->cell_volume_ = 1.0;
  grid->k_cell_volume_ = 1.0;
  for (int a = 0; a < dims; ++a) {
    grid->cell_count_ *= grid->points_[a];
    grid->cell_volume_ *= grid->lengths_[a] / grid->points_[a];
    grid->k_cell_volume_ *= 2.0 * pi / grid->lengths_[a];
  }

  for (int a = 0; a < 3; ++a) {
    const int n = grid->points_[a];
    grid->k_axis_[a].resize(n);
    grid->x_axis_[a].resize(n);
    const double dk = (a < dims) ? 2.0 * pi / grid->lengths_[a] : 0.0;
    const double dx = (a < dims) ? grid->lengths_[a] / n : 0.0;
    for (int m = 0; m < n; ++m) {
      const int f = (m < (n + 1) / 2) ? m : m - n;
      grid->k_axis_[a][m] = dk * f;
      grid->x_axis_[a][m] = dx * (m - n / 2);
    }
  }

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    std::vector<int> n(grid->points_.begin(), grid->points_.begin() + dims);
    fftw_complex* buf = fftw_alloc_complex(grid->cell_count_);
    grid->plan_fwd_ = fftw_plan_dft(dims, n.data(), buf, buf, FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    grid->plan_bwd_ = fftw_plan_dft(dims, n.data(), buf, buf, FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!grid->plan_fwd_ || !grid->plan_bwd_)
      throw RuntimeFailure("FFTW plan creation failed");
  }
  return grid;
}

Grid::~Grid() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

std::size_t Grid::flat_index(int i0, int i1, int i2) const {
  return (static_cast<std::size_t>(i0) * points_[1] + i1) * points_[2] + i2;
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx;
  idx[2] = static_cast<int>(flat % points_[2]);
  flat /= points_[2];
  idx[1] = static_cast<int>(flat % points_[1]);
  idx[0] = static_cast<int>(flat / points_[1]);
  return idx;
}

std::array<double, 3> Grid::k_vector(std::size_t flat) const {
  const auto idx = unflatten(flat);
  return {k_axis_[0][idx[0]], k_axis_[1][idx[1]], k_axis_[2][idx[2]]};
}

std::array<double, 3> Grid::x_vector(std::size_t flat) const {
  const auto idx = unflatten(flat);
  return {x_axis_[0][idx[0]], x_axis_[1][idx[1]], x_axis_[2][idx[2]]};
}

std::size_t Grid::negated_index(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::array<int, 3> neg;
  for (int a = 0; a < 3; ++a) neg[a] = (points_[a] - idx[a]) % points_[a];
  return flat_index(neg[0], neg[1], neg[2]);
}

double Grid::centre_sign(std::size_t flat) const {
  const auto idx = unflatten(flat);
  return ((idx[0] + idx[1] + idx[2]) & 1) ? -1.0 : 1.0;
}

void Grid::execute_forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), p, p);
}

void Grid::execute_backward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), p, p);
}

double ComplexField::norm_squared() const {
  const double dv =
      space_ == Space::position ? grid_->cell_volume() : grid_->k_cell_volume();
  KahanSum s;
  for (const cplx& v : data_) s.add(std::norm(v));
  return s.value() * dv;
}

void forward(ComplexField& f) {
  if (f.space_ != Space::position)
    throw ValidationError("forward transform expects a position-space field");
  const Grid& g = *f.grid_;
  g.execute_forward(f.data_.data());
  const double scale =
      g.cell_volume() * std::pow(2.0 * pi, -0.5 * g.dims());
  for (std::size_t i = 0; i < f.data_.size(); ++i)
    f.data_[i] *= scale * g.centre_sign(i);
  f.space_ = Space::momentum;
}

void inverse(ComplexField& f) {
  if (f.space_ != Space::momentum)
    throw ValidationError("inverse transform expects a momentum-space field");
  const Grid& g = *f.grid_;
  const double scale =
      g.k_cell_volume() * std::pow(2.0 * pi, -0.5 * g.dims());
  for (std::size_t i = 0; i < f.data_.size(); ++i)
    f.data_[i] *= scale * g.centre_sign(i);
  g.execute_backward(f.data_.data());
  f.space_ = Space::position;
}

}  // namespace homsim
