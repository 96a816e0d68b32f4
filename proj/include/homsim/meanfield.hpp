#ifndef HOMSIM_MEANFIELD_HPP
#define HOMSIM_MEANFIELD_HPP

#include "homsim/grid.hpp"
#include "homsim/units.hpp"

#include <functional>
#include <vector>

namespace homsim {

/// Condensate amplitude psi(r, t) with its particle-number norm.
struct MeanField {
  ComplexField psi;
  double time = 0.0;

  explicit MeanField(GridPtr grid) : psi(std::move(grid), Space::position) {}

  double norm() const { return psi.norm_squared(); }
};

struct GroundStateOptions {
  double energy_tol = 1e-11;  // relative energy change per iteration at exit
  int max_iterations = 40000;
};

/**
 * Lowest-energy stationary state of the trapped GPE with norm N, by
 * imaginary-time split-stepping from a Thomas-Fermi seed with renormalisation
 * every step. Converges on the energy, which decreases monotonically.
 *
 * Fails if the grid does not resolve the trap (needs >= 6 points per
 * oscillator length per axis) or the iteration cap is hit.
 */
MeanField ground_state(const SimulationParams& params, const GridPtr& grid,
                       const GroundStateOptions& opts = {});

/// E[psi] = integral |grad psi|^2/2 + V_trap |psi|^2 + (U/2)|psi|^4.
double gpe_energy(const MeanField& mf, const SimulationParams& params,
                  bool include_trap);

/// mu = (1/N) integral |grad psi|^2/2 + V_trap |psi|^2 + U |psi|^4.
double chemical_potential(const MeanField& mf, const SimulationParams& params);

/**
 * Instantaneous splitting at t = 0: multiplies the trapped ground state by
 * (exp(i k0 z) + exp(-i k0 z)) / sqrt(2) along the collision axis and
 * restores the exact pre-split norm against the residual 2 k0 Fourier weight
 * of the envelope.
 */
void split_condensate(MeanField& mf, const SimulationParams& params);

/**
 * Second-order split-step propagation of
 *   i dpsi/dt = [ -lap/2 + U |psi|^2 + V_BP(r, t) ] psi
 * (trap off after the splitting). The lattice profile cos(2 k_L x) is
 * precomputed once; the envelope is sampled at step midpoints.
 */
class GpePropagator {
 public:
  GpePropagator(SimulationParams params, GridPtr grid);

  /// One Strang step of size h starting at mf.time.
  void step(MeanField& mf, double h) const;

  /// Exact kinetic phase advance by tau (used to fuse adjacent half-steps).
  void kinetic(MeanField& mf, double tau) const;

  /// Phase rotation by the local potential over h, envelope sampled at t_mid.
  void local_rotation(MeanField& mf, double t_mid, double h) const;

  /**
   * Propagates to t_end with steps of at most dt, landing exactly on every
   * requested snapshot time; snapshots are delivered through the callback.
   * Checks the kinetic stability bound dt max|k|^2/2 <= 0.4 and aborts with a
   * diagnostic if the field goes non-finite.
   */
  void propagate(MeanField& mf, double t_end, double dt,
                 const std::vector<double>& snapshot_times,
                 const std::function<void(const MeanField&)>& on_snapshot) const;

  const std::vector<double>& lattice_profile() const { return lattice_profile_; }
  double stability_dt_bound() const { return 0.8 / k2_max_; }

 private:
  SimulationParams params_;
  GridPtr grid_;
  std::vector<double> k2_half_;        // |k|^2 / 2 per cell
  std::vector<double> lattice_profile_;  // cos(2 k_L . r + phase) per cell
  double k2_max_ = 0.0;
};

/// Step sizes that tile [t_begin, t_end] with h <= dt, landing exactly on
/// each interior breakpoint. Shared by the mean-field and stochastic drivers.
std::vector<std::pair<double, int>> step_plan(double t_begin, double t_end,
                                              double dt,
                                              std::vector<double> breakpoints);

}  // namespace homsim

#endif
