#ifndef HOMSIM_STOCHASTIC_HPP
#define HOMSIM_STOCHASTIC_HPP

#include "homsim/binning.hpp"
#include "homsim/grid.hpp"
#include "homsim/meanfield.hpp"
#include "homsim/units.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace homsim {

/**
 * The two independent positive-P fields of one trajectory: psi estimates the
 * fluctuation field and psi_tilde its conjugate, so ensemble averages of
 * psi_tilde psi products estimate normally ordered operator moments. Both
 * start identically zero (vacuum).
 */
struct StochasticFieldPair {
  ComplexField psi;
  ComplexField psi_tilde;
  std::uint64_t trajectory_id = 0;
  TrajectoryRng rng;
  bool flagged = false;
  std::string flag_reason;

  StochasticFieldPair(GridPtr grid, std::uint64_t master_seed, std::uint64_t id)
      : psi(grid, Space::position),
        psi_tilde(grid, Space::position),
        trajectory_id(id),
        rng(master_seed, id) {}
};

/// Shared per-step local-stage data, computed once per mean-field state:
/// the exact 2x2 local propagator (S21 = conj(S12), S22 = conj(S11)) and the
/// additive noise amplitude per cell.
struct LocalStage {
  std::vector<cplx> s11;
  std::vector<cplx> s12;
  std::vector<cplx> noise_amp;         // sqrt(-i Ups h / (2 dV)); tilde uses conj
  std::vector<std::uint32_t> active;  // cells with non-negligible |Ups|
  double h = 0.0;
};

/**
 * Split-step integrator for the linear fluctuation equations
 *   d psi       = -i [ (-lap/2 + 2U|psi_mf|^2 + V_BP) psi + Ups psi_tilde ] dt + dW
 *   d psi_tilde = +i [ (-lap/2 + 2U|psi_mf|^2 + V_BP) psi_tilde + Ups* psi ] dt + dW~
 * with Ups = U psi_mf^2 and the positive-P diffusion
 *   <dW dW> = -i Ups dt / dV,   <dW~ dW~> = +i Ups* dt / dV,   <dW dW~> = 0,
 * realised as one real Gaussian per cell per field with complex amplitude.
 * The noise is additive, so Ito and Stratonovich coincide.
 *
 * The kinetic stage is exact in momentum space; the local stage applies the
 * exact 2x2 exponential of the frozen midpoint coefficients with a symmetric
 * half-noise kick on either side.
 */
class SdeStepper {
 public:
  SdeStepper(const SimulationParams& params, GridPtr grid);

  /// Exact kinetic advance by tau: psi gains e^{-i k^2 tau / 2}, psi_tilde
  /// the conjugate phase.
  void kinetic(StochasticFieldPair& pair, double tau);

  /**
   * Builds the shared local stage for one step of size h from the mean field
   * at the step midpoint chain state. `psi_mf` is the (position-space) mean
   * field before its own local rotation; `envelope_mid` the lattice depth
   * V_L at the midpoint time.
   */
  LocalStage make_local_stage(const ComplexField& psi_mf, double envelope_mid,
                              double h) const;

  /// Applies noise + exact local propagator + noise.
  void local(StochasticFieldPair& pair, const LocalStage& stage) const;

  /// Flags the pair if a field went non-finite or beyond the overflow cap.
  void check_health(StochasticFieldPair& pair, double t) const;

  const GridPtr& grid() const { return grid_; }

 private:
  const std::vector<cplx>& kinetic_table(double tau);

  SimulationParams params_;
  GridPtr grid_;
  std::vector<double> k2_half_;
  std::vector<double> lattice_profile_;
  std::vector<std::pair<double, std::vector<cplx>>> kin_cache_;
};

/// One trajectory's moment contributions (complex per-cell density estimators
/// v(k) = psi_tilde(-k) psi(k) and the binned counts / port products).
struct TrajectoryMoments {
  bool flagged = false;
  std::string flag_reason;
  std::vector<cplx> density_t1;  // per cell, density units
  std::vector<cplx> density_t4;
  std::vector<cplx> bins_t1;     // [theta][4]
  std::vector<cplx> bins_t3pre;
  std::vector<cplx> bins_t4;
  std::vector<cplx> port_r_t4;   // [theta]
  std::vector<cplx> port_l_t4;
  std::vector<cplx> port_rl_t4;
};

/// Number of jackknife blocks; trajectory id modulo this selects the block.
inline constexpr std::size_t jackknife_blocks = 100;

/**
 * Mergeable ensemble accumulators (compensated summation throughout):
 * full-grid momentum density sums at t1 and t4 (re, im, re^2 per cell),
 * binned counts at t1 / t3_pre / t4 with square sums, four-bin flux square
 * sums, and per-jackknife-block port sums (N_R, N_L, N_R N_L) at t4.
 */
class EnsembleMoments {
 public:
  EnsembleMoments() = default;
  EnsembleMoments(std::size_t n_cells, std::size_t n_theta);

  void accumulate(const TrajectoryMoments& tm, std::uint64_t trajectory_id);
  void merge(const EnsembleMoments& other);

  std::uint64_t trajectories() const { return n_traj_; }
  std::uint64_t flagged() const { return n_flagged_; }
  std::size_t cells() const { return n_cells_; }
  std::size_t thetas() const { return n_theta_; }
  double flagged_fraction() const {
    const auto total = n_traj_ + n_flagged_;
    return total == 0 ? 0.0 : static_cast<double>(n_flagged_) / total;
  }

  // Flat block views for checkpointing; layout documented in checkpoint.cpp.
  std::vector<std::pair<std::string, const std::vector<double>*>> blocks() const;
  void load_block(const std::string& name, const std::vector<double>& data);
  void set_counts(std::uint64_t traj, std::uint64_t flagged) {
    n_traj_ = traj;
    n_flagged_ = flagged;
  }

  // --- analysis accessors --------------------------------------------------
  cplx density_sum(int time_tag, std::size_t cell) const;   // 1 or 4
  double density_sumsq(int time_tag, std::size_t cell) const;
  cplx bin_sum(int time_tag, std::size_t itheta, int bin) const;  // 1, 3 (=t3pre), 4
  double bin_sumsq(int time_tag, std::size_t itheta, int bin) const;
  double flux_sumsq(int time_tag, std::size_t itheta) const;      // 3 or 4
  cplx jk_port_r(std::size_t itheta, std::size_t block) const;
  cplx jk_port_l(std::size_t itheta, std::size_t block) const;
  cplx jk_port_rl(std::size_t itheta, std::size_t block) const;
  double jk_count(std::size_t block) const;

 private:
  std::size_t n_cells_ = 0;
  std::size_t n_theta_ = 0;
  std::uint64_t n_traj_ = 0;
  std::uint64_t n_flagged_ = 0;

  KahanVector density_t1_, density_t4_;        // [cell][re, im, resq]
  KahanVector bins_t1_, bins_t3pre_, bins_t4_;  // [theta][4][re, im]
  KahanVector binsq_t1_, binsq_t3pre_, binsq_t4_;  // [theta][4]
  KahanVector fluxsq_t3pre_, fluxsq_t4_;           // [theta]
  KahanVector jk_t4_;                              // [theta][block][3][re, im]
  KahanVector jk_counts_;                          // [block]
};

/**
 * Density estimator v(k) for one pair: transforms copies of both fields to
 * momentum space and forms psi_tilde(-k) psi(k) per cell (the creation-field
 * transform carries the opposite wave, hence the index negation).
 */
std::vector<cplx> momentum_density_estimator(const StochasticFieldPair& pair);

}  // namespace homsim

#endif
