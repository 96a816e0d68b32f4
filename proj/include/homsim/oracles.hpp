#ifndef HOMSIM_ORACLES_HPP
#define HOMSIM_ORACLES_HPP

#include "homsim/common.hpp"

#include <vector>

namespace homsim::oracles {

// Independent reference results the field simulation is checked against:
// closed forms for the two-mode squeezed-vacuum (SPDC) interferometer, an
// exact Fock-space beam-splitter computation, and an exact matrix-exponential
// solution of the pair-production equations for a spatially uniform pump.

/// Two-mode squeezed vacuum, parameterised by alpha = tanh(g t), 0 <= alpha < 1.
struct TwoModeSqueezedSpec {
  double alpha = 0.0;

  static TwoModeSqueezedSpec from_alpha(double a);
  static TwoModeSqueezedSpec from_mean_occupation(double nbar);

  /// <n> per mode = alpha^2 / (1 - alpha^2).
  double mean_occupation() const;
};

enum class SpdcBranch { dip, wings };
enum class SpdcState { full, truncated };

/// <n> = sinh^2(g t) for the undepleted-pump pair producer.
double spdc_mean_occupation(double g, double t);

/// Closed-form normalised cross-port correlation of the HOM interferometer.
/// Full state: dip = 1, wings = 2 + 1/(2<n>).
/// Truncated (|00> + alpha|11>) state, weak-gain limit: dip = 0, wings = 1/(2<n>).
double spdc_hom_g2(double nbar, SpdcBranch branch, SpdcState state);

/// V = 1 - dip/wings. Full state: 1 - 1/(2 + 1/(2<n>)); truncated state: 1.
double spdc_visibility(double nbar, SpdcState state);

enum class FockGeometry { indistinguishable, distinguishable };

struct FockHomResult {
  double dip_g2 = 0.0;
  double wings_g2 = 0.0;
  double visibility = 0.0;
  int n_max = 0;
};

/// Smallest n_max with neglected squeezed-state weight alpha^(2(n_max+1)) < eps.
int fock_truncation_order(double alpha, double eps = 1e-10);

/// Explicit Fock-space computation of the normalised cross-port correlation.
///
/// indistinguishable: the correlated pair enters the two ports of one 50:50
/// beam splitter (the theta = 0 geometry).
/// distinguishable: the pair and a vacuum pair occupy four modes; the beam
/// splitter mixes each occupied mode with vacuum (the wings geometry, where
/// the Bragg partners lie outside the halo).
double fock_hom_g2(const TwoModeSqueezedSpec& spec, int n_max, FockGeometry geometry);

/// Both branches plus visibility, with n_max from the truncation rule.
FockHomResult fock_hom_bruteforce(const TwoModeSqueezedSpec& spec);

/// Output photon-number distribution P(p, q) of the 50:50 splitter fed with
/// |n1, n2>, as a dense (dim x dim) row-major matrix with dim = n1 + n2 + 1.
/// Covers the twin-Fock fixtures (|1,1> bunches into |2,0>/|0,2>).
std::vector<double> beam_splitter_number_distribution(int n1, int n2, int* out_dim);

/// Exact moments of one (k, -k) Bogoliubov pair driven by a uniform pump at
/// rest: generator of (a_k, a^dag_-k) exponentiated numerically by scaled
/// squaring (a code path independent of the stochastic stepper).
///
/// detuning eps_k = k^2/2 + 2 U rho0 when the mean-field shift is included,
/// k^2/2 otherwise; coupling kappa = U rho0. With the shift removed, the k = 0
/// mode is gain-matched and grows as sinh^2(U rho0 t).
struct BogoliubovPairMoments {
  double n_k = 0.0;        // <a^dag_k a_k>
  cplx pair_m;             // <a_k a_-k>
  double symplectic_defect = 0.0;  // | |S11|^2 - |S12|^2 - 1 |
};

BogoliubovPairMoments bogoliubov_uniform_oracle(double k, double rho0, double U,
                                                double t,
                                                bool include_meanfield_shift = true);

struct BogoliubovOracleTable {
  std::vector<double> modes;
  std::vector<double> n_k;
  std::vector<cplx> pair_m;
};

BogoliubovOracleTable bogoliubov_uniform_oracle(const std::vector<double>& modes,
                                                double rho0, double U, double t,
                                                bool include_meanfield_shift = true);

}  // namespace homsim::oracles

#endif
