#ifndef HOMSIM_BRAGG_HPP
#define HOMSIM_BRAGG_HPP

#include "homsim/common.hpp"

#include <array>
#include <vector>

namespace homsim {

/**
 * One Gaussian lattice-depth hump, V(t) = depth * exp(-(t-centre)^2 / (2 tau^2)),
 * hard-truncated beyond 6 tau from the centre (area error < 1e-8 of the pulse,
 * and it lets the stepper skip lattice evaluation outside pulses).
 *
 * The pulse area uses the two-mode Rabi frequency Omega = V_L / 2 (hbar = 1),
 * the convention under which tau_pi = sqrt(2 pi) / depth gives exactly pi:
 *     area = integral Omega dt = depth * tau * sqrt(2 pi) / 2.
 */
struct PulseSegment {
  double centre = 0.0;  // internal time units
  double tau = 0.0;     // rms duration
  double depth = 0.0;   // peak lattice depth V0 (internal energy units)
  double area = 0.0;    // rad

  static PulseSegment from_area(double centre, double tau, double area);
  static PulseSegment from_depth(double centre, double tau, double depth);
};

double pulse_area(const PulseSegment& s);

/// Lattice formed by two interfering lasers plus its pulse envelope timeline.
struct PulseSchedule {
  std::array<double, 3> lattice_vector{0.0, 0.0, 0.0};  // k_L, |k_L| = k_r
  double relative_phase = 0.0;                          // rad
  std::vector<PulseSegment> segments;

  /// Sum of the (truncated) Gaussian envelopes at time t.
  double envelope(double t) const;

  /// V_BP(r, t) = (1/2) V_L(t) cos(2 k_L . r + phase).
  double potential(double t, const std::array<double, 3>& r) const;

  /// True when any segment envelope is non-zero at t.
  bool active(double t) const;

  /// Checks |k_L| = k_r and each segment's depth/tau/area consistency.
  void validate(double k_r) const;
};

/// Kinetic-energy mismatch of the lattice-coupled pair (k, k - 2 k_L):
/// (|k|^2 - |k - 2 k_L|^2) / 2 in internal units.
double bragg_detuning(const std::array<double, 3>& k,
                      const std::array<double, 3>& k_lattice);

/// Fraction transferred between two lattice-coupled modes by one Gaussian
/// segment of the given area and rms duration at fixed detuning.
///
/// Resonant case: sin^2(area / 2) in closed form. Detuned case: direct RK4
/// integration of the two-level Schroedinger equation over [-6 tau, 6 tau];
/// this routine is itself a micro-oracle for the field-level pulse tests.
double two_mode_rabi_transfer(double area, double detuning, double tau);

}  // namespace homsim

#endif
