#include "homsim/bragg.hpp"

#include <cmath>
#include <sstream>

namespace homsim {

namespace {
constexpr double trunc_sigmas = 6.0;
const double sqrt_2pi = std::sqrt(2.0 * pi);
}  // namespace

PulseSegment PulseSegment::from_area(double centre, double tau, double area) {
  if (!(tau > 0.0)) throw ValidationError("pulse segment needs tau > 0");
  if (area < 0.0) throw ValidationError("pulse area must be non-negative");
  PulseSegment s;
  s.centre = centre;
  s.tau = tau;
  s.area = area;
  s.depth = 2.0 * area / (tau * sqrt_2pi);
  return s;
}

PulseSegment PulseSegment::from_depth(double centre, double tau, double depth) {
  if (!(tau > 0.0)) throw ValidationError("pulse segment needs tau > 0");
  if (depth < 0.0) throw ValidationError("pulse depth must be non-negative");
  PulseSegment s;
  s.centre = centre;
  s.tau = tau;
  s.depth = depth;
  s.area = 0.5 * depth * tau * sqrt_2pi;
  return s;
}

double pulse_area(const PulseSegment& s) { return 0.5 * s.depth * s.tau * sqrt_2pi; }

double PulseSchedule::envelope(double t) const {
  double v = 0.0;
  for (const auto& s : segments) {
    const double u = t - s.centre;
    if (std::abs(u) > trunc_sigmas * s.tau) continue;
    v += s.depth * std::exp(-u * u / (2.0 * s.tau * s.tau));
  }
  return v;
}

double PulseSchedule::potential(double t, const std::array<double, 3>& r) const {
  const double vl = envelope(t);
  if (vl == 0.0) return 0.0;
  const double phase = 2.0 * (lattice_vector[0] * r[0] + lattice_vector[1] * r[1] +
                              lattice_vector[2] * r[2]) +
                       relative_phase;
  return 0.5 * vl * std::cos(phase);
}

bool PulseSchedule::active(double t) const {
  for (const auto& s : segments)
    if (std::abs(t - s.centre) <= trunc_sigmas * s.tau && s.depth != 0.0) return true;
  return false;
}

void PulseSchedule::validate(double k_r) const {
  const double kl = std::sqrt(lattice_vector[0] * lattice_vector[0] +
                              lattice_vector[1] * lattice_vector[1] +
                              lattice_vector[2] * lattice_vector[2]);
  if (std::abs(kl - k_r) > 1e-12 * std::max(1.0, k_r)) {
    std::ostringstream os;
    os << "lattice vector magnitude " << kl << " must equal the halo radius " << k_r;
    throw ValidationError(os.str());
  }
  for (const auto& s : segments) {
    if (!(s.tau > 0.0)) throw ValidationError("pulse segment needs tau > 0");
    const double a = pulse_area(s);
    if (std::abs(a - s.area) > 1e-9 * std::max(1.0, s.area))
      throw ValidationError("pulse segment depth/tau pair inconsistent with its area");
  }
}

double bragg_detuning(const std::array<double, 3>& k,
                      const std::array<double, 3>& k_lattice) {
  double k2 = 0.0, p2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    k2 += k[a] * k[a];
    const double pa = k[a] - 2.0 * k_lattice[a];
    p2 += pa * pa;
  }
  return 0.5 * (k2 - p2);
}

double two_mode_rabi_transfer(double area, double detuning, double tau) {
  if (area < 0.0) throw ValidationError("pulse area must be non-negative");
  if (area == 0.0) return 0.0;
  if (detuning == 0.0) {
    const double s = std::sin(0.5 * area);
    return s * s;
  }
  if (!(tau > 0.0)) throw ValidationError("detuned transfer needs tau > 0");

  // i c' = H(t) c with H = [[0, Omega/2], [Omega/2, delta]],
  // Omega(t) = Omega0 exp(-t^2 / 2 tau^2), Omega0 = area / (tau sqrt(2 pi)).
  const double omega0 = area / (tau * sqrt_2pi);
  const int n_steps = 8192;
  const double t0 = -trunc_sigmas * tau;
  const double h = 2.0 * trunc_sigmas * tau / n_steps;

  auto rhs = [&](double t, const std::array<cplx, 2>& c) {
    const double om = 0.5 * omega0 * std::exp(-t * t / (2.0 * tau * tau));
    const cplx mi(0.0, -1.0);
    return std::array<cplx, 2>{mi * (om * c[1]), mi * (om * c[0] + detuning * c[1])};
  };

  std::array<cplx, 2> c{1.0, 0.0};
  double t = t0;
  for (int i = 0; i < n_steps; ++i) {
    const auto k1 = rhs(t, c);
    const auto k2 = rhs(t + 0.5 * h, {c[0] + 0.5 * h * k1[0], c[1] + 0.5 * h * k1[1]});
    const auto k3 = rhs(t + 0.5 * h, {c[0] + 0.5 * h * k2[0], c[1] + 0.5 * h * k2[1]});
    const auto k4 = rhs(t + h, {c[0] + h * k3[0], c[1] + h * k3[1]});
    for (int j = 0; j < 2; ++j)
      c[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    t += h;
  }
  return std::norm(c[1]) / (std::norm(c[0]) + std::norm(c[1]));
}

}  // namespace homsim
