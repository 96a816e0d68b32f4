#include "homsim/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homsim {

namespace {

std::vector<double> kinetic_table(const Grid& g) {
  std::vector<double> k2h(g.cell_count());
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const auto k = g.k_vector(i);
    k2h[i] = 0.5 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  }
  return k2h;
}

double trap_potential(const Grid& g, const SimulationParams& p, std::size_t i) {
  const auto x = g.x_vector(i);
  double v = 0.0;
  for (int a = 0; a < p.dims; ++a) {
    const double w = p.storage_omega[a];
    v += 0.5 * w * w * x[a] * x[a];
  }
  return v;
}

void check_resolution(const Grid& g, const SimulationParams& p) {
  for (int a = 0; a < p.dims; ++a) {
    const double w = p.storage_omega[a];
    if (!(w > 0.0)) throw ValidationError("trap frequencies must be positive");
    const double osc_len = 1.0 / std::sqrt(w);
    if (g.dx(a) > osc_len / 6.0) {
      std::ostringstream os;
      os << "grid does not resolve the trap ground state on axis " << a
         << ": need dx <= " << osc_len / 6.0 << " (6 points per oscillator length), "
         << "have " << g.dx(a);
      throw ValidationError(os.str());
    }
  }
}

void renormalise(ComplexField& psi, double target_norm) {
  const double n = psi.norm_squared();
  if (!(n > 0.0)) throw RuntimeFailure("field norm vanished during normalisation");
  const double s = std::sqrt(target_norm / n);
  for (auto& v : psi.data()) v *= s;
}

}  // namespace

MeanField ground_state(const SimulationParams& params, const GridPtr& grid,
                       const GroundStateOptions& opts) {
  check_resolution(*grid, params);
  const Grid& g = *grid;
  const double n_target = params.atom_number;
  const double u = params.interaction_u;

  MeanField mf(grid);
  // Thomas-Fermi seed, sqrt(max(mu - V, 0)/U); for very weak coupling the
  // oscillator Gaussian is the better start.
  const double mu_tf = params.tf_chemical_potential;
  if (u * n_target > 1.0) {
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      const double v = trap_potential(g, params, i);
      mf.psi[i] = std::sqrt(std::max(mu_tf - v, 0.0) / u);
    }
  } else {
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      const auto x = g.x_vector(i);
      double s = 0.0;
      for (int a = 0; a < params.dims; ++a)
        s += params.storage_omega[a] * x[a] * x[a];
      mf.psi[i] = std::exp(-0.5 * s);
    }
  }
  renormalise(mf.psi, n_target);

  const auto k2h = kinetic_table(g);
  const double e_scale = std::max(mu_tf, *std::max_element(params.storage_omega.begin(),
                                                           params.storage_omega.begin() +
                                                               params.dims));

  // The converged fixed point carries an O(dtau^2) splitting bias, so the
  // descent runs through a shrinking-step schedule: converge at each dtau,
  // then refine.
  int iterations_left = opts.max_iterations;
  for (const double shrink : {1.0, 0.25, 0.0625, 0.015625}) {
    const double dtau = shrink * 0.25 / e_scale;
    std::vector<double> kin_half(g.cell_count());
    for (std::size_t i = 0; i < g.cell_count(); ++i)
      kin_half[i] = std::exp(-k2h[i] * 0.5 * dtau);

    double e_prev = gpe_energy(mf, params, true);
    bool stage_converged = false;
    while (iterations_left-- > 0) {
      forward(mf.psi);
      for (std::size_t i = 0; i < g.cell_count(); ++i) mf.psi[i] *= kin_half[i];
      inverse(mf.psi);
      for (std::size_t i = 0; i < g.cell_count(); ++i) {
        const double v = trap_potential(g, params, i) + u * std::norm(mf.psi[i]);
        mf.psi[i] *= std::exp(-v * dtau);
      }
      forward(mf.psi);
      for (std::size_t i = 0; i < g.cell_count(); ++i) mf.psi[i] *= kin_half[i];
      inverse(mf.psi);
      renormalise(mf.psi, n_target);

      const double e = gpe_energy(mf, params, true);
      if (std::abs(e - e_prev) <= opts.energy_tol * std::abs(e)) {
        stage_converged = true;
        break;
      }
      e_prev = e;
    }
    if (!stage_converged)
      throw RuntimeFailure("ground state did not converge within the iteration cap");
  }
  mf.time = 0.0;
  return mf;
}

double gpe_energy(const MeanField& mf, const SimulationParams& params,
                  bool include_trap) {
  const Grid& g = *mf.psi.grid();
  ComplexField kspace = mf.psi;
  forward(kspace);
  KahanSum e_kin;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const auto k = g.k_vector(i);
    const double k2h = 0.5 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    e_kin.add(k2h * std::norm(kspace[i]));
  }
  KahanSum e_loc;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double d = std::norm(mf.psi[i]);
    double v = 0.5 * params.interaction_u * d * d;
    if (include_trap) v += trap_potential(g, params, i) * d;
    e_loc.add(v);
  }
  return e_kin.value() * g.k_cell_volume() + e_loc.value() * g.cell_volume();
}

double chemical_potential(const MeanField& mf, const SimulationParams& params) {
  const Grid& g = *mf.psi.grid();
  ComplexField kspace = mf.psi;
  forward(kspace);
  KahanSum acc;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const auto k = g.k_vector(i);
    const double k2h = 0.5 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    acc.add(k2h * std::norm(kspace[i]) * g.k_cell_volume());
  }
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double d = std::norm(mf.psi[i]);
    acc.add((trap_potential(g, params, i) * d + params.interaction_u * d * d) *
            g.cell_volume());
  }
  return acc.value() / mf.norm();
}

void split_condensate(MeanField& mf, const SimulationParams& params) {
  const Grid& g = *mf.psi.grid();
  const int axis = params.collision_axis();
  const double pre_norm = mf.psi.norm_squared();
  const double root2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const auto x = g.x_vector(i);
    mf.psi[i] *= root2 * std::cos(x[axis]);  // (e^{ik0 z} + e^{-ik0 z})/sqrt(2), k0 = 1
  }
  renormalise(mf.psi, pre_norm);
}

GpePropagator::GpePropagator(SimulationParams params, GridPtr grid)
    : params_(std::move(params)), grid_(std::move(grid)) {
  k2_half_ = kinetic_table(*grid_);
  k2_max_ = 2.0 * *std::max_element(k2_half_.begin(), k2_half_.end());
  lattice_profile_.resize(grid_->cell_count());
  const auto& kl = params_.schedule.lattice_vector;
  for (std::size_t i = 0; i < grid_->cell_count(); ++i) {
    const auto x = grid_->x_vector(i);
    lattice_profile_[i] = std::cos(2.0 * (kl[0] * x[0] + kl[1] * x[1] + kl[2] * x[2]) +
                                   params_.schedule.relative_phase);
  }
}

void GpePropagator::kinetic(MeanField& mf, double tau) const {
  if (tau == 0.0) return;
  forward(mf.psi);
  for (std::size_t i = 0; i < mf.psi.size(); ++i) {
    const double ph = -k2_half_[i] * tau;
    mf.psi[i] *= cplx(std::cos(ph), std::sin(ph));
  }
  inverse(mf.psi);
}

void GpePropagator::local_rotation(MeanField& mf, double t_mid, double h) const {
  const double vl = params_.schedule.envelope(t_mid);
  const double u = params_.interaction_u;
  for (std::size_t i = 0; i < mf.psi.size(); ++i) {
    const double v = u * std::norm(mf.psi[i]) + 0.5 * vl * lattice_profile_[i];
    const double ph = -v * h;
    mf.psi[i] *= cplx(std::cos(ph), std::sin(ph));
  }
}

void GpePropagator::step(MeanField& mf, double h) const {
  kinetic(mf, 0.5 * h);
  local_rotation(mf, mf.time + 0.5 * h, h);
  kinetic(mf, 0.5 * h);
  mf.time += h;
}

std::vector<std::pair<double, int>> step_plan(double t_begin, double t_end, double dt,
                                              std::vector<double> breakpoints) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  breakpoints.push_back(t_end);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<std::pair<double, int>> plan;
  double t = t_begin;
  for (double b : breakpoints) {
    if (b <= t + 1e-12 || b > t_end + 1e-12) continue;
    const double len = b - t;
    const int n = std::max(1, static_cast<int>(std::ceil(len / dt - 1e-9)));
    plan.emplace_back(len / n, n);
    t = b;
  }
  return plan;
}

void GpePropagator::propagate(MeanField& mf, double t_end, double dt,
                              const std::vector<double>& snapshot_times,
                              const std::function<void(const MeanField&)>& on_snapshot) const {
  if (dt > stability_dt_bound() * (1.0 + 1e-12))
    throw ValidationError(
        "time step violates the kinetic stability bound dt max|k|^2/2 <= 0.4");

  auto snapshot_due = [&](double t) {
    for (double s : snapshot_times)
      if (std::abs(s - t) < 1e-9) return true;
    return false;
  };

  if (snapshot_due(mf.time)) on_snapshot(mf);
  const auto plan =
      step_plan(mf.time, t_end, dt,
                std::vector<double>(snapshot_times.begin(), snapshot_times.end()));
  long steps_done = 0;
  for (const auto& [h, n] : plan) {
    for (int i = 0; i < n; ++i) {
      step(mf, h);
      if (++steps_done % 64 == 0 || i == n - 1) {
        const cplx probe = mf.psi[0];
        if (!std::isfinite(probe.real()) || !std::isfinite(probe.imag()) ||
            !std::isfinite(mf.norm())) {
          std::ostringstream os;
          os << "mean field became non-finite at t = " << mf.time << " (step "
             << steps_done << ")";
          throw RuntimeFailure(os.str());
        }
      }
    }
    if (snapshot_due(mf.time)) on_snapshot(mf);
  }
}

}  // namespace homsim
