#include "homsim/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homsim {

namespace {

constexpr double overflow_cap = 1e12;       // |field|^2 cap before flagging
constexpr double noise_floor_ratio = 1e-24;  // skip cells with |Ups| below this * max

// cosh-like and sinh-like entire functions of x = (lambda h)^2, so the same
// code path covers gain (x > 0), rotation (x < 0) and the crossover.
void c_and_d(double x, double& c, double& d_over_h) {
  if (std::abs(x) < 1e-10) {
    c = 1.0 + 0.5 * x + x * x / 24.0;
    d_over_h = 1.0 + x / 6.0 + x * x / 120.0;
    return;
  }
  if (x > 0.0) {
    const double r = std::sqrt(x);
    c = std::cosh(r);
    d_over_h = std::sinh(r) / r;
  } else {
    const double r = std::sqrt(-x);
    c = std::cos(r);
    d_over_h = std::sin(r) / r;
  }
}

}  // namespace

SdeStepper::SdeStepper(const SimulationParams& params, GridPtr grid)
    : params_(params), grid_(std::move(grid)) {
  const Grid& g = *grid_;
  k2_half_.resize(g.cell_count());
  lattice_profile_.resize(g.cell_count());
  const auto& kl = params_.schedule.lattice_vector;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const auto k = g.k_vector(i);
    k2_half_[i] = 0.5 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    const auto x = g.x_vector(i);
    lattice_profile_[i] =
        std::cos(2.0 * (kl[0] * x[0] + kl[1] * x[1] + kl[2] * x[2]) +
                 params_.schedule.relative_phase);
  }
}

const std::vector<cplx>& SdeStepper::kinetic_table(double tau) {
  for (const auto& entry : kin_cache_)
    if (entry.first == tau) return entry.second;
  std::vector<cplx> tab(k2_half_.size());
  for (std::size_t i = 0; i < tab.size(); ++i) {
    const double ph = -k2_half_[i] * tau;
    tab[i] = cplx(std::cos(ph), std::sin(ph));
  }
  kin_cache_.emplace_back(tau, std::move(tab));
  return kin_cache_.back().second;
}

void SdeStepper::kinetic(StochasticFieldPair& pair, double tau) {
  if (tau == 0.0 || pair.flagged) return;
  const auto& tab = kinetic_table(tau);
  forward(pair.psi);
  for (std::size_t i = 0; i < tab.size(); ++i) pair.psi[i] *= tab[i];
  inverse(pair.psi);
  forward(pair.psi_tilde);
  for (std::size_t i = 0; i < tab.size(); ++i) pair.psi_tilde[i] *= std::conj(tab[i]);
  inverse(pair.psi_tilde);
}

LocalStage SdeStepper::make_local_stage(const ComplexField& psi_mf,
                                        double envelope_mid, double h) const {
  const Grid& g = *grid_;
  const double u = params_.interaction_u;
  const double dv = g.cell_volume();
  LocalStage st;
  st.h = h;
  st.s11.resize(g.cell_count());
  st.s12.resize(g.cell_count());
  st.noise_amp.assign(g.cell_count(), cplx(0.0, 0.0));

  // First pass: coefficients and the |Ups| scale.
  std::vector<cplx> ups(g.cell_count());
  std::vector<double> c_diag(g.cell_count());
  double ups_max = 0.0;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const cplx p = psi_mf[i];
    const double dens = std::norm(p);
    const double v_bp = 0.5 * envelope_mid * lattice_profile_[i];
    c_diag[i] = 2.0 * u * dens + v_bp;
    // Evaluate Ups at the midpoint of the mean field's own local rotation so
    // the frozen-coefficient step stays centred.
    const double theta_half = -0.5 * (u * dens + v_bp) * h;
    const cplx p_mid = p * cplx(std::cos(theta_half), std::sin(theta_half));
    ups[i] = u * p_mid * p_mid;
    ups_max = std::max(ups_max, std::abs(ups[i]));
  }

  const double floor = noise_floor_ratio * ups_max;
  const cplx mi(0.0, -1.0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const double au = std::abs(ups[i]);
    const double x = (au * au - c_diag[i] * c_diag[i]) * h * h;
    double cc, d_over_h;
    c_and_d(x, cc, d_over_h);
    const double d = d_over_h * h;
    st.s11[i] = cplx(cc, -c_diag[i] * d);
    st.s12[i] = mi * ups[i] * d;
    if (au > floor && au > 0.0) {
      st.noise_amp[i] = std::sqrt(mi * ups[i] * (0.5 * h / dv));
      st.active.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return st;
}

void SdeStepper::local(StochasticFieldPair& pair, const LocalStage& stage) const {
  if (pair.flagged) return;
  auto& psi = pair.psi.data();
  auto& til = pair.psi_tilde.data();

  for (std::uint32_t i : stage.active) {
    psi[i] += stage.noise_amp[i] * pair.rng.normal();
    til[i] += std::conj(stage.noise_amp[i]) * pair.rng.normal();
  }
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const cplx a = psi[i], b = til[i];
    psi[i] = stage.s11[i] * a + stage.s12[i] * b;
    til[i] = std::conj(stage.s12[i]) * a + std::conj(stage.s11[i]) * b;
  }
  for (std::uint32_t i : stage.active) {
    psi[i] += stage.noise_amp[i] * pair.rng.normal();
    til[i] += std::conj(stage.noise_amp[i]) * pair.rng.normal();
  }
}

void SdeStepper::check_health(StochasticFieldPair& pair, double t) const {
  if (pair.flagged) return;
  double peak = 0.0;
  for (const cplx& v : pair.psi.data()) peak = std::max(peak, std::norm(v));
  for (const cplx& v : pair.psi_tilde.data()) peak = std::max(peak, std::norm(v));
  if (!std::isfinite(peak) || peak > overflow_cap) {
    pair.flagged = true;
    std::ostringstream os;
    os << "trajectory " << pair.trajectory_id << " diverged at t = " << t
       << " (peak |field|^2 = " << peak << ")";
    pair.flag_reason = os.str();
  }
}

std::vector<cplx> momentum_density_estimator(const StochasticFieldPair& pair) {
  const Grid& g = *pair.psi.grid();
  ComplexField pk = pair.psi;
  ComplexField tk = pair.psi_tilde;
  forward(pk);
  forward(tk);
  std::vector<cplx> v(g.cell_count());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = tk[g.negated_index(i)] * pk[i];
  return v;
}

EnsembleMoments::EnsembleMoments(std::size_t n_cells, std::size_t n_theta)
    : n_cells_(n_cells), n_theta_(n_theta) {
  density_t1_.resize(3 * n_cells);
  density_t4_.resize(3 * n_cells);
  bins_t1_.resize(8 * n_theta);
  bins_t3pre_.resize(8 * n_theta);
  bins_t4_.resize(8 * n_theta);
  binsq_t1_.resize(4 * n_theta);
  binsq_t3pre_.resize(4 * n_theta);
  binsq_t4_.resize(4 * n_theta);
  fluxsq_t3pre_.resize(n_theta);
  fluxsq_t4_.resize(n_theta);
  jk_t4_.resize(6 * jackknife_blocks * n_theta);
  jk_counts_.resize(jackknife_blocks);
}

namespace {

void fold_density(KahanVector& acc, const std::vector<cplx>& v) {
  for (std::size_t c = 0; c < v.size(); ++c) {
    acc.add(3 * c + 0, v[c].real());
    acc.add(3 * c + 1, v[c].imag());
    acc.add(3 * c + 2, v[c].real() * v[c].real());
  }
}

void fold_bins(KahanVector& sums, KahanVector& sqs, KahanVector& fluxsq,
               const std::vector<cplx>& bins, std::size_t n_theta,
               bool with_flux) {
  for (std::size_t t = 0; t < n_theta; ++t) {
    double flux = 0.0;
    for (int b = 0; b < 4; ++b) {
      const cplx v = bins[4 * t + b];
      sums.add(8 * t + 2 * b + 0, v.real());
      sums.add(8 * t + 2 * b + 1, v.imag());
      sqs.add(4 * t + b, v.real() * v.real());
      flux += v.real();
    }
    if (with_flux) fluxsq.add(t, flux * flux);
  }
}

}  // namespace

void EnsembleMoments::accumulate(const TrajectoryMoments& tm,
                                 std::uint64_t trajectory_id) {
  if (tm.flagged) {
    ++n_flagged_;
    return;
  }
  fold_density(density_t1_, tm.density_t1);
  fold_density(density_t4_, tm.density_t4);
  fold_bins(bins_t1_, binsq_t1_, fluxsq_t3pre_, tm.bins_t1, n_theta_, false);
  fold_bins(bins_t3pre_, binsq_t3pre_, fluxsq_t3pre_, tm.bins_t3pre, n_theta_, true);
  fold_bins(bins_t4_, binsq_t4_, fluxsq_t4_, tm.bins_t4, n_theta_, true);

  const std::size_t block = trajectory_id % jackknife_blocks;
  for (std::size_t t = 0; t < n_theta_; ++t) {
    const std::size_t base = 6 * (t * jackknife_blocks + block);
    jk_t4_.add(base + 0, tm.port_r_t4[t].real());
    jk_t4_.add(base + 1, tm.port_r_t4[t].imag());
    jk_t4_.add(base + 2, tm.port_l_t4[t].real());
    jk_t4_.add(base + 3, tm.port_l_t4[t].imag());
    jk_t4_.add(base + 4, tm.port_rl_t4[t].real());
    jk_t4_.add(base + 5, tm.port_rl_t4[t].imag());
  }
  jk_counts_.add(block, 1.0);
  ++n_traj_;
}

void EnsembleMoments::merge(const EnsembleMoments& other) {
  if (other.n_cells_ != n_cells_ || other.n_theta_ != n_theta_)
    throw DataError("cannot merge moment accumulators of different shapes");
  auto fold = [](KahanVector& a, const KahanVector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a.add(i, b[i]);
  };
  fold(density_t1_, other.density_t1_);
  fold(density_t4_, other.density_t4_);
  fold(bins_t1_, other.bins_t1_);
  fold(bins_t3pre_, other.bins_t3pre_);
  fold(bins_t4_, other.bins_t4_);
  fold(binsq_t1_, other.binsq_t1_);
  fold(binsq_t3pre_, other.binsq_t3pre_);
  fold(binsq_t4_, other.binsq_t4_);
  fold(fluxsq_t3pre_, other.fluxsq_t3pre_);
  fold(fluxsq_t4_, other.fluxsq_t4_);
  fold(jk_t4_, other.jk_t4_);
  fold(jk_counts_, other.jk_counts_);
  n_traj_ += other.n_traj_;
  n_flagged_ += other.n_flagged_;
}

std::vector<std::pair<std::string, const std::vector<double>*>>
EnsembleMoments::blocks() const {
  return {{"density_t1", &density_t1_.values()},
          {"density_t4", &density_t4_.values()},
          {"bins_t1", &bins_t1_.values()},
          {"bins_t3pre", &bins_t3pre_.values()},
          {"bins_t4", &bins_t4_.values()},
          {"binsq_t1", &binsq_t1_.values()},
          {"binsq_t3pre", &binsq_t3pre_.values()},
          {"binsq_t4", &binsq_t4_.values()},
          {"fluxsq_t3pre", &fluxsq_t3pre_.values()},
          {"fluxsq_t4", &fluxsq_t4_.values()},
          {"jk_t4", &jk_t4_.values()},
          {"jk_counts", &jk_counts_.values()}};
}

void EnsembleMoments::load_block(const std::string& name,
                                 const std::vector<double>& data) {
  KahanVector* target = nullptr;
  if (name == "density_t1") target = &density_t1_;
  else if (name == "density_t4") target = &density_t4_;
  else if (name == "bins_t1") target = &bins_t1_;
  else if (name == "bins_t3pre") target = &bins_t3pre_;
  else if (name == "bins_t4") target = &bins_t4_;
  else if (name == "binsq_t1") target = &binsq_t1_;
  else if (name == "binsq_t3pre") target = &binsq_t3pre_;
  else if (name == "binsq_t4") target = &binsq_t4_;
  else if (name == "fluxsq_t3pre") target = &fluxsq_t3pre_;
  else if (name == "fluxsq_t4") target = &fluxsq_t4_;
  else if (name == "jk_t4") target = &jk_t4_;
  else if (name == "jk_counts") target = &jk_counts_;
  else throw DataError("unknown checkpoint block '" + name + "'");
  if (target->size() != data.size())
    throw DataError("checkpoint block '" + name + "' has the wrong element count");
  target->resize(data.size());
  target->add_array(data.data(), data.size());
}

cplx EnsembleMoments::density_sum(int time_tag, std::size_t cell) const {
  const KahanVector& v = time_tag == 1 ? density_t1_ : density_t4_;
  return {v[3 * cell + 0], v[3 * cell + 1]};
}

double EnsembleMoments::density_sumsq(int time_tag, std::size_t cell) const {
  const KahanVector& v = time_tag == 1 ? density_t1_ : density_t4_;
  return v[3 * cell + 2];
}

cplx EnsembleMoments::bin_sum(int time_tag, std::size_t itheta, int bin) const {
  const KahanVector& v =
      time_tag == 1 ? bins_t1_ : (time_tag == 3 ? bins_t3pre_ : bins_t4_);
  return {v[8 * itheta + 2 * bin + 0], v[8 * itheta + 2 * bin + 1]};
}

double EnsembleMoments::bin_sumsq(int time_tag, std::size_t itheta, int bin) const {
  const KahanVector& v =
      time_tag == 1 ? binsq_t1_ : (time_tag == 3 ? binsq_t3pre_ : binsq_t4_);
  return v[4 * itheta + bin];
}

double EnsembleMoments::flux_sumsq(int time_tag, std::size_t itheta) const {
  return time_tag == 3 ? fluxsq_t3pre_[itheta] : fluxsq_t4_[itheta];
}

cplx EnsembleMoments::jk_port_r(std::size_t itheta, std::size_t block) const {
  const std::size_t base = 6 * (itheta * jackknife_blocks + block);
  return {jk_t4_[base + 0], jk_t4_[base + 1]};
}

cplx EnsembleMoments::jk_port_l(std::size_t itheta, std::size_t block) const {
  const std::size_t base = 6 * (itheta * jackknife_blocks + block);
  return {jk_t4_[base + 2], jk_t4_[base + 3]};
}

cplx EnsembleMoments::jk_port_rl(std::size_t itheta, std::size_t block) const {
  const std::size_t base = 6 * (itheta * jackknife_blocks + block);
  return {jk_t4_[base + 4], jk_t4_[base + 5]};
}

double EnsembleMoments::jk_count(std::size_t block) const {
  return jk_counts_[block];
}

}  // namespace homsim
