#include "homsim/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace homsim::oracles {

TwoModeSqueezedSpec TwoModeSqueezedSpec::from_alpha(double a) {
  if (a < 0.0 || a >= 1.0)
    throw ValidationError("squeezing parameter alpha must satisfy 0 <= alpha < 1");
  return TwoModeSqueezedSpec{a};
}

TwoModeSqueezedSpec TwoModeSqueezedSpec::from_mean_occupation(double nbar) {
  if (nbar < 0.0) throw ValidationError("mean occupation must be non-negative");
  // nbar = alpha^2 / (1 - alpha^2)  =>  alpha^2 = nbar / (1 + nbar)
  return TwoModeSqueezedSpec{std::sqrt(nbar / (1.0 + nbar))};
}

double TwoModeSqueezedSpec::mean_occupation() const {
  return alpha * alpha / (1.0 - alpha * alpha);
}

double spdc_mean_occupation(double g, double t) {
  if (g < 0.0 || t < 0.0) throw ValidationError("gain and time must be non-negative");
  const double s = std::sinh(g * t);
  return s * s;
}

double spdc_hom_g2(double nbar, SpdcBranch branch, SpdcState state) {
  if (nbar <= 0.0) throw ValidationError("mean occupation must be positive");
  if (state == SpdcState::full)
    return branch == SpdcBranch::dip ? 1.0 : 2.0 + 1.0 / (2.0 * nbar);
  return branch == SpdcBranch::dip ? 0.0 : 1.0 / (2.0 * nbar);
}

double spdc_visibility(double nbar, SpdcState state) {
  if (nbar <= 0.0) throw ValidationError("mean occupation must be positive");
  if (state == SpdcState::truncated) return 1.0;
  return 1.0 - 1.0 / (2.0 + 1.0 / (2.0 * nbar));
}

int fock_truncation_order(double alpha, double eps) {
  if (alpha <= 0.0) return 1;
  // smallest n_max whose neglected squeezed-state weight alpha^(2(n_max+1))
  // falls below eps ...
  int n = static_cast<int>(std::ceil(std::log(eps) / (2.0 * std::log(alpha)) - 1.0));
  n = std::max(n, 1);
  while (std::pow(alpha, 2.0 * (n + 1)) >= eps) ++n;
  while (n > 1 && std::pow(alpha, 2.0 * n) < eps) --n;
  // ... plus margin: the correlation ratios amplify the tail by O(n^2), and
  // the defaults must land well inside 1e-8 of the closed forms.
  return n + 4;
}

namespace {

// Dense two-mode Fock state; amplitude of |n1, n2> at amp[n1 * dim2 + n2].
struct TwoModeFock {
  int dim1 = 0, dim2 = 0;
  std::vector<cplx> amp;

  TwoModeFock(int d1, int d2) : dim1(d1), dim2(d2), amp(d1 * d2) {}
  cplx& at(int n1, int n2) { return amp[n1 * dim2 + n2]; }
  cplx get(int n1, int n2) const { return amp[n1 * dim2 + n2]; }
};

double ln_factorial(int n) { return std::lgamma(n + 1.0); }

// 50:50 beam splitter, convention a1 -> (a1 + i a2)/sqrt(2). Expands each
// basis state through the binomial theorem; exact up to rounding.
TwoModeFock beam_splitter_50_50(const TwoModeFock& in) {
  const int out_dim = in.dim1 + in.dim2 - 1;
  TwoModeFock out(out_dim, out_dim);
  const cplx mi(0.0, -1.0);
  for (int n1 = 0; n1 < in.dim1; ++n1) {
    for (int n2 = 0; n2 < in.dim2; ++n2) {
      const cplx a = in.get(n1, n2);
      if (a == cplx(0.0, 0.0)) continue;
      // B (a1^dag)^n1 (a2^dag)^n2 |00> with
      // B a1^dag B^dag = (a1^dag - i a2^dag)/sqrt(2)
      // B a2^dag B^dag = (a2^dag - i a1^dag)/sqrt(2)
      for (int j = 0; j <= n1; ++j) {
        for (int l = 0; l <= n2; ++l) {
          const int p = j + (n2 - l);  // photons in output mode 1
          const int q = (n1 - j) + l;  // photons in output mode 2
          const double ln_mag = 0.5 * (ln_factorial(p) + ln_factorial(q) -
                                       ln_factorial(n1) - ln_factorial(n2)) +
                                ln_factorial(n1) - ln_factorial(j) -
                                ln_factorial(n1 - j) + ln_factorial(n2) -
                                ln_factorial(l) - ln_factorial(n2 - l) -
                                0.5 * (n1 + n2) * std::log(2.0);
          const int i_pow = (n1 - j) + (n2 - l);
          cplx phase(1.0, 0.0);
          switch (i_pow & 3) {
            case 0: phase = {1.0, 0.0}; break;
            case 1: phase = mi; break;
            case 2: phase = {-1.0, 0.0}; break;
            case 3: phase = {0.0, 1.0}; break;
          }
          out.at(p, q) += a * phase * std::exp(ln_mag);
        }
      }
    }
  }
  return out;
}

struct PairMoments {
  double n1 = 0.0, n2 = 0.0, n1n2 = 0.0;
};

PairMoments number_moments(const TwoModeFock& st) {
  PairMoments m;
  for (int n1 = 0; n1 < st.dim1; ++n1) {
    for (int n2 = 0; n2 < st.dim2; ++n2) {
      const double p = std::norm(st.get(n1, n2));
      m.n1 += p * n1;
      m.n2 += p * n2;
      m.n1n2 += p * n1 * n2;
    }
  }
  return m;
}

}  // namespace

double fock_hom_g2(const TwoModeSqueezedSpec& spec, int n_max, FockGeometry geometry) {
  const double alpha = spec.alpha;
  if (n_max < 1) throw ValidationError("n_max must be at least 1");
  const double tail = std::pow(alpha, 2.0 * (n_max + 1));
  if (tail >= 1e-10)
    throw ValidationError("truncation weight " + format_double(tail) +
                          " exceeds 1e-10; raise n_max");
  const double norm = std::sqrt(1.0 - alpha * alpha);

  if (geometry == FockGeometry::indistinguishable) {
    TwoModeFock st(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) st.at(n, n) = norm * std::pow(alpha, n);
    const TwoModeFock out = beam_splitter_50_50(st);
    const PairMoments m = number_moments(out);
    return m.n1n2 / (m.n1 * m.n2);
  }

  // Wings: the correlated pair occupies modes (k3, k4); the Bragg partners
  // (k5, k6) start in vacuum. The splitter mixes (3,6) and (4,5), so the
  // four-mode state factorises into two two-mode sectors sharing the pair
  // photon number n. Ports: R = {3, 5}, L = {4, 6}.
  double numerator = 0.0, n_r = 0.0, n_l = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double w = norm * norm * std::pow(alpha, 2.0 * n);
    TwoModeFock sector(n + 1, 1);
    sector.at(n, 0) = 1.0;
    const TwoModeFock out = beam_splitter_50_50(sector);
    const PairMoments m = number_moments(out);  // (occupied, partner) modes
    // sector X holds (N3, N6), sector Y holds (N4, N5); X and Y are copies.
    // <N_R N_L> = <N3><N4> + <N3 N6> + <N5 N4> + <N5><N6>
    numerator += w * (m.n1 * m.n1 + 2.0 * m.n1n2 + m.n2 * m.n2);
    n_r += w * (m.n1 + m.n2);
    n_l += w * (m.n1 + m.n2);
  }
  return numerator / (n_r * n_l);
}

std::vector<double> beam_splitter_number_distribution(int n1, int n2, int* out_dim) {
  if (n1 < 0 || n2 < 0) throw ValidationError("photon numbers must be non-negative");
  TwoModeFock in(n1 + 1, n2 + 1);
  in.at(n1, n2) = 1.0;
  const TwoModeFock out = beam_splitter_50_50(in);
  const int dim = n1 + n2 + 1;
  if (out_dim) *out_dim = dim;
  std::vector<double> p(dim * dim, 0.0);
  for (int a = 0; a < std::min(dim, out.dim1); ++a)
    for (int b = 0; b < std::min(dim, out.dim2); ++b)
      p[a * dim + b] = std::norm(out.get(a, b));
  return p;
}

FockHomResult fock_hom_bruteforce(const TwoModeSqueezedSpec& spec) {
  FockHomResult r;
  r.n_max = fock_truncation_order(spec.alpha);
  r.dip_g2 = fock_hom_g2(spec, r.n_max, FockGeometry::indistinguishable);
  r.wings_g2 = fock_hom_g2(spec, r.n_max, FockGeometry::distinguishable);
  r.visibility = 1.0 - r.dip_g2 / r.wings_g2;
  return r;
}

namespace {

using Mat2 = std::array<cplx, 4>;  // row-major 2x2

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// exp(M) by scaling-and-squaring with a Taylor series on the scaled matrix.
Mat2 expm(Mat2 m) {
  double norm = 0.0;
  for (const auto& e : m) norm = std::max(norm, std::abs(e));
  int s = 0;
  while (norm > 0.25) {
    norm *= 0.5;
    ++s;
  }
  const double scale = std::ldexp(1.0, -s);
  for (auto& e : m) e *= scale;

  Mat2 result{1.0, 0.0, 0.0, 1.0};
  Mat2 term{1.0, 0.0, 0.0, 1.0};
  for (int k = 1; k <= 24; ++k) {
    term = mul(term, m);
    for (auto& e : term) e /= static_cast<double>(k);
    double tn = 0.0;
    for (int i = 0; i < 4; ++i) {
      result[i] += term[i];
      tn = std::max(tn, std::abs(term[i]));
    }
    if (tn < 1e-19) break;
  }
  for (int i = 0; i < s; ++i) result = mul(result, result);
  return result;
}

}  // namespace

BogoliubovPairMoments bogoliubov_uniform_oracle(double k, double rho0, double U,
                                                double t, bool include_meanfield_shift) {
  const double kappa = U * rho0;
  const double eps = 0.5 * k * k + (include_meanfield_shift ? 2.0 * kappa : 0.0);
  const cplx mi(0.0, -1.0);
  const Mat2 gen{mi * eps * t, mi * kappa * t, -mi * kappa * t, -mi * eps * t};
  const Mat2 s = expm(gen);

  BogoliubovPairMoments out;
  out.n_k = std::norm(s[1]);
  out.pair_m = s[0] * s[1];
  out.symplectic_defect = std::abs(std::norm(s[0]) - std::norm(s[1]) - 1.0);
  if (out.symplectic_defect > 1e-9)
    throw RuntimeFailure("Bogoliubov propagator lost its symplectic structure");
  return out;
}

BogoliubovOracleTable bogoliubov_uniform_oracle(const std::vector<double>& modes,
                                                double rho0, double U, double t,
                                                bool include_meanfield_shift) {
  BogoliubovOracleTable table;
  table.modes = modes;
  for (double k : modes) {
    const auto m = bogoliubov_uniform_oracle(k, rho0, U, t, include_meanfield_shift);
    table.n_k.push_back(m.n_k);
    table.pair_m.push_back(m.pair_m);
  }
  return table;
}

}  // namespace homsim::oracles
