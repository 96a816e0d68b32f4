#ifndef HOMSIM_COMMON_HPP
#define HOMSIM_COMMON_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace homsim {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error hierarchy. The C API maps these onto status codes, the CLI onto
// process exit codes.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input document (config text, manifest JSON).
struct ParseError : Error {
  using Error::Error;
};

/// Well-formed input violating a stated invariant; message names it.
struct ValidationError : Error {
  using Error::Error;
};

/// Numerical failure at run time (NaN fields, stability bound, divergence).
struct RuntimeFailure : Error {
  using Error::Error;
};

/// Filesystem problems.
struct IoError : Error {
  using Error::Error;
};

/// Stored data inconsistent with its manifest (hash or block mismatch).
struct DataError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Compensated (Kahan) summation. Ensemble accumulators sum 1e4..1e5 small
// contributions; plain summation would lose the low bits we later compare
// across merge orders.
// ---------------------------------------------------------------------------

class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double v) : sum_(v) {}

  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }

  double value() const { return sum_; }

  void reset() {
    sum_ = 0.0;
    carry_ = 0.0;
  }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Kahan-compensated accumulation over a flat array of doubles.
class KahanVector {
 public:
  KahanVector() = default;
  explicit KahanVector(std::size_t n) : sum_(n, 0.0), carry_(n, 0.0) {}

  std::size_t size() const { return sum_.size(); }

  void resize(std::size_t n) {
    sum_.assign(n, 0.0);
    carry_.assign(n, 0.0);
  }

  void add(std::size_t i, double x) {
    const double y = x - carry_[i];
    const double t = sum_[i] + y;
    carry_[i] = (t - sum_[i]) - y;
    sum_[i] = t;
  }

  double operator[](std::size_t i) const { return sum_[i]; }
  const std::vector<double>& values() const { return sum_; }

  void add_array(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) add(i, x[i]);
  }

 private:
  std::vector<double> sum_;
  std::vector<double> carry_;
};

// ---------------------------------------------------------------------------
// FNV-1a 64-bit hash, used for config hashes and checkpoint block checksums.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

std::string to_hex(std::uint64_t v);

// ---------------------------------------------------------------------------
// Reproducible random streams.
//
// Each trajectory owns an independent stream derived from
// (master seed, trajectory id) through a splitmix64 avalanche, so results do
// not depend on worker count or launch order. Normal deviates come from a
// pinned Box-Muller implementation rather than std::normal_distribution,
// whose output is implementation-defined.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t master_seed, std::uint64_t trajectory_id) {
    std::uint64_t s = master_seed;
    (void)splitmix64(s);
    s ^= 0x100000001b3ull * (trajectory_id + 1);
    engine_.seed(splitmix64(s));
  }

  double uniform() {  // in (0, 1]
    const std::uint64_t u = engine_();
    return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

std::string format_double(double v);  // shortest-exact "%.17g" style printing

}  // namespace homsim

#endif
