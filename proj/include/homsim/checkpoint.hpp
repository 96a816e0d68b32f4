#ifndef HOMSIM_CHECKPOINT_HPP
#define HOMSIM_CHECKPOINT_HPP

#include "homsim/runner.hpp"
#include "homsim/stochastic.hpp"
#include "homsim/units.hpp"

#include <string>
#include <vector>

namespace homsim {

/**
 * On-disk unit of a run: a JSON manifest naming the configuration (with its
 * hash), the trajectory ranges, the pulse-schedule echo, and an index of
 * named accumulator blocks with per-block checksums; plus a flat
 * little-endian float64 array file holding the blocks.
 *
 * Checkpoints from disjoint trajectory ranges of the same configuration and
 * seed merge by elementwise summation.
 */
struct Checkpoint {
  SimulationParams params;
  EnsembleMoments moments;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;

  static Checkpoint from_run(RunResult&& run);

  /// Writes manifest-<begin>-<end>.json and moments-<begin>-<end>.bin.
  void save(const std::string& dir) const;

  /// Loads one manifest/moments pair, verifying block checksums and the
  /// config-hash recomputation.
  static Checkpoint load(const std::string& manifest_path);

  /// Loads every checkpoint in a directory and merges them.
  static Checkpoint load_dir(const std::string& dir);

  void merge(const Checkpoint& other);
};

/// Manifest paths inside a directory, sorted by trajectory range.
std::vector<std::string> find_manifests(const std::string& dir);

inline constexpr const char* tool_version = "homsim 1.0.0";

}  // namespace homsim

#endif
