#ifndef HOMSIM_RUNNER_HPP
#define HOMSIM_RUNNER_HPP

#include "homsim/stochastic.hpp"

#include <optional>
#include <string>

namespace homsim {

struct RunOptions {
  std::uint64_t trajectories = 0;  // 0 selects the config value
  std::uint64_t traj_offset = 0;
  std::optional<std::uint64_t> seed;  // unset selects the config value
  int workers = 0;                    // 0 selects hardware concurrency
  bool dump_density = false;
  std::string dump_dir;
};

/// A run's in-memory product: the merged moments plus the manifest facts.
struct RunResult {
  EnsembleMoments moments;
  SimulationParams params;  // seed field reflects the seed actually used
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;  // [begin, end)
};

/**
 * Runs the full timeline for a range of trajectories and folds their moment
 * contributions.
 *
 * The mean field is deterministic and shared: each worker re-runs the GPE in
 * lockstep with a sub-batch of trajectories, holding only the current
 * snapshot (full field histories would not fit in memory at scale). Results
 * are independent of the worker count because trajectories own their noise
 * streams and the reduction folds fixed 128-trajectory chunks in id order.
 */
RunResult run_ensemble(const SimulationParams& params, const RunOptions& opts);

/// One trajectory's contributions, bit-identical to its in-ensemble result.
TrajectoryMoments run_trajectory(const SimulationParams& params,
                                 std::uint64_t seed, std::uint64_t trajectory_id);

}  // namespace homsim

#endif
