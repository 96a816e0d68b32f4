#include "homsim/runner.hpp"

#include "homsim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

namespace homsim {

namespace {

constexpr std::uint64_t fold_chunk = 128;  // fixed: part of the determinism contract
constexpr std::uint64_t sub_batch = 48;    // pairs stepped per shared GPE instance
constexpr int health_cadence = 16;

struct Timeline {
  std::vector<double> breakpoints;  // t1, t3_pre, t4
  std::vector<std::pair<double, int>> plan;  // (h, n) segments from step_plan
};

Timeline make_timeline(const SimulationParams& p) {
  Timeline tl;
  tl.breakpoints = {p.t1, p.t3_pre, p.t4};
  tl.plan = step_plan(0.0, p.t4, p.dt, {p.t1, p.t3_pre});
  return tl;
}

/// Drives one sub-batch of trajectories through the full timeline in
/// lockstep with a private mean-field instance, fusing adjacent kinetic
/// half-steps within each segment.
class SubBatchDriver {
 public:
  SubBatchDriver(const SimulationParams& params, const GridPtr& grid,
                 const MeanField& split_state, const BinPlan& plan)
      : params_(params),
        grid_(grid),
        gpe_(params, grid),
        sde_(params, grid),
        split_state_(split_state),
        plan_(plan) {}

  std::vector<TrajectoryMoments> run(std::uint64_t seed,
                                     std::uint64_t first_id, std::uint64_t count) {
    MeanField mf = split_state_;
    std::vector<StochasticFieldPair> pairs;
    pairs.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
      pairs.emplace_back(grid_, seed, first_id + i);

    std::vector<TrajectoryMoments> out(count);
    for (auto& tm : out) {
      tm.bins_t1.resize(4 * plan_.theta.size());
      tm.bins_t3pre.resize(4 * plan_.theta.size());
      tm.bins_t4.resize(4 * plan_.theta.size());
      tm.port_r_t4.resize(plan_.theta.size());
      tm.port_l_t4.resize(plan_.theta.size());
      tm.port_rl_t4.resize(plan_.theta.size());
    }

    const Timeline tl = make_timeline(params_);
    double t = 0.0;
    std::size_t measurement = 0;
    long steps_done = 0;
    for (const auto& [h, n] : tl.plan) {
      gpe_.kinetic(mf, 0.5 * h);
      for (auto& pr : pairs) sde_.kinetic(pr, 0.5 * h);
      for (int i = 0; i < n; ++i) {
        const double t_mid = t + 0.5 * h;
        const LocalStage stage =
            sde_.make_local_stage(mf.psi, params_.schedule.envelope(t_mid), h);
        for (auto& pr : pairs) sde_.local(pr, stage);
        gpe_.local_rotation(mf, t_mid, h);
        const double tau = (i + 1 < n) ? h : 0.5 * h;
        gpe_.kinetic(mf, tau);
        for (auto& pr : pairs) sde_.kinetic(pr, tau);
        t += h;
        if (++steps_done % health_cadence == 0)
          for (auto& pr : pairs) sde_.check_health(pr, t);
      }
      mf.time = t;
      // segment boundaries land exactly on t1, t3_pre and t4
      for (auto& pr : pairs) sde_.check_health(pr, t);
      measure(pairs, out, measurement, t);
      ++measurement;
    }

    for (std::uint64_t i = 0; i < count; ++i) {
      out[i].flagged = pairs[i].flagged;
      out[i].flag_reason = pairs[i].flag_reason;
    }
    return out;
  }

 private:
  void measure(std::vector<StochasticFieldPair>& pairs,
               std::vector<TrajectoryMoments>& out, std::size_t which, double t) {
    const double dkv = grid_->k_cell_volume();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p].flagged) continue;
      const std::vector<cplx> v = momentum_density_estimator(pairs[p]);
      TrajectoryMoments& tm = out[p];
      std::vector<cplx>* bins = nullptr;
      if (which == 0) {
        tm.density_t1 = v;
        bins = &tm.bins_t1;
      } else if (which == 1) {
        bins = &tm.bins_t3pre;
      } else {
        tm.density_t4 = v;
        bins = &tm.bins_t4;
      }
      for (std::size_t it = 0; it < plan_.theta.size(); ++it) {
        for (int b = 0; b < 4; ++b)
          (*bins)[4 * it + b] = integrate_complex(plan_.bins[it][b], v, dkv);
        if (which == 2) {
          const cplx nr = integrate_complex(plan_.port_right[it], v, dkv);
          const cplx nl = integrate_complex(plan_.port_left[it], v, dkv);
          tm.port_r_t4[it] = nr;
          tm.port_l_t4[it] = nl;
          tm.port_rl_t4[it] = nr * nl;
        }
      }
    }
  }

  static cplx integrate_complex(const WeightList& w, const std::vector<cplx>& v,
                                double dkv) {
    KahanSum re, im;
    for (std::size_t i = 0; i < w.cell.size(); ++i) {
      const cplx x = v[w.cell[i]];
      re.add(w.weight[i] * x.real());
      im.add(w.weight[i] * x.imag());
    }
    return cplx(re.value(), im.value()) * dkv;
  }

  const SimulationParams& params_;
  GridPtr grid_;
  GpePropagator gpe_;
  SdeStepper sde_;
  const MeanField& split_state_;
  const BinPlan& plan_;
};

GridPtr make_run_grid(const SimulationParams& p) {
  return Grid::make(p.dims, p.grid_points, p.grid_lengths,
                    {p.bragg_axis(), p.collision_axis()});
}

void dump_meanfield_density(const SimulationParams& params, const GridPtr& grid,
                            const MeanField& split_state, const std::string& dir);

}  // namespace

RunResult run_ensemble(const SimulationParams& params_in, const RunOptions& opts) {
  SimulationParams params = params_in;
  if (opts.seed) params.seed = *opts.seed;
  const std::uint64_t n_traj =
      opts.trajectories > 0 ? opts.trajectories : params.trajectories;
  if (n_traj < 2) throw ValidationError("an ensemble needs at least 2 trajectories");
  const std::uint64_t offset = opts.traj_offset;

  GridPtr grid = make_run_grid(params);
  const BinPlan plan = BinPlan::build(params, *grid);

  MeanField split_state = ground_state(params, grid);
  split_condensate(split_state, params);

  if (opts.dump_density && !opts.dump_dir.empty())
    dump_meanfield_density(params, grid, split_state, opts.dump_dir);

  // Fixed 128-trajectory fold chunks keep the reduction independent of the
  // worker count: each chunk folds its trajectories in id order, and chunks
  // fold in chunk order afterwards.
  const std::uint64_t n_chunks = (n_traj + fold_chunk - 1) / fold_chunk;
  std::vector<std::unique_ptr<EnsembleMoments>> chunk_partials(n_chunks);

  int workers = opts.workers > 0
                    ? opts.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n_chunks)));

  std::atomic<std::uint64_t> next_chunk{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto work = [&]() {
    try {
      SubBatchDriver driver(params, grid, split_state, plan);
      while (!failed.load(std::memory_order_relaxed)) {
        const std::uint64_t c = next_chunk.fetch_add(1);
        if (c >= n_chunks) break;
        const std::uint64_t begin = offset + c * fold_chunk;
        const std::uint64_t end = std::min(offset + n_traj, begin + fold_chunk);
        auto partial = std::make_unique<EnsembleMoments>(grid->cell_count(),
                                                         plan.theta.size());
        for (std::uint64_t id = begin; id < end; id += sub_batch) {
          const std::uint64_t count = std::min(sub_batch, end - id);
          const auto moments = driver.run(params.seed, id, count);
          for (std::uint64_t i = 0; i < count; ++i)
            partial->accumulate(moments[i], id + i);
        }
        chunk_partials[c] = std::move(partial);
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      failed = true;
      if (failure.empty()) failure = e.what();
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failed) throw RuntimeFailure("ensemble run failed: " + failure);

  RunResult result;
  result.moments = EnsembleMoments(grid->cell_count(), plan.theta.size());
  for (const auto& partial : chunk_partials) result.moments.merge(*partial);
  result.params = params;
  result.ranges = {{offset, offset + n_traj}};
  return result;
}

TrajectoryMoments run_trajectory(const SimulationParams& params, std::uint64_t seed,
                                 std::uint64_t trajectory_id) {
  GridPtr grid = make_run_grid(params);
  const BinPlan plan = BinPlan::build(params, *grid);
  MeanField split_state = ground_state(params, grid);
  split_condensate(split_state, params);
  SubBatchDriver driver(params, grid, split_state, plan);
  return driver.run(seed, trajectory_id, 1).front();
}

namespace {

void dump_meanfield_density(const SimulationParams& params, const GridPtr& grid,
                            const MeanField& split_state, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  GpePropagator gpe(params, grid);
  MeanField mf = split_state;
  const std::vector<double> times{params.t1, params.t2, params.t3, params.t4};
  const std::vector<std::string> tags{"t1", "t2", "t3", "t4"};
  gpe.propagate(mf, params.t4, params.dt, times, [&](const MeanField& snap) {
    std::size_t which = 0;
    for (; which < times.size(); ++which)
      if (std::abs(times[which] - snap.time) < 1e-9) break;
    if (which >= times.size()) return;
    ComplexField kspace = snap.psi;
    forward(kspace);
    std::vector<double> dens(kspace.size());
    for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::norm(kspace[i]);
    write_density_csv(dir + "/meanfield_density_" + tags[which] + ".csv", *grid,
                      dens, nullptr);
  });
}

}  // namespace

}  // namespace homsim
