// Command-line front end for the homsim shared library. Subcommands: run,
// analyze, merge, oracle. Exit codes: 0 success, 2 configuration errors,
// 3 runtime failures (including a flagged-trajectory fraction above 1%),
// 4 I/O errors, 5 checkpoint/manifest inconsistencies.

#include <CLI11.hpp>

#include "homsim.h"

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr size_t errcap = 1024;

int exit_code_for(homsim_status st) {
  switch (st) {
    case HOMSIM_OK: return 0;
    case HOMSIM_ERR_PARSE: return 2;
    case HOMSIM_ERR_VALIDATION: return 2;
    case HOMSIM_ERR_RUNTIME: return 3;
    case HOMSIM_ERR_IO: return 4;
    case HOMSIM_ERR_DATA: return 5;
  }
  return 3;
}

[[noreturn]] void fail(homsim_status st, const char* errbuf) {
  std::fprintf(stderr, "homsim: error: %s\n", errbuf);
  std::exit(exit_code_for(st));
}

struct ConfigHandle {
  homsim_config* ptr = nullptr;
  ~ConfigHandle() { homsim_config_free(ptr); }
};

struct CheckpointHandle {
  homsim_checkpoint* ptr = nullptr;
  ~CheckpointHandle() { homsim_checkpoint_free(ptr); }
};

ConfigHandle load_config_or_die(const std::string& path) {
  char err[errcap] = {0};
  ConfigHandle cfg;
  const homsim_status st = homsim_config_load(path.c_str(), &cfg.ptr, err, errcap);
  if (st != HOMSIM_OK) fail(st, err);
  return cfg;
}

// "min:max:count" theta override is applied by rewriting the config text; the
// resolved list is part of the run identity, so overrides must flow through
// the configuration rather than bypass it.
std::string rewrite_theta(const std::string& config_path, const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3) {
    std::fprintf(stderr, "homsim: error: --theta-list expects min:max:count\n");
    std::exit(2);
  }
  FILE* f = std::fopen(config_path.c_str(), "rb");
  if (!f) {
    std::fprintf(stderr, "homsim: error: cannot open config '%s'\n",
                 config_path.c_str());
    std::exit(2);
  }
  std::string text;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  std::fclose(f);

  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    const auto key_end = line.find('=');
    bool drop = false;
    if (key_end != std::string::npos) {
      std::string key = line.substr(0, key_end);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      drop = (key == "theta_min_rad" || key == "theta_max_rad" ||
              key == "theta_count");
    }
    if (!drop) {
      out += line;
      out += '\n';
    }
    pos = eol + 1;
  }
  char extra[160];
  std::snprintf(extra, sizeof extra,
                "theta_min_rad = %.17g\ntheta_max_rad = %.17g\ntheta_count = %d\n",
                lo, hi, count);
  out += extra;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homsim: matter-wave Hong-Ou-Mandel interferometer simulator"};
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* run = app.add_subcommand(
      "run", "Simulate a trajectory ensemble and write a checkpoint");
  std::string run_config, run_out, theta_spec;
  uint64_t run_traj = 0, run_offset = 0, run_seed = 0;
  bool run_has_seed = false;
  int run_workers = 0;
  bool run_dump = false;
  run->add_option("--config", run_config, "experiment configuration file")
      ->required();
  run->add_option("--out", run_out, "output checkpoint directory")->required();
  run->add_option("--trajectories", run_traj,
                  "number of trajectories (default: config value)");
  run->add_option("--traj-offset", run_offset,
                  "first trajectory id (for mergeable continuation runs)");
  run->add_option("--seed", run_seed, "master seed (default: config value)")
      ->each([&](const std::string&) { run_has_seed = true; });
  run->add_option("--theta-list", theta_spec,
                  "override the scan angles as min:max:count");
  run->add_option("--workers", run_workers, "worker threads (default: all cores)");
  run->add_flag("--dump-density", run_dump,
                "write mean-field momentum-density CSV snapshots");

  // ---- analyze --------------------------------------------------------------
  auto* analyze = app.add_subcommand(
      "analyze", "Turn checkpoints into the dip curve, summary and density maps");
  std::string an_in, an_out;
  analyze->add_option("--in", an_in, "checkpoint directory")->required();
  analyze->add_option("--out", an_out, "output directory")->required();

  // ---- merge ---------------------------------------------------------------
  auto* merge = app.add_subcommand("merge", "Union of disjoint-range checkpoints");
  std::vector<std::string> merge_in;
  std::string merge_out;
  merge->add_option("--out", merge_out, "output checkpoint directory")->required();
  merge->add_option("inputs", merge_in, "input checkpoint directories")
      ->required()
      ->expected(-2);

  // ---- oracle ----------------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle", "Evaluate the analytic references");
  oracle->require_subcommand(1);

  auto* spdc = oracle->add_subcommand("spdc", "closed-form HOM statistics");
  double spdc_nbar = 0.1;
  bool spdc_trunc = false;
  spdc->add_option("--nbar", spdc_nbar, "mean occupation per mode")->required();
  spdc->add_flag("--truncated", spdc_trunc, "weak-gain truncated state");

  auto* fock = oracle->add_subcommand("fock", "Fock-space brute force");
  double fock_alpha = 0.0;
  int fock_nmax = 0;
  fock->add_option("--alpha", fock_alpha, "squeezing parameter")->required();
  fock->add_option("--nmax", fock_nmax, "truncation (default: 1e-10 rule)");

  auto* rabi = oracle->add_subcommand("rabi", "two-mode Rabi transfer");
  std::string rabi_area = "pi";
  double rabi_det = 0.0, rabi_tau = 1.0;
  rabi->add_option("--area", rabi_area, "pulse area in rad (or 'pi', 'pi/2')")
      ->required();
  rabi->add_option("--detuning", rabi_det, "detuning, internal units");
  rabi->add_option("--tau", rabi_tau, "rms duration, internal units");

  auto* bog = oracle->add_subcommand("bogoliubov", "uniform-pump pair moments");
  double bog_k = 0.0, bog_rho = 1.0, bog_u = 0.1, bog_t = 1.0;
  bool bog_bare = false;
  bog->add_option("--k", bog_k, "mode momentum, units of k0")->required();
  bog->add_option("--rho0", bog_rho, "pump density")->required();
  bog->add_option("--u", bog_u, "interaction constant")->required();
  bog->add_option("--t", bog_t, "evolution time")->required();
  bog->add_flag("--no-meanfield-shift", bog_bare,
                "drop the 2 U rho0 shift (gain-matched at k = 0)");

  CLI11_PARSE(app, argc, argv);
  char err[errcap] = {0};

  if (*run) {
    ConfigHandle cfg;
    if (!theta_spec.empty()) {
      const std::string text = rewrite_theta(run_config, theta_spec);
      const homsim_status st =
          homsim_config_parse(text.c_str(), &cfg.ptr, err, errcap);
      if (st != HOMSIM_OK) fail(st, err);
    } else {
      cfg = load_config_or_die(run_config);
    }

    homsim_run_options opts = {};
    opts.trajectories = run_traj;
    opts.traj_offset = run_offset;
    opts.use_seed = run_has_seed ? 1 : 0;
    opts.seed = run_seed;
    opts.workers = run_workers;
    opts.dump_density = run_dump ? 1 : 0;
    opts.dump_dir = run_out.c_str();

    CheckpointHandle cp;
    homsim_status st = homsim_run(cfg.ptr, &opts, &cp.ptr, err, errcap);
    if (st != HOMSIM_OK) fail(st, err);
    st = homsim_checkpoint_save(cp.ptr, run_out.c_str(), err, errcap);
    if (st != HOMSIM_OK) fail(st, err);

    const double flagged = homsim_checkpoint_flagged_fraction(cp.ptr);
    std::printf("run: %llu trajectories, flagged fraction %.3g\n",
                static_cast<unsigned long long>(homsim_checkpoint_trajectories(cp.ptr)),
                flagged);
    if (flagged > 0.01) {
      std::fprintf(stderr,
                   "homsim: error: flagged-trajectory fraction %.3g exceeds 1%%; "
                   "ensemble marked unreliable\n",
                   flagged);
      return 3;
    }
    return 0;
  }

  if (*analyze) {
    CheckpointHandle cp;
    homsim_status st = homsim_checkpoint_load_dir(an_in.c_str(), &cp.ptr, err, errcap);
    if (st != HOMSIM_OK) fail(st, err);
    st = homsim_analyze(cp.ptr, an_out.c_str(), err, errcap);
    if (st != HOMSIM_OK) fail(st, err);
    std::printf("analyze: wrote dip_curve.csv, summary.json, density maps to %s\n",
                an_out.c_str());
    return 0;
  }

  if (*merge) {
    CheckpointHandle acc;
    homsim_status st =
        homsim_checkpoint_load_dir(merge_in[0].c_str(), &acc.ptr, err, errcap);
    if (st != HOMSIM_OK) fail(st, err);
    for (size_t i = 1; i < merge_in.size(); ++i) {
      CheckpointHandle next, merged;
      st = homsim_checkpoint_load_dir(merge_in[i].c_str(), &next.ptr, err, errcap);
      if (st != HOMSIM_OK) fail(st, err);
      st = homsim_checkpoint_merge(acc.ptr, next.ptr, &merged.ptr, err, errcap);
      if (st != HOMSIM_OK) fail(st, err);
      homsim_checkpoint_free(acc.ptr);
      acc.ptr = merged.ptr;
      merged.ptr = nullptr;
    }
    st = homsim_checkpoint_save(acc.ptr, merge_out.c_str(), err, errcap);
    if (st != HOMSIM_OK) fail(st, err);
    std::printf("merge: %llu trajectories -> %s\n",
                static_cast<unsigned long long>(homsim_checkpoint_trajectories(acc.ptr)),
                merge_out.c_str());
    return 0;
  }

  if (*oracle) {
    if (*spdc) {
      double dip = 0, wings = 0, vis = 0;
      const homsim_status st =
          homsim_oracle_spdc(spdc_nbar, spdc_trunc ? 1 : 0, &dip, &wings, &vis);
      if (st != HOMSIM_OK) fail(st, "invalid spdc parameters");
      std::printf(
          "{\n  \"nbar\": %.17g,\n  \"dip_g2\": %.17g,\n  \"wings_g2\": %.17g,\n"
          "  \"visibility\": %.17g\n}\n",
          spdc_nbar, dip, wings, vis);
      return 0;
    }
    if (*fock) {
      double dip = 0, wings = 0, vis = 0;
      int used = 0;
      const homsim_status st =
          homsim_oracle_fock(fock_alpha, fock_nmax, &dip, &wings, &vis, &used);
      if (st != HOMSIM_OK) fail(st, "invalid fock parameters");
      std::printf(
          "{\n  \"alpha\": %.17g,\n  \"n_max\": %d,\n  \"dip_g2\": %.17g,\n"
          "  \"wings_g2\": %.17g,\n  \"visibility\": %.17g\n}\n",
          fock_alpha, used, dip, wings, vis);
      return 0;
    }
    if (*rabi) {
      double area;
      if (rabi_area == "pi") {
        area = 3.14159265358979323846;
      } else if (rabi_area == "pi/2") {
        area = 3.14159265358979323846 / 2.0;
      } else {
        area = std::strtod(rabi_area.c_str(), nullptr);
      }
      double transfer = 0;
      const homsim_status st =
          homsim_oracle_rabi(area, rabi_det, rabi_tau, &transfer);
      if (st != HOMSIM_OK) fail(st, "invalid rabi parameters");
      std::printf("{\n  \"area_rad\": %.17g,\n  \"detuning\": %.17g,\n"
                  "  \"transfer\": %.17g\n}\n",
                  area, rabi_det, transfer);
      return 0;
    }
    if (*bog) {
      double nk = 0, pr = 0, pi_ = 0;
      const homsim_status st = homsim_oracle_bogoliubov(
          bog_k, bog_rho, bog_u, bog_t, bog_bare ? 0 : 1, &nk, &pr, &pi_);
      if (st != HOMSIM_OK) fail(st, "invalid bogoliubov parameters");
      std::printf(
          "{\n  \"k\": %.17g,\n  \"n_k\": %.17g,\n  \"pair_re\": %.17g,\n"
          "  \"pair_im\": %.17g,\n  \"pair_abs\": %.17g\n}\n",
          bog_k, nk, pr, pi_, std::sqrt(pr * pr + pi_ * pi_));
      return 0;
    }
  }

  return 0;
}
