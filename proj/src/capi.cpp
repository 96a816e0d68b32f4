#include "homsim.h"

#include "homsim/analysis.hpp"
#include "homsim/checkpoint.hpp"
#include "homsim/oracles.hpp"
#include "homsim/runner.hpp"
#include "homsim/units.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>

using namespace homsim;

struct homsim_config {
  ExperimentConfig experiment;
  SimulationParams params;
};

struct homsim_checkpoint {
  Checkpoint cp;
};

namespace {

void put_error(char* errbuf, size_t n, const char* msg) {
  if (!errbuf || n == 0) return;
  std::strncpy(errbuf, msg, n - 1);
  errbuf[n - 1] = '\0';
}

template <typename Fn>
homsim_status guarded(char* errbuf, size_t errbuf_len, Fn&& fn) {
  try {
    fn();
    return HOMSIM_OK;
  } catch (const ParseError& e) {
    put_error(errbuf, errbuf_len, e.what());
    return HOMSIM_ERR_PARSE;
  } catch (const ValidationError& e) {
    put_error(errbuf, errbuf_len, e.what());
    return HOMSIM_ERR_VALIDATION;
  } catch (const DataError& e) {
    put_error(errbuf, errbuf_len, e.what());
    return HOMSIM_ERR_DATA;
  } catch (const IoError& e) {
    put_error(errbuf, errbuf_len, e.what());
    return HOMSIM_ERR_IO;
  } catch (const std::bad_alloc&) {
    put_error(errbuf, errbuf_len, "out of memory");
    return HOMSIM_ERR_RUNTIME;
  } catch (const std::exception& e) {
    put_error(errbuf, errbuf_len, e.what());
    return HOMSIM_ERR_RUNTIME;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

GridPtr analysis_grid(const SimulationParams& p) {
  return Grid::make(p.dims, p.grid_points, p.grid_lengths);
}

}  // namespace

extern "C" {

const char* homsim_version(void) { return tool_version; }

void homsim_string_free(char* s) { std::free(s); }

homsim_status homsim_config_load(const char* path, homsim_config** out,
                                 char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!path || !out) throw ValidationError("null argument");
    auto cfg = std::make_unique<homsim_config>();
    cfg->experiment = load_config_file(path);
    cfg->params = to_internal_units(cfg->experiment);
    *out = cfg.release();
  });
}

homsim_status homsim_config_parse(const char* text, homsim_config** out,
                                  char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!text || !out) throw ValidationError("null argument");
    auto cfg = std::make_unique<homsim_config>();
    cfg->experiment = load_config(text);
    cfg->params = to_internal_units(cfg->experiment);
    *out = cfg.release();
  });
}

void homsim_config_free(homsim_config* cfg) { delete cfg; }

uint64_t homsim_config_trajectories(const homsim_config* cfg) {
  return cfg ? cfg->params.trajectories : 0;
}

uint64_t homsim_config_seed(const homsim_config* cfg) {
  return cfg ? cfg->params.seed : 0;
}

homsim_status homsim_config_summary_json(const homsim_config* cfg, char** out_json,
                                         char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!cfg || !out_json) throw ValidationError("null argument");
    using json = nlohmann::ordered_json;
    const SimulationParams& p = cfg->params;
    json j;
    j["config_hash"] = to_hex(p.config_hash);
    j["dims"] = p.dims;
    j["length_unit_m"] = p.length_unit_m;
    j["time_unit_s"] = p.time_unit_s;
    j["energy_unit_j"] = p.energy_unit_j;
    j["scattering_length_internal"] = p.scattering_length;
    j["interaction_u3d"] = p.interaction_u3d;
    j["interaction_u"] = p.interaction_u;
    j["trap_omega_internal"] = p.trap_omega;
    j["halo_radius_k0"] = p.halo_radius;
    j["timeline_internal"] = {{"t1", p.t1},
                              {"t2", p.t2},
                              {"t3", p.t3},
                              {"t3_pre", p.t3_pre},
                              {"t4", p.t4}};
    j["tau_pi"] = p.tau_pi;
    j["tau_pi_half"] = p.tau_pi_half;
    j["pulse_areas_rad"] = {p.schedule.segments[0].area, p.schedule.segments[1].area};
    j["pulse_depths_internal"] = {p.schedule.segments[0].depth,
                                  p.schedule.segments[1].depth};
    j["grid_points"] = p.grid_points;
    j["grid_lengths_k0inv"] = p.grid_lengths;
    j["dt_internal"] = p.dt;
    j["theta_list_rad"] = p.theta_list;
    j["bin_widths_k0"] = p.bin_widths;
    j["wing_threshold_rad"] = p.wing_threshold;
    j["trajectories"] = p.trajectories;
    j["seed"] = p.seed;
    j["tf_chemical_potential"] = p.tf_chemical_potential;
    j["tf_peak_density"] = p.tf_peak_density;
    j["pair_gain_rate"] = p.pair_gain_rate;
    *out_json = dup_string(j.dump(2) + "\n");
  });
}

homsim_status homsim_run(const homsim_config* cfg, const homsim_run_options* opts,
                         homsim_checkpoint** out, char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!cfg || !out) throw ValidationError("null argument");
    RunOptions ro;
    if (opts) {
      ro.trajectories = opts->trajectories;
      ro.traj_offset = opts->traj_offset;
      if (opts->use_seed) ro.seed = opts->seed;
      ro.workers = opts->workers;
      ro.dump_density = opts->dump_density != 0;
      if (opts->dump_dir) ro.dump_dir = opts->dump_dir;
    }
    RunResult run = run_ensemble(cfg->params, ro);
    auto cp = std::make_unique<homsim_checkpoint>();
    cp->cp = Checkpoint::from_run(std::move(run));
    *out = cp.release();
  });
}

homsim_status homsim_checkpoint_save(const homsim_checkpoint* cp, const char* dir,
                                     char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!cp || !dir) throw ValidationError("null argument");
    cp->cp.save(dir);
  });
}

homsim_status homsim_checkpoint_load_dir(const char* dir, homsim_checkpoint** out,
                                         char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!dir || !out) throw ValidationError("null argument");
    auto cp = std::make_unique<homsim_checkpoint>();
    cp->cp = Checkpoint::load_dir(dir);
    *out = cp.release();
  });
}

homsim_status homsim_checkpoint_merge(const homsim_checkpoint* a,
                                      const homsim_checkpoint* b,
                                      homsim_checkpoint** out, char* errbuf,
                                      size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!a || !b || !out) throw ValidationError("null argument");
    auto cp = std::make_unique<homsim_checkpoint>();
    cp->cp = a->cp;
    cp->cp.merge(b->cp);
    *out = cp.release();
  });
}

void homsim_checkpoint_free(homsim_checkpoint* cp) { delete cp; }

uint64_t homsim_checkpoint_trajectories(const homsim_checkpoint* cp) {
  return cp ? cp->cp.moments.trajectories() : 0;
}

double homsim_checkpoint_flagged_fraction(const homsim_checkpoint* cp) {
  return cp ? cp->cp.moments.flagged_fraction() : 0.0;
}

homsim_status homsim_analyze(const homsim_checkpoint* cp, const char* out_dir,
                             char* errbuf, size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!cp || !out_dir) throw ValidationError("null argument");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const SimulationParams& p = cp->cp.params;
    const EnsembleMoments& m = cp->cp.moments;
    GridPtr grid = analysis_grid(p);

    const CorrelationCurve curve = dip_scan(m, p.theta_list, p.config_hash);
    write_dip_csv((fs::path(out_dir) / "dip_curve.csv").string(), curve);

    for (int tag : {1, 4}) {
      const auto mean = density_mean(m, tag);
      const auto err = density_stderr(m, tag);
      write_density_csv((fs::path(out_dir) /
                         (tag == 1 ? "density_t1.csv" : "density_t4.csv"))
                            .string(),
                        *grid, mean, &err);
    }

    const HaloWidthResult halo = halo_angular_width(m, p, *grid);
    write_halo_track_csv((fs::path(out_dir) / "halo_track.csv").string(), halo);

    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    if (!out) throw IoError("cannot write summary.json");
    out << summary_json(m, p, *grid);
    if (!out) throw IoError("write failed for summary.json");
  });
}

homsim_status homsim_analyze_summary_json(const homsim_checkpoint* cp,
                                          char** out_json, char* errbuf,
                                          size_t errbuf_len) {
  return guarded(errbuf, errbuf_len, [&] {
    if (!cp || !out_json) throw ValidationError("null argument");
    GridPtr grid = analysis_grid(cp->cp.params);
    *out_json = dup_string(summary_json(cp->cp.moments, cp->cp.params, *grid));
  });
}

homsim_status homsim_oracle_spdc(double nbar, int truncated, double* dip_g2,
                                 double* wings_g2, double* visibility) {
  return guarded(nullptr, 0, [&] {
    const auto state = truncated ? oracles::SpdcState::truncated
                                 : oracles::SpdcState::full;
    if (dip_g2) *dip_g2 = oracles::spdc_hom_g2(nbar, oracles::SpdcBranch::dip, state);
    if (wings_g2)
      *wings_g2 = oracles::spdc_hom_g2(nbar, oracles::SpdcBranch::wings, state);
    if (visibility) *visibility = oracles::spdc_visibility(nbar, state);
  });
}

homsim_status homsim_oracle_spdc_occupation(double gain, double time, double* nbar) {
  return guarded(nullptr, 0, [&] {
    if (nbar) *nbar = oracles::spdc_mean_occupation(gain, time);
  });
}

homsim_status homsim_oracle_fock(double alpha, int n_max, double* dip_g2,
                                 double* wings_g2, double* visibility,
                                 int* n_max_used) {
  return guarded(nullptr, 0, [&] {
    const auto spec = oracles::TwoModeSqueezedSpec::from_alpha(alpha);
    const int n = n_max > 0 ? n_max : oracles::fock_truncation_order(alpha);
    const double dip =
        oracles::fock_hom_g2(spec, n, oracles::FockGeometry::indistinguishable);
    const double wings =
        oracles::fock_hom_g2(spec, n, oracles::FockGeometry::distinguishable);
    if (dip_g2) *dip_g2 = dip;
    if (wings_g2) *wings_g2 = wings;
    if (visibility) *visibility = 1.0 - dip / wings;
    if (n_max_used) *n_max_used = n;
  });
}

homsim_status homsim_oracle_rabi(double area, double detuning, double tau,
                                 double* transfer) {
  return guarded(nullptr, 0, [&] {
    if (transfer) *transfer = two_mode_rabi_transfer(area, detuning, tau);
  });
}

homsim_status homsim_oracle_bogoliubov(double k, double rho0, double u, double t,
                                       int include_meanfield_shift, double* n_k,
                                       double* pair_re, double* pair_im) {
  return guarded(nullptr, 0, [&] {
    const auto m = oracles::bogoliubov_uniform_oracle(k, rho0, u, t,
                                                      include_meanfield_shift != 0);
    if (n_k) *n_k = m.n_k;
    if (pair_re) *pair_re = m.pair_m.real();
    if (pair_im) *pair_im = m.pair_m.imag();
  });
}

}  // extern "C"
