/*
 * homsim — stochastic simulator of a matter-wave Hong-Ou-Mandel experiment.
 *
 * C API of the shared library. All functions return a homsim_status; on
 * failure a human-readable message is written into the caller-supplied error
 * buffer (always NUL-terminated when errbuf_len > 0). Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching *_free function. Strings returned through char** out-parameters
 * are released with homsim_string_free.
 *
 * Handles are opaque; the library is thread-compatible (distinct handles may
 * be used from distinct threads concurrently).
 */
#ifndef HOMSIM_H
#define HOMSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum homsim_status {
  HOMSIM_OK = 0,
  HOMSIM_ERR_PARSE = 1,      /* malformed input document */
  HOMSIM_ERR_VALIDATION = 2, /* input violating a stated invariant */
  HOMSIM_ERR_RUNTIME = 3,    /* numerical failure or flagged-trajectory overrun */
  HOMSIM_ERR_IO = 4,         /* filesystem problem */
  HOMSIM_ERR_DATA = 5        /* stored data inconsistent with its manifest */
} homsim_status;

typedef struct homsim_config homsim_config;
typedef struct homsim_checkpoint homsim_checkpoint;

const char* homsim_version(void);
void homsim_string_free(char* s);

/* ---- configuration -------------------------------------------------- */

homsim_status homsim_config_load(const char* path, homsim_config** out,
                                 char* errbuf, size_t errbuf_len);
homsim_status homsim_config_parse(const char* text, homsim_config** out,
                                  char* errbuf, size_t errbuf_len);
void homsim_config_free(homsim_config* cfg);

uint64_t homsim_config_trajectories(const homsim_config* cfg);
uint64_t homsim_config_seed(const homsim_config* cfg);

/* Resolved internal-unit parameters as a JSON document (schedule echo,
 * derived couplings, config hash). */
homsim_status homsim_config_summary_json(const homsim_config* cfg, char** out_json,
                                         char* errbuf, size_t errbuf_len);

/* ---- running ---------------------------------------------------------- */

typedef struct homsim_run_options {
  uint64_t trajectories; /* 0: use the config value */
  uint64_t traj_offset;  /* first trajectory id */
  int use_seed;          /* when non-zero, `seed` overrides the config value */
  uint64_t seed;
  int workers;           /* 0: hardware concurrency */
  int dump_density;      /* write mean-field momentum-density CSVs */
  const char* dump_dir;  /* where to put them (may be NULL when not dumping) */
} homsim_run_options;

homsim_status homsim_run(const homsim_config* cfg, const homsim_run_options* opts,
                         homsim_checkpoint** out, char* errbuf, size_t errbuf_len);

/* ---- checkpoints ------------------------------------------------------ */

homsim_status homsim_checkpoint_save(const homsim_checkpoint* cp, const char* dir,
                                     char* errbuf, size_t errbuf_len);
homsim_status homsim_checkpoint_load_dir(const char* dir, homsim_checkpoint** out,
                                         char* errbuf, size_t errbuf_len);
homsim_status homsim_checkpoint_merge(const homsim_checkpoint* a,
                                      const homsim_checkpoint* b,
                                      homsim_checkpoint** out, char* errbuf,
                                      size_t errbuf_len);
void homsim_checkpoint_free(homsim_checkpoint* cp);

uint64_t homsim_checkpoint_trajectories(const homsim_checkpoint* cp);
double homsim_checkpoint_flagged_fraction(const homsim_checkpoint* cp);

/* ---- analysis ---------------------------------------------------------- */

/* Writes dip_curve.csv, summary.json, density_t1.csv, density_t4.csv and
 * halo_track.csv into out_dir. Idempotent: same checkpoint, same bytes. */
homsim_status homsim_analyze(const homsim_checkpoint* cp, const char* out_dir,
                             char* errbuf, size_t errbuf_len);

homsim_status homsim_analyze_summary_json(const homsim_checkpoint* cp,
                                          char** out_json, char* errbuf,
                                          size_t errbuf_len);

/* ---- analytic oracles --------------------------------------------------- */

/* Closed-form HOM statistics of the two-mode squeezed state with mean
 * occupation nbar; truncated != 0 selects the weak-gain truncated state. */
homsim_status homsim_oracle_spdc(double nbar, int truncated, double* dip_g2,
                                 double* wings_g2, double* visibility);

/* <n> = sinh^2(g t). */
homsim_status homsim_oracle_spdc_occupation(double gain, double time, double* nbar);

/* Explicit Fock-space beam-splitter computation; n_max <= 0 selects the
 * truncation rule (neglected weight < 1e-10). */
homsim_status homsim_oracle_fock(double alpha, int n_max, double* dip_g2,
                                 double* wings_g2, double* visibility,
                                 int* n_max_used);

/* Two-mode Rabi transfer for a Gaussian pulse of the given area, rms
 * duration tau and detuning. */
homsim_status homsim_oracle_rabi(double area, double detuning, double tau,
                                 double* transfer);

/* Exact uniform-pump Bogoliubov pair moments at momentum k. */
homsim_status homsim_oracle_bogoliubov(double k, double rho0, double u, double t,
                                       int include_meanfield_shift, double* n_k,
                                       double* pair_re, double* pair_im);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HOMSIM_H */
