#ifndef SPINENV_H
#define SPINENV_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPINENV_BUILDING_LIBRARY)
#define SPINENV_API __attribute__((visibility("default")))
#else
#define SPINENV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The first four double as CLI exit codes. */
typedef enum spe_status {
  SPE_OK = 0,
  SPE_VALIDATION_FAILED = 1,
  SPE_USAGE = 2,
  SPE_NUMERICAL = 3,
  SPE_PARSE = 4,
  SPE_CAPACITY = 5,
  SPE_INTERNAL = 6
} spe_status;

typedef enum spe_format { SPE_FORMAT_CSV = 0, SPE_FORMAT_JSON = 1 } spe_format;

typedef struct spe_model spe_model;

typedef struct spe_preset_params {
  double gamma;
  double delta0;
  double delta1;
  double p;
  double lambda;
} spe_preset_params;

typedef struct spe_constants {
  double C;
  double K;
  double b_bar;
  double c_bar0;
  double c_bar1;
  double c_bar;
} spe_constants;

SPINENV_API const char *spe_version(void);

/* Message for the last failing call on this thread ("" if none). */
SPINENV_API const char *spe_last_error(void);
/* Line of the last config parse error, 0 if not applicable. */
SPINENV_API int spe_last_error_line(void);

/* Frees any string returned through a char** out parameter. */
SPINENV_API void spe_string_free(char *s);

SPINENV_API void spe_preset_defaults(spe_preset_params *out);

SPINENV_API spe_status spe_model_from_config(const char *text, spe_model **out);
SPINENV_API spe_status spe_model_from_preset(const char *name, const spe_preset_params *params,
                                             int sites, const char *boundary, spe_model **out);
SPINENV_API void spe_model_free(spe_model *m);

SPINENV_API int spe_model_sites(const spe_model *m);
SPINENV_API spe_status spe_model_to_config(const spe_model *m, char **out);

/* Attractivity and compatibility. Returns SPE_VALIDATION_FAILED when either
   fails; *report (optional) receives a JSON description either way. */
SPINENV_API spe_status spe_model_validate(const spe_model *m, char **report);
SPINENV_API spe_status spe_model_constants(const spe_model *m, spe_constants *out);

/* Graphical simulation of (beta, eta). Initial layers are configuration
   literals; NULL means i.i.d. fair coins drawn from the seed. */
SPINENV_API spe_status spe_simulate(const spe_model *m, const char *beta0, const char *eta0,
                                    double t_max, uint64_t seed, spe_format format, char **out);

/* Coupled process with 1 to 4 spin layers. `initial` holds one literal per
   layer separated by ';' (beta first), or NULL for beta random, eta = 0,
   xi = 1 and random ordered middle layers. */
SPINENV_API spe_status spe_couple(const spe_model *m, int spin_layers, const char *initial,
                                  double t_max, uint64_t seed, int check_classes,
                                  spe_format format, char **out, size_t *order_violations);

/* Exact oracle. Stationary analysis returns SPE_NUMERICAL on rank ambiguity
   or when the nu limits do not converge (the output is still written). */
SPINENV_API spe_status spe_oracle_stationary(const spe_model *m, spe_format format, char **out,
                                             size_t *dimension);
SPINENV_API spe_status spe_oracle_generator(const spe_model *m, spe_format format, char **out);
SPINENV_API spe_status spe_oracle_distribution(const spe_model *m, uint64_t start_state,
                                               double t, spe_format format, char **out);

/* Counterexample scenarios "iv" and "vi". */
SPINENV_API spe_status spe_scenario_remark(const char *name, const spe_preset_params *params,
                                           int sites, const char *boundary, double epsilon,
                                           spe_format format, char **out);

/* Estimators. JSON reports carry a runtime_ms field; CSV output does not. */
SPINENV_API spe_status spe_estimate_coalescence(const spe_model *m, const char *beta0, int k,
                                                double t, size_t replicas, uint64_t seed,
                                                spe_format format, char **out);
SPINENV_API spe_status spe_density_curves(const spe_model *m, const double *t_grid, size_t count,
                                          size_t replicas, uint64_t seed, spe_format format,
                                          char **out);
SPINENV_API spe_status spe_f_decay(const spe_model *m, const int *lengths, size_t count, double t,
                                   size_t replicas, uint64_t seed, spe_format format, char **out);
/* t < 0 picks the oracle-calibrated burn-in. Returns SPE_VALIDATION_FAILED
   when either inequality fails by more than 3 standard errors. */
SPINENV_API spe_status spe_lemma_check(const spe_model *m, double t, size_t replicas,
                                       uint64_t seed, int m_left, int n_right, int l,
                                       spe_format format, char **out);

#ifdef __cplusplus
}
#endif

#endif
