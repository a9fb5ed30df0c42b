/* C API of the differential-interferometry toolkit. All functions return a
 * status code; difint_last_error() describes the most recent failure on the
 * calling thread. Objects are opaque handles released with the matching
 * _destroy function; strings returned through char** are released with
 * difint_string_free. */

#ifndef DIFINT_H
#define DIFINT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DIFINT_API __declspec(dllexport)
#else
#define DIFINT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum difint_status {
  DIFINT_OK = 0,
  DIFINT_ERR_INVALID_ARGUMENT = 1,
  DIFINT_ERR_CAPACITY = 2,
  DIFINT_ERR_DEGENERATE_DATA = 3,
  DIFINT_ERR_NUMERIC = 4,
  DIFINT_ERR_IO = 5,
  DIFINT_ERR_PARSE = 6,
  DIFINT_ERR_INTERNAL = 7
} difint_status;

typedef struct difint_config difint_config;
typedef struct difint_table difint_table;
typedef struct difint_shots difint_shots;

DIFINT_API const char* difint_version(void);
DIFINT_API const char* difint_last_error(void);
DIFINT_API void difint_string_free(char* s);

/* --- interferometer pair ------------------------------------------------ */

DIFINT_API difint_status difint_config_create(int n1, int n2, double tau, double theta1,
                                              double theta2, difint_config** out);
DIFINT_API void difint_config_destroy(difint_config* config);
DIFINT_API double difint_config_theta(const difint_config* config);
DIFINT_API double difint_config_sigma_true_sq(const difint_config* config);

/* --- tabulated joint distribution ---------------------------------------- */

/* k_phi = 0 selects the smallest valid power-of-two grid. */
DIFINT_API difint_status difint_table_build(const difint_config* config, size_t k_phi,
                                            difint_table** out);
DIFINT_API void difint_table_destroy(difint_table* table);
DIFINT_API size_t difint_table_k_phi(const difint_table* table);

DIFINT_API difint_status difint_joint_density(const difint_config* config,
                                              const difint_table* table, double z1, double z2,
                                              double* out);

/* --- shot data ------------------------------------------------------------ */

DIFINT_API difint_status difint_sample_shots(const difint_config* config,
                                             const difint_table* table, size_t m, uint64_t seed,
                                             difint_shots** out);
DIFINT_API void difint_shots_destroy(difint_shots* shots);
DIFINT_API size_t difint_shots_size(const difint_shots* shots);
DIFINT_API difint_status difint_shots_get(const difint_shots* shots, size_t index, double* z1,
                                          double* z2);
DIFINT_API difint_status difint_shots_save(const difint_shots* shots,
                                           const difint_config* config, const char* csv_path,
                                           const char* sidecar_path);
DIFINT_API difint_status difint_shots_load(const char* csv_path, const char* sidecar_path,
                                           difint_shots** out_shots, difint_config** out_config);

/* --- estimation ------------------------------------------------------------ */

typedef struct difint_estimate_result {
  double theta_est;
  double sigma_est;
  double tau_est_analytic;
  double tau_est_exact;
  double log_likelihood_at_max;
  int converged;
  int clamped_tau;
  int n_function_evals;
} difint_estimate_result;

DIFINT_API difint_status difint_estimate(const difint_shots* shots,
                                         difint_estimate_result* out);
DIFINT_API difint_status difint_estimate_json(const difint_shots* shots, char** json_out);

/* --- Fisher information / bounds ------------------------------------------ */

typedef struct difint_fisher_result {
  double f11;
  double f12;
  double f22;
  double crb_dtheta;
  double crb_dsigma;
  int converged;
} difint_fisher_result;

DIFINT_API difint_status difint_fisher(double theta, double sigma, size_t m,
                                       difint_fisher_result* out);

/* --- file-level commands (config text: `key = value` lines) ---------------- */

DIFINT_API difint_status difint_run_simulate(const char* config_text, const char* out_dir);
DIFINT_API difint_status difint_run_estimate(const char* csv_path, const char* sidecar_path,
                                             char** json_out, char** warnings_out);
DIFINT_API difint_status difint_run_fisher_json(double theta, double sigma, size_t m, int n1,
                                                int n2, double tau, char** json_out);
DIFINT_API difint_status difint_run_benchmark(const char* config_text, const char* out_dir);
DIFINT_API difint_status difint_config_echo(const char* config_text, char** echo_out);

#ifdef __cplusplus
}
#endif

#endif /* DIFINT_H */
