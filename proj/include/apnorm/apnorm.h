#ifndef APNORM_APNORM_H
#define APNORM_APNORM_H

/* C interface to libapnorm.
 *
 * Objects are opaque handles created by apn_*_create-style calls and released
 * with the matching *_free (NULL is accepted). Every fallible call returns an
 * apn_status; on failure apn_last_error() holds a message for the calling
 * thread until its next failing call. Strings handed out through char** are
 * malloc'd and released with apn_string_free. Handles are immutable after
 * construction and may be shared between threads. */

#include <stddef.h>

#if defined(_WIN32)
#define APN_API __declspec(dllexport)
#elif defined(__GNUC__)
#define APN_API __attribute__((visibility("default")))
#else
#define APN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum apn_status {
  APN_OK = 0,
  APN_ERR_DOMAIN = 1,
  APN_ERR_PRECONDITION = 2,
  APN_ERR_CONSTRUCTION = 3,
  APN_ERR_DISPATCH = 4,
  APN_ERR_NUMERIC = 5,
  APN_ERR_IO = 6,
  APN_ERR_CONFIG = 7,
  APN_ERR_NULL_ARG = 8,
  APN_ERR_RANGE = 9,
  APN_ERR_INTERNAL = 10
} apn_status;

typedef enum apn_engine { APN_ENGINE_AUTO = 0, APN_ENGINE_EXACT = 1, APN_ENGINE_DFT = 2 } apn_engine;

typedef enum apn_envelope {
  APN_ENV_LOWER = 0,
  APN_ENV_THETA_A = 1,
  APN_ENV_THETA_AP = 2,
  APN_ENV_C2 = 3,
  APN_ENV_LOG = 4
} apn_envelope;

typedef struct apn_modulus apn_modulus;
typedef struct apn_phase apn_phase;
typedef struct apn_spectrum apn_spectrum;
typedef struct apn_config apn_config;
typedef struct apn_table apn_table;
typedef struct apn_suite apn_suite;

APN_API const char* apn_version(void);
APN_API const char* apn_status_name(apn_status s);
APN_API const char* apn_last_error(void);
/* Config line of the last APN_ERR_CONFIG on this thread, 0 if none. */
APN_API int apn_last_error_line(void);
APN_API void apn_string_free(char* s);

/* Moduli of continuity, normalized to omega(2 pi) = 1. */
APN_API apn_status apn_modulus_power(double alpha, apn_modulus** out);
APN_API apn_status apn_modulus_power_log(double alpha, double beta, apn_modulus** out);
APN_API void apn_modulus_free(apn_modulus* m);
APN_API apn_status apn_modulus_omega(const apn_modulus* m, double delta, double* out);
APN_API apn_status apn_modulus_chi(const apn_modulus* m, double delta, double* out);
APN_API apn_status apn_modulus_chi_inv(const apn_modulus* m, double u, double* out);
APN_API apn_status apn_modulus_rho(const apn_modulus* m, int j, double* out);
APN_API apn_status apn_modulus_theta(const apn_modulus* m, double y, double* out);
APN_API apn_status apn_modulus_theta_p(const apn_modulus* m, double p, double y, double* out);

/* Phases on [0, 2 pi]. */
typedef struct apn_phase_info {
  int winding;
  int affine; /* 1 for piecewise-affine, 0 for smooth */
  size_t pieces;
  double sup_deriv;
  int monotone_pieces;
  double perturbation;
  double lip_constant; /* negative when the phase carries no certificate */
} apn_phase_info;

APN_API apn_status apn_phase_linear(int slope, double offset, apn_phase** out);
APN_API apn_status apn_phase_cos(apn_phase** out);
APN_API apn_status apn_phase_pl(const double* breakpoints, const double* values, size_t n, apn_phase** out);
APN_API apn_status apn_phase_cantor(const apn_modulus* m, int depth, apn_phase** out);
APN_API apn_status apn_phase_nested(const apn_modulus* m, int levels, int depth, apn_phase** out);
APN_API apn_status apn_phase_modulate(const apn_phase* f, int m, apn_phase** out);
APN_API apn_status apn_phase_diffeo(const apn_phase* f, double eps, apn_phase** out);
APN_API void apn_phase_free(apn_phase* f);
APN_API apn_status apn_phase_info_get(const apn_phase* f, apn_phase_info* out);
APN_API apn_status apn_phase_value(const apn_phase* f, double t, double* out);
APN_API apn_status apn_phase_derivative(const apn_phase* f, double t, double* out);
APN_API apn_status apn_chord_deviation(const apn_phase* f, double lo, double hi, double* out);

/* Spectra of exp(i lambda phi) and their A_p norms. K = 0 picks ceil(|lambda|^1.5). */
typedef struct apn_spectrum_info {
  double lambda;
  long K;
  long center;
  apn_engine engine;
  double band_error;
  int band_error_rigorous;
  double perturbation_error;
  double tail_pointwise;
  double tail_l2;
} apn_spectrum_info;

typedef struct apn_norm {
  double p;
  double lo;
  double hi;
  long K;
  double tail;
  double ideal_lo;
  double ideal_hi;
} apn_norm;

APN_API apn_status apn_spectrum_compute(const apn_phase* f, double lambda, long K, apn_engine engine,
                                        apn_spectrum** out);
APN_API void apn_spectrum_free(apn_spectrum* s);
APN_API apn_status apn_spectrum_info_get(const apn_spectrum* s, apn_spectrum_info* out);
APN_API apn_status apn_spectrum_coeff(const apn_spectrum* s, long k, double* re, double* im);
APN_API apn_status apn_ap_norm(const apn_spectrum* s, double p, apn_norm* out);
APN_API apn_status apn_triangle_coeff(double eps, long k, double* out);

/* Coefficient witnesses and growth envelopes. */
typedef struct apn_witness_report {
  double lambda;
  long k;
  double t;
  double window_lo;
  double window_hi;
  double delta;
  double measured;
  double threshold;
  double quad_error;
  int pass;
} apn_witness_report;

APN_API apn_status apn_lip_estimate(const apn_phase* f, const apn_modulus* m, double* out);
APN_API apn_status apn_delta_lambda(const apn_modulus* m, double c, double lambda, double* out);
APN_API apn_status apn_witness(const apn_phase* f, const apn_modulus* m, double c, double lambda, long k,
                               apn_witness_report* out);
/* m may be NULL for APN_ENV_C2 and APN_ENV_LOG. */
APN_API apn_status apn_envelope_value(apn_envelope kind, const apn_modulus* m, double p, double lambda, double* out);
APN_API apn_status apn_envelope_parse(const char* name, apn_envelope* out);

/* Experiment configs (`key = value` files). */
APN_API apn_status apn_config_load(const char* path, apn_config** out);
APN_API apn_status apn_config_parse(const char* text, apn_config** out);
APN_API void apn_config_free(apn_config* c);
/* Borrowed string owned by the config; "" when output.csv is unset. */
APN_API const char* apn_config_output_csv(const apn_config* c);
APN_API apn_status apn_config_modulus(const apn_config* c, apn_modulus** out);

/* Norm tables: rows of lambda,p,norm_lo,norm_hi,band_K,tail,engine. */
typedef struct apn_norm_row {
  double lambda;
  double p;
  double lo;
  double hi;
  long K;
  double tail;
  apn_engine engine;
} apn_norm_row;

APN_API apn_status apn_run_norms(const apn_config* c, apn_table** out);
APN_API apn_status apn_table_read_csv(const char* path, apn_table** out);
APN_API void apn_table_free(apn_table* t);
APN_API size_t apn_table_rows(const apn_table* t);
APN_API apn_status apn_table_row(const apn_table* t, size_t i, apn_norm_row* out);
APN_API apn_status apn_table_csv(const apn_table* t, char** out);

typedef struct apn_window {
  double lo;
  double hi;
} apn_window;

typedef struct apn_fit {
  double exponent;
  double intercept;
  double stderr_;
  apn_window window;
  double residual_max;
  int points;
} apn_fit;

/* window may be NULL for the default (upper half of the lambda range). */
APN_API apn_status apn_fit_exponent(const apn_table* t, double p, const apn_window* window, apn_fit* out);

typedef struct apn_envelope_summary {
  double constant;
  double min_ratio;
  double max_ratio;
  double min_ratio_hi;
  double max_ratio_hi;
  size_t rows;
} apn_envelope_summary;

typedef struct apn_envelope_row {
  double lambda;
  double envelope;
  double ratio_mid;
  double ratio_hi;
} apn_envelope_row;

/* Fills up to `capacity` rows (rows may be NULL when capacity is 0). */
APN_API apn_status apn_compare_envelopes(const apn_table* t, double p, apn_envelope kind, const apn_modulus* m,
                                         const apn_window* window, apn_envelope_summary* summary,
                                         apn_envelope_row* rows, size_t capacity);

/* Witness suite over a config's lambda grid. */
typedef struct apn_final_check {
  double lambda;
  double p;
  double lhs;
  double hi;
  int holds;
} apn_final_check;

typedef struct apn_suite_summary {
  int passed;
  int failed;
  double min_margin;
  double lip_constant;
  size_t reports;
  size_t final_checks;
  int final_failed;
  size_t warnings;
} apn_suite_summary;

APN_API apn_status apn_witness_suite(const apn_config* c, apn_suite** out);
APN_API void apn_suite_free(apn_suite* s);
APN_API apn_status apn_suite_summary_get(const apn_suite* s, apn_suite_summary* out);
APN_API apn_status apn_suite_report(const apn_suite* s, size_t i, apn_witness_report* out);
APN_API apn_status apn_suite_final(const apn_suite* s, size_t i, apn_final_check* out);
/* Borrowed string owned by the suite. */
APN_API const char* apn_suite_warning(const apn_suite* s, size_t i);
APN_API apn_status apn_suite_csv(const apn_suite* s, char** out);

/* Log-log SVG of a table with optional envelope overlays (m may be NULL when
 * no overlay needs a modulus). Nothing is written on failure. */
APN_API apn_status apn_plot(const apn_table* t, const apn_envelope* overlays, size_t n_overlays, const apn_modulus* m,
                            const char* path);

#ifdef __cplusplus
}
#endif

#endif
