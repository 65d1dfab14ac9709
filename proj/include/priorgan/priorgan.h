/* PriorGAN toolkit: C interface.
 *
 * Every function returns a pg_status. On failure, pg_last_error() returns a
 * thread-local message describing the most recent error on the calling
 * thread; it stays valid until the next call on that thread.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function (which accepts NULL).
 */
#ifndef PRIORGAN_H
#define PRIORGAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PG_API __declspec(dllexport)
#else
#define PG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pg_status {
    PG_OK = 0,
    PG_INVALID_ARGUMENT = 1,
    PG_DIMENSION_MISMATCH = 2,
    PG_NOT_POSITIVE_DEFINITE = 3,
    PG_SINGULAR_MATRIX = 4,
    PG_DEGENERATE_DATA = 5,
    PG_TOO_FEW_POINTS = 6,
    PG_COLLAPSED_COMPONENT = 7,
    PG_EMPTY_SET = 8,
    PG_PROFILE_LENGTH_MISMATCH = 9,
    PG_DEGENERATE_CALIBRATION = 10,
    PG_ALL_CLIPPED_TO_ZERO = 11,
    PG_EMPTY_GROUP_POOL = 12,
    PG_TAPE_MISMATCH = 13,
    PG_DOMAIN_ERROR = 14,
    PG_NON_FINITE_LOSS = 15,
    PG_BOTH_DENSITIES_UNDERFLOW = 16,
    PG_CONFIG_ERROR = 17,
    PG_IO_ERROR = 18,
    PG_FORMAT_ERROR = 19,
    PG_VERSION_MISMATCH = 20,
    PG_INTERNAL_ERROR = 99
} pg_status;

typedef struct pg_prior pg_prior;
typedef struct pg_config pg_config;

PG_API const char* pg_version(void);
PG_API const char* pg_rng_version(void);
PG_API const char* pg_last_error(void);
PG_API const char* pg_status_name(pg_status status);
/* Process exit status for a command result: 0, 1 (runtime) or 2 (usage). */
PG_API int pg_exit_code(pg_status status);

/* Run configuration (JSON). */
PG_API pg_status pg_config_load(const char* path, pg_config** out);
/* Writes the fully resolved JSON into buf (NUL-terminated). *needed receives
 * the required size including the terminator; buf may be NULL to query it. */
PG_API pg_status pg_config_resolved_json(const pg_config* cfg, char* buf, size_t cap, size_t* needed);
PG_API void pg_config_free(pg_config* cfg);

/* Prior models. */
PG_API pg_status pg_prior_fit(const pg_config* cfg, pg_prior** out);
PG_API pg_status pg_prior_load(const char* path, pg_prior** out);
PG_API pg_status pg_prior_save(const pg_prior* prior, const char* path);
PG_API void pg_prior_free(pg_prior* prior);
PG_API pg_status pg_prior_dims(const pg_prior* prior, size_t* input_dim, size_t* feature_dim, size_t* components);
/* x has input_dim entries. */
PG_API pg_status pg_prior_log_density(const pg_prior* prior, const double* x, size_t dim, double* out);
PG_API pg_status pg_prior_quality_loss(const pg_prior* prior, const double* x, size_t dim, double* out);
PG_API pg_status pg_prior_assign(const pg_prior* prior, const double* x, size_t dim, size_t* component);
/* Mean normalised log density over n row-major points. */
PG_API pg_status pg_prior_quality_score(const pg_prior* prior, const double* xs, size_t n, size_t dim, double* out);

/* Frequency arithmetic. */
PG_API pg_status pg_diversity_distance(const double* f_real, const double* f_gen, size_t m, double* d_out,
                                       double* dds_out);
PG_API pg_status pg_resample_update(const double* f_real, const double* f_gen, size_t m, double alpha,
                                    double* f_new_out);

/* Commands. Progress text goes to stdout. */
PG_API pg_status pg_cmd_fit_prior(const char* config_path);
/* prior_path NULL runs the prior-free baseline. */
PG_API pg_status pg_cmd_train(const char* config_path, const char* prior_path);
/* Exactly one of samples_path / checkpoint_path is non-NULL; report_path may be NULL. */
PG_API pg_status pg_cmd_eval(const char* prior_path, const char* samples_path, const char* checkpoint_path,
                             size_t samples, uint64_t seed, const char* report_path);
/* source: "discriminator", "optimal" or "quality". theta_percentile < 0 keeps
 * the prior's threshold. Empty strings stand for absent paths. */
PG_API pg_status pg_cmd_gradfield(const char* checkpoint_path, const char* prior_path, const char* source,
                                  size_t grid, double theta_percentile, uint64_t seed, const char* output_dir);
/* Replays a gradfield_<source>_resolved.json. */
PG_API pg_status pg_cmd_gradfield_replay(const char* resolved_path);
/* param: "M", "delta" or "alpha". */
PG_API pg_status pg_cmd_sweep(const char* config_path, const char* param, const double* values, size_t count);

#ifdef __cplusplus
}
#endif

#endif /* PRIORGAN_H */
