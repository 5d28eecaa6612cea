/*
 * heatpath C interface.
 *
 * All functions return an hp_status; on failure hp_last_error() describes the
 * problem for the calling thread. Handles are opaque and owned by the caller.
 */
#ifndef HEATPATH_H
#define HEATPATH_H

#include <stddef.h>
#include <stdint.h>

#if defined(HEATPATH_BUILDING_LIBRARY)
#define HP_API __attribute__((visibility("default")))
#else
#define HP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hp_status {
    HP_OK = 0,
    HP_ERR_INVALID_INPUT = 1,
    HP_ERR_DOMAIN = 2,
    HP_ERR_UNSUPPORTED = 3,
    HP_ERR_UNDEFINED = 4,
    HP_ERR_VALIDATION = 5,
    HP_ERR_IO = 6,
    HP_ERR_PROPERTY_FAILED = 7,
    HP_ERR_INTERNAL = 8
} hp_status;

typedef struct hp_config hp_config;
typedef struct hp_geometry hp_geometry;

HP_API const char* hp_version(void);
/* Message of the last failed call on this thread, "" if none. */
HP_API const char* hp_last_error(void);
HP_API const char* hp_status_name(hp_status status);

/* ---- configuration */
HP_API hp_status hp_config_create(hp_config** out);
HP_API hp_status hp_config_parse(const char* text, hp_config** out);
HP_API hp_status hp_config_load(const char* path, hp_config** out);
HP_API void hp_config_destroy(hp_config* cfg);
HP_API hp_status hp_config_set(hp_config* cfg, const char* key, const char* value);
/* Copies a NUL-terminated value into buf; *needed receives the full size including the NUL. */
HP_API hp_status hp_config_get(const hp_config* cfg, const char* key, char* buf, size_t len, size_t* needed);
HP_API hp_status hp_config_serialize(const hp_config* cfg, char* buf, size_t len, size_t* needed);
HP_API hp_status hp_config_hash(const hp_config* cfg, uint64_t* out);

/* ---- runs; outputs go to the config's `out` directory */
HP_API hp_status hp_run_trace(const hp_config* cfg);
HP_API hp_status hp_run_step(const hp_config* cfg);
HP_API hp_status hp_run_slices(const hp_config* cfg);
HP_API hp_status hp_run_converge(const hp_config* cfg);
HP_API hp_status hp_run_oracle(const hp_config* cfg);
/* Returns HP_ERR_PROPERTY_FAILED when any property fails; the report is still written. */
HP_API hp_status hp_run_props(const hp_config* cfg);

/* ---- direct access */
HP_API hp_status hp_geometry_create(const char* descriptor, hp_geometry** out);
HP_API void hp_geometry_destroy(hp_geometry* g);
/* Coordinates per point: 1 (interval, circle), 2 (planar, torus) or 3 (sphere). */
HP_API int hp_geometry_coordinates(const hp_geometry* g);
/* Billiard flow for time t (negative runs backwards). Rejected trajectories give
 * HP_ERR_DOMAIN and leave x_out, v_out equal to the input. */
HP_API hp_status hp_billiard_flow(const hp_geometry* g, const double* x, const double* v, double t, double* x_out,
                                  double* v_out, int* reflections);

/* P_tau u(x) with the config's bundle, section, seed and samples on a uniform
 * partition with n slices. Arrays hold `rank` entries. */
HP_API hp_status hp_estimate_point(const hp_config* cfg, const double* x, int n, double* re, double* im,
                                   double* stderr_re, double* stderr_im, long* rejected);

#ifdef __cplusplus
}
#endif

#endif
