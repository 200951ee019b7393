#ifndef MSID_MSID_H
#define MSID_MSID_H

/* C interface of the msid toolkit: multisine excitation design, synthetic
 * nonlinear plant experiments, and robust best-linear-approximation analysis
 * of periodic records.
 *
 * All functions return msid_status; on any failure msid_last_error() gives a
 * thread-local human-readable message. Objects returned through out
 * parameters are owned by the caller and released with the matching _free
 * function. Array getters take the caller's buffer capacity (in elements)
 * and fail with MSID_ERR_ARGUMENT when it is too small.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MSID_API __declspec(dllexport)
#elif defined(__GNUC__)
#define MSID_API __attribute__((visibility("default")))
#else
#define MSID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msid_status {
    MSID_OK = 0,
    MSID_ERR_ARGUMENT = 1, /* invalid parameters or buffer sizes */
    MSID_ERR_IO = 2,       /* filesystem or file-format failure */
    MSID_ERR_DATA = 3,     /* well-formed input with invalid content */
    MSID_ERR_NUMERIC = 4,  /* numerical failure (instability, rank loss) */
    MSID_ERR_INTERNAL = 5
} msid_status;

MSID_API const char* msid_version(void);

/* Message of the most recent failure on the calling thread; empty string if
 * none. The pointer stays valid until the next msid call on this thread. */
MSID_API const char* msid_last_error(void);

typedef struct msid_design msid_design;
typedef struct msid_plant msid_plant;
typedef struct msid_analysis msid_analysis;

/* ---- excitation design ---- */

typedef struct msid_design_params {
    double reference_rate_hz;
    int32_t samples_per_period;
    double f_min_hz;
    double f_max_hz;
    double amplitude;
    int32_t num_realizations;
    uint64_t seed;
    int32_t prefix_samples;
    int32_t upsample_factor;
} msid_design_params;

/* Fills in the default parameter set (31.25 Hz, 400 samples, 0.06-1 Hz band,
 * amplitude 0.02, prefix 100, zero-order hold x32). */
MSID_API void msid_design_params_init(msid_design_params* params);

MSID_API msid_status msid_design_create(const msid_design_params* params,
                                        msid_design** out);
MSID_API msid_status msid_design_load(const char* path, msid_design** out);
MSID_API msid_status msid_design_save(const msid_design* design, const char* path);
MSID_API void msid_design_free(msid_design* design);

MSID_API msid_status msid_design_get_params(const msid_design* design,
                                            msid_design_params* out);
MSID_API msid_status msid_design_num_bins(const msid_design* design, int32_t* out);
MSID_API msid_status msid_design_excited_bins(const msid_design* design, int32_t* out,
                                              size_t capacity);
MSID_API msid_status msid_design_frequencies_hz(const msid_design* design, double* out,
                                                size_t capacity);

/* Reference-rate samples (prefix followed by one period) of one realization.
 * Query the required capacity by passing out = NULL. */
MSID_API msid_status msid_design_reference_signal(const msid_design* design,
                                                  int32_t realization, double* out,
                                                  size_t capacity, size_t* out_len);

/* RMS and crest factor of one period of the given realization. */
MSID_API msid_status msid_design_signal_stats(const msid_design* design,
                                              int32_t realization, double* rms_out,
                                              double* crest_out);

/* ---- synthetic plants ---- */

MSID_API msid_status msid_plant_load(const char* path, msid_plant** out);
MSID_API msid_status msid_plant_from_json(const char* json_text, msid_plant** out);
MSID_API msid_status msid_plant_save(const msid_plant* plant, const char* path);
MSID_API void msid_plant_free(msid_plant* plant);

/* Simulates every design realization against the plant in steady state and
 * writes `<basename>_r<NNN>.csv` plus metadata sidecars into out_dir
 * (created if missing). Reports the number of records written. */
MSID_API msid_status msid_simulate(const msid_design* design, const msid_plant* plant,
                                   int32_t num_periods, const char* out_dir,
                                   const char* basename, int32_t* num_records_out);

/* ---- analysis ---- */

typedef struct msid_analysis_options {
    int32_t use_lpm;        /* 0: ETFE-based BLA curve, 1: local polynomial curve */
    int32_t lpm_poly_order;
    int32_t lpm_half_width; /* 0: automatic */
    double drift_threshold; /* relative set-point shift that raises a flag */
} msid_analysis_options;

MSID_API void msid_analysis_options_init(msid_analysis_options* options);

MSID_API msid_status msid_analyze(const char* design_path,
                                  const char* const* record_paths, size_t num_records,
                                  const msid_analysis_options* options,
                                  msid_analysis** out);
MSID_API void msid_analysis_free(msid_analysis* analysis);

typedef struct msid_summary {
    double median_mag_db;
    double median_noise_gap_db; /* NaN when unavailable */
    double median_total_gap_db; /* NaN when unavailable */
    double median_nl_fraction;  /* NaN when unavailable */
    int32_t drift_flagged;
    int32_t num_realizations;
    int32_t num_periods;
    int32_t num_bins;
    int32_t noise_available;
    int32_t total_available;
    int32_t dof_noise;
    int32_t dof_total;
} msid_summary;

MSID_API msid_status msid_analysis_summary(const msid_analysis* analysis,
                                           msid_summary* out);

/* Multi-line human-readable summary. Pass buffer = NULL to query the length
 * (excluding the terminator). */
MSID_API msid_status msid_analysis_summary_text(const msid_analysis* analysis,
                                                char* buffer, size_t capacity,
                                                size_t* out_len);

/* Reported FRF curve. Any output pointer may be NULL to skip that column. */
MSID_API msid_status msid_analysis_curve(const msid_analysis* analysis, double* freq_hz,
                                         double* re, double* im, size_t capacity);

/* Variance decomposition of the BLA; unavailable curves are filled with NaN.
 * Any output pointer may be NULL. */
MSID_API msid_status msid_analysis_variances(const msid_analysis* analysis,
                                             double* noise_var, double* total_var,
                                             double* nl_var, size_t capacity);

/* Writes report.json, bla_curves.csv, frf.csv and drift.csv into out_dir. */
MSID_API msid_status msid_analysis_save(const msid_analysis* analysis,
                                        const char* out_dir);

/* ---- report bundle ---- */

/* Derives the five plot-ready figure files from a saved report.json.
 * format is "csv" or "json". */
MSID_API msid_status msid_report(const char* report_path, const char* out_dir,
                                 const char* format);

#ifdef __cplusplus
}
#endif

#endif /* MSID_MSID_H */
