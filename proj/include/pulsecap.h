/*
 * pulsecap — public C interface of the pulse-capture simulation and
 * estimation library.
 *
 * Every entry point returns a pulsecap_status; on failure the thread-local
 * message from pulsecap_last_error() describes what was rejected.  Opaque
 * handles (trajectories, records, scans) are created by the library and must
 * be released with their matching *_free function.  Plain parameter structs
 * are passed by pointer and never retained.
 */
#ifndef PULSECAP_H
#define PULSECAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PULSECAP_API __declspec(dllexport)
#else
#define PULSECAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pulsecap_status {
    PULSECAP_OK = 0,
    PULSECAP_ERR_INVALID_ARGUMENT = 1, /* rejected input or precondition */
    PULSECAP_ERR_NUMERIC = 2,          /* integration/estimation failure */
    PULSECAP_ERR_IO = 3                /* file read/write failure */
} pulsecap_status;

/* Message for the most recent failure on this thread ("" if none). */
PULSECAP_API const char *pulsecap_last_error(void);

PULSECAP_API const char *pulsecap_version(void);

/* ---- device model ---------------------------------------------------- */

typedef struct pulsecap_system {
    double omega;        /* resonator angular frequency, rad/s */
    double r1_impedance; /* drive line impedance, ohm */
    double r2_impedance; /* resonator line impedance, ohm */
    double tau_rt;       /* round-trip time, s; <= 0 selects pi/omega */
    double kappa_on;     /* coupled decay rate with the coupler open, 1/s */
    double kappa_i;      /* internal loss rate 1/T1, 1/s (0 = lossless) */
} pulsecap_system;

typedef struct pulsecap_coefficients {
    double t_drive_re, t_drive_im; /* drive line -> resonator */
    double t_res_re, t_res_im;     /* resonator -> drive line */
    double r_drive_re, r_drive_im; /* reflection on the drive side */
    double r_res_re, r_res_im;     /* reflection on the resonator side */
    double r_mag;                  /* common reflection magnitude |r| */
} pulsecap_coefficients;

enum {
    PULSECAP_PULSE_RECTANGULAR = 0,
    PULSECAP_PULSE_EXPONENTIAL = 1
};

typedef struct pulsecap_pulse {
    int shape;        /* PULSECAP_PULSE_* */
    double amplitude; /* envelope scale */
    double tau;       /* exponential time constant, s (signed); ignored for rectangular */
    double t_drive;   /* drive stop time T', s; may be INFINITY for decaying exponential */
    double detuning;  /* drive minus resonator angular frequency, rad/s */
} pulsecap_pulse;

typedef struct pulsecap_schedule {
    double t_close;   /* capture time T, s */
    double kappa_off; /* decay rate while closed, 1/s */
    double ramp;      /* linear ramp duration at each switch, s (0 = step) */
    double t_reopen;  /* reopen time for release, s; < 0 = never */
} pulsecap_schedule;

/* Scattering coefficients at decay rate kappa (usually sys->kappa_on, or the
 * instantaneous scheduled value).  phase_t1 fixes arg(t_drive). */
PULSECAP_API pulsecap_status pulsecap_derive_coefficients(
    const pulsecap_system *sys, double kappa, double phase_t1,
    pulsecap_coefficients *out);

/* Envelope value at time t (imaginary part always 0). */
PULSECAP_API pulsecap_status pulsecap_envelope_at(const pulsecap_pulse *pulse,
                                                  double t, double *re,
                                                  double *im);

/* ---- closed-form efficiencies ----------------------------------------- */

typedef enum pulsecap_formula {
    PULSECAP_FORMULA_RECTANGULAR = 0,
    PULSECAP_FORMULA_EXPONENTIAL_CHOPPED = 1,
    PULSECAP_FORMULA_EXPONENTIAL_DEGENERATE = 2,
    PULSECAP_FORMULA_DECREASING_INFINITE = 3,
    PULSECAP_FORMULA_DECREASING_INFINITE_DEGENERATE = 4,
    PULSECAP_FORMULA_INCREASING_INFINITE = 5
} pulsecap_formula;

PULSECAP_API pulsecap_status pulsecap_eff_rectangular(double kappa,
                                                      double t_pulse,
                                                      double *value);
PULSECAP_API pulsecap_status pulsecap_eff_exponential(double kappa, double tau,
                                                      double t_close,
                                                      double t_drive,
                                                      double *value);
PULSECAP_API pulsecap_status pulsecap_eff_decreasing_infinite(double kappa,
                                                              double tau_abs,
                                                              double t_close,
                                                              double *value);
PULSECAP_API pulsecap_status pulsecap_eff_increasing_infinite(double kappa,
                                                              double tau,
                                                              double *value);

/* Multiplicative penalty for closing the coupler at t_close != t_drive;
 * shape/tau taken from the pulse. */
PULSECAP_API pulsecap_status pulsecap_delay_factor(double kappa,
                                                   const pulsecap_pulse *pulse,
                                                   double t_close,
                                                   double t_drive,
                                                   double *value);

typedef struct pulsecap_analytic_case {
    int formula; /* pulsecap_formula (degenerate tags resolved internally) */
    double kappa;
    double tau;
    double t_close;
    double t_drive;
} pulsecap_analytic_case;

/* Evaluate a closed-form case; *formula_used reports degenerate fallbacks
 * (may be NULL). */
PULSECAP_API pulsecap_status pulsecap_eff_case(const pulsecap_analytic_case *c,
                                               double *value,
                                               int *formula_used);

/* Same case with internal loss 1/t1_time folded in. */
PULSECAP_API pulsecap_status pulsecap_apply_intrinsic_loss(
    const pulsecap_analytic_case *c, double t1_time, double *value,
    int *formula_used);

/* Golden-section optimum of the rectangular efficiency. */
PULSECAP_API pulsecap_status pulsecap_optimal_rectangular(double kappa,
                                                          double *t_opt,
                                                          double *efficiency);

/* ---- field dynamics ---------------------------------------------------- */

typedef struct pulsecap_trajectory pulsecap_trajectory;

typedef struct pulsecap_energy_ledger {
    double e_res;      /* resonator energy at t_close */
    double e_tot;      /* incident pulse energy */
    double e_out;      /* output-line energy over the run */
    double e_lost;     /* internal-loss dissipation */
    double efficiency; /* e_res / e_tot */
} pulsecap_energy_ledger;

/* Integrate the field equation.  horizon <= 0 and dt <= 0 select defaults.
 * The caller owns *out and must free it with pulsecap_trajectory_free. */
PULSECAP_API pulsecap_status pulsecap_integrate_field(
    const pulsecap_system *sys, const pulsecap_pulse *pulse,
    const pulsecap_schedule *schedule, double phase_t1, double horizon,
    double dt, double b0_re, double b0_im, pulsecap_trajectory **out);

PULSECAP_API pulsecap_status pulsecap_trajectory_length(
    const pulsecap_trajectory *traj, size_t *n);

/* sample[0..7] = t, Re A, Im A, Re B, Im B, Re Vout, Im Vout, kappa. */
PULSECAP_API pulsecap_status pulsecap_trajectory_sample(
    const pulsecap_trajectory *traj, size_t index, double sample[8]);

PULSECAP_API pulsecap_status pulsecap_trajectory_write_csv(
    const pulsecap_trajectory *traj, const char *path);

PULSECAP_API void pulsecap_trajectory_free(pulsecap_trajectory *traj);

PULSECAP_API pulsecap_status pulsecap_efficiency_numeric(
    const pulsecap_system *sys, const pulsecap_pulse *pulse,
    const pulsecap_schedule *schedule, double phase_t1, double dt,
    pulsecap_energy_ledger *out);

/* Worst deviation (rad) of the reflected/transmitted phase opposition. */
PULSECAP_API pulsecap_status pulsecap_phase_opposition(
    const pulsecap_trajectory *traj, double *max_deviation);

/* ---- grid scans --------------------------------------------------------- */

typedef struct pulsecap_scan pulsecap_scan;

enum {
    PULSECAP_SCAN_ODE = 0,
    PULSECAP_SCAN_ANALYTIC = 1
};

/* Cartesian scan over named axes ("T", "Tprime", "tau", "delta_omega",
 * "delay", "kappa", "T1"), last axis fastest.  Per-point failures are
 * flagged in the rows, not returned as a status. */
PULSECAP_API pulsecap_status pulsecap_scan_run(
    const pulsecap_system *sys, const pulsecap_pulse *pulse,
    const pulsecap_schedule *schedule, double phase_t1, int method,
    int threads, const char *const *axis_names,
    const double *const *axis_values, const size_t *axis_lengths,
    size_t n_axes, pulsecap_scan **out);

PULSECAP_API pulsecap_status pulsecap_scan_rows(const pulsecap_scan *scan,
                                                size_t *n);

/* coords must hold one double per axis; *ok is 0 for a failed point. */
PULSECAP_API pulsecap_status pulsecap_scan_row(const pulsecap_scan *scan,
                                               size_t index, double *coords,
                                               double *efficiency, int *ok);

/* Error message of a failed row ("" for successful rows). */
PULSECAP_API const char *pulsecap_scan_row_error(const pulsecap_scan *scan,
                                                 size_t index);

PULSECAP_API void pulsecap_scan_free(pulsecap_scan *scan);

/* ---- acquisition simulation -------------------------------------------- */

enum {
    PULSECAP_FILTER_BRICKWALL = 0,
    PULSECAP_FILTER_WINDOWED_SINC = 1
};

typedef struct pulsecap_acquisition {
    double sample_rate;       /* samples/s */
    double f_sb;              /* sideband frequency, Hz */
    double q_scale;           /* Q gain imbalance applied on capture */
    double dc_re, dc_im;      /* additive I/Q offset */
    double noise_sigma;       /* per-quadrature noise std before averaging */
    double n_averages;        /* averaging count (sigma / sqrt(n) model) */
    uint32_t literal_averages;/* > 0: actually average this many records */
    double pre_drive;         /* record time before t = 0, s */
    double duration;          /* record time after t = 0, s; <= 0 -> trajectory end */
    double lowpass_hz;        /* low-pass cutoff, Hz */
    int filter;               /* PULSECAP_FILTER_* */
    int sinc_taps;            /* windowed-sinc kernel length (odd) */
    int adc_bits;             /* 0 = ideal; else quantizer bit width */
    double adc_full_scale;    /* quantizer clipping range */
    double q_correction;      /* process-side Q fix; <= 0 -> 1/q_scale */
    double spur_freq;         /* additive tone frequency, Hz (0 = off) */
    double spur_amplitude;
    uint64_t seed;
} pulsecap_acquisition;

/* Defaults matching the measurement chain (500 MS/s, 165 MHz sideband,
 * 150 MHz low-pass, 3e6 averages, no noise). */
PULSECAP_API void pulsecap_acquisition_defaults(pulsecap_acquisition *cfg);

typedef struct pulsecap_raw_record pulsecap_raw_record;
typedef struct pulsecap_processed_record pulsecap_processed_record;

PULSECAP_API pulsecap_status pulsecap_synthesize(
    const pulsecap_trajectory *traj, const pulsecap_acquisition *cfg,
    pulsecap_raw_record **out);

PULSECAP_API pulsecap_status pulsecap_raw_length(const pulsecap_raw_record *rec,
                                                 size_t *n);

/* sample[0..2] = t, I, Q. */
PULSECAP_API pulsecap_status pulsecap_raw_sample(const pulsecap_raw_record *rec,
                                                 size_t index, double sample[3]);

PULSECAP_API pulsecap_status pulsecap_raw_write_csv(
    const pulsecap_raw_record *rec, const char *path);

PULSECAP_API pulsecap_status pulsecap_raw_read_csv(const char *path,
                                                   pulsecap_raw_record **out);

PULSECAP_API void pulsecap_raw_free(pulsecap_raw_record *rec);

PULSECAP_API pulsecap_status pulsecap_process(const pulsecap_raw_record *raw,
                                              pulsecap_processed_record **out);

PULSECAP_API pulsecap_status pulsecap_processed_length(
    const pulsecap_processed_record *rec, size_t *n);

/* sample[0..3] = t, Re V, Im V, E(t). */
PULSECAP_API pulsecap_status pulsecap_processed_sample(
    const pulsecap_processed_record *rec, size_t index, double sample[4]);

PULSECAP_API pulsecap_status pulsecap_processed_noise_power(
    const pulsecap_processed_record *rec, double *value);

/* Rebuild the energy curve against a different noise window. */
PULSECAP_API pulsecap_status pulsecap_energy_curve(
    pulsecap_processed_record *rec, double win_begin, double win_end);

PULSECAP_API pulsecap_status pulsecap_processed_write_csv(
    const pulsecap_processed_record *rec, const char *path);

PULSECAP_API pulsecap_status pulsecap_processed_read_csv(
    const char *path, pulsecap_processed_record **out);

PULSECAP_API void pulsecap_processed_free(pulsecap_processed_record *rec);

/* ---- estimation ---------------------------------------------------------- */

typedef struct pulsecap_noise_estimate {
    double value;
    double variance;
    uint64_t n_points;
    double corr_beat; /* filter noise-correlation factor, signal x noise terms (1 = white) */
    double corr_sq;   /* filter noise-correlation factor, noise-only terms (1 = white) */
} pulsecap_noise_estimate;

typedef struct pulsecap_energy_estimate {
    double value;
    double variance;
    uint64_t n_points;
    double t_begin, t_end;
} pulsecap_energy_estimate;

typedef struct pulsecap_efficiency_report {
    double absorption, absorption_sigma;
    double storage, storage_sigma;
    double receiver, receiver_sigma;
} pulsecap_efficiency_report;

/* Raw window energy dt * sum |V|^2 over [t0, t1) and its sample count. */
PULSECAP_API pulsecap_status pulsecap_window_energy(
    const pulsecap_processed_record *rec, double t0, double t1,
    double *energy, uint64_t *n_points);

PULSECAP_API pulsecap_status pulsecap_noise_energy(
    const pulsecap_processed_record *rec, double t0, double t1,
    pulsecap_noise_estimate *out);

PULSECAP_API pulsecap_status pulsecap_noise_subtract(
    double e_sig, uint64_t n_sig, const pulsecap_noise_estimate *noise,
    pulsecap_energy_estimate *out);

PULSECAP_API pulsecap_status pulsecap_absorption_uncertainty(
    const pulsecap_energy_estimate *e_abs, const pulsecap_energy_estimate *e_ref,
    const pulsecap_noise_estimate *noise, double *efficiency, double *sigma);

PULSECAP_API pulsecap_status pulsecap_storage_receiver(
    const pulsecap_energy_estimate *e_on, const pulsecap_energy_estimate *e_off,
    double absorption, double absorption_sigma,
    pulsecap_efficiency_report *out);

PULSECAP_API pulsecap_status pulsecap_poisson_fit(const double *populations,
                                                  size_t n, double *mean);

PULSECAP_API pulsecap_status pulsecap_gaussian_moment(unsigned p, double sigma,
                                                      double *moment);

/* ---- end-to-end experiment ---------------------------------------------- */

typedef struct pulsecap_experiment {
    pulsecap_system sys;
    pulsecap_pulse pulse;
    double phase_t1;
    double close_offset; /* coupler closes this long after the drive stops, s */
    double idle;         /* coupler-closed hold before release, s */
    double release;      /* release observation span, s; <= 0 -> 8/kappa_on */
    double dt;           /* integrator step; <= 0 -> default */
    pulsecap_acquisition acquisition;
    double noise_window; /* noise window length inside pre-drive; <= 0 -> auto */
} pulsecap_experiment;

typedef struct pulsecap_experiment_result {
    pulsecap_efficiency_report report;
    pulsecap_energy_estimate e_reflect, e_release, e_on_total, e_off_total;
    pulsecap_noise_estimate noise;
    pulsecap_energy_ledger dynamics;
    double dynamics_absorption;
    double t_close, t_reopen, horizon;
} pulsecap_experiment_result;

PULSECAP_API pulsecap_status pulsecap_experiment_run(
    const pulsecap_experiment *cfg, pulsecap_experiment_result *out);

/* Same run returning the two processed records (capture + coupler-off
 * reference); any output pointer may be NULL if not wanted. */
PULSECAP_API pulsecap_status pulsecap_experiment_records(
    const pulsecap_experiment *cfg, pulsecap_raw_record **raw_capture,
    pulsecap_processed_record **processed_capture,
    pulsecap_raw_record **raw_reference,
    pulsecap_processed_record **processed_reference);

/* ---- configuration parsing ----------------------------------------------- */

/* JSON object text -> struct; keys mirror the field names (SystemParams also
 * accepts frequency_hz as an alternative to omega_rad_s). */
PULSECAP_API pulsecap_status pulsecap_system_from_json(const char *text,
                                                       pulsecap_system *out);
PULSECAP_API pulsecap_status pulsecap_pulse_from_json(const char *text,
                                                      pulsecap_pulse *out);
PULSECAP_API pulsecap_status pulsecap_schedule_from_json(const char *text,
                                                         pulsecap_schedule *out);
PULSECAP_API pulsecap_status pulsecap_acquisition_from_json(
    const char *text, pulsecap_acquisition *out);

/* JSON snapshot of a struct; free with pulsecap_string_free. */
PULSECAP_API pulsecap_status pulsecap_system_to_json(const pulsecap_system *sys,
                                                     char **out);
PULSECAP_API pulsecap_status pulsecap_pulse_to_json(const pulsecap_pulse *pulse,
                                                    char **out);
PULSECAP_API pulsecap_status pulsecap_schedule_to_json(
    const pulsecap_schedule *schedule, char **out);
PULSECAP_API pulsecap_status pulsecap_acquisition_to_json(
    const pulsecap_acquisition *cfg, char **out);

/* ---- self-validation ------------------------------------------------------ */

/* Run a named suite ("analytic", "conservation", "detuning", "delay",
 * "statistics", "all").  *json_report (free with pulsecap_string_free)
 * carries the per-property results; *passed is 1 when every property held. */
PULSECAP_API pulsecap_status pulsecap_validate(const char *suite,
                                               uint64_t trials, uint64_t seed,
                                               char **json_report,
                                               int *passed);

PULSECAP_API void pulsecap_string_free(char *s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PULSECAP_H */
