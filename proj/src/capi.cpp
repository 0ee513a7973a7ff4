// C interface: thin conversions between the C structs and the C++ library,
// with exceptions mapped to status codes and a thread-local error message.
#include "pulsecap.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "pulsecap/dynamics.hpp"
#include "pulsecap/estimation.hpp"
#include "pulsecap/io.hpp"
#include "pulsecap/pipeline.hpp"
#include "pulsecap/validation.hpp"

namespace {

thread_local std::string g_error;

// What a std::runtime_error means depends on the call: file operations fail
// with IO, everything else numerically.
enum class RuntimeMeans { numeric, io };

template <typename F>
pulsecap_status guarded(RuntimeMeans means, F&& f) noexcept {
    try {
        f();
        g_error.clear();
        return PULSECAP_OK;
    } catch (const std::invalid_argument& e) {
        g_error = e.what();
        return PULSECAP_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_error = "out of memory";
        return means == RuntimeMeans::io ? PULSECAP_ERR_IO : PULSECAP_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_error = e.what();
        return means == RuntimeMeans::io ? PULSECAP_ERR_IO : PULSECAP_ERR_NUMERIC;
    } catch (...) {
        g_error = "unknown failure";
        return PULSECAP_ERR_NUMERIC;
    }
}

template <typename F>
pulsecap_status guarded(F&& f) noexcept {
    return guarded(RuntimeMeans::numeric, std::forward<F>(f));
}

void require_ptr(const void* p, const char* what) {
    if (p == nullptr)
        throw std::invalid_argument(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// ---- struct conversions --------------------------------------------------

pulsecap::SystemParams to_cpp(const pulsecap_system& c) {
    pulsecap::SystemParams sys;
    sys.omega = c.omega;
    sys.r1_impedance = c.r1_impedance;
    sys.r2_impedance = c.r2_impedance;
    sys.tau_rt = c.tau_rt;
    sys.kappa_on = c.kappa_on;
    sys.kappa_i = c.kappa_i;
    return sys;
}

pulsecap_system to_c(const pulsecap::SystemParams& sys) {
    return {sys.omega, sys.r1_impedance, sys.r2_impedance,
            sys.tau_rt, sys.kappa_on,    sys.kappa_i};
}

pulsecap::PulseSpec to_cpp(const pulsecap_pulse& c) {
    pulsecap::PulseSpec pulse;
    switch (c.shape) {
        case PULSECAP_PULSE_RECTANGULAR:
            pulse.shape = pulsecap::PulseShape::rectangular;
            break;
        case PULSECAP_PULSE_EXPONENTIAL:
            pulse.shape = pulsecap::PulseShape::exponential;
            break;
        default:
            throw std::invalid_argument("pulse->shape is not a PULSECAP_PULSE_* value");
    }
    pulse.amplitude = c.amplitude;
    pulse.tau = c.tau;
    pulse.t_drive = c.t_drive;
    pulse.detuning = c.detuning;
    return pulse;
}

pulsecap_pulse to_c(const pulsecap::PulseSpec& pulse) {
    return {pulse.shape == pulsecap::PulseShape::rectangular
                ? PULSECAP_PULSE_RECTANGULAR
                : PULSECAP_PULSE_EXPONENTIAL,
            pulse.amplitude, pulse.tau, pulse.t_drive, pulse.detuning};
}

pulsecap::CouplerSchedule to_cpp(const pulsecap_schedule& c) {
    pulsecap::CouplerSchedule sched;
    sched.t_close = c.t_close;
    sched.kappa_off = c.kappa_off;
    sched.ramp = c.ramp;
    sched.t_reopen =
        c.t_reopen < 0.0 ? std::numeric_limits<double>::infinity() : c.t_reopen;
    return sched;
}

pulsecap_schedule to_c(const pulsecap::CouplerSchedule& sched) {
    return {sched.t_close, sched.kappa_off, sched.ramp,
            std::isinf(sched.t_reopen) ? -1.0 : sched.t_reopen};
}

pulsecap::AcquisitionConfig to_cpp(const pulsecap_acquisition& c) {
    pulsecap::AcquisitionConfig cfg;
    cfg.sample_rate = c.sample_rate;
    cfg.f_sb = c.f_sb;
    cfg.q_scale = c.q_scale;
    cfg.dc_offset = {c.dc_re, c.dc_im};
    cfg.noise_sigma = c.noise_sigma;
    cfg.n_averages = c.n_averages;
    cfg.literal_averages = c.literal_averages;
    cfg.pre_drive = c.pre_drive;
    cfg.duration = c.duration;
    cfg.lowpass_hz = c.lowpass_hz;
    switch (c.filter) {
        case PULSECAP_FILTER_BRICKWALL:
            cfg.filter = pulsecap::FilterKind::brickwall;
            break;
        case PULSECAP_FILTER_WINDOWED_SINC:
            cfg.filter = pulsecap::FilterKind::windowed_sinc;
            break;
        default:
            throw std::invalid_argument("cfg->filter is not a PULSECAP_FILTER_* value");
    }
    cfg.sinc_taps = c.sinc_taps;
    cfg.adc_bits = c.adc_bits;
    cfg.adc_full_scale = c.adc_full_scale;
    cfg.q_correction = c.q_correction;
    cfg.spur_freq = c.spur_freq;
    cfg.spur_amplitude = c.spur_amplitude;
    cfg.seed = c.seed;
    return cfg;
}

pulsecap_acquisition to_c(const pulsecap::AcquisitionConfig& cfg) {
    pulsecap_acquisition c;
    c.sample_rate = cfg.sample_rate;
    c.f_sb = cfg.f_sb;
    c.q_scale = cfg.q_scale;
    c.dc_re = cfg.dc_offset.real();
    c.dc_im = cfg.dc_offset.imag();
    c.noise_sigma = cfg.noise_sigma;
    c.n_averages = cfg.n_averages;
    c.literal_averages = cfg.literal_averages;
    c.pre_drive = cfg.pre_drive;
    c.duration = cfg.duration;
    c.lowpass_hz = cfg.lowpass_hz;
    c.filter = cfg.filter == pulsecap::FilterKind::brickwall
                   ? PULSECAP_FILTER_BRICKWALL
                   : PULSECAP_FILTER_WINDOWED_SINC;
    c.sinc_taps = cfg.sinc_taps;
    c.adc_bits = cfg.adc_bits;
    c.adc_full_scale = cfg.adc_full_scale;
    c.q_correction = cfg.q_correction;
    c.spur_freq = cfg.spur_freq;
    c.spur_amplitude = cfg.spur_amplitude;
    c.seed = cfg.seed;
    return c;
}

pulsecap::NoiseEstimate to_cpp(const pulsecap_noise_estimate& c) {
    pulsecap::NoiseEstimate n;
    n.value = c.value;
    n.variance = c.variance;
    n.n_points = c.n_points;
    n.corr_beat = c.corr_beat;
    n.corr_sq = c.corr_sq;
    return n;
}

pulsecap_noise_estimate to_c(const pulsecap::NoiseEstimate& n) {
    return {n.value, n.variance, n.n_points, n.corr_beat, n.corr_sq};
}

pulsecap::EnergyEstimate to_cpp(const pulsecap_energy_estimate& c) {
    pulsecap::EnergyEstimate e;
    e.value = c.value;
    e.variance = c.variance;
    e.n_points = c.n_points;
    e.t_begin = c.t_begin;
    e.t_end = c.t_end;
    return e;
}

pulsecap_energy_estimate to_c(const pulsecap::EnergyEstimate& e) {
    return {e.value, e.variance, e.n_points, e.t_begin, e.t_end};
}

pulsecap_efficiency_report to_c(const pulsecap::EfficiencyReport& r) {
    return {r.absorption, r.absorption_sigma, r.storage,
            r.storage_sigma, r.receiver,      r.receiver_sigma};
}

pulsecap_energy_ledger to_c(const pulsecap::EnergyLedger& led) {
    return {led.e_res, led.e_tot, led.e_out, led.e_lost, led.efficiency};
}

pulsecap::Formula formula_from_int(int f) {
    switch (f) {
        case PULSECAP_FORMULA_RECTANGULAR:
            return pulsecap::Formula::rectangular;
        case PULSECAP_FORMULA_EXPONENTIAL_CHOPPED:
            return pulsecap::Formula::exponential_chopped;
        case PULSECAP_FORMULA_EXPONENTIAL_DEGENERATE:
            return pulsecap::Formula::exponential_degenerate;
        case PULSECAP_FORMULA_DECREASING_INFINITE:
            return pulsecap::Formula::decreasing_infinite;
        case PULSECAP_FORMULA_DECREASING_INFINITE_DEGENERATE:
            return pulsecap::Formula::decreasing_infinite_degenerate;
        case PULSECAP_FORMULA_INCREASING_INFINITE:
            return pulsecap::Formula::increasing_infinite;
        default:
            throw std::invalid_argument("formula is not a pulsecap_formula value");
    }
}

pulsecap::AnalyticCase to_cpp(const pulsecap_analytic_case& c) {
    return {formula_from_int(c.formula), c.kappa, c.tau, c.t_close, c.t_drive};
}

pulsecap::ExperimentConfig to_cpp(const pulsecap_experiment& c) {
    pulsecap::ExperimentConfig cfg;
    cfg.sys = to_cpp(c.sys);
    cfg.pulse = to_cpp(c.pulse);
    cfg.phase_t1 = c.phase_t1;
    cfg.close_offset = c.close_offset;
    cfg.idle = c.idle;
    cfg.release = c.release;
    cfg.dt = c.dt;
    cfg.acquisition = to_cpp(c.acquisition);
    cfg.noise_window = c.noise_window;
    return cfg;
}

}  // namespace

// ---- opaque handles --------------------------------------------------------

struct pulsecap_trajectory {
    pulsecap::FieldTrajectory traj;
    double phase_t1 = 0.0;
    std::string config_json;  // embedded in CSV exports
};

struct pulsecap_raw_record {
    pulsecap::RawRecord rec;
};

struct pulsecap_processed_record {
    pulsecap::ProcessedRecord rec;
};

struct pulsecap_scan {
    pulsecap::ScanResult result;
};

extern "C" {

const char* pulsecap_last_error(void) { return g_error.c_str(); }

const char* pulsecap_version(void) {
#ifdef PULSECAP_VERSION
    return PULSECAP_VERSION;
#else
    return "0.0.0";
#endif
}

// ---- device model ----------------------------------------------------------

pulsecap_status pulsecap_derive_coefficients(const pulsecap_system* sys,
                                             double kappa, double phase_t1,
                                             pulsecap_coefficients* out) {
    return guarded([&] {
        require_ptr(sys, "sys");
        require_ptr(out, "out");
        const auto k = pulsecap::derive_coefficients(to_cpp(*sys), kappa, phase_t1);
        *out = {k.t_drive.real(), k.t_drive.imag(), k.t_res.real(),
                k.t_res.imag(),   k.r_drive.real(), k.r_drive.imag(),
                k.r_res.real(),   k.r_res.imag(),   k.r_mag};
    });
}

pulsecap_status pulsecap_envelope_at(const pulsecap_pulse* pulse, double t,
                                     double* re, double* im) {
    return guarded([&] {
        require_ptr(pulse, "pulse");
        require_ptr(re, "re");
        const auto p = to_cpp(*pulse);
        p.validate();
        *re = p.envelope_at(t);
        if (im != nullptr) *im = 0.0;
    });
}

// ---- closed-form efficiencies ----------------------------------------------

pulsecap_status pulsecap_eff_rectangular(double kappa, double t_pulse,
                                         double* value) {
    return guarded([&] {
        require_ptr(value, "value");
        *value = pulsecap::eff_rectangular(kappa, t_pulse).value;
    });
}

pulsecap_status pulsecap_eff_exponential(double kappa, double tau, double t_close,
                                         double t_drive, double* value) {
    return guarded([&] {
        require_ptr(value, "value");
        *value = pulsecap::eff_exponential(kappa, tau, t_close, t_drive).value;
    });
}

pulsecap_status pulsecap_eff_decreasing_infinite(double kappa, double tau_abs,
                                                 double t_close, double* value) {
    return guarded([&] {
        require_ptr(value, "value");
        *value = pulsecap::eff_decreasing_infinite(kappa, tau_abs, t_close).value;
    });
}

pulsecap_status pulsecap_eff_increasing_infinite(double kappa, double tau,
                                                 double* value) {
    return guarded([&] {
        require_ptr(value, "value");
        *value = pulsecap::eff_increasing_infinite(kappa, tau).value;
    });
}

pulsecap_status pulsecap_delay_factor(double kappa, const pulsecap_pulse* pulse,
                                      double t_close, double t_drive,
                                      double* value) {
    return guarded([&] {
        require_ptr(pulse, "pulse");
        require_ptr(value, "value");
        *value = pulsecap::delay_factor(kappa, to_cpp(*pulse), t_close, t_drive);
    });
}

pulsecap_status pulsecap_eff_case(const pulsecap_analytic_case* c, double* value,
                                  int* formula_used) {
    return guarded([&] {
        require_ptr(c, "case");
        require_ptr(value, "value");
        const auto r = pulsecap::evaluate(to_cpp(*c));
        *value = r.value;
        if (formula_used != nullptr) *formula_used = static_cast<int>(r.formula);
    });
}

pulsecap_status pulsecap_apply_intrinsic_loss(const pulsecap_analytic_case* c,
                                              double t1_time, double* value,
                                              int* formula_used) {
    return guarded([&] {
        require_ptr(c, "case");
        require_ptr(value, "value");
        const auto r = pulsecap::apply_intrinsic_loss(to_cpp(*c), t1_time);
        *value = r.value;
        if (formula_used != nullptr) *formula_used = static_cast<int>(r.formula);
    });
}

pulsecap_status pulsecap_optimal_rectangular(double kappa, double* t_opt,
                                             double* efficiency) {
    return guarded([&] {
        const auto r = pulsecap::optimal_rectangular(kappa);
        if (t_opt != nullptr) *t_opt = r.t_pulse;
        if (efficiency != nullptr) *efficiency = r.efficiency;
    });
}

// ---- field dynamics ---------------------------------------------------------

pulsecap_status pulsecap_integrate_field(const pulsecap_system* sys,
                                         const pulsecap_pulse* pulse,
                                         const pulsecap_schedule* schedule,
                                         double phase_t1, double horizon,
                                         double dt, double b0_re, double b0_im,
                                         pulsecap_trajectory** out) {
    return guarded([&] {
        require_ptr(sys, "sys");
        require_ptr(pulse, "pulse");
        require_ptr(schedule, "schedule");
        require_ptr(out, "out");
        const auto s = to_cpp(*sys);
        const auto p = to_cpp(*pulse);
        const auto sc = to_cpp(*schedule);
        pulsecap::IntegrationOptions opts;
        opts.horizon = horizon;
        opts.dt = dt;
        opts.b0 = {b0_re, b0_im};
        opts.phase_t1 = phase_t1;
        auto handle = std::make_unique<pulsecap_trajectory>();
        handle->traj = pulsecap::integrate_field(s, p, sc, opts);
        handle->phase_t1 = phase_t1;
        handle->config_json = "{\"system\":" + pulsecap::to_json(s) +
                              ",\"pulse\":" + pulsecap::to_json(p) +
                              ",\"schedule\":" + pulsecap::to_json(sc) + "}";
        *out = handle.release();
    });
}

pulsecap_status pulsecap_trajectory_length(const pulsecap_trajectory* traj,
                                           size_t* n) {
    return guarded([&] {
        require_ptr(traj, "traj");
        require_ptr(n, "n");
        *n = traj->traj.size();
    });
}

pulsecap_status pulsecap_trajectory_sample(const pulsecap_trajectory* traj,
                                           size_t index, double sample[8]) {
    return guarded([&] {
        require_ptr(traj, "traj");
        require_ptr(sample, "sample");
        if (index >= traj->traj.size())
            throw std::invalid_argument("trajectory sample index out of range");
        const auto& t = traj->traj;
        sample[0] = t.times[index];
        sample[1] = t.a_drive[index].real();
        sample[2] = t.a_drive[index].imag();
        sample[3] = t.b_field[index].real();
        sample[4] = t.b_field[index].imag();
        sample[5] = t.v_out[index].real();
        sample[6] = t.v_out[index].imag();
        sample[7] = t.kappa_of_t[index];
    });
}

pulsecap_status pulsecap_trajectory_write_csv(const pulsecap_trajectory* traj,
                                              const char* path) {
    return guarded(RuntimeMeans::io, [&] {
        require_ptr(traj, "traj");
        require_ptr(path, "path");
        pulsecap::write_csv(traj->traj, path, traj->config_json);
    });
}

void pulsecap_trajectory_free(pulsecap_trajectory* traj) { delete traj; }

pulsecap_status pulsecap_efficiency_numeric(const pulsecap_system* sys,
                                            const pulsecap_pulse* pulse,
                                            const pulsecap_schedule* schedule,
                                            double phase_t1, double dt,
                                            pulsecap_energy_ledger* out) {
    return guarded([&] {
        require_ptr(sys, "sys");
        require_ptr(pulse, "pulse");
        require_ptr(schedule, "schedule");
        require_ptr(out, "out");
        pulsecap::IntegrationOptions opts;
        opts.dt = dt;
        opts.phase_t1 = phase_t1;
        *out = to_c(pulsecap::efficiency_numeric(to_cpp(*sys), to_cpp(*pulse),
                                                 to_cpp(*schedule), opts));
    });
}

pulsecap_status pulsecap_phase_opposition(const pulsecap_trajectory* traj,
                                          double* max_deviation) {
    return guarded([&] {
        require_ptr(traj, "traj");
        require_ptr(max_deviation, "max_deviation");
        *max_deviation = pulsecap::phase_opposition_check(traj->traj, traj->phase_t1);
    });
}

// ---- grid scans ---------------------------------------------------------------

pulsecap_status pulsecap_scan_run(const pulsecap_system* sys,
                                  const pulsecap_pulse* pulse,
                                  const pulsecap_schedule* schedule,
                                  double phase_t1, int method, int threads,
                                  const char* const* axis_names,
                                  const double* const* axis_values,
                                  const size_t* axis_lengths, size_t n_axes,
                                  pulsecap_scan** out) {
    return guarded([&] {
        require_ptr(sys, "sys");
        require_ptr(pulse, "pulse");
        require_ptr(schedule, "schedule");
        require_ptr(out, "out");
        if (n_axes > 0) {
            require_ptr(axis_names, "axis_names");
            require_ptr(axis_values, "axis_values");
            require_ptr(axis_lengths, "axis_lengths");
        }
        pulsecap::ScanConfig base;
        base.sys = to_cpp(*sys);
        base.pulse = to_cpp(*pulse);
        base.schedule = to_cpp(*schedule);
        if (method != PULSECAP_SCAN_ODE && method != PULSECAP_SCAN_ANALYTIC)
            throw std::invalid_argument("method is not a PULSECAP_SCAN_* value");
        base.method = method == PULSECAP_SCAN_ODE ? pulsecap::ScanMethod::ode
                                                  : pulsecap::ScanMethod::analytic;
        base.phase_t1 = phase_t1;
        base.threads = threads;
        std::vector<pulsecap::ScanAxis> axes;
        axes.reserve(n_axes);
        for (size_t a = 0; a < n_axes; ++a) {
            require_ptr(axis_names[a], "axis_names[i]");
            require_ptr(axis_values[a], "axis_values[i]");
            axes.push_back({axis_names[a],
                            std::vector<double>(axis_values[a],
                                                axis_values[a] + axis_lengths[a])});
        }
        auto handle = std::make_unique<pulsecap_scan>();
        handle->result = pulsecap::scan_grid(base, axes);
        *out = handle.release();
    });
}

pulsecap_status pulsecap_scan_rows(const pulsecap_scan* scan, size_t* n) {
    return guarded([&] {
        require_ptr(scan, "scan");
        require_ptr(n, "n");
        *n = scan->result.rows.size();
    });
}

pulsecap_status pulsecap_scan_row(const pulsecap_scan* scan, size_t index,
                                  double* coords, double* efficiency, int* ok) {
    return guarded([&] {
        require_ptr(scan, "scan");
        if (index >= scan->result.rows.size())
            throw std::invalid_argument("scan row index out of range");
        const auto& row = scan->result.rows[index];
        if (coords != nullptr)
            for (size_t a = 0; a < row.coords.size(); ++a) coords[a] = row.coords[a];
        if (efficiency != nullptr) *efficiency = row.efficiency;
        if (ok != nullptr) *ok = row.ok ? 1 : 0;
    });
}

const char* pulsecap_scan_row_error(const pulsecap_scan* scan, size_t index) {
    if (scan == nullptr || index >= scan->result.rows.size()) return "";
    return scan->result.rows[index].error.c_str();
}

void pulsecap_scan_free(pulsecap_scan* scan) { delete scan; }

// ---- acquisition simulation ----------------------------------------------------

void pulsecap_acquisition_defaults(pulsecap_acquisition* cfg) {
    if (cfg == nullptr) return;
    *cfg = to_c(pulsecap::AcquisitionConfig{});
}

pulsecap_status pulsecap_synthesize(const pulsecap_trajectory* traj,
                                    const pulsecap_acquisition* cfg,
                                    pulsecap_raw_record** out) {
    return guarded([&] {
        require_ptr(traj, "traj");
        require_ptr(cfg, "cfg");
        require_ptr(out, "out");
        auto handle = std::make_unique<pulsecap_raw_record>();
        handle->rec = pulsecap::synthesize(traj->traj, to_cpp(*cfg));
        *out = handle.release();
    });
}

pulsecap_status pulsecap_raw_length(const pulsecap_raw_record* rec, size_t* n) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(n, "n");
        *n = rec->rec.size();
    });
}

pulsecap_status pulsecap_raw_sample(const pulsecap_raw_record* rec, size_t index,
                                    double sample[3]) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(sample, "sample");
        if (index >= rec->rec.size())
            throw std::invalid_argument("raw sample index out of range");
        sample[0] = rec->rec.time_at(index);
        sample[1] = rec->rec.i_samples[index];
        sample[2] = rec->rec.q_samples[index];
    });
}

pulsecap_status pulsecap_raw_write_csv(const pulsecap_raw_record* rec,
                                       const char* path) {
    return guarded(RuntimeMeans::io, [&] {
        require_ptr(rec, "rec");
        require_ptr(path, "path");
        pulsecap::write_csv(rec->rec, path);
    });
}

pulsecap_status pulsecap_raw_read_csv(const char* path,
                                      pulsecap_raw_record** out) {
    return guarded(RuntimeMeans::io, [&] {
        require_ptr(path, "path");
        require_ptr(out, "out");
        auto handle = std::make_unique<pulsecap_raw_record>();
        handle->rec = pulsecap::read_raw_csv(path);
        *out = handle.release();
    });
}

void pulsecap_raw_free(pulsecap_raw_record* rec) { delete rec; }

pulsecap_status pulsecap_process(const pulsecap_raw_record* raw,
                                 pulsecap_processed_record** out) {
    return guarded([&] {
        require_ptr(raw, "raw");
        require_ptr(out, "out");
        auto handle = std::make_unique<pulsecap_processed_record>();
        handle->rec = pulsecap::process(raw->rec);
        *out = handle.release();
    });
}

pulsecap_status pulsecap_processed_length(const pulsecap_processed_record* rec,
                                          size_t* n) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(n, "n");
        *n = rec->rec.size();
    });
}

pulsecap_status pulsecap_processed_sample(const pulsecap_processed_record* rec,
                                          size_t index, double sample[4]) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(sample, "sample");
        if (index >= rec->rec.size())
            throw std::invalid_argument("processed sample index out of range");
        sample[0] = rec->rec.time_at(index);
        sample[1] = rec->rec.v[index].real();
        sample[2] = rec->rec.v[index].imag();
        sample[3] = rec->rec.energy[index];
    });
}

pulsecap_status pulsecap_processed_noise_power(
    const pulsecap_processed_record* rec, double* value) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(value, "value");
        *value = rec->rec.noise_power;
    });
}

pulsecap_status pulsecap_energy_curve(pulsecap_processed_record* rec,
                                      double win_begin, double win_end) {
    return guarded([&] {
        require_ptr(rec, "rec");
        pulsecap::energy_curve(rec->rec, win_begin, win_end);
    });
}

pulsecap_status pulsecap_processed_write_csv(const pulsecap_processed_record* rec,
                                             const char* path) {
    return guarded(RuntimeMeans::io, [&] {
        require_ptr(rec, "rec");
        require_ptr(path, "path");
        pulsecap::write_csv(rec->rec, path);
    });
}

pulsecap_status pulsecap_processed_read_csv(const char* path,
                                            pulsecap_processed_record** out) {
    return guarded(RuntimeMeans::io, [&] {
        require_ptr(path, "path");
        require_ptr(out, "out");
        auto handle = std::make_unique<pulsecap_processed_record>();
        handle->rec = pulsecap::read_processed_csv(path);
        *out = handle.release();
    });
}

void pulsecap_processed_free(pulsecap_processed_record* rec) { delete rec; }

// ---- estimation -------------------------------------------------------------------

pulsecap_status pulsecap_window_energy(const pulsecap_processed_record* rec,
                                       double t0, double t1, double* energy,
                                       uint64_t* n_points) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(energy, "energy");
        const auto [e, n] = pulsecap::window_energy(rec->rec, t0, t1);
        *energy = e;
        if (n_points != nullptr) *n_points = n;
    });
}

pulsecap_status pulsecap_noise_energy(const pulsecap_processed_record* rec,
                                      double t0, double t1,
                                      pulsecap_noise_estimate* out) {
    return guarded([&] {
        require_ptr(rec, "rec");
        require_ptr(out, "out");
        *out = to_c(pulsecap::noise_energy(rec->rec, t0, t1));
    });
}

pulsecap_status pulsecap_noise_subtract(double e_sig, uint64_t n_sig,
                                        const pulsecap_noise_estimate* noise,
                                        pulsecap_energy_estimate* out) {
    return guarded([&] {
        require_ptr(noise, "noise");
        require_ptr(out, "out");
        *out = to_c(pulsecap::noise_subtract(e_sig, n_sig, to_cpp(*noise)));
    });
}

pulsecap_status pulsecap_absorption_uncertainty(
    const pulsecap_energy_estimate* e_abs, const pulsecap_energy_estimate* e_ref,
    const pulsecap_noise_estimate* noise, double* efficiency, double* sigma) {
    return guarded([&] {
        require_ptr(e_abs, "e_abs");
        require_ptr(e_ref, "e_ref");
        require_ptr(noise, "noise");
        require_ptr(efficiency, "efficiency");
        const auto [eff, sg] = pulsecap::absorption_uncertainty(
            to_cpp(*e_abs), to_cpp(*e_ref), to_cpp(*noise));
        *efficiency = eff;
        if (sigma != nullptr) *sigma = sg;
    });
}

pulsecap_status pulsecap_storage_receiver(const pulsecap_energy_estimate* e_on,
                                          const pulsecap_energy_estimate* e_off,
                                          double absorption,
                                          double absorption_sigma,
                                          pulsecap_efficiency_report* out) {
    return guarded([&] {
        require_ptr(e_on, "e_on");
        require_ptr(e_off, "e_off");
        require_ptr(out, "out");
        *out = to_c(pulsecap::storage_receiver(to_cpp(*e_on), to_cpp(*e_off),
                                               absorption, absorption_sigma));
    });
}

pulsecap_status pulsecap_poisson_fit(const double* populations, size_t n,
                                     double* mean) {
    return guarded([&] {
        require_ptr(populations, "populations");
        require_ptr(mean, "mean");
        *mean = pulsecap::poisson_fit(std::vector<double>(populations,
                                                          populations + n));
    });
}

pulsecap_status pulsecap_gaussian_moment(unsigned p, double sigma,
                                         double* moment) {
    return guarded([&] {
        require_ptr(moment, "moment");
        *moment = pulsecap::gaussian_moment(p, sigma);
    });
}

// ---- end-to-end experiment -----------------------------------------------------------

pulsecap_status pulsecap_experiment_run(const pulsecap_experiment* cfg,
                                        pulsecap_experiment_result* out) {
    return guarded([&] {
        require_ptr(cfg, "cfg");
        require_ptr(out, "out");
        const auto r = pulsecap::run_experiment(to_cpp(*cfg));
        out->report = to_c(r.report);
        out->e_reflect = to_c(r.e_reflect);
        out->e_release = to_c(r.e_release);
        out->e_on_total = to_c(r.e_on_total);
        out->e_off_total = to_c(r.e_off_total);
        out->noise = to_c(r.noise);
        out->dynamics = to_c(r.dynamics);
        out->dynamics_absorption = r.dynamics_absorption;
        out->t_close = r.t_close;
        out->t_reopen = r.t_reopen;
        out->horizon = r.horizon;
    });
}

pulsecap_status pulsecap_experiment_records(
    const pulsecap_experiment* cfg, pulsecap_raw_record** raw_capture,
    pulsecap_processed_record** processed_capture,
    pulsecap_raw_record** raw_reference,
    pulsecap_processed_record** processed_reference) {
    return guarded([&] {
        require_ptr(cfg, "cfg");
        auto recs = pulsecap::experiment_records(to_cpp(*cfg));
        if (raw_capture != nullptr)
            *raw_capture = new pulsecap_raw_record{std::move(recs.raw_capture)};
        if (processed_capture != nullptr)
            *processed_capture =
                new pulsecap_processed_record{std::move(recs.processed_capture)};
        if (raw_reference != nullptr)
            *raw_reference = new pulsecap_raw_record{std::move(recs.raw_reference)};
        if (processed_reference != nullptr)
            *processed_reference =
                new pulsecap_processed_record{std::move(recs.processed_reference)};
    });
}

// ---- configuration parsing ---------------------------------------------------------

pulsecap_status pulsecap_system_from_json(const char* text,
                                          pulsecap_system* out) {
    return guarded([&] {
        require_ptr(text, "text");
        require_ptr(out, "out");
        *out = to_c(pulsecap::system_from_json(text));
    });
}

pulsecap_status pulsecap_pulse_from_json(const char* text, pulsecap_pulse* out) {
    return guarded([&] {
        require_ptr(text, "text");
        require_ptr(out, "out");
        *out = to_c(pulsecap::pulse_from_json(text));
    });
}

pulsecap_status pulsecap_schedule_from_json(const char* text,
                                            pulsecap_schedule* out) {
    return guarded([&] {
        require_ptr(text, "text");
        require_ptr(out, "out");
        *out = to_c(pulsecap::schedule_from_json(text));
    });
}

pulsecap_status pulsecap_acquisition_from_json(const char* text,
                                               pulsecap_acquisition* out) {
    return guarded([&] {
        require_ptr(text, "text");
        require_ptr(out, "out");
        *out = to_c(pulsecap::acquisition_from_json(text));
    });
}

pulsecap_status pulsecap_system_to_json(const pulsecap_system* sys, char** out) {
    return guarded([&] {
        require_ptr(sys, "sys");
        require_ptr(out, "out");
        *out = dup_string(pulsecap::to_json(to_cpp(*sys)));
    });
}

pulsecap_status pulsecap_pulse_to_json(const pulsecap_pulse* pulse, char** out) {
    return guarded([&] {
        require_ptr(pulse, "pulse");
        require_ptr(out, "out");
        *out = dup_string(pulsecap::to_json(to_cpp(*pulse)));
    });
}

pulsecap_status pulsecap_schedule_to_json(const pulsecap_schedule* schedule,
                                          char** out) {
    return guarded([&] {
        require_ptr(schedule, "schedule");
        require_ptr(out, "out");
        *out = dup_string(pulsecap::to_json(to_cpp(*schedule)));
    });
}

pulsecap_status pulsecap_acquisition_to_json(const pulsecap_acquisition* cfg,
                                             char** out) {
    return guarded([&] {
        require_ptr(cfg, "cfg");
        require_ptr(out, "out");
        *out = dup_string(pulsecap::to_json(to_cpp(*cfg)));
    });
}

// ---- self-validation -----------------------------------------------------------------

pulsecap_status pulsecap_validate(const char* suite, uint64_t trials,
                                  uint64_t seed, char** json_report,
                                  int* passed) {
    return guarded([&] {
        require_ptr(suite, "suite");
        const auto results = pulsecap::validation::run_suites(suite, trials, seed);
        if (json_report != nullptr)
            *json_report = dup_string(pulsecap::validation::to_json(results));
        if (passed != nullptr) {
            bool all = true;
            for (const auto& s : results) all = all && s.passed();
            *passed = all ? 1 : 0;
        }
    });
}

void pulsecap_string_free(char* s) { delete[] s; }

}  // extern "C"
