#include "pulsecap/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace pulsecap {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

struct Runs {
    FieldTrajectory capture_traj;
    RawRecord raw_capture;
    ProcessedRecord capture;
    RawRecord raw_reference;
    ProcessedRecord reference;
    double t_close = 0.0;
    double t_reopen = 0.0;
    double horizon = 0.0;
    CouplerSchedule capture_schedule;
};

Runs simulate_runs(const ExperimentConfig& cfg) {
    cfg.sys.validate();
    cfg.pulse.validate();
    require(std::isfinite(cfg.pulse.t_drive),
            "experiment: capture protocol needs a finite drive");
    require(cfg.idle >= 0.0, "experiment: idle must be non-negative");

    Runs r;
    r.t_close = cfg.pulse.t_drive + cfg.close_offset;
    require(r.t_close > 0.0, "experiment: coupler would close before the drive starts");
    r.t_reopen = r.t_close + cfg.idle;
    const double release = cfg.release > 0.0 ? cfg.release : 8.0 / cfg.sys.kappa_on;
    r.horizon = r.t_reopen + release;
    require(cfg.acquisition.duration <= 0.0 || cfg.acquisition.duration >= r.horizon,
            "experiment: record must cover the release window");

    r.capture_schedule.t_close = r.t_close;
    r.capture_schedule.kappa_off = 0.0;
    r.capture_schedule.ramp = 0.0;
    r.capture_schedule.t_reopen = r.t_reopen;

    IntegrationOptions opts;
    opts.horizon = r.horizon;
    opts.dt = cfg.dt;
    opts.phase_t1 = cfg.phase_t1;
    r.capture_traj = integrate_field(cfg.sys, cfg.pulse, r.capture_schedule, opts);

    // Reference: coupler closed from t = 0, so the pulse reflects in full and
    // the release window holds noise alone.
    CouplerSchedule off;
    off.t_close = 0.0;
    off.kappa_off = 0.0;
    off.ramp = 0.0;
    const FieldTrajectory ref_traj = integrate_field(cfg.sys, cfg.pulse, off, opts);

    r.raw_capture = synthesize(r.capture_traj, cfg.acquisition);
    AcquisitionConfig ref_cfg = cfg.acquisition;
    ref_cfg.seed = cfg.acquisition.seed + 1;  // independent noise realization
    r.raw_reference = synthesize(ref_traj, ref_cfg);
    r.capture = process(r.raw_capture);
    r.reference = process(r.raw_reference);
    return r;
}

// Noise window inside the pre-drive span, guarded by 16 samples at each edge
// against filter transients and drive leakage.
std::pair<double, double> noise_window_of(const ExperimentConfig& cfg,
                                          const ProcessedRecord& rec) {
    const double guard = 16.0 * rec.dt;
    const double begin = rec.t0 + guard;
    double end = -guard;
    if (cfg.noise_window > 0.0) end = std::min(begin + cfg.noise_window, end);
    require(end > begin,
            "experiment: pre-drive span too short for a guarded noise window");
    return {begin, end};
}

// Trapezoidal |v_out|^2 integral over [t0, t1] on the trajectory grid.
double window_output_energy(const FieldTrajectory& traj, double t0, double t1) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        if (traj.times[k] >= t0 && traj.times[k + 1] <= t1)
            sum += 0.5 * (std::norm(traj.v_out[k]) + std::norm(traj.v_out[k + 1]));
    }
    return sum * traj.dt;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    Runs r = simulate_runs(cfg);

    const auto [nw_begin, nw_end] = noise_window_of(cfg, r.capture);
    energy_curve(r.capture, nw_begin, nw_end);
    energy_curve(r.reference, nw_begin, nw_end);

    const NoiseEstimate noise_cap = noise_energy(r.capture, nw_begin, nw_end);
    const NoiseEstimate noise_ref = noise_energy(r.reference, nw_begin, nw_end);

    const double rec_end = r.capture.time_at(r.capture.size() - 1) + 0.5 * r.capture.dt;
    const auto [refl_raw, refl_n] = window_energy(r.capture, 0.0, r.t_close);
    const auto [rel_raw, rel_n] = window_energy(r.capture, r.t_reopen, rec_end);

    ExperimentResult res;
    res.t_close = r.t_close;
    res.t_reopen = r.t_reopen;
    res.horizon = r.horizon;
    res.noise = noise_cap;

    res.e_reflect = noise_subtract(refl_raw, refl_n, noise_cap);
    res.e_reflect.t_begin = 0.0;
    res.e_reflect.t_end = r.t_close;
    res.e_release = noise_subtract(rel_raw, rel_n, noise_cap);
    res.e_release.t_begin = r.t_reopen;
    res.e_release.t_end = rec_end;

    // Released vs reflected share the capture record's noise estimate; the
    // absorbed fraction is what the release window recovered.
    const auto [absorption, absorption_sigma] =
        absorption_uncertainty(res.e_release, res.e_reflect, noise_cap);

    res.e_on_total = noise_subtract(refl_raw + rel_raw, refl_n + rel_n, noise_cap);
    res.e_on_total.t_begin = 0.0;
    res.e_on_total.t_end = rec_end;

    const auto [off_refl_raw, off_refl_n] = window_energy(r.reference, 0.0, r.t_close);
    const auto [off_rel_raw, off_rel_n] =
        window_energy(r.reference, r.t_reopen, rec_end);
    res.e_off_total =
        noise_subtract(off_refl_raw + off_rel_raw, off_refl_n + off_rel_n, noise_ref);
    res.e_off_total.t_begin = 0.0;
    res.e_off_total.t_end = rec_end;

    res.report =
        storage_receiver(res.e_on_total, res.e_off_total, absorption, absorption_sigma);

    res.dynamics =
        energy_ledger(cfg.sys, cfg.pulse, r.capture_schedule, r.capture_traj);
    const double true_refl =
        window_output_energy(r.capture_traj, 0.0, r.t_close);
    const double true_rel =
        window_output_energy(r.capture_traj, r.t_reopen, r.capture_traj.times.back());
    res.dynamics_absorption =
        true_rel + true_refl > 0.0 ? true_rel / (true_rel + true_refl) : 0.0;
    return res;
}

ExperimentRecords experiment_records(const ExperimentConfig& cfg) {
    Runs r = simulate_runs(cfg);
    const auto [nw_begin, nw_end] = noise_window_of(cfg, r.capture);
    energy_curve(r.capture, nw_begin, nw_end);
    energy_curve(r.reference, nw_begin, nw_end);
    ExperimentRecords out;
    out.raw_capture = std::move(r.raw_capture);
    out.processed_capture = std::move(r.capture);
    out.raw_reference = std::move(r.raw_reference);
    out.processed_reference = std::move(r.reference);
    return out;
}

}  // namespace pulsecap
