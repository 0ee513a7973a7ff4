#include "pulsecap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace pulsecap {

namespace {

constexpr double kLteBound = 1e-9;  // step-halving error allowance, relative to max|B|

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Which smooth branch of the schedule/envelope a step lies in.  Every
// integration step is split so it never crosses a switch; the branch is
// picked at the step midpoint and its formula extended to the endpoints,
// keeping each Runge-Kutta stage on a smooth right-hand side.
struct Branches {
    const PulseSpec* pulse;
    const CouplerSchedule* schedule;
    double kappa_on;

    bool drive_on = false;
    int kappa_branch = 0;  // 0 open, 1 close ramp, 2 off, 3 reopen ramp, 4 open

    void select(double t_mid) {
        drive_on = t_mid < pulse->t_drive;
        const auto& s = *schedule;
        if (t_mid < s.t_close)
            kappa_branch = 0;
        else if (s.ramp > 0.0 && t_mid < s.t_close + s.ramp)
            kappa_branch = 1;
        else if (t_mid < s.t_reopen)
            kappa_branch = 2;
        else if (s.ramp > 0.0 && t_mid < s.t_reopen + s.ramp)
            kappa_branch = 3;
        else
            kappa_branch = 4;
    }

    [[nodiscard]] double envelope(double t) const {
        if (!drive_on) return 0.0;
        if (pulse->shape == PulseShape::rectangular) return pulse->amplitude;
        return pulse->amplitude * std::exp(t / pulse->tau);
    }

    [[nodiscard]] double kappa(double t) const {
        const auto& s = *schedule;
        switch (kappa_branch) {
            case 0: return kappa_on;
            case 1: return kappa_on + (s.kappa_off - kappa_on) * (t - s.t_close) / s.ramp;
            case 2: return s.kappa_off;
            case 3: return s.kappa_off + (kappa_on - s.kappa_off) * (t - s.t_reopen) / s.ramp;
            default: return kappa_on;
        }
    }
};

struct StepScales {
    double dt_default;
    double dt_max;
};

StepScales step_scales(const SystemParams& sys, const PulseSpec& pulse,
                       double horizon) {
    double scale = 1.0 / sys.kappa_on;
    if (pulse.shape == PulseShape::exponential)
        scale = std::min(scale, std::abs(pulse.tau));
    const double dw = std::abs(pulse.detuning);
    if (dw > 0.0) scale = std::min(scale, 1.0 / dw);
    const double dw_floor = std::max(dw, 1.0 / horizon);
    double dt_max = std::min({0.01 / sys.kappa_on, 0.01 / dw_floor});
    if (pulse.shape == PulseShape::exponential)
        dt_max = std::min(dt_max, 0.01 * std::abs(pulse.tau));
    return {1e-3 * scale, dt_max};
}

double default_horizon(const SystemParams& sys, const PulseSpec& pulse,
                       const CouplerSchedule& schedule) {
    double h = schedule.t_close + schedule.ramp;
    if (std::isfinite(pulse.t_drive)) h = std::max(h, pulse.t_drive);
    if (std::isfinite(schedule.t_reopen))
        h = std::max(h, schedule.t_reopen + schedule.ramp);
    return h + 8.0 / sys.kappa_on;
}

}  // namespace

FieldTrajectory integrate_field(const SystemParams& sys, const PulseSpec& pulse,
                                const CouplerSchedule& schedule,
                                const IntegrationOptions& opts) {
    sys.validate();
    pulse.validate();
    schedule.validate();
    require(std::isfinite(opts.phase_t1), "integrate_field: phase_t1 must be finite");

    const double horizon =
        opts.horizon > 0.0 ? opts.horizon : default_horizon(sys, pulse, schedule);
    require(std::isfinite(horizon), "integrate_field: horizon must be finite");
    require(horizon >= schedule.t_close,
            "integrate_field: horizon must not precede t_close");

    const StepScales scales = step_scales(sys, pulse, horizon);
    double dt_req = opts.dt > 0.0 ? opts.dt : scales.dt_default;
    require(dt_req <= scales.dt_max,
            "integrate_field: dt too coarse for the configured rates");

    // Uniform grid that lands on t_close exactly; horizon rounds up to a
    // whole number of steps.
    double h = dt_req;
    if (schedule.t_close > 0.0) {
        const double m = std::max(1.0, std::round(schedule.t_close / dt_req));
        h = schedule.t_close / m;
    }
    const double n_steps_d = std::ceil(horizon / h - 1e-9);
    require(n_steps_d < 5e7, "integrate_field: configuration needs too many steps");
    const std::size_t n_steps = static_cast<std::size_t>(n_steps_d);

    const double tau_rt = sys.round_trip();
    const double dw = pulse.detuning;
    // Per-round-trip frame rotation of the drive coupling; unit modulus, so
    // it cannot bias |B| between +dw and -dw.
    const std::complex<double> drive_phase = std::polar(1.0, tau_rt * dw);
    const std::complex<double> t1_phase = std::polar(1.0, opts.phase_t1);
    const double t1_mag_sq_per_kappa = tau_rt * sys.r2_impedance / sys.r1_impedance;

    // Drive coupling g(kappa) = t_drive * conj(r_res) / (|r| tau_rt), which the
    // phase convention reduces to -conj(t_drive)/tau_rt.
    const auto coupling = [&](double kappa) -> std::complex<double> {
        const double t1_mag = std::sqrt(kappa * t1_mag_sq_per_kappa);
        return -t1_mag * std::conj(t1_phase) / tau_rt * drive_phase;
    };

    Branches br{&pulse, &schedule, sys.kappa_on};
    const std::complex<double> i_unit(0.0, 1.0);
    const auto rhs = [&](double t, std::complex<double> b) {
        const double kap = br.kappa(t);
        const std::complex<double> coeff =
            -0.5 * (kap + sys.kappa_i) + i_unit * dw;
        return coeff * b + coupling(kap) * br.envelope(t);
    };
    const auto rk4 = [&](std::complex<double> b, double t0, double step) {
        const auto k1 = rhs(t0, b);
        const auto k2 = rhs(t0 + 0.5 * step, b + 0.5 * step * k1);
        const auto k3 = rhs(t0 + 0.5 * step, b + 0.5 * step * k2);
        const auto k4 = rhs(t0 + step, b + step * k3);
        return b + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    // Switch instants interior to a step trigger sub-stepping.
    std::vector<double> breaks;
    if (std::isfinite(pulse.t_drive)) breaks.push_back(pulse.t_drive);
    breaks.push_back(schedule.t_close);
    if (schedule.ramp > 0.0) breaks.push_back(schedule.t_close + schedule.ramp);
    if (std::isfinite(schedule.t_reopen)) {
        breaks.push_back(schedule.t_reopen);
        if (schedule.ramp > 0.0) breaks.push_back(schedule.t_reopen + schedule.ramp);
    }
    std::sort(breaks.begin(), breaks.end());

    FieldTrajectory traj;
    traj.dt = h;
    traj.times.resize(n_steps + 1);
    traj.a_drive.resize(n_steps + 1);
    traj.b_field.resize(n_steps + 1);
    traj.v_out.resize(n_steps + 1);
    traj.kappa_of_t.resize(n_steps + 1);

    const auto record = [&](std::size_t k, double t, std::complex<double> b) {
        traj.times[k] = t;
        traj.b_field[k] = b;
        const double a = pulse.envelope_at(t);
        traj.a_drive[k] = a;
        const double kap = schedule.kappa_at(t, sys.kappa_on);
        traj.kappa_of_t[k] = kap;
        const double t1_mag = std::sqrt(kap * t1_mag_sq_per_kappa);
        const double r_mag = std::sqrt(std::max(0.0, 1.0 - kap * tau_rt));
        const std::complex<double> t_res =
            (sys.r1_impedance / sys.r2_impedance) * t1_mag * t1_phase;
        traj.v_out[k] = r_mag * a + t_res * b;
    };

    std::complex<double> b = opts.b0;
    record(0, 0.0, b);
    double max_b = std::abs(b);
    double max_lte = 0.0;

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t0 = static_cast<double>(k) * h;
        const double t1 = static_cast<double>(k + 1) * h;
        // Sub-interval boundaries: step edges plus any switch strictly inside.
        double seg_start = t0;
        const auto advance = [&](double a_t, double b_t) {
            if (b_t - a_t <= 0.0) return;
            br.select(0.5 * (a_t + b_t));
            const double step = b_t - a_t;
            const std::complex<double> full = rk4(b, a_t, step);
            const std::complex<double> mid = rk4(b, a_t, 0.5 * step);
            const std::complex<double> half = rk4(mid, a_t + 0.5 * step, 0.5 * step);
            max_lte = std::max(max_lte, std::abs(full - half));
            b = half;  // the step-halved solution is the more accurate one
            max_b = std::max(max_b, std::abs(b));
        };
        for (double brk : breaks) {
            if (brk > seg_start + 1e-12 * h && brk < t1 - 1e-12 * h) {
                advance(seg_start, brk);
                seg_start = brk;
            }
        }
        advance(seg_start, t1);
        record(k + 1, t1, b);
    }

    if (max_lte > kLteBound * max_b && max_b > 0.0)
        throw std::runtime_error(
            "integrate_field: step-halving error estimate exceeds 1e-9 of max|B|; "
            "reduce dt");
    return traj;
}

EnergyLedger energy_ledger(const SystemParams& sys, const PulseSpec& pulse,
                           const CouplerSchedule& schedule,
                           const FieldTrajectory& traj) {
    require(traj.size() >= 2, "energy_ledger: trajectory too short");
    EnergyLedger led;
    led.e_tot = pulse.drive_energy(sys.r1_impedance,
                                   std::numeric_limits<double>::infinity());
    require(led.e_tot > 0.0, "energy_ledger: drive carries no energy");

    const double tau_rt = sys.round_trip();
    const std::size_t close_idx = std::min(
        traj.size() - 1,
        static_cast<std::size_t>(std::llround(schedule.t_close / traj.dt)));
    led.e_res = std::norm(traj.b_field[close_idx]) * tau_rt / (2.0 * sys.r2_impedance);

    // Trapezoidal sums over [0, t_close]: output-line energy and internal
    // dissipation up to the capture moment, so the ledger closes against the
    // energy delivered by then.
    double out_sum = 0.0, loss_sum = 0.0;
    for (std::size_t k = 0; k + 1 <= close_idx; ++k) {
        out_sum += 0.5 * (std::norm(traj.v_out[k]) + std::norm(traj.v_out[k + 1]));
        loss_sum += 0.5 * (std::norm(traj.b_field[k]) + std::norm(traj.b_field[k + 1]));
    }
    led.e_out = out_sum * traj.dt / (2.0 * sys.r1_impedance);
    led.e_lost = sys.kappa_i * loss_sum * traj.dt * tau_rt / (2.0 * sys.r2_impedance);
    led.efficiency = led.e_res / led.e_tot;
    return led;
}

EnergyLedger efficiency_numeric(const SystemParams& sys, const PulseSpec& pulse,
                                const CouplerSchedule& schedule,
                                const IntegrationOptions& opts) {
    const FieldTrajectory traj = integrate_field(sys, pulse, schedule, opts);
    return energy_ledger(sys, pulse, schedule, traj);
}

double phase_opposition_check(const FieldTrajectory& traj, double phase_t1) {
    require(traj.size() >= 2, "phase_opposition_check: trajectory too short");
    double max_b = 0.0;
    for (const auto& b : traj.b_field) max_b = std::max(max_b, std::abs(b));
    if (max_b == 0.0) return 0.0;

    const std::complex<double> t1_phase = std::polar(1.0, phase_t1);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double a = traj.a_drive[k].real();
        const std::complex<double> b = traj.b_field[k];
        if (a <= 0.0 || std::abs(b) < 1e-6 * max_b) continue;
        if (traj.kappa_of_t[k] <= 0.0) continue;  // coupler closed: no leakage
        // r_drive A is real positive, so the transmitted part t_res B opposes
        // it exactly when e^{i phase_t1} B lies on the negative real axis.
        const double dev = std::abs(std::arg(-b * t1_phase));
        worst = std::max(worst, dev);
    }
    return worst;
}

// ---- scans ---------------------------------------------------------------

namespace {

struct PointConfig {
    SystemParams sys;
    PulseSpec pulse;
    CouplerSchedule schedule;
};

void apply_axis(PointConfig& cfg, const std::string& param, double value,
                bool& has_delay, double& delay_value) {
    if (param == "T") {
        cfg.schedule.t_close = value;
    } else if (param == "Tprime") {
        cfg.pulse.t_drive = value;
    } else if (param == "tau") {
        cfg.pulse.tau = value;
    } else if (param == "delta_omega") {
        cfg.pulse.detuning = value;
    } else if (param == "delay") {
        has_delay = true;
        delay_value = value;
    } else if (param == "kappa") {
        cfg.sys.kappa_on = value;
    } else if (param == "T1") {
        if (!(value > 0.0)) throw std::invalid_argument("scan: T1 must be positive");
        cfg.sys.kappa_i = std::isinf(value) ? 0.0 : 1.0 / value;
    } else {
        throw std::invalid_argument("scan: unknown axis '" + param + "'");
    }
}

// Closed-form efficiency for a full configuration, composing the delay
// factor and the intrinsic-loss mapping.  Throws when no closed form covers
// the configuration.
double analytic_efficiency(const PointConfig& cfg) {
    require(cfg.pulse.detuning == 0.0, "analytic: closed forms are on-resonance only");
    require(cfg.schedule.kappa_off == 0.0 && cfg.schedule.ramp == 0.0 &&
                std::isinf(cfg.schedule.t_reopen),
            "analytic: closed forms cover a single clean close");

    const double kappa = cfg.sys.kappa_on;
    const double scale = (kappa + cfg.sys.kappa_i) / kappa;  // intrinsic loss
    const double T = cfg.schedule.t_close * scale;
    const double Tp = cfg.pulse.t_drive * scale;
    PulseSpec pulse = cfg.pulse;
    pulse.tau *= scale;

    double eff;
    if (pulse.shape == PulseShape::rectangular) {
        const double t_ref = std::min(T, Tp);
        eff = eff_rectangular(kappa, t_ref).value;
        if (T != Tp) eff *= delay_factor(kappa, pulse, T, Tp);
    } else if (std::isinf(Tp)) {
        require(pulse.tau < 0.0, "analytic: infinite drive needs tau < 0");
        eff = eff_decreasing_infinite(kappa, -pulse.tau, T).value;
    } else if (T <= Tp) {
        eff = eff_exponential(kappa, pulse.tau, T, Tp).value;
    } else {
        eff = eff_exponential(kappa, pulse.tau, Tp, Tp).value *
              delay_factor(kappa, pulse, T, Tp);
    }
    return eff / scale;
}

ScanRow evaluate_point(const ScanConfig& base, const PointConfig& cfg) {
    ScanRow row;
    try {
        if (base.method == ScanMethod::analytic) {
            row.efficiency = analytic_efficiency(cfg);
        } else {
            IntegrationOptions opts;
            opts.phase_t1 = base.phase_t1;
            row.efficiency =
                efficiency_numeric(cfg.sys, cfg.pulse, cfg.schedule, opts).efficiency;
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.efficiency = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
}

}  // namespace

ScanResult scan_grid(const ScanConfig& base, const std::vector<ScanAxis>& axes) {
    require(!axes.empty(), "scan_grid: at least one axis required");
    std::size_t total = 1;
    for (const auto& ax : axes) {
        require(!ax.values.empty(), "scan_grid: axis '" + ax.param + "' is empty");
        // Validate the axis name up front; value errors surface per row.
        PointConfig probe{base.sys, base.pulse, base.schedule};
        bool hd = false;
        double dv = 0.0;
        apply_axis(probe, ax.param, ax.values.front(), hd, dv);
        require(total <= 10'000'000 / ax.values.size(),
                "scan_grid: grid too large");
        total *= ax.values.size();
    }

    ScanResult result;
    result.axis_names.reserve(axes.size());
    for (const auto& ax : axes) result.axis_names.push_back(ax.param);
    result.rows.resize(total);

    const auto fill_row = [&](std::size_t flat) {
        // Odometer decode, last axis fastest.
        std::vector<double> coords(axes.size());
        std::size_t rem = flat;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& vals = axes[a].values;
            coords[a] = vals[rem % vals.size()];
            rem /= vals.size();
        }
        PointConfig cfg{base.sys, base.pulse, base.schedule};
        bool has_delay = false;
        double delay_value = 0.0;
        ScanRow row;
        try {
            for (std::size_t a = 0; a < axes.size(); ++a)
                apply_axis(cfg, axes[a].param, coords[a], has_delay, delay_value);
            if (has_delay) {
                require(std::isfinite(cfg.pulse.t_drive),
                        "scan: delay axis needs a finite t_drive");
                cfg.schedule.t_close = cfg.pulse.t_drive + delay_value;
            }
            row = evaluate_point(base, cfg);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            row.efficiency = std::numeric_limits<double>::quiet_NaN();
        }
        row.coords = std::move(coords);
        result.rows[flat] = std::move(row);
    };

    const int threads = std::max(1, base.threads);
    if (threads == 1 || total < 4) {
        for (std::size_t i = 0; i < total; ++i) fill_row(i);
    } else {
        // Contiguous slices per worker; rows land by index, so the merge
        // order is deterministic regardless of scheduling.
        const std::size_t n_workers =
            std::min<std::size_t>(static_cast<std::size_t>(threads), total);
        std::vector<std::future<void>> futures;
        futures.reserve(n_workers);
        const std::size_t chunk = (total + n_workers - 1) / n_workers;
        for (std::size_t w = 0; w < n_workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(total, lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, [&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) fill_row(i);
            }));
        }
        for (auto& f : futures) f.get();
    }
    return result;
}

}  // namespace pulsecap
