#include "pulsecap/coremodel.hpp"

#include <cmath>
#include <stdexcept>

namespace pulsecap {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void SystemParams::validate() const {
    require(std::isfinite(omega) && omega > 0.0, "SystemParams: omega must be positive");
    require(std::isfinite(r1_impedance) && r1_impedance > 0.0,
            "SystemParams: r1_impedance must be positive");
    require(std::isfinite(r2_impedance) && r2_impedance > 0.0,
            "SystemParams: r2_impedance must be positive");
    require(std::isfinite(kappa_on) && kappa_on > 0.0,
            "SystemParams: kappa_on must be positive");
    require(std::isfinite(kappa_i) && kappa_i >= 0.0,
            "SystemParams: kappa_i must be non-negative");
    if (tau_rt > 0.0) {
        require(std::isfinite(tau_rt), "SystemParams: tau_rt must be finite");
        // The single-mode reduction assumes many round trips per decay time.
        require(kappa_on * tau_rt < 0.1,
                "SystemParams: kappa_on * tau_rt must stay below 0.1");
    } else {
        require(tau_rt == 0.0 || std::isfinite(tau_rt),
                "SystemParams: tau_rt must be finite");
    }
}

CouplerCoefficients derive_coefficients(const SystemParams& sys, double kappa,
                                        double phase_t1) {
    sys.validate();
    require(std::isfinite(kappa) && kappa >= 0.0,
            "derive_coefficients: kappa must be non-negative");
    require(std::isfinite(phase_t1), "derive_coefficients: phase_t1 must be finite");

    const double tau_rt = sys.round_trip();
    // |t_drive|^2 / tau_rt = kappa * R2 / R1 fixes the transmission magnitude.
    const double t1_sq = kappa * tau_rt * sys.r2_impedance / sys.r1_impedance;
    require(t1_sq < 1.0, "derive_coefficients: kappa implies |t_drive|^2 >= 1");
    // |t_drive|^2 (R1/R2) + |r|^2 = 1 -> |r|^2 = 1 - kappa * tau_rt.
    const double r_sq = 1.0 - kappa * tau_rt;
    require(r_sq >= 0.0, "derive_coefficients: kappa * tau_rt exceeds 1");

    CouplerCoefficients c;
    c.r_mag = std::sqrt(r_sq);
    const std::complex<double> phase = std::polar(1.0, phase_t1);
    c.t_drive = std::sqrt(t1_sq) * phase;
    c.t_res = (sys.r1_impedance / sys.r2_impedance) * c.t_drive;
    // Convention: the drive-side reflection is real positive; the
    // resonator-side reflection then follows from
    // r_res = -conj(r_drive) t_drive / conj(t_drive).
    c.r_drive = c.r_mag;
    c.r_res = -c.r_mag * phase * phase;
    return c;
}

CouplerCoefficients derive_coefficients(const SystemParams& sys) {
    return derive_coefficients(sys, sys.kappa_on, 0.0);
}

void PulseSpec::validate() const {
    require(std::isfinite(amplitude) && amplitude >= 0.0,
            "PulseSpec: amplitude must be non-negative");
    require(std::isfinite(detuning), "PulseSpec: detuning must be finite");
    require(!std::isnan(t_drive) && t_drive >= 0.0,
            "PulseSpec: t_drive must be non-negative");
    if (shape == PulseShape::exponential) {
        require(std::isfinite(tau) && tau != 0.0,
                "PulseSpec: exponential pulse needs a nonzero finite tau");
        if (std::isinf(t_drive))
            require(tau < 0.0,
                    "PulseSpec: infinite t_drive needs a decaying exponential (tau < 0)");
    } else {
        require(std::isfinite(t_drive),
                "PulseSpec: rectangular pulse needs a finite t_drive");
    }
}

double PulseSpec::envelope_at(double t) const {
    // Right-open support [0, t_drive): at the stop instant the envelope reads
    // as already off, matching the right-continuous coupler schedule so a
    // simultaneous drive-stop/coupler-close samples cleanly.
    if (t < 0.0 || t >= t_drive) return 0.0;
    switch (shape) {
        case PulseShape::rectangular:
            return amplitude;
        case PulseShape::exponential:
            return amplitude * std::exp(t / tau);
    }
    return 0.0;
}

double PulseSpec::drive_energy(double r1_impedance, double until) const {
    const double t_end = std::min(until, t_drive);
    if (t_end <= 0.0) return 0.0;
    double integral = 0.0;  // of |A|^2 over [0, t_end]
    switch (shape) {
        case PulseShape::rectangular:
            integral = amplitude * amplitude * t_end;
            break;
        case PulseShape::exponential:
            if (std::isinf(t_end)) {
                // Only reachable for tau < 0 (validated): total energy |tau|/2.
                integral = amplitude * amplitude * (-tau / 2.0);
            } else {
                integral = amplitude * amplitude * (tau / 2.0) * std::expm1(2.0 * t_end / tau);
            }
            break;
    }
    return integral / (2.0 * r1_impedance);
}

void CouplerSchedule::validate() const {
    require(!std::isnan(t_close) && t_close >= 0.0,
            "CouplerSchedule: t_close must be non-negative");
    require(std::isfinite(t_close), "CouplerSchedule: t_close must be finite");
    require(std::isfinite(kappa_off) && kappa_off >= 0.0,
            "CouplerSchedule: kappa_off must be non-negative");
    require(std::isfinite(ramp) && ramp >= 0.0,
            "CouplerSchedule: ramp must be non-negative");
    require(!std::isnan(t_reopen), "CouplerSchedule: t_reopen must not be NaN");
    if (!std::isinf(t_reopen))
        require(t_reopen >= t_close + ramp,
                "CouplerSchedule: t_reopen must not precede the close ramp");
}

double CouplerSchedule::kappa_at(double t, double kappa_on) const {
    if (t < t_close) return kappa_on;
    if (ramp > 0.0 && t < t_close + ramp) {
        const double x = (t - t_close) / ramp;
        return kappa_on + (kappa_off - kappa_on) * x;
    }
    if (t < t_reopen) return kappa_off;
    if (ramp > 0.0 && t < t_reopen + ramp) {
        const double x = (t - t_reopen) / ramp;
        return kappa_off + (kappa_on - kappa_off) * x;
    }
    return kappa_on;
}

}  // namespace pulsecap
