// Device model shared by every other component: resonator/coupler parameters,
// scattering coefficients of the tunable coupler, drive pulse envelopes and the
// coupler open/close schedule.
#pragma once

#include <complex>
#include <limits>
#include <string>

namespace pulsecap {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Static description of the resonator + tunable coupler.
//
// kappa_on is the energy decay rate of the resonator through the coupler when
// the coupler is open (1/s); kappa_i = 1/T1 is the internal loss rate (0 for a
// lossless resonator).  tau_rt is the cavity round-trip time; for a
// quarter-wave resonator it defaults to pi/omega, i.e. one round trip per
// half period.
struct SystemParams {
    double omega = 2.0 * kPi * 6.55e9;  // resonator angular frequency (rad/s)
    double r1_impedance = 50.0;         // drive line impedance (ohm)
    double r2_impedance = 80.0;         // resonator line impedance (ohm)
    double tau_rt = 0.0;                // round-trip time (s); <=0 -> pi/omega
    double kappa_on = 2.0e7;            // coupled decay rate, coupler open (1/s)
    double kappa_i = 0.0;               // internal loss rate 1/T1 (1/s)

    // Round-trip time actually in effect (resolves the default).
    [[nodiscard]] double round_trip() const {
        return tau_rt > 0.0 ? tau_rt : kPi / omega;
    }

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

// Frequency-domain scattering coefficients of the coupler at a given kappa.
//
// t_drive transmits the incident drive into the resonator, t_res transmits
// the resonator field out; r_drive / r_res are the same-side reflections.
// They satisfy |t_drive|^2 (R1/R2) + |r|^2 = 1, t_drive = (R2/R1) t_res and
// r_res = -r_drive* t_drive / t_drive*, with the common reflection magnitude
// |r| stored in r_mag.
struct CouplerCoefficients {
    std::complex<double> t_drive;  // drive line -> resonator
    std::complex<double> t_res;    // resonator -> drive line
    std::complex<double> r_drive;  // reflection seen from the drive line
    std::complex<double> r_res;    // reflection seen from the resonator
    double r_mag = 1.0;            // |r_drive| = |r_res|
};

// Scattering coefficients for a coupler tuned to decay rate `kappa`.
//
// Eq-free phases are fixed by convention: r_drive is real positive and
// arg(t_drive) = phase_t1 (efficiencies are invariant under both choices).
// Throws std::invalid_argument when kappa < 0 or the implied |t_drive|^2
// would reach 1 (coupler over-coupled beyond the model's validity).
[[nodiscard]] CouplerCoefficients derive_coefficients(const SystemParams& sys,
                                                      double kappa,
                                                      double phase_t1 = 0.0);

// Convenience overload at kappa = sys.kappa_on.
[[nodiscard]] CouplerCoefficients derive_coefficients(const SystemParams& sys);

enum class PulseShape {
    rectangular,  // constant amplitude on [0, t_drive]
    exponential,  // amplitude * exp(t / tau) on [0, t_drive]; tau < 0 decays
};

// Drive pulse envelope.  The envelope is real; detuning (drive frequency
// minus resonator frequency, rad/s) is carried separately and applied by the
// field integrator.  t_drive may be +infinity only for a decaying
// exponential (tau < 0), the one family with finite total energy.
struct PulseSpec {
    PulseShape shape = PulseShape::rectangular;
    double amplitude = 1.0;  // envelope scale (wave-amplitude units)
    double tau = 0.0;        // exponential time constant (s, signed); unused for rectangular
    double t_drive = 0.0;    // drive stop time T' (s); may be +inf, see above
    double detuning = 0.0;   // delta_omega = omega_drive - omega_res (rad/s)

    void validate() const;

    // Envelope value at time t: the shape's value on [0, t_drive), 0 outside.
    // The support is right-open so the stop instant samples as off, matching
    // the right-continuous coupler schedule.
    [[nodiscard]] double envelope_at(double t) const;

    // Pulse energy delivered up to `until` (or t_drive if smaller), divided
    // by 2*R1: the closed-form evaluation of the incident-energy integral.
    [[nodiscard]] double drive_energy(double r1_impedance, double until) const;
};

// Coupler timing: open on [0, t_close), at kappa_off afterwards, optionally
// reopening at t_reopen (capture -> idle -> release protocols).  A nonzero
// `ramp` makes each switch a linear ramp of that duration starting at the
// switch time instead of an instantaneous step.
struct CouplerSchedule {
    double t_close = 0.0;    // capture time T (s)
    double kappa_off = 0.0;  // decay rate while "closed" (1/s)
    double ramp = 0.0;       // linear ramp duration at each switch (s)
    double t_reopen = std::numeric_limits<double>::infinity();  // never by default

    void validate() const;

    // Coupling rate in effect at time t, given the open-state rate kappa_on.
    [[nodiscard]] double kappa_at(double t, double kappa_on) const;
};

}  // namespace pulsecap
