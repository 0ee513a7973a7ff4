// Closed-form receiver efficiencies for the canonical drive families, the
// delay factors for mistimed coupler closing, and the intrinsic-loss mapping.
//
// All formulas depend only on the dimensionless products kappa*T, kappa*T'
// and kappa*tau, so they accept SI rates/times and kappa=1 frames alike.
#pragma once

#include "pulsecap/coremodel.hpp"

namespace pulsecap {

// Which closed form produced a value (degenerate = removable singularity).
enum class Formula {
    rectangular,
    exponential_chopped,
    exponential_degenerate,
    decreasing_infinite,
    decreasing_infinite_degenerate,
    increasing_infinite,
};

struct EfficiencyResult {
    double value = 0.0;
    Formula formula = Formula::rectangular;
};

// Rectangular pulse, coupler closed with the drive (T = T').
// eta = (4 / kappa T) (1 - e^{-kappa T / 2})^2.
[[nodiscard]] EfficiencyResult eff_rectangular(double kappa, double t_pulse);

// Exponential pulse exp(t/tau) chopped at t_drive = T', coupler closed at
// t_close = T <= T'.  Signed tau; the removable singularity at
// kappa*tau = -2 (detected within 1e-7 relative) switches to the limit form
// kappa^2 T^2 e^{-kappa T} / (1 - e^{-kappa T'}).
[[nodiscard]] EfficiencyResult eff_exponential(double kappa, double tau,
                                               double t_close, double t_drive);

// Decaying exponential of infinite duration (T' -> inf), tau_abs = |tau|,
// coupler closed at t_close.  Removable singularity at kappa*tau_abs = 2
// (limit form kappa^2 T^2 e^{-kappa T}).
[[nodiscard]] EfficiencyResult eff_decreasing_infinite(double kappa, double tau_abs,
                                                       double t_close);

// Rising exponential with T = T' -> inf: eta = 4 (kappa tau / 2) /
// (1 + kappa tau / 2)^2.  Exceeds 0.815 exactly on kappa*tau in
// (0.797, 5.019) and is symmetric under kappa*tau -> 4/(kappa*tau).
[[nodiscard]] EfficiencyResult eff_increasing_infinite(double kappa, double tau);

// Efficiency penalty for t_close != t_drive, multiplying the matched
// (t_close = t_drive) efficiency.
//
// Drive-first (t_close > t_drive): e^{-kappa (T - T')}, any pulse shape.
// Coupler-first (t_close < t_drive): only exponential pulses admit a closed
// form, ((e^{T/tau} - e^{-kappa T/2}) / (e^{T'/tau} - e^{-kappa T'/2}))^2;
// rectangular throws std::invalid_argument.
[[nodiscard]] double delay_factor(double kappa, const PulseSpec& pulse,
                                  double t_close, double t_drive);

// A closed-form case bundled for composition (loss mapping, scans, C API).
// tau is ignored for rectangular; t_drive for the infinite families.
struct AnalyticCase {
    Formula formula = Formula::rectangular;
    double kappa = 1.0;
    double tau = 0.0;      // signed for exponential_chopped, |tau| for decreasing_infinite
    double t_close = 0.0;  // T
    double t_drive = 0.0;  // T' (exponential_chopped only)
};

// Dispatch an AnalyticCase to the matching closed form above.
[[nodiscard]] EfficiencyResult evaluate(const AnalyticCase& base);

// Receiver efficiency with internal loss 1/t1_time folded in: the lossless
// formula evaluated with T, T', tau each scaled by (kappa + 1/T1)/kappa,
// then multiplied by kappa/(kappa + 1/T1).  Valid for every family whose
// envelope is a function of t/tau (all four here).
[[nodiscard]] EfficiencyResult apply_intrinsic_loss(const AnalyticCase& base,
                                                    double t1_time);

struct RectangularOptimum {
    double t_pulse = 0.0;     // optimal T for the given kappa
    double efficiency = 0.0;  // eta at the optimum (0.8145288 at kappa*T = 2.5128624)
};

// Golden-section maximization of eff_rectangular over kappa*T in [0.1, 10]
// to 1e-8 absolute in kappa*T.
[[nodiscard]] RectangularOptimum optimal_rectangular(double kappa);

namespace detail {

// Golden-section maximizer on [lo, hi] for a unimodal f; tolerance on x.
template <typename F>
double golden_max(F&& f, double lo, double hi, double x_tol) {
    constexpr double kInvPhi = 0.6180339887498949;  // 1/phi
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > x_tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

}  // namespace pulsecap
