#include "pulsecap/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace pulsecap {

namespace {

constexpr double kDegenerateWindow = 1e-7;  // relative, around kappa*tau = -2

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_rate(double kappa) {
    require(std::isfinite(kappa) && kappa > 0.0, "efficiency: kappa must be positive");
}

}  // namespace

EfficiencyResult eff_rectangular(double kappa, double t_pulse) {
    check_rate(kappa);
    require(std::isfinite(t_pulse) && t_pulse > 0.0,
            "eff_rectangular: t_pulse must be positive");
    const double x = kappa * t_pulse;
    const double one_minus = -std::expm1(-x / 2.0);  // 1 - e^{-x/2}
    return {4.0 * one_minus * one_minus / x, Formula::rectangular};
}

EfficiencyResult eff_exponential(double kappa, double tau, double t_close,
                                 double t_drive) {
    check_rate(kappa);
    require(std::isfinite(tau) && tau != 0.0, "eff_exponential: tau must be nonzero");
    require(std::isfinite(t_close) && t_close > 0.0,
            "eff_exponential: t_close must be positive");
    require(std::isfinite(t_drive) && t_drive > 0.0,
            "eff_exponential: t_drive must be positive and finite");
    require(t_close <= t_drive,
            "eff_exponential: t_close must not exceed t_drive (compose the "
            "drive-first delay factor instead)");

    const double u = kappa * tau;
    const double x = kappa * t_close;
    const double xp = kappa * t_drive;

    if (std::abs(u + 2.0) < kDegenerateWindow * 2.0) {
        // Removable singularity at kappa*tau = -2: the resonator integrand is
        // constant and the efficiency limits to kappa^2 T^2 e^{-kappa T} over
        // the delivered fraction of the pulse energy.
        const double value = x * x * std::exp(-x) / (-std::expm1(-xp));
        return {value, Formula::exponential_degenerate};
    }

    // eta = 8 u (e^{x/u} - e^{-x/2})^2 / ((u + 2)^2 (e^{2 x'/u} - 1)),
    // rearranged so growing exponentials cancel before they can overflow.
    double ratio;  // (e^{x/u} - e^{-x/2})^2 / (e^{2 x'/u} - 1)
    if (u > 0.0) {
        const double num = -std::expm1(-x * (1.0 / u + 0.5));  // 1 - e^{-x/u - x/2}
        const double den = -std::expm1(-2.0 * xp / u);         // 1 - e^{-2 x'/u}
        ratio = std::exp(2.0 * (x - xp) / u) * num * num / den;
    } else {
        const double num = std::exp(x / u) - std::exp(-x / 2.0);
        const double den = std::expm1(2.0 * xp / u);
        ratio = num * num / den;
    }
    const double value = 8.0 * u * ratio / ((u + 2.0) * (u + 2.0));
    return {value, Formula::exponential_chopped};
}

EfficiencyResult eff_decreasing_infinite(double kappa, double tau_abs,
                                         double t_close) {
    check_rate(kappa);
    require(std::isfinite(tau_abs) && tau_abs > 0.0,
            "eff_decreasing_infinite: tau_abs must be positive");
    require(std::isfinite(t_close) && t_close > 0.0,
            "eff_decreasing_infinite: t_close must be positive");

    const double s = kappa * tau_abs;
    const double x = kappa * t_close;

    if (std::abs(s - 2.0) < kDegenerateWindow * 2.0) {
        // Removable singularity at kappa*tau_abs = 2; maximum 4/e^2 at
        // t_close = 2/kappa.
        return {x * x * std::exp(-x), Formula::decreasing_infinite_degenerate};
    }

    const double num = std::exp(-x / s) - std::exp(-x / 2.0);
    const double value = 8.0 * s * num * num / ((s - 2.0) * (s - 2.0));
    return {value, Formula::decreasing_infinite};
}

EfficiencyResult eff_increasing_infinite(double kappa, double tau) {
    check_rate(kappa);
    require(std::isfinite(tau) && tau > 0.0,
            "eff_increasing_infinite: tau must be positive");
    const double u = kappa * tau;
    return {8.0 * u / ((2.0 + u) * (2.0 + u)), Formula::increasing_infinite};
}

double delay_factor(double kappa, const PulseSpec& pulse, double t_close,
                    double t_drive) {
    check_rate(kappa);
    require(std::isfinite(t_close) && t_close > 0.0,
            "delay_factor: t_close must be positive");
    require(std::isfinite(t_drive) && t_drive > 0.0,
            "delay_factor: t_drive must be positive and finite");

    if (t_close >= t_drive) {
        // Drive already off: the stored field just decays until the coupler
        // closes.  Pulse-shape independent.
        return std::exp(-kappa * (t_close - t_drive));
    }
    // Coupler closes mid-drive: closed form only for exponential pulses.
    require(pulse.shape == PulseShape::exponential,
            "delay_factor: coupler-first closing has no closed form for "
            "rectangular pulses");
    const double tau = pulse.tau;
    require(std::isfinite(tau) && tau != 0.0, "delay_factor: tau must be nonzero");

    const double u = kappa * tau;
    const double x = kappa * t_close;
    const double xp = kappa * t_drive;
    if (u > 0.0) {
        // Cancel the growing exponentials first.
        const double num = -std::expm1(-x * (1.0 / u + 0.5));
        const double den = -std::expm1(-xp * (1.0 / u + 0.5));
        const double r = std::exp((x - xp) / u) * num / den;
        return r * r;
    }
    const double num = std::exp(x / u) - std::exp(-x / 2.0);
    const double den = std::exp(xp / u) - std::exp(-xp / 2.0);
    const double r = num / den;
    return r * r;
}

EfficiencyResult evaluate(const AnalyticCase& base) {
    switch (base.formula) {
        case Formula::rectangular:
            return eff_rectangular(base.kappa, base.t_close);
        case Formula::exponential_chopped:
        case Formula::exponential_degenerate:
            return eff_exponential(base.kappa, base.tau, base.t_close, base.t_drive);
        case Formula::decreasing_infinite:
        case Formula::decreasing_infinite_degenerate:
            return eff_decreasing_infinite(base.kappa, std::abs(base.tau), base.t_close);
        case Formula::increasing_infinite:
            return eff_increasing_infinite(base.kappa, base.tau);
    }
    throw std::invalid_argument("evaluate: unknown formula");
}

EfficiencyResult apply_intrinsic_loss(const AnalyticCase& base, double t1_time) {
    require(std::isfinite(t1_time) && t1_time > 0.0,
            "apply_intrinsic_loss: t1_time must be positive");
    check_rate(base.kappa);
    // Times scale by (kappa + 1/T1)/kappa, the result by its inverse.
    const double scale = (base.kappa + 1.0 / t1_time) / base.kappa;
    AnalyticCase scaled = base;
    scaled.tau *= scale;
    scaled.t_close *= scale;
    scaled.t_drive *= scale;
    EfficiencyResult r = evaluate(scaled);
    r.value /= scale;
    return r;
}

RectangularOptimum optimal_rectangular(double kappa) {
    check_rate(kappa);
    // Dimensionless in x = kappa*T; the maximum sits well inside [0.1, 10].
    const double x_opt = detail::golden_max(
        [](double x) { return eff_rectangular(1.0, x).value; }, 0.1, 10.0, 1e-8);
    return {x_opt / kappa, eff_rectangular(1.0, x_opt).value};
}

}  // namespace pulsecap
