// Acceptance gate: twelve pass/fail checks covering the closed forms, the
// integrator, delay and detuning behavior, energy conservation, estimator
// statistics, and the end-to-end measurement pipeline.  Prints one line per
// criterion and exits nonzero if any fail.
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "pulsecap/analytic.hpp"
#include "pulsecap/estimation.hpp"
#include "pulsecap/pipeline.hpp"
#include "pulsecap/validation.hpp"

using namespace pulsecap;

namespace {

int g_failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
    std::printf("%s criterion %2d: %-32s %s\n", ok ? "PASS" : "FAIL", n, name,
                detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const validation::PropertyResult* find_property(
    const std::vector<validation::SuiteResult>& suites, const char* name) {
    for (const auto& s : suites)
        for (const auto& p : s.properties)
            if (p.name == name) return &p;
    return nullptr;
}

// Property lookup that never dereferences null: missing properties fail.
bool prop_passed(const std::vector<validation::SuiteResult>& suites,
                 const char* name, std::string* detail) {
    const auto* p = find_property(suites, name);
    if (p == nullptr) {
        *detail += std::string("[") + name + " missing] ";
        return false;
    }
    if (!p->passed)
        *detail += std::string("[") + name + ": " + fmt(p->measured) +
                   " vs bound " + fmt(p->bound) + "] ";
    return p->passed;
}

// Mirrors of the CLI measurement recipes (device parameters, rising or
// decaying exponential drive, filtered heterodyne acquisition).
ExperimentConfig reversed_config() {
    ExperimentConfig cfg;
    cfg.sys.omega = 2.0 * kPi * 6.55e9;
    cfg.sys.r1_impedance = 50.0;
    cfg.sys.r2_impedance = 80.0;
    cfg.sys.kappa_on = 2.0e7;
    cfg.sys.kappa_i = 1.0 / 3.0e-6;
    cfg.pulse.shape = PulseShape::exponential;
    cfg.pulse.amplitude = 1.0;
    cfg.pulse.tau = 1.0e-7;
    cfg.pulse.t_drive = 4.0e-7;
    cfg.pulse.detuning = 2.0 * kPi * 2.5e5;
    cfg.idle = 30.0e-9;
    cfg.acquisition.filter = FilterKind::windowed_sinc;
    cfg.acquisition.noise_sigma = 1500.0;
    return cfg;
}

ExperimentConfig natural_config() {
    ExperimentConfig cfg = reversed_config();
    cfg.pulse.amplitude = std::exp(4.0);
    cfg.pulse.tau = -1.0e-7;
    cfg.pulse.t_drive = 1.0e-7;
    cfg.pulse.detuning = 0.0;
    return cfg;
}

// 1. The rectangular-drive optimum: kappa T* = 2.51286 +- 1e-4 with
//    efficiency 0.814529 +- 1e-6.
void criterion_1() {
    const RectangularOptimum opt = optimal_rectangular(1.0);
    const bool ok = std::abs(opt.t_pulse - 2.51286) <= 1e-4 &&
                    std::abs(opt.efficiency - 0.814529) <= 1e-6;
    report(1, "rectangular optimum", ok,
           "kappa T* = " + fmt(opt.t_pulse) + ", eta* = " + fmt(opt.efficiency));
}

// 2. Natural-decay optimum 4/e^2 at |tau| = T = 2/kappa, found by a 200x200
//    grid search to within 1e-3.
void criterion_2() {
    const double target = 4.0 / (std::exp(1.0) * std::exp(1.0));
    const double at_point = eff_decreasing_infinite(1.0, 2.0, 2.0).value;

    double best = 0.0, best_tau = 0.0, best_t = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double tau = 0.5 + (5.0 - 0.5) * i / 199.0;
        for (int j = 0; j < 200; ++j) {
            const double t = 0.5 + (8.0 - 0.5) * j / 199.0;
            const double v = eff_decreasing_infinite(1.0, tau, t).value;
            if (v > best) {
                best = v;
                best_tau = tau;
                best_t = t;
            }
        }
    }
    const bool ok = std::abs(at_point - target) <= 1e-9 &&
                    std::abs(best - target) <= 1e-3 &&
                    best <= target + 1e-12 && std::abs(best_tau - 2.0) <= 0.05 &&
                    std::abs(best_t - 2.0) <= 0.05;
    report(2, "natural-decay optimum", ok,
           "eta(2,2) = " + fmt(at_point) + ", grid max " + fmt(best) +
               " at tau = " + fmt(best_tau) + ", T = " + fmt(best_t));
}

// 3. Time-reversed capture law: matched rising exponential with tau = 2/kappa
//    gives exactly 1 - e^{-kappa T}; >= 0.994 once kappa T >= 5.3.
void criterion_3() {
    double worst = 0.0;
    bool plateau_ok = true;
    for (int i = 0; i < 200; ++i) {
        const double t = 0.1 + (20.0 - 0.1) * i / 199.0;
        const double v = eff_exponential(1.0, 2.0, t, t).value;
        worst = std::max(worst, std::abs(v - (1.0 - std::exp(-t))));
        if (t >= 5.3 && v < 0.994) plateau_ok = false;
    }
    const double at_knee = eff_exponential(1.0, 2.0, 5.3, 5.3).value;
    const bool ok = worst <= 1e-12 && plateau_ok && at_knee >= 0.994;
    report(3, "time-reversed capture law", ok,
           "worst |eta - (1 - e^-kT)| = " + fmt(worst) +
               ", eta(5.3) = " + fmt(at_knee));
}

// 4. Rising-drive efficiency band: above 0.815 throughout kappa tau in
//    [0.8, 5]; the band edges match by the tau -> 4/tau symmetry and sit at
//    40/49 = 0.8163, i.e. 0.815 + 1.3e-3 (the quoted round interval is
//    slightly inside the exact > 0.815 region (0.797, 5.019)).
void criterion_4() {
    const double eta_lo = eff_increasing_infinite(1.0, 0.8).value;
    const double eta_hi = eff_increasing_infinite(1.0, 5.0).value;
    double min_inside = 1.0;
    for (int i = 0; i <= 500; ++i) {
        const double u = 0.8 + (5.0 - 0.8) * i / 500.0;
        min_inside = std::min(min_inside, eff_increasing_infinite(1.0, u).value);
    }
    const double gap = std::abs(eta_lo - 0.815);
    const bool ok = min_inside > 0.815 && std::abs(eta_lo - eta_hi) <= 1e-12 &&
                    std::abs(eta_lo - 40.0 / 49.0) <= 1e-12 && gap < 2e-3;
    report(4, "rising-drive efficiency band", ok,
           "min eta on [0.8,5] = " + fmt(min_inside) + ", eta(0.8) = eta(5) = " +
               fmt(eta_lo) + " (0.815 + " + fmt(gap) + ")");
}

// 5./6. The integrator agrees with every closed form within 1e-5 over 50
// random lossless configurations, and with the loss-scaled forms over 20
// lossy ones; the realized loss prefactor at kappa = 1/(50 ns), T1 = 3 us
// equals 60/61 to 1e-12.
void criteria_5_6() {
    const auto suites = validation::run_suites("analytic", 50, 1);

    std::string d5;
    const bool ok5 = prop_passed(suites, "lossless_ode_matches_closed_forms", &d5);
    const auto* lossless =
        find_property(suites, "lossless_ode_matches_closed_forms");
    if (lossless != nullptr)
        d5 += "worst |eta_ode - eta_closed| = " + fmt(lossless->measured);
    report(5, "integrator matches closed forms", ok5, d5);

    std::string d6;
    bool ok6 = prop_passed(suites, "intrinsic_loss_matches_scaled_forms", &d6);
    ok6 = prop_passed(suites, "loss_prefactor_at_device_values", &d6) && ok6;
    const auto* lossy = find_property(suites, "intrinsic_loss_matches_scaled_forms");
    const auto* pref = find_property(suites, "loss_prefactor_at_device_values");
    if (lossy != nullptr) d6 += "worst lossy gap = " + fmt(lossy->measured);
    if (pref != nullptr)
        d6 += ", |prefactor - 60/61| = " + fmt(pref->measured);
    report(6, "intrinsic-loss mapping", ok6, d6);
}

// 7. Closing-delay factors: drive-first e^{-kappa (T - T')} for every pulse
//    family, coupler-first closed form for exponential drives, both to 1e-4.
void criterion_7() {
    const auto suites = validation::run_suites("delay", 20, 1);
    std::string d;
    bool ok = prop_passed(suites, "drive_first_exponential_factor", &d);
    ok = prop_passed(suites, "coupler_first_closed_form_factor", &d) && ok;
    const auto* a = find_property(suites, "drive_first_exponential_factor");
    const auto* b = find_property(suites, "coupler_first_closed_form_factor");
    if (a != nullptr && b != nullptr)
        d += "worst factor gaps " + fmt(a->measured) + " / " + fmt(b->measured);
    report(7, "coupler-delay factors", ok, d);
}

// 8. Detuning response: even to 1e-9 and peaked at zero for every family;
//    efficiency >= 0.90 for |detuning|/2pi <= 1 MHz at device parameters;
//    half-efficiency bandwidth proportional to kappa within 10%.
void criterion_8() {
    const auto suites = validation::run_suites("detuning", 5, 1);
    std::string d;
    bool ok = prop_passed(suites, "efficiency_even_in_detuning", &d);
    ok = prop_passed(suites, "efficiency_peaks_on_resonance", &d) && ok;
    ok = prop_passed(suites, "device_bandwidth_megahertz", &d) && ok;
    ok = prop_passed(suites, "bandwidth_proportional_to_kappa", &d) && ok;
    const auto* band = find_property(suites, "device_bandwidth_megahertz");
    if (band != nullptr)
        d += "min eta within +-1 MHz = " + fmt(band->measured);
    report(8, "detuning response", ok, d);
}

// 9. Energy conservation: |E_tot - E_res - E_out| <= 1% E_tot lossless at
//    device parameters; input and emitted waves anti-phased on resonance to
//    1e-6 rad.
void criterion_9() {
    const auto suites = validation::run_suites("conservation", 20, 1);
    std::string d;
    bool ok = prop_passed(suites, "energy_balance_within_one_percent", &d);
    ok = prop_passed(suites, "phase_opposition_on_resonance", &d) && ok;
    ok = prop_passed(suites, "no_dissipation_when_lossless", &d) && ok;
    const auto* bal = find_property(suites, "energy_balance_within_one_percent");
    const auto* ph = find_property(suites, "phase_opposition_on_resonance");
    if (bal != nullptr && ph != nullptr)
        d += "worst balance " + fmt(bal->measured) + ", worst phase " +
             fmt(ph->measured) + " rad";
    report(9, "energy conservation", ok, d);
}

// 10. Estimator statistics over 1000 Monte Carlo trials: unbiased noise
// subtraction within 3 standard errors; window, subtracted, and noise-energy
// variances within 15% of their closed forms; absorption std within 15% of
// its propagation formula.
void criterion_10(const std::vector<validation::SuiteResult>& suites) {
    std::string d10;
    bool ok10 = prop_passed(suites, "noise_subtraction_unbiased", &d10);
    ok10 = prop_passed(suites, "window_energy_variance", &d10) && ok10;
    ok10 = prop_passed(suites, "subtracted_energy_variance", &d10) && ok10;
    ok10 = prop_passed(suites, "noise_energy_variance", &d10) && ok10;
    ok10 = prop_passed(suites, "absorption_sigma_consistent", &d10) && ok10;
    const auto* bias = find_property(suites, "noise_subtraction_unbiased");
    const auto* absig = find_property(suites, "absorption_sigma_consistent");
    if (bias != nullptr && absig != nullptr)
        d10 += "bias z = " + fmt(bias->measured) + ", sigma_abs rel gap = " +
               fmt(absig->measured);
    report(10, "estimator statistics", ok10, d10);
}

// 12. Statistical moments: sampled Gaussian moments match (p-1)!! sigma^p
// through p = 6 within 3 standard errors, weighted-sum second moments match
// closed forms, and the direct moment evaluations are exact.
void criterion_12(const std::vector<validation::SuiteResult>& suites) {
    std::string d12;
    bool ok12 = prop_passed(suites, "gaussian_moments_sampled", &d12);
    ok12 = prop_passed(suites, "weighted_sum_moments", &d12) && ok12;

    const double s = 1.7;
    const double s2 = s * s;
    const bool moments_exact =
        gaussian_moment(0, s) == 1.0 && gaussian_moment(1, s) == 0.0 &&
        gaussian_moment(3, s) == 0.0 && gaussian_moment(5, s) == 0.0 &&
        std::abs(gaussian_moment(2, s) - s2) <= 1e-12 * s2 &&
        std::abs(gaussian_moment(4, s) - 3.0 * s2 * s2) <= 1e-12 * 3 * s2 * s2 &&
        std::abs(gaussian_moment(6, s) - 15.0 * s2 * s2 * s2) <=
            1e-12 * 15 * s2 * s2 * s2;
    if (!moments_exact) d12 += "[closed-form moment mismatch] ";
    ok12 = ok12 && moments_exact;
    const auto* gm = find_property(suites, "gaussian_moments_sampled");
    if (gm != nullptr) d12 += "worst moment z = " + fmt(gm->measured);
    report(12, "statistical moments", ok12, d12);
}

// 11. End-to-end pipeline: noiseless capture reproduces the dynamics-side
// absorption to 1e-3; at the realistic noise scale the time-reversed recipe
// lands in [0.990, 0.998] with a consistent error bar, the natural-decay
// recipe in [0.58, 0.64].
void criterion_11() {
    ExperimentConfig quiet = reversed_config();
    quiet.acquisition.noise_sigma = 0.0;
    quiet.acquisition.seed = 11;
    const ExperimentResult rq = run_experiment(quiet);
    const bool ok_quiet =
        std::abs(rq.report.absorption - rq.dynamics_absorption) <= 1e-3 &&
        rq.report.absorption_sigma == 0.0;

    ExperimentConfig tr = reversed_config();
    tr.acquisition.seed = 11;
    const ExperimentResult rt = run_experiment(tr);
    const double sig = rt.report.absorption_sigma;
    const bool ok_tr =
        rt.report.absorption >= 0.990 && rt.report.absorption <= 0.998 &&
        sig > 5e-5 && sig < 2e-3 &&
        std::abs(rt.report.absorption - rt.dynamics_absorption) <= 4.0 * sig;

    ExperimentConfig nat = natural_config();
    nat.acquisition.seed = 11;
    const ExperimentResult rn = run_experiment(nat);
    const bool ok_nat =
        rn.report.absorption >= 0.58 && rn.report.absorption <= 0.64;

    report(11, "end-to-end pipeline", ok_quiet && ok_tr && ok_nat,
           "noiseless gap " +
               fmt(std::abs(rq.report.absorption - rq.dynamics_absorption)) +
               ", reversed " + fmt(rt.report.absorption) + " +- " + fmt(sig) +
               ", natural " + fmt(rn.report.absorption));
}

}  // namespace

int main() {
    std::printf("acceptance: twelve criteria\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criteria_5_6();
    criterion_7();
    criterion_8();
    criterion_9();
    const auto stats = validation::run_suites("statistics", 1000, 1);
    criterion_10(stats);
    criterion_11();
    criterion_12(stats);
    std::printf("%d of 12 criteria passed\n", 12 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
