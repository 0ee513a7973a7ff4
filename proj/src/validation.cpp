#include "pulsecap/validation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "gaussian_rng.hpp"
#include "pulsecap/dynamics.hpp"
#include "pulsecap/estimation.hpp"

namespace pulsecap::validation {

namespace {

using detail::GaussianRng;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// passed when measured <= bound
PropertyResult at_most(std::string name, double measured, double bound,
                       std::string detail) {
    return {std::move(name), measured <= bound, measured, bound, std::move(detail)};
}

// passed when measured >= bound
PropertyResult at_least(std::string name, double measured, double bound,
                        std::string detail) {
    return {std::move(name), measured >= bound, measured, bound, std::move(detail)};
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased sample variance.
double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// |sample mean - expected| in units of the standard error of the mean.
double z_score(const std::vector<double>& v, double expected) {
    const double se = std::sqrt(var_of(v) / static_cast<double>(v.size()));
    return std::abs(mean_of(v) - expected) / se;
}

// A random configuration with both its ODE inputs and the closed-form case.
// Families: 0 rectangular (T = T'), 1 rising exponential chopped (T <= T'),
// 2 decaying exponential chopped (T <= T'), 3 decaying infinite-duration.
struct RandomCase {
    SystemParams sys;
    PulseSpec pulse;
    CouplerSchedule sched;
    AnalyticCase closed;
};

RandomCase random_case(GaussianRng& rng, int family) {
    RandomCase c;
    const double kappa = std::exp(rng.uniform(std::log(5.0e6), std::log(4.0e7)));
    c.sys.kappa_on = kappa;
    c.pulse.amplitude = rng.uniform(0.5, 2.0);
    switch (family % 4) {
        case 0: {
            const double t = rng.uniform(0.3, 6.0) / kappa;
            c.pulse.shape = PulseShape::rectangular;
            c.pulse.t_drive = t;
            c.sched.t_close = t;
            c.closed = {Formula::rectangular, kappa, 0.0, t, t};
            break;
        }
        case 1: {
            const double tau = rng.uniform(0.5, 4.0) / kappa;
            const double tp = rng.uniform(1.0, 8.0) / kappa;
            const double t = tp * rng.uniform(0.3, 1.0);
            c.pulse.shape = PulseShape::exponential;
            c.pulse.tau = tau;
            c.pulse.t_drive = tp;
            c.sched.t_close = t;
            c.closed = {Formula::exponential_chopped, kappa, tau, t, tp};
            break;
        }
        case 2: {
            const double tau = -rng.uniform(0.5, 4.0) / kappa;
            const double tp = rng.uniform(1.0, 6.0) / kappa;
            const double t = tp * rng.uniform(0.3, 1.0);
            c.pulse.shape = PulseShape::exponential;
            c.pulse.tau = tau;
            c.pulse.t_drive = tp;
            c.sched.t_close = t;
            c.closed = {Formula::exponential_chopped, kappa, tau, t, tp};
            break;
        }
        default: {
            const double tau = -rng.uniform(0.5, 4.0) / kappa;
            const double t = rng.uniform(0.3, 4.0) / kappa;
            c.pulse.shape = PulseShape::exponential;
            c.pulse.tau = tau;
            c.pulse.t_drive = kInf;
            c.sched.t_close = t;
            c.closed = {Formula::decreasing_infinite, kappa, -tau, t, 0.0};
            break;
        }
    }
    return c;
}

// ---- analytic: ODE vs closed forms -------------------------------------

SuiteResult suite_analytic(std::uint64_t trials, std::uint64_t seed) {
    const std::uint64_t n_lossless = trials ? trials : 50;
    const std::uint64_t n_lossy = std::min<std::uint64_t>(n_lossless, 20);
    GaussianRng rng(seed);
    SuiteResult res{"analytic", seed, n_lossless, {}};

    double worst_lossless = 0.0;
    for (std::uint64_t i = 0; i < n_lossless; ++i) {
        const RandomCase c = random_case(rng, static_cast<int>(i));
        const double ode = efficiency_numeric(c.sys, c.pulse, c.sched).efficiency;
        const double closed = evaluate(c.closed).value;
        worst_lossless = std::max(worst_lossless, std::abs(ode - closed));
    }
    res.properties.push_back(at_most(
        "lossless_ode_matches_closed_forms", worst_lossless, 1e-5,
        "worst |eta_ode - eta_closed| over " + std::to_string(n_lossless) +
            " lossless configurations spanning all pulse families"));

    double worst_lossy = 0.0;
    for (std::uint64_t i = 0; i < n_lossy; ++i) {
        RandomCase c = random_case(rng, static_cast<int>(i));
        const double t1 = rng.uniform(20.0, 200.0) / c.sys.kappa_on;
        c.sys.kappa_i = 1.0 / t1;
        const double ode = efficiency_numeric(c.sys, c.pulse, c.sched).efficiency;
        const double closed = apply_intrinsic_loss(c.closed, t1).value;
        worst_lossy = std::max(worst_lossy, std::abs(ode - closed));
    }
    res.properties.push_back(at_most(
        "intrinsic_loss_matches_scaled_forms", worst_lossy, 1e-5,
        "worst |eta_ode - eta_scaled| over " + std::to_string(n_lossy) +
            " lossy configurations, kappa/kappa_i in [20, 200]"));

    // Device values kappa = 1/(50 ns), T1 = 3 us: the loss prefactor
    // kappa/(kappa + 1/T1) realized by the loss mapping must equal 60/61.
    {
        const double kappa = 2.0e7;
        const double t1 = 3.0e-6;
        const AnalyticCase base{Formula::rectangular, kappa, 0.0, 2.5 / kappa,
                                2.5 / kappa};
        const double scale = (kappa + 1.0 / t1) / kappa;
        AnalyticCase stretched = base;
        stretched.t_close *= scale;
        stretched.t_drive *= scale;
        const double prefactor =
            apply_intrinsic_loss(base, t1).value / evaluate(stretched).value;
        res.properties.push_back(at_most(
            "loss_prefactor_at_device_values", std::abs(prefactor - 60.0 / 61.0),
            1e-12,
            "kappa = 1/(50 ns), T1 = 3 us: realized prefactor " + fmt(prefactor) +
                " vs 60/61"));
    }
    return res;
}

// ---- conservation: energy balance + phase opposition --------------------

SuiteResult suite_conservation(std::uint64_t trials, std::uint64_t seed) {
    const std::uint64_t n = trials ? trials : 12;
    GaussianRng rng(seed);
    SuiteResult res{"conservation", seed, n, {}};

    double worst_balance = 0.0;
    double worst_phase = 0.0;
    double worst_lost = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        // Matched closes (T = T'), finite families only, so the ledger
        // window [0, t_close] accounts for all delivered energy.
        RandomCase c = random_case(rng, static_cast<int>(i % 3));
        c.sched.t_close = c.pulse.t_drive;
        c.sys.kappa_on = 2.0e7 * rng.uniform(0.5, 2.0);  // around device value
        const double phase = rng.uniform(-kPi, kPi);
        IntegrationOptions opts;
        opts.phase_t1 = phase;
        const FieldTrajectory traj = integrate_field(c.sys, c.pulse, c.sched, opts);
        const EnergyLedger led = energy_ledger(c.sys, c.pulse, c.sched, traj);
        worst_balance = std::max(
            worst_balance, std::abs(led.e_tot - led.e_res - led.e_out) / led.e_tot);
        worst_phase = std::max(worst_phase, phase_opposition_check(traj, phase));
        worst_lost = std::max(worst_lost, led.e_lost / led.e_tot);
    }
    res.properties.push_back(at_most(
        "energy_balance_within_one_percent", worst_balance, 0.01,
        "worst |E_tot - E_res - E_out| / E_tot over " + std::to_string(n) +
            " lossless matched-close runs at device-scale parameters"));
    res.properties.push_back(at_most(
        "phase_opposition_on_resonance", worst_phase, 1e-6,
        "worst deviation (rad) of the reflected/transmitted output phases "
        "from opposition, random coupler phase conventions"));
    res.properties.push_back(at_most(
        "no_dissipation_when_lossless", worst_lost, 1e-30,
        "internal-loss ledger entry must vanish identically when kappa_i = 0"));
    return res;
}

// ---- detuning: evenness, peak on resonance, bandwidth --------------------

SuiteResult suite_detuning(std::uint64_t trials, std::uint64_t seed) {
    const std::uint64_t per_family = trials ? trials : 5;
    GaussianRng rng(seed);
    SuiteResult res{"detuning", seed, per_family, {}};

    double worst_even = 0.0;
    double worst_peak = -kInf;
    constexpr int kGrid = 41;  // odd: center point sits exactly on resonance
    for (int family = 0; family < 4; ++family) {
        for (std::uint64_t i = 0; i < per_family; ++i) {
            const RandomCase c = random_case(rng, family);
            const double span = 1.5 * c.sys.kappa_on;
            std::vector<double> grid(kGrid);
            for (int j = 0; j < kGrid; ++j)
                grid[j] = static_cast<double>(j - kGrid / 2) * (span / (kGrid / 2));
            ScanConfig scan{c.sys, c.pulse, c.sched, ScanMethod::ode, 0.0, 4};
            const ScanResult sr = scan_grid(scan, {{"delta_omega", grid}});
            std::vector<double> eta(kGrid);
            for (int j = 0; j < kGrid; ++j) {
                if (!sr.rows[j].ok)
                    throw std::runtime_error("detuning suite: scan row failed: " +
                                             sr.rows[j].error);
                eta[j] = sr.rows[j].efficiency;
            }
            for (int j = 0; j < kGrid / 2; ++j)
                worst_even = std::max(worst_even,
                                      std::abs(eta[j] - eta[kGrid - 1 - j]));
            const double peak = *std::max_element(eta.begin(), eta.end());
            worst_peak = std::max(worst_peak, peak - eta[kGrid / 2]);
        }
    }
    res.properties.push_back(at_most(
        "efficiency_even_in_detuning", worst_even, 1e-9,
        "worst |eta(+dw) - eta(-dw)| on 41-point grids, " +
            std::to_string(per_family) + " configurations per family"));
    res.properties.push_back(at_most(
        "efficiency_peaks_on_resonance", worst_peak, 0.0,
        "worst (max_grid eta - eta(0)); <= 0 means the grid maximum sits at "
        "zero detuning"));

    // Device check: kappa = 1/(50 ns), rising exponential tau = 2/kappa
    // chopped at T = T' = 8/kappa stays >= 0.90 for |dw|/2pi <= 1 MHz.
    {
        const double kappa = 2.0e7;
        SystemParams sys;
        sys.kappa_on = kappa;
        PulseSpec pulse;
        pulse.shape = PulseShape::exponential;
        pulse.tau = 2.0 / kappa;
        pulse.t_drive = 8.0 / kappa;
        CouplerSchedule sched;
        sched.t_close = pulse.t_drive;
        double min_eta = kInf;
        for (int j = -4; j <= 4; ++j) {
            pulse.detuning = 2.0 * kPi * 1.0e6 * (static_cast<double>(j) / 4.0);
            min_eta = std::min(
                min_eta, efficiency_numeric(sys, pulse, sched).efficiency);
        }
        res.properties.push_back(at_least(
            "device_bandwidth_megahertz", min_eta, 0.90,
            "minimum efficiency across |dw|/2pi <= 1 MHz at kappa = 1/(50 ns), "
            "tau = 2/kappa, T = 8/kappa"));
    }

    // 50%-ratio full width doubles when kappa doubles (linear scaling).
    {
        const auto half_width = [](double kappa) {
            SystemParams sys;
            sys.kappa_on = kappa;
            PulseSpec pulse;
            pulse.shape = PulseShape::exponential;
            pulse.tau = 2.0 / kappa;
            pulse.t_drive = 6.0 / kappa;
            CouplerSchedule sched;
            sched.t_close = pulse.t_drive;
            const auto eta = [&](double dw) {
                PulseSpec p = pulse;
                p.detuning = dw;
                return efficiency_numeric(sys, p, sched).efficiency;
            };
            const double eta0 = eta(0.0);
            double lo = 0.0, hi = 3.0 * kappa;
            while (hi - lo > 1e-4 * kappa) {
                const double mid = 0.5 * (lo + hi);
                (eta(mid) > 0.5 * eta0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double kappa = 2.0e7;
        const double ratio = half_width(2.0 * kappa) / half_width(kappa);
        res.properties.push_back(at_most(
            "bandwidth_proportional_to_kappa", std::abs(ratio / 2.0 - 1.0), 0.10,
            "50%-ratio width ratio W(2 kappa)/W(kappa) = " + fmt(ratio) +
                " vs 2 expected"));
    }
    return res;
}

// ---- delay: closing-delay factors ---------------------------------------

SuiteResult suite_delay(std::uint64_t trials, std::uint64_t seed) {
    const std::uint64_t n = trials ? trials : 20;
    GaussianRng rng(seed);
    SuiteResult res{"delay", seed, n, {}};

    // Drive-first (t_close > t_drive): every family decays by e^{-kappa d}.
    double worst_drive_first = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        RandomCase c = random_case(rng, static_cast<int>(i % 3));
        const double kappa = c.sys.kappa_on;
        const double delay = rng.uniform(0.1, 3.0) / kappa;
        c.closed.t_close = c.pulse.t_drive;  // matched base at T = T'
        c.sched.t_close = c.pulse.t_drive + delay;
        const double ode = efficiency_numeric(c.sys, c.pulse, c.sched).efficiency;
        const double closed =
            evaluate(c.closed).value *
            delay_factor(kappa, c.pulse, c.sched.t_close, c.pulse.t_drive);
        worst_drive_first = std::max(worst_drive_first, std::abs(ode - closed));
    }
    res.properties.push_back(at_most(
        "drive_first_exponential_factor", worst_drive_first, 1e-4,
        "worst |eta_ode - eta_matched e^{-kappa d}| over " + std::to_string(n) +
            " configurations, all finite families"));

    // Coupler-first (t_close < t_drive): exponential families admit the
    // squared-ratio closed form.
    double worst_coupler_first = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        RandomCase c = random_case(rng, 1 + static_cast<int>(i % 2));
        c.sched.t_close = c.pulse.t_drive * rng.uniform(0.3, 0.95);
        const double ode = efficiency_numeric(c.sys, c.pulse, c.sched).efficiency;
        AnalyticCase matched = c.closed;
        matched.t_close = c.pulse.t_drive;
        const double closed =
            evaluate(matched).value *
            delay_factor(c.sys.kappa_on, c.pulse, c.sched.t_close, c.pulse.t_drive);
        worst_coupler_first = std::max(worst_coupler_first, std::abs(ode - closed));
    }
    res.properties.push_back(at_most(
        "coupler_first_closed_form_factor", worst_coupler_first, 1e-4,
        "worst |eta_ode - eta_matched x ratio^2| over " + std::to_string(n) +
            " early-close exponential configurations"));
    return res;
}

// ---- statistics: estimator bias/variance Monte Carlo ---------------------

SuiteResult suite_statistics(std::uint64_t trials, std::uint64_t seed) {
    const std::size_t n_trials = trials ? static_cast<std::size_t>(trials) : 1000;
    GaussianRng rng(seed);
    SuiteResult res{"statistics", seed, n_trials, {}};

    const double t = 2e-9;  // sample spacing
    const std::size_t n_sig = 400, n_noise = 500;
    const double sigma = 1.3;

    // Deterministic quadrature signal for the window under test.
    std::vector<double> is(n_sig), qs(n_sig);
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < n_sig; ++k) {
        is[k] = 3.0 * std::sin(0.01 * static_cast<double>(k)) + 0.5;
        qs[k] = 2.0 * std::cos(0.013 * static_cast<double>(k)) - 0.25;
        sum_sq += is[k] * is[k] + qs[k] * qs[k];
    }
    const double e_true = t * sum_sq;

    const auto noise_window_energy = [&](double sig) {
        double e = 0.0;
        for (std::size_t j = 0; j < n_noise; ++j) {
            const double x = sig * rng.next();
            const double y = sig * rng.next();
            e += x * x + y * y;
        }
        return t * e;
    };
    const auto make_noise = [&](double e_n) {
        NoiseEstimate ne;
        ne.value = e_n;
        ne.variance = e_n * e_n / static_cast<double>(n_noise);
        ne.n_points = n_noise;
        return ne;
    };

    std::vector<double> e_sig_v(n_trials), e_ns_v(n_trials), e_n_v(n_trials);
    for (std::size_t m = 0; m < n_trials; ++m) {
        double es = 0.0;
        for (std::size_t k = 0; k < n_sig; ++k) {
            const double x = is[k] + sigma * rng.next();
            const double y = qs[k] + sigma * rng.next();
            es += x * x + y * y;
        }
        e_sig_v[m] = t * es;
        e_n_v[m] = noise_window_energy(sigma);
        e_ns_v[m] = noise_subtract(e_sig_v[m], n_sig, make_noise(e_n_v[m])).value;
    }

    res.properties.push_back(at_most(
        "noise_subtraction_unbiased", z_score(e_ns_v, e_true), 3.0,
        "|mean(E_NS) - E_true| in standard errors, " + std::to_string(n_trials) +
            " trials"));

    // Predicted variances from the true moments (sigma_x = sigma_y = sigma).
    const double s2 = sigma * sigma, s4 = s2 * s2;
    const double var_sig_pred =
        4.0 * t * t * s2 * sum_sq + 4.0 * static_cast<double>(n_sig) * t * t * s4;
    const double var_n_pred = 4.0 * static_cast<double>(n_noise) * t * t * s4;
    const double ratio_sn =
        static_cast<double>(n_sig) / static_cast<double>(n_noise);
    const double var_ns_pred = var_sig_pred + ratio_sn * ratio_sn * var_n_pred;

    res.properties.push_back(at_most(
        "window_energy_variance",
        std::abs(var_of(e_sig_v) / var_sig_pred - 1.0), 0.15,
        "relative deviation of var(E_sig) from its closed form"));
    res.properties.push_back(at_most(
        "subtracted_energy_variance",
        std::abs(var_of(e_ns_v) / var_ns_pred - 1.0), 0.15,
        "relative deviation of var(E_NS) from its closed form"));
    res.properties.push_back(at_most(
        "noise_energy_variance", std::abs(var_of(e_n_v) / var_n_pred - 1.0), 0.15,
        "relative deviation of var(E_N) from its closed form"));

    // Absorption experiment: strong release window, weak reflection window,
    // shared noise estimate; empirical spread vs the propagated sigma.
    {
        std::vector<double> r(n_sig), f(n_sig);
        for (std::size_t k = 0; k < n_sig; ++k) {
            r[k] = 5.0 * std::exp(-1.5 * static_cast<double>(k) /
                                  static_cast<double>(n_sig));
            f[k] = 0.0779 * r[k];
        }
        const auto window = [&](const std::vector<double>& amp) {
            double e = 0.0;
            for (std::size_t k = 0; k < n_sig; ++k) {
                const double x = amp[k] + sigma * rng.next();
                const double y = sigma * rng.next();
                e += x * x + y * y;
            }
            return t * e;
        };
        std::vector<double> abs_v(n_trials), sig_v(n_trials);
        for (std::size_t m = 0; m < n_trials; ++m) {
            const NoiseEstimate ne = make_noise(noise_window_energy(sigma));
            const EnergyEstimate rel = noise_subtract(window(r), n_sig, ne);
            const EnergyEstimate refl = noise_subtract(window(f), n_sig, ne);
            const auto [a, s] = absorption_uncertainty(rel, refl, ne);
            abs_v[m] = a;
            sig_v[m] = s;
        }
        res.properties.push_back(at_most(
            "absorption_sigma_consistent",
            std::abs(std::sqrt(var_of(abs_v)) / mean_of(sig_v) - 1.0), 0.15,
            "empirical std of the absorption estimate vs the mean propagated "
            "sigma, shared-noise subtraction"));
    }

    // Subtraction adds variance; the excess scales as sigma^4.
    {
        const std::vector<double> sweep{0.7, 1.4, 2.8, 5.6};
        std::vector<double> log_s, log_excess;
        double min_rel_excess = kInf;
        for (double sg : sweep) {
            std::vector<double> raw(n_trials), sub(n_trials);
            for (std::size_t m = 0; m < n_trials; ++m) {
                double e = 0.0;
                for (std::size_t k = 0; k < 2 * n_sig; ++k) {
                    const double x = sg * rng.next();
                    e += x * x;
                }
                raw[m] = t * e;
                sub[m] =
                    noise_subtract(raw[m], n_sig, make_noise(noise_window_energy(sg)))
                        .value;
            }
            const double excess = var_of(sub) - var_of(raw);
            min_rel_excess = std::min(min_rel_excess, excess / var_of(raw));
            log_s.push_back(std::log(sg));
            log_excess.push_back(std::log(excess));
        }
        const double xm = mean_of(log_s), ym = mean_of(log_excess);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t j = 0; j < log_s.size(); ++j) {
            sxy += (log_s[j] - xm) * (log_excess[j] - ym);
            sxx += (log_s[j] - xm) * (log_s[j] - xm);
        }
        const double slope = sxy / sxx;
        res.properties.push_back(at_least(
            "subtraction_variance_ordering", min_rel_excess, 0.0,
            "min over the sigma sweep of (var(E_NS) - var(E_sig))/var(E_sig); "
            "subtraction never reduces variance"));
        res.properties.push_back(at_most(
            "extra_variance_quartic_in_sigma", std::abs(slope - 4.0), 0.3,
            "power-law exponent of the excess variance across sigma in "
            "[0.7, 5.6]: slope = " + fmt(slope)));
    }

    // Weighted-sum moment identities for S = sum w g and Z = sum w g^2.
    {
        const std::size_t n_w = 300;
        const double sw_sigma = 1.7;
        std::vector<double> w(n_w);
        double w_sum = 0.0, w2_sum = 0.0;
        for (std::size_t k = 0; k < n_w; ++k) {
            w[k] = rng.uniform(-1.0, 2.0);
            w_sum += w[k];
            w2_sum += w[k] * w[k];
        }
        std::vector<double> s1(n_trials), s2v(n_trials), s1_sq(n_trials),
            s2_sq(n_trials);
        for (std::size_t m = 0; m < n_trials; ++m) {
            double a = 0.0, b = 0.0;
            for (std::size_t k = 0; k < n_w; ++k) {
                const double g = sw_sigma * rng.next();
                a += w[k] * g;
                b += w[k] * g * g;
            }
            s1[m] = a;
            s2v[m] = b;
            s1_sq[m] = a * a;
            s2_sq[m] = b * b;
        }
        const double v2 = sw_sigma * sw_sigma;
        const double worst = std::max(
            {z_score(s1, 0.0), z_score(s2v, v2 * w_sum),
             z_score(s1_sq, v2 * w2_sum),
             z_score(s2_sq, 2.0 * v2 * v2 * w2_sum + v2 * v2 * w_sum * w_sum)});
        res.properties.push_back(at_most(
            "weighted_sum_moments", worst, 3.0,
            "worst z-score of the four weighted-sum moment identities, "
            "random weights in [-1, 2]"));
    }

    // Sampled central moments vs the closed form for p = 1..6.
    {
        const std::size_t n_draws = std::clamp<std::size_t>(
            1000 * n_trials, 100000, 1000000);
        const double gm_sigma = 0.9;
        std::vector<double> sums(7, 0.0), sums_sq(7, 0.0);
        for (std::size_t m = 0; m < n_draws; ++m) {
            const double g = gm_sigma * rng.next();
            double p = 1.0;
            for (unsigned j = 1; j <= 6; ++j) {
                p *= g;
                sums[j] += p;
                sums_sq[j] += p * p;
            }
        }
        double worst = 0.0;
        for (unsigned j = 1; j <= 6; ++j) {
            const double m1 = sums[j] / static_cast<double>(n_draws);
            const double var =
                sums_sq[j] / static_cast<double>(n_draws) - m1 * m1;
            const double se = std::sqrt(var / static_cast<double>(n_draws));
            worst = std::max(worst, std::abs(m1 - gaussian_moment(j, gm_sigma)) / se);
        }
        res.properties.push_back(at_most(
            "gaussian_moments_sampled", worst, 3.0,
            "worst z-score of sampled <g^p> vs (p-1)!! sigma^p for p <= 6, " +
                std::to_string(n_draws) + " draws"));
    }

    // The measured-moment variance form and the sigma-form are the same
    // polynomial; check the substitution to near machine precision.
    {
        double worst = 0.0;
        for (int cfg = 0; cfg < 5; ++cfg) {
            const std::size_t ns = 50 + static_cast<std::size_t>(
                                            rng.uniform(0.0, 750.0));
            const std::size_t nn = 100 + static_cast<std::size_t>(
                                             rng.uniform(0.0, 900.0));
            const double sg = rng.uniform(0.3, 3.0);
            double ssq = 0.0;
            for (std::size_t k = 0; k < ns; ++k) {
                const double i_k = rng.uniform(-4.0, 4.0);
                const double q_k = rng.uniform(-4.0, 4.0);
                ssq += i_k * i_k + q_k * q_k;
            }
            const double e_sig_true = t * ssq;
            const double e_n_mean =
                2.0 * static_cast<double>(nn) * t * sg * sg;
            const double e_form =
                (2.0 / static_cast<double>(nn)) * e_sig_true * e_n_mean +
                static_cast<double>(ns) /
                    (static_cast<double>(nn) * static_cast<double>(nn)) *
                    e_n_mean * e_n_mean;
            const double sigma_form =
                4.0 * t * t * sg * sg * ssq +
                2.0 * static_cast<double>(ns) * t * t *
                    (sg * sg * sg * sg + sg * sg * sg * sg);
            worst = std::max(worst, std::abs(e_form - sigma_form) / sigma_form);
        }
        res.properties.push_back(at_most(
            "variance_forms_agree", worst, 1e-10,
            "measured-moment window variance vs the sigma-form expression, "
            "5 random configurations"));
    }

    // Photon-number fit: exact truncated Poisson and a 1% perturbation.
    {
        std::vector<double> pops(13);
        double pmf = std::exp(-2.0);
        for (std::size_t k = 0; k < pops.size(); ++k) {
            pops[k] = pmf;
            pmf *= 2.0 / static_cast<double>(k + 1);
        }
        const double fit_exact = poisson_fit(pops);
        res.properties.push_back(at_most(
            "poisson_fit_exact_recovery", std::abs(fit_exact - 2.0), 1e-3,
            "fit to the exact mean-2 distribution truncated at n = 12"));

        std::vector<double> bent = pops;
        for (double& p : bent) p *= 1.0 + rng.uniform(-0.01, 0.0);
        const double fit_bent = poisson_fit(bent);
        res.properties.push_back(at_most(
            "poisson_fit_perturbed_recovery", std::abs(fit_bent - 2.0) / 2.0,
            0.05, "relative error after a 1% amplitude perturbation"));
    }
    return res;
}

SuiteResult run_one(const std::string& name, std::uint64_t trials,
                    std::uint64_t seed) {
    if (name == "analytic") return suite_analytic(trials, seed);
    if (name == "conservation") return suite_conservation(trials, seed);
    if (name == "detuning") return suite_detuning(trials, seed);
    if (name == "delay") return suite_delay(trials, seed);
    if (name == "statistics") return suite_statistics(trials, seed);
    throw std::invalid_argument("run_suites: unknown suite '" + name + "'");
}

}  // namespace

std::vector<SuiteResult> run_suites(const std::string& suite,
                                    std::uint64_t trials, std::uint64_t seed) {
    static const std::vector<std::string> kOrder = {
        "analytic", "conservation", "detuning", "delay", "statistics"};
    std::vector<std::string> wanted;
    if (suite == "all")
        wanted = kOrder;
    else
        wanted.push_back(suite);
    std::vector<SuiteResult> out;
    out.reserve(wanted.size());
    std::uint64_t offset = 0;
    for (const auto& name : wanted)
        out.push_back(run_one(name, trials, seed + offset++));
    return out;
}

std::string to_json(const std::vector<SuiteResult>& results) {
    nlohmann::ordered_json root;
    root["suites"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& s : results) {
        nlohmann::ordered_json js;
        js["suite"] = s.suite;
        js["seed"] = s.seed;
        js["trials"] = s.trials;
        js["passed"] = s.passed();
        js["properties"] = nlohmann::ordered_json::array();
        for (const auto& p : s.properties) {
            nlohmann::ordered_json jp;
            jp["name"] = p.name;
            jp["passed"] = p.passed;
            jp["measured"] = p.measured;
            jp["bound"] = p.bound;
            jp["detail"] = p.detail;
            js["properties"].push_back(jp);
        }
        root["suites"].push_back(js);
        all = all && s.passed();
    }
    root["all_passed"] = all;
    return root.dump(2);
}

}  // namespace pulsecap::validation
