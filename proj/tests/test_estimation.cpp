// Window energies, unbiased noise subtraction, uncertainty propagation, the
// photon-number fit, and the Gaussian moment table.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "pulsecap/estimation.hpp"

using namespace pulsecap;

namespace {

// Minimal record with a hand-set sample vector.
ProcessedRecord make_record(std::vector<std::complex<double>> v, double dt,
                            double t0, double corr_beat = 1.0,
                            double corr_sq = 1.0) {
    ProcessedRecord rec;
    rec.t0 = t0;
    rec.dt = dt;
    rec.v = std::move(v);
    rec.energy.assign(rec.v.size(), 0.0);
    rec.noise_corr_beat = corr_beat;
    rec.noise_corr_sq = corr_sq;
    return rec;
}

}  // namespace

TEST_CASE("window energy sums |V|^2 dt over a half-open interval") {
    const ProcessedRecord rec = make_record(
        {{1.0, 0.0}, {0.0, 2.0}, {3.0, 0.0}, {2.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}},
        0.5, 0.0);

    const auto [e, n] = window_energy(rec, 0.5, 2.0);
    CHECK(n == 3);  // samples at t = 0.5, 1.0, 1.5
    CHECK(e == doctest::Approx(0.5 * (4.0 + 9.0 + 4.0)).epsilon(1e-15));

    // The interval is [t0, t1): the sample at t = 2.0 stays out above but
    // comes in when the end moves past it.
    const auto [e2, n2] = window_energy(rec, 0.5, 2.1);
    CHECK(n2 == 4);
    CHECK(e2 == doctest::Approx(0.5 * (4.0 + 9.0 + 4.0 + 1.0)).epsilon(1e-15));

    CHECK_THROWS_AS((void)window_energy(rec, 2.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)window_energy(rec, 5.0, 6.0), std::invalid_argument);
    CHECK_THROWS_AS((void)window_energy(rec, 0.0, 0.4),  // single sample
                    std::invalid_argument);
}

TEST_CASE("noise estimate carries the record's correlation factors") {
    const ProcessedRecord rec = make_record(
        {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}, 0.25, 0.0, 1.5, 1.2);
    const NoiseEstimate est = noise_energy(rec, 0.0, 1.0);
    CHECK(est.n_points == 4);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(est.corr_beat == 1.5);
    CHECK(est.corr_sq == 1.2);
    // var = corr_sq * E_N^2 / N.
    CHECK(est.variance == doctest::Approx(1.2 * 1.0 / 4.0).epsilon(1e-15));
}

TEST_CASE("noise subtraction: unbiased value and frozen variance algebra") {
    NoiseEstimate noise;
    noise.value = 2.0;
    noise.n_points = 400;
    noise.variance = noise.value * noise.value / 400.0;

    const EnergyEstimate est = noise_subtract(10.0, 100, noise);
    CHECK(est.value == doctest::Approx(10.0 - 0.25 * 2.0).epsilon(1e-15));
    // var = (2/N_N) E^NS E_N + N_S (N_S + N_N) / N_N^3 * E_N^2.
    const double expect = (2.0 / 400.0) * 9.5 * 2.0 +
                          100.0 * 500.0 / (400.0 * 400.0 * 400.0) * 4.0;
    CHECK(est.variance == doctest::Approx(expect).epsilon(1e-14));

    // Correlated-noise records scale the two terms independently.
    noise.corr_beat = 2.0;
    noise.corr_sq = 3.0;
    const EnergyEstimate corr = noise_subtract(10.0, 100, noise);
    CHECK(corr.value == est.value);
    CHECK(corr.variance ==
          doctest::Approx(2.0 * (2.0 / 400.0) * 9.5 * 2.0 +
                          3.0 * 100.0 * 500.0 / (400.0 * 400.0 * 400.0) * 4.0)
              .epsilon(1e-14));

    // A strongly negative estimate would drive the variance negative; it is
    // clamped instead.
    noise.corr_beat = 1.0;
    noise.corr_sq = 1.0;
    const EnergyEstimate clamped = noise_subtract(0.1, 100, noise);
    CHECK(clamped.value == doctest::Approx(-0.4).epsilon(1e-12));
    CHECK(clamped.variance == 0.0);

    CHECK_THROWS_AS((void)noise_subtract(1.0, 0, noise), std::invalid_argument);
    noise.value = -1.0;
    CHECK_THROWS_AS((void)noise_subtract(1.0, 10, noise), std::invalid_argument);
}

TEST_CASE("absorption ratio: complementary windows and zero-noise limit") {
    NoiseEstimate noise;
    noise.value = 0.5;
    noise.n_points = 900;
    noise.variance = noise.value * noise.value / 900.0;

    EnergyEstimate release;
    release.value = 9.0;
    release.n_points = 200;
    EnergyEstimate reflect;
    reflect.value = 1.0;
    reflect.n_points = 180;

    const auto [eta, sigma] = absorption_uncertainty(release, reflect, noise);
    CHECK(eta == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(sigma > 0.0);

    // Swapping the windows complements the ratio and keeps the uncertainty.
    const auto [eta_swap, sigma_swap] =
        absorption_uncertainty(reflect, release, noise);
    CHECK(eta_swap == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(sigma_swap == doctest::Approx(sigma).epsilon(1e-12));

    // No noise, no uncertainty.
    NoiseEstimate clean;
    clean.value = 0.0;
    clean.n_points = 900;
    clean.variance = 0.0;
    const auto [eta2, sigma2] = absorption_uncertainty(release, reflect, clean);
    CHECK(eta2 == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(sigma2 == 0.0);

    EnergyEstimate zero;
    zero.value = -1.0;
    zero.n_points = 10;
    CHECK_THROWS_AS((void)absorption_uncertainty(zero, reflect, noise),
                    std::invalid_argument);
}

TEST_CASE("absorption sigma matches first-order propagation term by term") {
    NoiseEstimate noise;
    noise.value = 0.8;
    noise.n_points = 700;
    noise.corr_beat = 1.4;
    noise.corr_sq = 1.9;
    noise.variance = noise.corr_sq * noise.value * noise.value / 700.0;

    EnergyEstimate e_abs;
    e_abs.value = 6.0;
    e_abs.n_points = 260;
    EnergyEstimate e_ref;
    e_ref.value = 0.7;
    e_ref.n_points = 150;

    const auto [eta, sigma] = absorption_uncertainty(e_abs, e_ref, noise);
    CHECK(eta == doctest::Approx(6.0 / 6.7).epsilon(1e-15));

    // Rebuild the propagated variance from its definition: window variances
    // (beat + noise-only terms) through the partial derivatives of
    // eta(E_abs, E_ref, E_N) = (E_abs - r_a E_N) / (E_abs + E_ref - (r_a + r_r) E_N)
    // evaluated at the unsubtracted inputs; the shared-noise lever is the
    // window-length mismatch.
    const double nn = 700.0;
    const double var_a = noise.corr_beat * (2.0 / nn) * e_abs.value * noise.value +
                         noise.corr_sq * 260.0 / (nn * nn) * noise.value * noise.value;
    const double var_r = noise.corr_beat * (2.0 / nn) * e_ref.value * noise.value +
                         noise.corr_sq * 150.0 / (nn * nn) * noise.value * noise.value;
    const double tot = e_abs.value + e_ref.value;
    const double d_a = e_ref.value / (tot * tot);
    const double d_r = e_abs.value / (tot * tot);
    const double lever =
        (150.0 * e_abs.value - 260.0 * e_ref.value) / nn / (tot * tot);
    const double var = var_a * d_a * d_a + var_r * d_r * d_r +
                       noise.variance * lever * lever;
    CHECK(sigma == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("storage and receiver efficiencies from the on/off energy ratio") {
    EnergyEstimate e_on;
    e_on.value = 0.961;
    EnergyEstimate e_off;
    e_off.value = 1.0;

    // Noise-free ratio: only the absorption uncertainty propagates.
    const EfficiencyReport rep = storage_receiver(e_on, e_off, 0.9941, 6.0e-4);
    CHECK(rep.absorption == 0.9941);
    CHECK(rep.storage == doctest::Approx(0.961 * 0.9941).epsilon(1e-14));
    CHECK(rep.receiver ==
          doctest::Approx(std::sqrt(0.961) * 0.9941).epsilon(1e-14));
    CHECK(rep.storage_sigma == doctest::Approx(0.961 * 6.0e-4).epsilon(1e-12));
    CHECK(rep.receiver_sigma ==
          doctest::Approx(std::sqrt(0.961) * 6.0e-4).epsilon(1e-12));

    CHECK_THROWS_AS(
        (void)storage_receiver(EnergyEstimate{}, e_off, 0.5, 1e-3),
        std::invalid_argument);
}

TEST_CASE("storage/receiver sigmas equal first-order propagation") {
    EnergyEstimate e_on;
    e_on.value = 0.93;
    e_on.variance = 2.1e-5;
    EnergyEstimate e_off;
    e_off.value = 1.07;
    e_off.variance = 3.4e-5;
    const double absorption = 0.989;
    const double a_sigma = 7.0e-4;

    const EfficiencyReport rep =
        storage_receiver(e_on, e_off, absorption, a_sigma);

    const double ratio = e_on.value / e_off.value;
    const double rel_var = e_on.variance / (e_on.value * e_on.value) +
                           e_off.variance / (e_off.value * e_off.value);
    // S = ratio * absorption: var(S) = S^2 (rel_var + (sa/a)^2).
    const double s = ratio * absorption;
    const double var_s =
        s * s * (rel_var + a_sigma * a_sigma / (absorption * absorption));
    CHECK(rep.storage == doctest::Approx(s).epsilon(1e-15));
    CHECK(rep.storage_sigma == doctest::Approx(std::sqrt(var_s)).epsilon(1e-12));

    // R = sqrt(ratio) * absorption: the ratio's relative variance enters
    // quartered through the square root.
    const double r = std::sqrt(ratio) * absorption;
    const double var_r =
        r * r * (0.25 * rel_var + a_sigma * a_sigma / (absorption * absorption));
    CHECK(rep.receiver == doctest::Approx(r).epsilon(1e-15));
    CHECK(rep.receiver_sigma == doctest::Approx(std::sqrt(var_r)).epsilon(1e-12));
}

TEST_CASE("photon-number fit recovers an exact truncated distribution") {
    std::vector<double> pops(13);
    double pmf = std::exp(-2.0);
    for (std::size_t n = 0; n < pops.size(); ++n) {
        pops[n] = pmf;
        pmf *= 2.0 / static_cast<double>(n + 1);
    }
    CHECK(poisson_fit(pops) == doctest::Approx(2.0).epsilon(1e-6));

    // A zero weight masks a corrupted entry entirely.
    std::vector<double> bent = pops;
    bent[3] *= 0.5;
    std::vector<double> weights(13, 1.0);
    weights[3] = 0.0;
    CHECK(poisson_fit(bent, weights) == doctest::Approx(2.0).epsilon(1e-6));
    // Without the mask the same corruption pulls the fit away.
    CHECK(std::abs(poisson_fit(bent) - 2.0) > 1e-3);
}

TEST_CASE("photon-number fit input validation") {
    CHECK_THROWS_AS((void)poisson_fit({}), std::invalid_argument);
    CHECK_THROWS_AS((void)poisson_fit({0.5, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS((void)poisson_fit({0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS((void)poisson_fit({0.9, 0.3}), std::invalid_argument);
    CHECK_THROWS_AS((void)poisson_fit({0.5, 0.3}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS((void)poisson_fit({0.5, 0.3}, {1.0, -1.0}),
                    std::invalid_argument);
}

TEST_CASE("central Gaussian moments: double-factorial table") {
    CHECK(gaussian_moment(0, 3.0) == 1.0);
    CHECK(gaussian_moment(1, 3.0) == 0.0);
    CHECK(gaussian_moment(2, 3.0) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(gaussian_moment(3, 3.0) == 0.0);
    CHECK(gaussian_moment(4, 3.0) == doctest::Approx(3.0 * 81.0).epsilon(1e-15));
    CHECK(gaussian_moment(5, 3.0) == 0.0);
    CHECK(gaussian_moment(6, 2.0) == doctest::Approx(15.0 * 64.0).epsilon(1e-15));
    CHECK(gaussian_moment(8, 1.0) == doctest::Approx(105.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)gaussian_moment(2, -1.0), std::invalid_argument);
}
