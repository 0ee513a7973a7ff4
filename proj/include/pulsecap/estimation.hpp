// Window energies, noise subtraction and the uncertainty algebra for the
// measured efficiencies, plus the photon-number fit and the Gaussian moment
// identities the variance formulas rest on.
#pragma once

#include <cstdint>
#include <vector>

#include "pulsecap/signalsim.hpp"

namespace pulsecap {

// Noise-floor energy over a signal-free window: E_N = dt * sum(x^2 + y^2),
// with variance corr_sq * E_N^2 / N.  The corr factors carry the record
// filter's noise-sample correlation into the variance algebra; they are 1
// for white noise, where the formulas take their textbook form.
struct NoiseEstimate {
    double value = 0.0;
    double variance = 0.0;
    std::uint64_t n_points = 0;
    double corr_beat = 1.0;  // inflation of signal x noise beat terms
    double corr_sq = 1.0;    // inflation of noise-only terms
};

// Noise-subtracted window energy with its variance.
struct EnergyEstimate {
    double value = 0.0;
    double variance = 0.0;
    std::uint64_t n_points = 0;  // samples in the signal window
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct EfficiencyReport {
    double absorption = 0.0;
    double absorption_sigma = 0.0;
    double storage = 0.0;
    double storage_sigma = 0.0;
    double receiver = 0.0;
    double receiver_sigma = 0.0;
};

// Raw (not yet noise-subtracted) energy dt * sum |V|^2 over [t0, t1) and the
// number of samples in the window.  Throws when the window lies outside the
// record or holds fewer than 2 samples.
[[nodiscard]] std::pair<double, std::uint64_t> window_energy(const ProcessedRecord& rec,
                                                             double t0, double t1);

// Noise-floor estimate over a pre-drive window [t0, t1).
[[nodiscard]] NoiseEstimate noise_energy(const ProcessedRecord& rec, double t0, double t1);

// Unbiased noise subtraction: E^NS = E_sig - (N_S/N_N) E_N, with variance
//   corr_beat * (2/N_N) E^NS E_N + corr_sq * N_S (N_S + N_N) / N_N^3 * E_N^2
// (clamped at 0 when a strongly negative measured E^NS drives it below).
[[nodiscard]] EnergyEstimate noise_subtract(double e_sig, std::uint64_t n_sig,
                                            const NoiseEstimate& noise);

// Absorption efficiency E_abs/(E_abs + E_ref) of two noise-subtracted window
// energies sharing one noise estimate, with its propagated uncertainty:
//   sigma^2 = var(E_abs) (E_ref/E_tot^2)^2 + var(E_ref) (E_abs/E_tot^2)^2
//           + var(E_N) ((N_ref E_abs - N_abs E_ref) / (N_N E_tot^2))^2
// where var(E_abs/ref) are the pre-subtraction window variances
// (2/N_N) E^NS E_N + (N_S/N_N^2) E_N^2 and E_tot = E_abs + E_ref.
// Throws when E_tot <= 0.
[[nodiscard]] std::pair<double, double> absorption_uncertainty(const EnergyEstimate& e_abs,
                                                               const EnergyEstimate& e_ref,
                                                               const NoiseEstimate& noise);

// Storage = (E_on/E_off) * absorption and receiver = sqrt(E_on/E_off) *
// absorption, with first-order error propagation treating the three inputs
// as independent.  E_on: total output energy with the coupler cycling;
// E_off: with the coupler closed throughout.
[[nodiscard]] EfficiencyReport storage_receiver(const EnergyEstimate& e_on,
                                                const EnergyEstimate& e_off,
                                                double absorption,
                                                double absorption_sigma);

// Least-squares fit of a Poisson distribution to measured number-state
// populations p[0..n-1]: minimizes sum_n (P_n(mean) - p_n)^2 over mean >= 0
// (coarse grid + golden-section refinement, 1e-8 tolerance).  Optional
// per-entry weights.
[[nodiscard]] double poisson_fit(const std::vector<double>& populations,
                                 const std::vector<double>& weights = {});

// Central Gaussian moment <g^p> = (p-1)!! sigma^p for even p, 0 for odd p.
[[nodiscard]] double gaussian_moment(unsigned p, double sigma);

}  // namespace pulsecap
