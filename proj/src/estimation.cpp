#include "pulsecap/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pulsecap {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Sum |V|^2 over [t0, t1) and count the samples.
std::pair<double, std::uint64_t> window_sum(const ProcessedRecord& rec, double t0,
                                            double t1) {
    require(t1 > t0, "window: end must exceed begin");
    const double rec_end = rec.time_at(rec.size() - 1);
    require(t0 >= rec.t0 - 0.5 * rec.dt && t1 <= rec_end + rec.dt,
            "window: outside the record");
    double sum = 0.0;
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < rec.size(); ++k) {
        const double t = rec.time_at(k);
        if (t >= t0 && t < t1) {
            sum += std::norm(rec.v[k]);
            ++count;
        }
    }
    require(count >= 2, "window: fewer than 2 samples");
    return {sum, count};
}

}  // namespace

std::pair<double, std::uint64_t> window_energy(const ProcessedRecord& rec, double t0,
                                               double t1) {
    const auto [sum, count] = window_sum(rec, t0, t1);
    return {sum * rec.dt, count};
}

NoiseEstimate noise_energy(const ProcessedRecord& rec, double t0, double t1) {
    const auto [sum, count] = window_sum(rec, t0, t1);
    NoiseEstimate est;
    est.value = sum * rec.dt;
    est.n_points = count;
    est.corr_beat = rec.noise_corr_beat;
    est.corr_sq = rec.noise_corr_sq;
    est.variance = est.corr_sq * est.value * est.value / static_cast<double>(count);
    return est;
}

EnergyEstimate noise_subtract(double e_sig, std::uint64_t n_sig,
                              const NoiseEstimate& noise) {
    require(n_sig >= 1, "noise_subtract: empty signal window");
    require(noise.n_points >= 1, "noise_subtract: empty noise estimate");
    require(noise.value >= 0.0, "noise_subtract: negative noise energy");
    const double ns = static_cast<double>(n_sig);
    const double nn = static_cast<double>(noise.n_points);
    EnergyEstimate est;
    est.n_points = n_sig;
    est.value = e_sig - (ns / nn) * noise.value;
    // Two noise contributions: the beat between signal and noise in the
    // signal window, and the noise-only terms of both windows.
    const double var =
        noise.corr_beat * (2.0 / nn) * est.value * noise.value +
        noise.corr_sq * ns * (ns + nn) / (nn * nn * nn) * noise.value * noise.value;
    est.variance = std::max(0.0, var);
    return est;
}

std::pair<double, double> absorption_uncertainty(const EnergyEstimate& e_abs,
                                                 const EnergyEstimate& e_ref,
                                                 const NoiseEstimate& noise) {
    require(noise.n_points >= 1, "absorption: empty noise estimate");
    const double e_tot = e_abs.value + e_ref.value;
    require(e_tot > 0.0, "absorption: total energy must be positive");
    const double absorption = e_abs.value / e_tot;

    // Pre-subtraction window variances: the shared noise estimate enters
    // separately below, so only the per-window terms appear here.
    const double nn = static_cast<double>(noise.n_points);
    const double en = noise.value;
    const auto window_var = [&](const EnergyEstimate& e) {
        const double ns = static_cast<double>(e.n_points);
        return std::max(0.0, noise.corr_beat * (2.0 / nn) * e.value * en +
                                 noise.corr_sq * ns / (nn * nn) * en * en);
    };
    const double var_abs = window_var(e_abs);
    const double var_ref = window_var(e_ref);

    const double inv_tot2 = 1.0 / (e_tot * e_tot);
    const double n_abs = static_cast<double>(e_abs.n_points);
    const double n_ref = static_cast<double>(e_ref.n_points);
    // The shared noise estimate shifts both windows together; its lever arm
    // is the mismatch of the two window lengths.
    const double noise_lever = (n_ref * e_abs.value - n_abs * e_ref.value) / nn * inv_tot2;
    const double var = var_abs * (e_ref.value * inv_tot2) * (e_ref.value * inv_tot2) +
                       var_ref * (e_abs.value * inv_tot2) * (e_abs.value * inv_tot2) +
                       noise.variance * noise_lever * noise_lever;
    return {absorption, std::sqrt(std::max(0.0, var))};
}

EfficiencyReport storage_receiver(const EnergyEstimate& e_on,
                                  const EnergyEstimate& e_off, double absorption,
                                  double absorption_sigma) {
    require(e_on.value > 0.0 && e_off.value > 0.0,
            "storage_receiver: window energies must be positive");
    require(absorption_sigma >= 0.0, "storage_receiver: negative sigma");
    const double ratio = e_on.value / e_off.value;
    const double rel_var = e_on.variance / (e_on.value * e_on.value) +
                           e_off.variance / (e_off.value * e_off.value);

    EfficiencyReport rep;
    rep.absorption = absorption;
    rep.absorption_sigma = absorption_sigma;
    rep.storage = ratio * absorption;
    rep.storage_sigma = std::sqrt(absorption * absorption * ratio * ratio * rel_var +
                                  ratio * ratio * absorption_sigma * absorption_sigma);
    const double root = std::sqrt(ratio);
    // d(sqrt r)/dr = sqrt(r)/(2r): the ratio's relative variance enters
    // quartered for the square root.
    rep.receiver = root * absorption;
    rep.receiver_sigma =
        std::sqrt(absorption * absorption * root * root * rel_var / 4.0 +
                  root * root * absorption_sigma * absorption_sigma);
    return rep;
}

double poisson_fit(const std::vector<double>& populations,
                   const std::vector<double>& weights) {
    require(!populations.empty(), "poisson_fit: no populations");
    require(weights.empty() || weights.size() == populations.size(),
            "poisson_fit: weight/population size mismatch");
    for (double w : weights)
        require(w >= 0.0, "poisson_fit: negative weight");
    double total = 0.0;
    for (double p : populations) {
        require(p >= 0.0, "poisson_fit: negative population");
        total += p;
    }
    require(total > 0.0, "poisson_fit: all populations zero");
    require(total <= 1.0 + 1e-6, "poisson_fit: populations sum past 1");

    const std::size_t n_states = populations.size();
    const auto objective = [&](double mean) {
        double err = 0.0;
        double pmf = std::exp(-mean);  // P_0
        for (std::size_t n = 0; n < n_states; ++n) {
            if (n > 0) pmf *= mean / static_cast<double>(n);
            const double w = weights.empty() ? 1.0 : weights[n];
            const double d = pmf - populations[n];
            err += w * d * d;
        }
        return err;
    };

    // Coarse grid to bracket the global minimum, then golden-section.
    const double hi = static_cast<double>(n_states) + 10.0;
    constexpr int kGrid = 2000;
    double best = 0.0, best_err = objective(0.0);
    for (int j = 1; j <= kGrid; ++j) {
        const double mu = hi * static_cast<double>(j) / kGrid;
        const double err = objective(mu);
        if (err < best_err) {
            best_err = err;
            best = mu;
        }
    }
    const double lo_b = std::max(0.0, best - hi / kGrid);
    const double hi_b = std::min(hi, best + hi / kGrid);
    return detail::golden_max([&](double mu) { return -objective(mu); }, lo_b, hi_b,
                              1e-8);
}

double gaussian_moment(unsigned p, double sigma) {
    require(sigma >= 0.0, "gaussian_moment: sigma must be non-negative");
    if (p % 2 == 1) return 0.0;
    double moment = 1.0;
    for (unsigned k = p; k > 1; k -= 2) moment *= static_cast<double>(k - 1);
    return moment * std::pow(sigma, static_cast<double>(p));
}

}  // namespace pulsecap
