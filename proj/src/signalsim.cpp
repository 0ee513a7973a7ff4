#include "pulsecap/signalsim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "gaussian_rng.hpp"

namespace pulsecap {

namespace {

using detail::GaussianRng;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

constexpr double kTwoPi = 2.0 * kPi;

// FFTW's planner is not thread-safe; plan creation/destruction serializes
// behind this lock.  fftw_execute on distinct plans is safe concurrently.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

void fft_lowpass(std::vector<std::complex<double>>& v, double dt, double cutoff) {
    const std::size_t n = v.size();
    if (n < 2) return;
    std::vector<std::complex<double>> freq(n);
    auto* in = reinterpret_cast<fftw_complex*>(v.data());
    auto* out = reinterpret_cast<fftw_complex*>(freq.data());
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD,
                               FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), out, in, FFTW_BACKWARD,
                               FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    const double df = 1.0 / (static_cast<double>(n) * dt);
    for (std::size_t j = 0; j < n; ++j) {
        const double f = (j <= n / 2 ? static_cast<double>(j)
                                     : static_cast<double>(j) - static_cast<double>(n)) *
                         df;
        if (std::abs(f) > cutoff) freq[j] = 0.0;
    }
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& s : v) s *= inv_n;
}

std::vector<double> sinc_kernel(double dt, double cutoff, int taps) {
    const int mid = (taps - 1) / 2;
    const double fc = cutoff * dt;  // cycles per sample
    std::vector<double> kernel(static_cast<std::size_t>(taps));
    double sum = 0.0;
    for (int m = 0; m < taps; ++m) {
        const double x = static_cast<double>(m - mid);
        const double arg = kTwoPi * fc * x;
        const double sinc = x == 0.0 ? 1.0 : std::sin(arg) / arg;
        // Blackman window keeps the stopband floor below ~-58 dB.
        const double w = 0.42 - 0.5 * std::cos(kTwoPi * m / (taps - 1)) +
                         0.08 * std::cos(2.0 * kTwoPi * m / (taps - 1));
        kernel[static_cast<std::size_t>(m)] = sinc * w;
        sum += sinc * w;
    }
    for (auto& h : kernel) h /= sum;  // unity gain at DC
    return kernel;
}

void sinc_lowpass(std::vector<std::complex<double>>& v, const std::vector<double>& kernel) {
    const int taps = static_cast<int>(kernel.size());
    const int mid = (taps - 1) / 2;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
    std::vector<std::complex<double>> out(v.size());
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (int m = 0; m < taps; ++m) {
            const std::ptrdiff_t j = k + mid - m;
            if (j >= 0 && j < n) acc += kernel[static_cast<std::size_t>(m)] * v[j];
        }
        out[static_cast<std::size_t>(k)] = acc;
    }
    v = std::move(out);
}

// Variance-inflation factors of the filter's noise autocorrelation rho(m):
// sum_m rho(m) for beat terms and sum_m rho(m)^2 for noise-only terms.
std::pair<double, double> correlation_factors(const std::vector<double>& kernel) {
    const std::ptrdiff_t taps = static_cast<std::ptrdiff_t>(kernel.size());
    double a0 = 0.0;
    for (double h : kernel) a0 += h * h;
    double sum = 0.0, sum_sq = 0.0;
    for (std::ptrdiff_t m = 1 - taps; m < taps; ++m) {
        double a = 0.0;
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, -m); j < taps && j + m < taps; ++j)
            a += kernel[static_cast<std::size_t>(j)] * kernel[static_cast<std::size_t>(j + m)];
        const double rho = a / a0;
        sum += rho;
        sum_sq += rho * rho;
    }
    return {sum, sum_sq};
}

double quantize(double x, double step, double full_scale) {
    const double clipped = std::clamp(x, -full_scale, full_scale);
    return step * std::round(clipped / step);
}

}  // namespace

void AcquisitionConfig::validate() const {
    require(sample_rate > 0.0, "acquisition: sample_rate must be positive");
    require(f_sb > 0.0 && f_sb < 0.5 * sample_rate,
            "acquisition: f_sb must lie inside the Nyquist band");
    require(q_scale > 0.0, "acquisition: q_scale must be positive");
    require(noise_sigma >= 0.0, "acquisition: noise_sigma must be non-negative");
    require(n_averages >= 1.0, "acquisition: n_averages must be >= 1");
    require(literal_averages <= 100000,
            "acquisition: literal_averages too large");
    require(pre_drive >= 0.0, "acquisition: pre_drive must be non-negative");
    require(lowpass_hz > 0.0, "acquisition: lowpass_hz must be positive");
    require(sinc_taps >= 3 && sinc_taps % 2 == 1,
            "acquisition: sinc_taps must be odd and >= 3");
    require(adc_bits >= 0 && adc_bits <= 24,
            "acquisition: adc_bits must be in [0, 24]");
    require(adc_bits == 0 || adc_full_scale > 0.0,
            "acquisition: adc_full_scale must be positive");
    require(std::isfinite(q_correction), "acquisition: q_correction must be finite");
    require(spur_amplitude >= 0.0, "acquisition: spur_amplitude must be non-negative");
}

RawRecord synthesize(const FieldTrajectory& traj, const AcquisitionConfig& cfg) {
    cfg.validate();
    require(traj.size() >= 2, "synthesize: trajectory too short");
    const double traj_end = traj.times.back();
    const double end = cfg.duration > 0.0 ? cfg.duration : traj_end;
    require(end <= traj_end * (1.0 + 1e-9),
            "synthesize: record extends past the trajectory");

    RawRecord rec;
    rec.config = cfg;
    rec.config.duration = end;  // resolved
    rec.dt = 1.0 / cfg.sample_rate;
    rec.t0 = -cfg.pre_drive;
    const double span = end - rec.t0;
    const double n_d = std::floor(span / rec.dt * (1.0 + 1e-12)) + 1.0;
    require(n_d <= 5e7, "synthesize: record too long");
    const std::size_t n = static_cast<std::size_t>(n_d);
    rec.i_samples.resize(n);
    rec.q_samples.resize(n);

    // Baseband output signal on the ADC grid: zero before t = 0, linear
    // interpolation of the trajectory after.
    const auto baseband = [&](double t) -> std::complex<double> {
        if (t < 0.0) return 0.0;
        const double pos = t / traj.dt;
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= traj.size()) return traj.v_out.back();
        const double frac = pos - static_cast<double>(k);
        return traj.v_out[k] * (1.0 - frac) + traj.v_out[k + 1] * frac;
    };

    const std::uint32_t reps = std::max<std::uint32_t>(1, cfg.literal_averages);
    // Averaging is either literal (reps > 1, full-sigma noise each rep) or
    // modeled as a single record with sigma / sqrt(n_averages).
    const double sigma = cfg.literal_averages > 0
                             ? cfg.noise_sigma
                             : cfg.noise_sigma / std::sqrt(cfg.n_averages);
    GaussianRng rng(cfg.seed);
    const double step = cfg.adc_bits > 0
                            ? 2.0 * cfg.adc_full_scale /
                                  (std::exp2(cfg.adc_bits) - 1.0)
                            : 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        const double t = rec.time_at(k);
        std::complex<double> s = baseband(t) * std::polar(1.0, -kTwoPi * cfg.f_sb * t);
        if (cfg.spur_amplitude > 0.0)
            s += cfg.spur_amplitude * std::polar(1.0, -kTwoPi * cfg.spur_freq * t);
        // Analog Q-path gain hits signal and noise alike; the DC offset is a
        // digitizer artifact and lands after the gain.
        const double i_sig = s.real();
        const double q_sig = cfg.q_scale * s.imag();
        double i_acc = 0.0, q_acc = 0.0;
        for (std::uint32_t r = 0; r < reps; ++r) {
            double i_v = i_sig + cfg.dc_offset.real();
            double q_v = q_sig + cfg.dc_offset.imag();
            if (sigma > 0.0) {
                i_v += sigma * rng.next();
                q_v += cfg.q_scale * sigma * rng.next();
            }
            if (step > 0.0) {
                i_v = quantize(i_v, step, cfg.adc_full_scale);
                q_v = quantize(q_v, step, cfg.adc_full_scale);
            }
            i_acc += i_v;
            q_acc += q_v;
        }
        rec.i_samples[k] = i_acc / static_cast<double>(reps);
        rec.q_samples[k] = q_acc / static_cast<double>(reps);
    }
    return rec;
}

ProcessedRecord process(const RawRecord& raw) {
    const AcquisitionConfig& cfg = raw.config;
    cfg.validate();
    const std::size_t n = raw.size();
    require(n >= 2 && raw.q_samples.size() == n, "process: malformed record");
    require(raw.dt > 0.0, "process: record dt must be positive");

    ProcessedRecord rec;
    rec.t0 = raw.t0;
    rec.dt = raw.dt;
    rec.config = cfg;
    rec.v.resize(n);

    const double q_corr = cfg.q_correction > 0.0 ? cfg.q_correction : 1.0 / cfg.q_scale;

    // 1) Q gain correction.  2) DC estimate over the pre-drive samples.
    double i_dc = 0.0, q_dc = 0.0;
    std::size_t n_pre = 0;
    for (std::size_t k = 0; k < n && raw.time_at(k) < 0.0; ++k) {
        i_dc += raw.i_samples[k];
        q_dc += q_corr * raw.q_samples[k];
        ++n_pre;
    }
    require(n_pre >= 100, "process: need at least 100 pre-drive samples for the DC estimate");
    i_dc /= static_cast<double>(n_pre);
    q_dc /= static_cast<double>(n_pre);

    // 3) Demodulate back to baseband.
    for (std::size_t k = 0; k < n; ++k) {
        const std::complex<double> s(raw.i_samples[k] - i_dc,
                                     q_corr * raw.q_samples[k] - q_dc);
        rec.v[k] = s * std::polar(1.0, kTwoPi * cfg.f_sb * raw.time_at(k));
    }

    // 4) Low-pass.
    if (cfg.filter == FilterKind::brickwall) {
        fft_lowpass(rec.v, rec.dt, cfg.lowpass_hz);
        // Ideal band fraction beta: both inflation factors are 1/beta.
        const double beta = std::min(1.0, 2.0 * cfg.lowpass_hz * rec.dt);
        rec.noise_corr_beat = 1.0 / beta;
        rec.noise_corr_sq = 1.0 / beta;
    } else {
        const std::vector<double> kernel =
            sinc_kernel(rec.dt, cfg.lowpass_hz, cfg.sinc_taps);
        sinc_lowpass(rec.v, kernel);
        const auto [beat, sq] = correlation_factors(kernel);
        rec.noise_corr_beat = beat;
        rec.noise_corr_sq = sq;
    }

    energy_curve(rec, rec.t0, 0.0);
    return rec;
}

void energy_curve(ProcessedRecord& rec, double win_begin, double win_end) {
    require(rec.size() >= 2, "energy_curve: record too short");
    require(win_end > win_begin, "energy_curve: empty noise window");
    double power = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < rec.size(); ++k) {
        const double t = rec.time_at(k);
        if (t >= win_begin && t < win_end) {
            power += std::norm(rec.v[k]);
            ++count;
        }
    }
    require(count >= 1, "energy_curve: noise window contains no samples");
    power /= static_cast<double>(count);
    rec.noise_power = power;

    rec.energy.assign(rec.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < rec.size(); ++k) {
        acc += (std::norm(rec.v[k - 1]) - power) * rec.dt;
        rec.energy[k] = acc;
    }
}

}  // namespace pulsecap
