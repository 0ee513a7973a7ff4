// Heterodyne acquisition model: turn a field trajectory into the I/Q record
// a digitizer would capture, and run the reverse processing pipeline
// (rescale, DC removal, demodulation, low-pass) back to the baseband signal.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "pulsecap/dynamics.hpp"

namespace pulsecap {

enum class FilterKind { brickwall, windowed_sinc };

// Acquisition + processing configuration.  Defaults mirror the measurement
// chain: 500 MS/s, 165 MHz sideband, 150 MHz low-pass, averaging modeled as
// a sigma/sqrt(n) noise reduction on each quadrature.
struct AcquisitionConfig {
    double sample_rate = 5.0e8;   // samples/s
    double f_sb = 1.65e8;         // sideband (LO offset) frequency, Hz
    double q_scale = 1.0;         // Q-quadrature gain imbalance applied on capture
    std::complex<double> dc_offset = 0.0;  // additive I/Q offset
    double noise_sigma = 0.0;     // per-quadrature noise std before averaging
    double n_averages = 3.0e6;    // averaging count (sigma -> sigma/sqrt(n))
    std::uint32_t literal_averages = 0;  // >0: actually average this many records
    double pre_drive = 2.0e-6;    // record time before t = 0 (s)
    double duration = 0.0;        // record time after t = 0; <=0 -> trajectory end
    double lowpass_hz = 1.5e8;    // low-pass cutoff applied by process()
    FilterKind filter = FilterKind::brickwall;
    int sinc_taps = 201;          // windowed-sinc kernel length (odd)
    int adc_bits = 0;             // 0 = ideal ADC; else mid-tread quantizer width
    double adc_full_scale = 1.0;  // quantizer clipping range (+/-)
    double q_correction = 0.0;    // process(): Q gain fix; <=0 -> 1/q_scale
    double spur_freq = 0.0;       // optional additive complex tone, Hz (0 = off)
    double spur_amplitude = 0.0;
    std::uint64_t seed = 1;       // RNG seed; same config+seed -> identical records

    void validate() const;
};

// What the digitizer stored: I/Q samples at sample_rate starting at
// t0 = -pre_drive, signal upconverted by e^{-i 2 pi f_sb t}.
struct RawRecord {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> i_samples;
    std::vector<double> q_samples;
    AcquisitionConfig config;  // resolved configuration that produced it

    [[nodiscard]] std::size_t size() const { return i_samples.size(); }
    [[nodiscard]] double time_at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

// Pipeline output: complex baseband V(t) plus the running signal-energy
// curve E(t) with the estimated noise floor subtracted.
//
// The low-pass correlates formerly independent noise samples, which inflates
// the variance of window-energy sums.  The record carries the two inflation
// factors of its filter, both 1 for white (unfiltered) noise:
//   noise_corr_beat = sum_m rho(m)   (signal x noise beat terms)
//   noise_corr_sq   = sum_m rho(m)^2 (noise-only terms)
// where rho(m) is the filter-induced sample autocorrelation.
struct ProcessedRecord {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::complex<double>> v;  // baseband samples
    std::vector<double> energy;           // E(t), energy[0] = 0
    double noise_power = 0.0;             // mean |V|^2 over the noise window
    double noise_corr_beat = 1.0;
    double noise_corr_sq = 1.0;
    AcquisitionConfig config;

    [[nodiscard]] std::size_t size() const { return v.size(); }
    [[nodiscard]] double time_at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

// Synthesize the digitizer record for a trajectory (linear resampling of
// v_out onto the ADC grid, upconversion, gain/DC imperfections, noise,
// optional quantizer).  Throws std::invalid_argument when the requested
// record extends past the trajectory.
[[nodiscard]] RawRecord synthesize(const FieldTrajectory& traj,
                                   const AcquisitionConfig& cfg);

// Reverse pipeline, in order: Q rescale, DC subtraction (pre-drive mean),
// demodulation by e^{+i 2 pi f_sb t}, low-pass.  Needs >= 100 pre-drive
// samples for the DC estimate.  The energy curve is filled against the
// pre-drive noise floor; call energy_curve() to rebuild it over a
// different noise window.
[[nodiscard]] ProcessedRecord process(const RawRecord& raw);

// Rebuild rec.energy: noise power = mean |V|^2 over [win_begin, win_end),
// E(t) = cumulative sum of (|V|^2 - noise_power) dt, starting at 0.
void energy_curve(ProcessedRecord& rec, double win_begin, double win_end);

}  // namespace pulsecap
