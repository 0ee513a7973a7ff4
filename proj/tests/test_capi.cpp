// Public C interface: status codes, opaque handles, error messages, and
// agreement with the closed forms through the shared-library boundary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include "pulsecap.h"

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("pulsecap_capi_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string scratch(const std::string& name) {
    return (scratch_dir() / name).string();
}

pulsecap_system device_system() {
    pulsecap_system sys{};
    sys.omega = 2.0 * kPi * 6.55e9;
    sys.r1_impedance = 50.0;
    sys.r2_impedance = 80.0;
    sys.tau_rt = 0.0;
    sys.kappa_on = 2.0e7;
    sys.kappa_i = 0.0;
    return sys;
}

pulsecap_system unit_system() {
    pulsecap_system sys{};
    sys.omega = 1.0e9;
    sys.r1_impedance = 1.0;
    sys.r2_impedance = 1.0;
    sys.kappa_on = 1.0;
    return sys;
}

}  // namespace

TEST_CASE("status codes are a stable ABI and the version is reported") {
    CHECK(PULSECAP_OK == 0);
    CHECK(PULSECAP_ERR_INVALID_ARGUMENT == 1);
    CHECK(PULSECAP_ERR_NUMERIC == 2);
    CHECK(PULSECAP_ERR_IO == 3);
    CHECK(std::string(pulsecap_version()) == "1.0.0");
}

TEST_CASE("scattering coefficients cross the boundary exactly") {
    const pulsecap_system sys = device_system();
    pulsecap_coefficients k{};
    REQUIRE(pulsecap_derive_coefficients(&sys, sys.kappa_on, 0.0, &k) ==
            PULSECAP_OK);
    const double t1_sq = k.t_drive_re * k.t_drive_re + k.t_drive_im * k.t_drive_im;
    CHECK(t1_sq == doctest::Approx(2.4427480916030535e-3).epsilon(1e-14));
    CHECK(k.t_drive_re == doctest::Approx(0.04942416505721724).epsilon(1e-14));
    CHECK(k.t_drive_im == 0.0);
    // Reciprocity through the impedance ratio.
    CHECK(k.t_res_re == doctest::Approx(50.0 / 80.0 * k.t_drive_re).epsilon(1e-14));
    CHECK(k.r_mag > 0.0);
    CHECK(k.r_mag < 1.0);

    // Rejections: null pointers and an over-coupled rate.
    CHECK(pulsecap_derive_coefficients(nullptr, 1.0, 0.0, &k) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(pulsecap_last_error()).find("sys") != std::string::npos);
    const double kappa_limit = 50.0 / (80.0 * (kPi / sys.omega));
    CHECK(pulsecap_derive_coefficients(&sys, 1.01 * kappa_limit, 0.0, &k) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
    // A successful call clears the error message.
    REQUIRE(pulsecap_derive_coefficients(&sys, sys.kappa_on, 0.0, &k) ==
            PULSECAP_OK);
    CHECK(std::string(pulsecap_last_error()).empty());
}

TEST_CASE("closed-form efficiencies match their frozen values through C") {
    double value = 0.0;
    REQUIRE(pulsecap_eff_rectangular(1.0, 2.5128624172523394, &value) ==
            PULSECAP_OK);
    CHECK(value == doctest::Approx(0.8145287551781475).epsilon(1e-14));

    // Matched rising exponential: 1 - exp(-kappa T).
    REQUIRE(pulsecap_eff_exponential(1.0, 2.0, 5.3, 5.3, &value) == PULSECAP_OK);
    CHECK(value == doctest::Approx(0.9950084060930898).epsilon(1e-14));

    REQUIRE(pulsecap_eff_increasing_infinite(1.0, 2.0, &value) == PULSECAP_OK);
    CHECK(value == doctest::Approx(1.0).epsilon(1e-14));

    REQUIRE(pulsecap_eff_decreasing_infinite(1.0, 1.0, 1.0, &value) ==
            PULSECAP_OK);
    CHECK(value == doctest::Approx(0.4556352328895628).epsilon(1e-14));

    double t_opt = 0.0, eff = 0.0;
    REQUIRE(pulsecap_optimal_rectangular(1.0, &t_opt, &eff) == PULSECAP_OK);
    CHECK(t_opt == doctest::Approx(2.5128624172523394).epsilon(1e-7));
    CHECK(eff == doctest::Approx(0.8145287551781475).epsilon(1e-12));

    CHECK(pulsecap_eff_rectangular(-1.0, 2.0, &value) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
    CHECK(pulsecap_eff_rectangular(1.0, 2.0, nullptr) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
    // Closing after the drive stop is a composition, not a chopped form.
    CHECK(pulsecap_eff_exponential(1.0, 2.0, 6.0, 5.0, &value) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("case dispatch reports degenerate fallbacks and folds in loss") {
    pulsecap_analytic_case c{};
    c.formula = PULSECAP_FORMULA_EXPONENTIAL_CHOPPED;
    c.kappa = 1.0;
    c.tau = -2.0;
    c.t_close = 2.0;
    c.t_drive = 2.0;
    double value = 0.0;
    int used = -1;
    REQUIRE(pulsecap_eff_case(&c, &value, &used) == PULSECAP_OK);
    CHECK(value == doctest::Approx(0.6260705709986626).epsilon(1e-14));
    CHECK(used == PULSECAP_FORMULA_EXPONENTIAL_DEGENERATE);

    pulsecap_analytic_case lossy{};
    lossy.formula = PULSECAP_FORMULA_EXPONENTIAL_CHOPPED;
    lossy.kappa = 1.0;
    lossy.tau = 2.0;
    lossy.t_close = 8.0;
    lossy.t_drive = 8.0;
    REQUIRE(pulsecap_apply_intrinsic_loss(&lossy, 10.0, &value, nullptr) ==
            PULSECAP_OK);
    CHECK(value == doctest::Approx(0.9069258414648259).epsilon(1e-12));
    CHECK(pulsecap_apply_intrinsic_loss(&lossy, 0.0, &value, nullptr) ==
          PULSECAP_ERR_INVALID_ARGUMENT);

    pulsecap_pulse rect{};
    rect.shape = PULSECAP_PULSE_RECTANGULAR;
    rect.amplitude = 1.0;
    rect.t_drive = 1.0;
    REQUIRE(pulsecap_delay_factor(1.0, &rect, 1.1, 1.0, &value) == PULSECAP_OK);
    CHECK(value == doctest::Approx(0.9048374180359596).epsilon(1e-14));
}

TEST_CASE("trajectory handles expose the integrated field") {
    const pulsecap_system sys = unit_system();
    pulsecap_pulse pulse{};
    pulse.shape = PULSECAP_PULSE_EXPONENTIAL;
    pulse.amplitude = 1.0;
    pulse.tau = 2.0;
    pulse.t_drive = 4.0;
    pulsecap_schedule sched{};
    sched.t_close = 4.0;
    sched.t_reopen = -1.0;  // never

    pulsecap_trajectory* traj = nullptr;
    REQUIRE(pulsecap_integrate_field(&sys, &pulse, &sched, 0.0, 6.0, 0.0, 0.0,
                                     0.0, &traj) == PULSECAP_OK);
    REQUIRE(traj != nullptr);
    size_t n = 0;
    REQUIRE(pulsecap_trajectory_length(traj, &n) == PULSECAP_OK);
    CHECK(n > 100);
    double s[8];
    REQUIRE(pulsecap_trajectory_sample(traj, 0, s) == PULSECAP_OK);
    CHECK(s[0] == 0.0);   // t
    CHECK(s[3] == 0.0);   // B starts empty
    CHECK(s[4] == 0.0);
    CHECK(s[7] == 1.0);   // coupler open
    REQUIRE(pulsecap_trajectory_sample(traj, n - 1, s) == PULSECAP_OK);
    CHECK(s[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(s[7] == 0.0);   // coupler closed after t_close
    CHECK(pulsecap_trajectory_sample(traj, n, s) ==
          PULSECAP_ERR_INVALID_ARGUMENT);

    double dev = 0.0;
    REQUIRE(pulsecap_phase_opposition(traj, &dev) == PULSECAP_OK);
    CHECK(dev < 1e-8);  // resonant drive: reflection exactly opposes

    const std::string path = scratch("traj.csv");
    REQUIRE(pulsecap_trajectory_write_csv(traj, path.c_str()) == PULSECAP_OK);
    CHECK(fs::file_size(path) > 1000);
    pulsecap_trajectory_free(traj);

    // A nonzero initial field survives into sample 0.
    pulsecap_pulse silent{};
    silent.shape = PULSECAP_PULSE_RECTANGULAR;
    silent.amplitude = 0.0;
    silent.t_drive = 1.0;
    pulsecap_schedule open_only{};
    open_only.t_close = 0.0;
    open_only.t_reopen = 2.0;
    pulsecap_trajectory* decay = nullptr;
    REQUIRE(pulsecap_integrate_field(&sys, &silent, &open_only, 0.0, 5.0, 0.0,
                                     0.3, 0.4, &decay) == PULSECAP_OK);
    REQUIRE(pulsecap_trajectory_sample(decay, 0, s) == PULSECAP_OK);
    CHECK(s[3] == 0.3);
    CHECK(s[4] == 0.4);
    pulsecap_trajectory_free(decay);
}

TEST_CASE("numeric efficiency ledger crosses the boundary") {
    const pulsecap_system sys = unit_system();
    pulsecap_pulse pulse{};
    pulse.shape = PULSECAP_PULSE_EXPONENTIAL;
    pulse.amplitude = 1.0;
    pulse.tau = 2.0;
    pulse.t_drive = 5.3;
    pulsecap_schedule sched{};
    sched.t_close = 5.3;
    sched.t_reopen = -1.0;
    pulsecap_energy_ledger ledger{};
    REQUIRE(pulsecap_efficiency_numeric(&sys, &pulse, &sched, 0.0, 0.0,
                                        &ledger) == PULSECAP_OK);
    CHECK(ledger.efficiency == doctest::Approx(0.9950084060930898).epsilon(1e-7));
    CHECK(ledger.e_res == doctest::Approx(ledger.efficiency * ledger.e_tot)
                              .epsilon(1e-12));
    CHECK(ledger.e_lost == 0.0);
    CHECK(ledger.e_out > 0.0);
}

TEST_CASE("grid scans run through the C interface with per-row errors") {
    const pulsecap_system sys = unit_system();
    pulsecap_pulse pulse{};
    pulse.shape = PULSECAP_PULSE_EXPONENTIAL;
    pulse.amplitude = 1.0;
    pulse.tau = 1.0;
    pulse.t_drive = 5.0;
    pulsecap_schedule sched{};
    sched.t_close = 5.0;
    sched.t_reopen = -1.0;

    const char* names[2] = {"T", "tau"};
    const double t_vals[2] = {1.0, 2.0};
    const double tau_vals[2] = {2.0, 0.0};  // tau = 0 fails per-row
    const double* values[2] = {t_vals, tau_vals};
    const size_t lengths[2] = {2, 2};

    pulsecap_scan* scan = nullptr;
    REQUIRE(pulsecap_scan_run(&sys, &pulse, &sched, 0.0, PULSECAP_SCAN_ANALYTIC,
                              1, names, values, lengths, 2, &scan) ==
            PULSECAP_OK);
    size_t rows = 0;
    REQUIRE(pulsecap_scan_rows(scan, &rows) == PULSECAP_OK);
    REQUIRE(rows == 4);

    double coords[2], eff;
    int ok;
    // Last axis fastest: (T=1,tau=2), (1,0), (2,2), (2,0).
    REQUIRE(pulsecap_scan_row(scan, 0, coords, &eff, &ok) == PULSECAP_OK);
    CHECK(coords[0] == 1.0);
    CHECK(coords[1] == 2.0);
    CHECK(ok == 1);
    double direct = 0.0;
    REQUIRE(pulsecap_eff_exponential(1.0, 2.0, 1.0, 5.0, &direct) == PULSECAP_OK);
    CHECK(eff == direct);
    CHECK(std::string(pulsecap_scan_row_error(scan, 0)).empty());

    REQUIRE(pulsecap_scan_row(scan, 1, coords, &eff, &ok) == PULSECAP_OK);
    CHECK(coords[1] == 0.0);
    CHECK(ok == 0);
    CHECK(std::isnan(eff));
    CHECK(!std::string(pulsecap_scan_row_error(scan, 1)).empty());

    REQUIRE(pulsecap_scan_row(scan, 2, coords, &eff, &ok) == PULSECAP_OK);
    CHECK(coords[0] == 2.0);
    CHECK(ok == 1);
    pulsecap_scan_free(scan);

    // Unknown axis names are rejected up front, not per row.
    const char* bad_names[1] = {"temperature"};
    const double bad_vals[1] = {1.0};
    const double* bad_values[1] = {bad_vals};
    const size_t bad_lengths[1] = {1};
    pulsecap_scan* bad = nullptr;
    CHECK(pulsecap_scan_run(&sys, &pulse, &sched, 0.0, PULSECAP_SCAN_ANALYTIC, 1,
                            bad_names, bad_values, bad_lengths, 1, &bad) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
    CHECK(bad == nullptr);
}

TEST_CASE("acquisition, processing, and estimation run end to end through C") {
    const pulsecap_system sys = device_system();
    pulsecap_pulse pulse{};
    pulse.shape = PULSECAP_PULSE_EXPONENTIAL;
    pulse.amplitude = 1.0;
    pulse.tau = 1.0e-7;
    pulse.t_drive = 4.0e-7;
    pulsecap_schedule sched{};
    sched.t_close = 4.0e-7;
    sched.t_reopen = 4.4e-7;
    pulsecap_trajectory* traj = nullptr;
    REQUIRE(pulsecap_integrate_field(&sys, &pulse, &sched, 0.0, 8.0e-7, 0.0,
                                     0.0, 0.0, &traj) == PULSECAP_OK);

    pulsecap_acquisition acq{};
    pulsecap_acquisition_defaults(&acq);
    CHECK(acq.sample_rate == 5.0e8);
    CHECK(acq.f_sb == 1.65e8);
    CHECK(acq.lowpass_hz == 1.5e8);
    CHECK(acq.n_averages == 3.0e6);
    CHECK(acq.sinc_taps == 201);
    acq.pre_drive = 1.0e-6;
    acq.duration = 7.0e-7;
    acq.noise_sigma = 2.0;
    acq.n_averages = 25.0;
    acq.seed = 17;

    pulsecap_raw_record* raw = nullptr;
    REQUIRE(pulsecap_synthesize(traj, &acq, &raw) == PULSECAP_OK);
    size_t n = 0;
    REQUIRE(pulsecap_raw_length(raw, &n) == PULSECAP_OK);
    CHECK(n == 851);  // (1e-6 + 7e-7) * 500 MS/s, both endpoints sampled
    double s3[3];
    REQUIRE(pulsecap_raw_sample(raw, 0, s3) == PULSECAP_OK);
    CHECK(s3[0] == -1.0e-6);

    const std::string path = scratch("raw.csv");
    REQUIRE(pulsecap_raw_write_csv(raw, path.c_str()) == PULSECAP_OK);
    pulsecap_raw_record* raw2 = nullptr;
    REQUIRE(pulsecap_raw_read_csv(path.c_str(), &raw2) == PULSECAP_OK);
    size_t n2 = 0;
    REQUIRE(pulsecap_raw_length(raw2, &n2) == PULSECAP_OK);
    REQUIRE(n2 == n);
    double a[3], b[3];
    REQUIRE(pulsecap_raw_sample(raw, n / 2, a) == PULSECAP_OK);
    REQUIRE(pulsecap_raw_sample(raw2, n / 2, b) == PULSECAP_OK);
    CHECK(a[1] == b[1]);
    CHECK(a[2] == b[2]);
    pulsecap_raw_free(raw2);
    CHECK(pulsecap_raw_read_csv(scratch("missing.csv").c_str(), &raw2) ==
          PULSECAP_ERR_IO);

    pulsecap_processed_record* rec = nullptr;
    REQUIRE(pulsecap_process(raw, &rec) == PULSECAP_OK);
    size_t np = 0;
    REQUIRE(pulsecap_processed_length(rec, &np) == PULSECAP_OK);
    CHECK(np == n);
    double noise_power = -1.0;
    REQUIRE(pulsecap_processed_noise_power(rec, &noise_power) == PULSECAP_OK);
    CHECK(noise_power > 0.0);
    REQUIRE(pulsecap_energy_curve(rec, -9.01e-7, -1.01e-7) == PULSECAP_OK);
    double s4[4];
    REQUIRE(pulsecap_processed_sample(rec, 0, s4) == PULSECAP_OK);
    CHECK(s4[0] == -1.0e-6);
    CHECK(s4[3] == 0.0);  // energy curve starts at zero

    // Window estimation chain over the release span; window edges are kept
    // off the sample grid so the half-open counts are unambiguous.
    double e_sig = 0.0;
    uint64_t n_sig = 0;
    REQUIRE(pulsecap_window_energy(rec, 4.391e-7, 6.99e-7, &e_sig, &n_sig) ==
            PULSECAP_OK);
    CHECK(e_sig > 0.0);
    CHECK(n_sig == 130);
    pulsecap_noise_estimate noise{};
    REQUIRE(pulsecap_noise_energy(rec, -9.01e-7, -1.01e-7, &noise) ==
            PULSECAP_OK);
    CHECK(noise.n_points == 400);
    CHECK(noise.corr_beat == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    pulsecap_energy_estimate est{};
    REQUIRE(pulsecap_noise_subtract(e_sig, n_sig, &noise, &est) == PULSECAP_OK);
    CHECK(est.value < e_sig);
    CHECK(est.variance > 0.0);
    CHECK(est.n_points == n_sig);

    const std::string ppath = scratch("processed.csv");
    REQUIRE(pulsecap_processed_write_csv(rec, ppath.c_str()) == PULSECAP_OK);
    pulsecap_processed_record* rec2 = nullptr;
    REQUIRE(pulsecap_processed_read_csv(ppath.c_str(), &rec2) == PULSECAP_OK);
    double back = -1.0;
    REQUIRE(pulsecap_processed_noise_power(rec2, &back) == PULSECAP_OK);
    CHECK(back == noise_power);
    pulsecap_processed_free(rec2);
    pulsecap_processed_free(rec);
    pulsecap_raw_free(raw);
    pulsecap_trajectory_free(traj);
}

TEST_CASE("estimation helpers match their closed forms through C") {
    pulsecap_noise_estimate noise{};
    noise.value = 2.0;
    noise.variance = 0.0;
    noise.n_points = 400;
    noise.corr_beat = 1.0;
    noise.corr_sq = 1.0;
    pulsecap_energy_estimate est{};
    REQUIRE(pulsecap_noise_subtract(10.0, 100, &noise, &est) == PULSECAP_OK);
    CHECK(est.value == doctest::Approx(9.5).epsilon(1e-15));
    CHECK(est.variance ==
          doctest::Approx((2.0 / 400.0) * 9.5 * 2.0 +
                          100.0 * 500.0 / (400.0 * 400.0 * 400.0) * 4.0)
              .epsilon(1e-13));

    pulsecap_energy_estimate e_abs = est, e_ref = est;
    e_abs.value = 9.0;
    e_ref.value = 1.0;
    double effic = 0.0, sigma = 0.0;
    REQUIRE(pulsecap_absorption_uncertainty(&e_abs, &e_ref, &noise, &effic,
                                            &sigma) == PULSECAP_OK);
    CHECK(effic == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(sigma > 0.0);

    pulsecap_efficiency_report report{};
    pulsecap_energy_estimate e_on = e_abs, e_off = e_abs;
    e_on.value = 9.6;
    e_on.variance = 0.0;
    e_off.value = 10.0;
    e_off.variance = 0.0;
    REQUIRE(pulsecap_storage_receiver(&e_on, &e_off, 0.9, 0.01, &report) ==
            PULSECAP_OK);
    CHECK(report.absorption == 0.9);
    CHECK(report.storage == doctest::Approx(0.96 * 0.9).epsilon(1e-15));
    CHECK(report.receiver ==
          doctest::Approx(std::sqrt(0.96) * 0.9).epsilon(1e-15));
    CHECK(report.receiver * report.receiver ==
          doctest::Approx(report.storage * report.absorption).epsilon(1e-14));

    // Poisson populations with mean 2 recover the mean.
    std::vector<double> pops;
    double fact = 1.0;
    for (int k = 0; k <= 8; ++k) {
        if (k > 0) fact *= k;
        pops.push_back(std::exp(-2.0) * std::pow(2.0, k) / fact);
    }
    double mean = 0.0;
    REQUIRE(pulsecap_poisson_fit(pops.data(), pops.size(), &mean) == PULSECAP_OK);
    CHECK(mean == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(pulsecap_poisson_fit(nullptr, 3, &mean) ==
          PULSECAP_ERR_INVALID_ARGUMENT);

    double moment = 0.0;
    REQUIRE(pulsecap_gaussian_moment(4, 2.0, &moment) == PULSECAP_OK);
    CHECK(moment == doctest::Approx(48.0).epsilon(1e-15));
    REQUIRE(pulsecap_gaussian_moment(0, 2.0, &moment) == PULSECAP_OK);
    CHECK(moment == 1.0);
    REQUIRE(pulsecap_gaussian_moment(5, 2.0, &moment) == PULSECAP_OK);
    CHECK(moment == 0.0);
    CHECK(pulsecap_gaussian_moment(4, -1.0, &moment) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("the full experiment runs through the C interface") {
    pulsecap_experiment e{};
    e.sys = device_system();
    e.sys.kappa_i = 1.0 / 3.0e-6;
    e.pulse.shape = PULSECAP_PULSE_EXPONENTIAL;
    e.pulse.amplitude = 1.0;
    e.pulse.tau = 1.0e-7;
    e.pulse.t_drive = 4.0e-7;
    e.pulse.detuning = 2.0 * kPi * 2.5e5;
    e.idle = 30.0e-9;
    pulsecap_acquisition_defaults(&e.acquisition);
    e.acquisition.filter = PULSECAP_FILTER_WINDOWED_SINC;
    e.acquisition.noise_sigma = 1500.0;
    e.acquisition.seed = 11;

    pulsecap_experiment_result res{};
    REQUIRE(pulsecap_experiment_run(&e, &res) == PULSECAP_OK);
    CHECK(res.report.absorption > 0.990);
    CHECK(res.report.absorption < 0.998);
    CHECK(res.report.absorption_sigma > 2.0e-4);
    CHECK(res.report.absorption_sigma < 2.0e-3);
    CHECK(std::abs(res.report.absorption - res.dynamics_absorption) <
          4.0 * res.report.absorption_sigma);
    CHECK(res.t_close == 4.0e-7);
    CHECK(res.t_reopen == 4.3e-7);
    CHECK(res.dynamics.efficiency > 0.97);

    pulsecap_experiment_result res2{};
    REQUIRE(pulsecap_experiment_run(&e, &res2) == PULSECAP_OK);
    CHECK(res2.report.absorption == res.report.absorption);

    // Records export, with unwanted outputs left NULL.
    pulsecap_processed_record* cap = nullptr;
    REQUIRE(pulsecap_experiment_records(&e, nullptr, &cap, nullptr, nullptr) ==
            PULSECAP_OK);
    REQUIRE(cap != nullptr);
    size_t n = 0;
    REQUIRE(pulsecap_processed_length(cap, &n) == PULSECAP_OK);
    CHECK(n > 1000);
    pulsecap_processed_free(cap);

    CHECK(pulsecap_experiment_run(nullptr, &res) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("JSON conversion crosses the boundary in both directions") {
    pulsecap_pulse pulse{};
    pulse.shape = PULSECAP_PULSE_EXPONENTIAL;
    pulse.amplitude = 2.5;
    pulse.tau = -1.0e-7;
    pulse.t_drive = 1.0e-7;
    pulse.detuning = 3.0e5;
    char* text = nullptr;
    REQUIRE(pulsecap_pulse_to_json(&pulse, &text) == PULSECAP_OK);
    REQUIRE(text != nullptr);
    pulsecap_pulse back{};
    REQUIRE(pulsecap_pulse_from_json(text, &back) == PULSECAP_OK);
    CHECK(back.shape == pulse.shape);
    CHECK(back.amplitude == pulse.amplitude);
    CHECK(back.tau == pulse.tau);
    CHECK(back.t_drive == pulse.t_drive);
    CHECK(back.detuning == pulse.detuning);
    pulsecap_string_free(text);

    // Infinite reopen maps to the C sentinel -1 and back to "inf" text.
    pulsecap_schedule sched{};
    sched.t_close = 1.0e-7;
    sched.t_reopen = -1.0;
    REQUIRE(pulsecap_schedule_to_json(&sched, &text) == PULSECAP_OK);
    CHECK(std::string(text).find("\"inf\"") != std::string::npos);
    pulsecap_schedule sback{};
    REQUIRE(pulsecap_schedule_from_json(text, &sback) == PULSECAP_OK);
    CHECK(sback.t_reopen == -1.0);
    pulsecap_string_free(text);

    pulsecap_system sys{};
    REQUIRE(pulsecap_system_from_json(
                R"({"frequency_hz": 6.55e9, "r1_impedance": 50,
                    "r2_impedance": 80, "kappa_on": 2e7})",
                &sys) == PULSECAP_OK);
    CHECK(sys.omega == doctest::Approx(2.0 * kPi * 6.55e9).epsilon(1e-15));
    CHECK(pulsecap_system_from_json(R"({"bogus": 1})", &sys) ==
          PULSECAP_ERR_INVALID_ARGUMENT);

    pulsecap_acquisition acq{};
    pulsecap_acquisition_defaults(&acq);
    REQUIRE(pulsecap_acquisition_to_json(&acq, &text) == PULSECAP_OK);
    pulsecap_acquisition aback{};
    REQUIRE(pulsecap_acquisition_from_json(text, &aback) == PULSECAP_OK);
    CHECK(aback.sample_rate == acq.sample_rate);
    CHECK(aback.filter == acq.filter);
    CHECK(aback.seed == acq.seed);
    pulsecap_string_free(text);
}

TEST_CASE("self-validation runs through the C interface") {
    char* report = nullptr;
    int passed = 0;
    REQUIRE(pulsecap_validate("analytic", 3, 1, &report, &passed) == PULSECAP_OK);
    REQUIRE(report != nullptr);
    const std::string text(report);
    CHECK(text.find("lossless_ode_matches_closed_forms") != std::string::npos);
    CHECK(passed == 1);
    pulsecap_string_free(report);

    CHECK(pulsecap_validate("bogus_suite", 3, 1, nullptr, nullptr) ==
          PULSECAP_ERR_INVALID_ARGUMENT);
}
