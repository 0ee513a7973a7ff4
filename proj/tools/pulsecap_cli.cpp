// pulsecap — command-line front end for the pulse-capture library.
//
// Links only the public C interface (pulsecap.h) plus two vendored
// single-header utilities: CLI11 for argument parsing and nlohmann/json for
// report serialization.  Every output file embeds the fully resolved
// configuration (including the seed) so artifacts are self-describing, and
// identical configuration + seed produces byte-identical output.
//
// Exit codes: 0 success, 1 usage error (rejected parameters, unusable
// paths), 2 numeric failure, 3 validation-suite failure.

#include <pulsecap.h>

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

// Defaults used when neither a config file nor flags override them.
constexpr double kDefaultOmega = kTwoPi * 6.55e9;  // resonator frequency, rad/s
constexpr double kDefaultR1 = 50.0;                // drive line, ohm
constexpr double kDefaultR2 = 80.0;                // resonator line, ohm
constexpr double kDefaultKappa = 2.0e7;            // coupler decay rate, 1/s

struct CliFailure {
    int exit_code;
    std::string message;
};

// Library statuses map onto the documented exit codes: rejected parameters
// and unusable paths are usage errors, integration/estimation failures are
// numeric errors.
int exit_code_for(pulsecap_status st) {
    return st == PULSECAP_ERR_NUMERIC ? 2 : 1;
}

void check(pulsecap_status st, const std::string& context) {
    if (st == PULSECAP_OK) return;
    throw CliFailure{exit_code_for(st), context + ": " + pulsecap_last_error()};
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    pulsecap_string_free(s);
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw CliFailure{1, what + ": cannot parse number '" + text + "'"};
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliFailure{1, "cannot open '" + path + "' for writing"};
    out << text << '\n';
    out.flush();
    if (!out) throw CliFailure{1, "write to '" + path + "' failed"};
}

ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliFailure{1, "cannot read config file '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return ordered_json::parse(buf.str());
    } catch (const std::exception& e) {
        throw CliFailure{1, "config file '" + path + "': " + e.what()};
    }
}

// "begin:end" -> pair of seconds.
std::pair<double, double> parse_window(const std::string& spec,
                                       const std::string& flag) {
    const auto pos = spec.find(':');
    if (pos == std::string::npos || spec.find(':', pos + 1) != std::string::npos)
        throw CliFailure{1, flag + ": expected 'begin:end', got '" + spec + "'"};
    const double a = parse_double(spec.substr(0, pos), flag);
    const double b = parse_double(spec.substr(pos + 1), flag);
    if (!(a < b))
        throw CliFailure{1, flag + ": window begin must precede end"};
    return {a, b};
}

// ---- struct <-> JSON via the library parsers/serializers -------------------

ordered_json system_json(const pulsecap_system& sys) {
    char* js = nullptr;
    check(pulsecap_system_to_json(&sys, &js), "system");
    return ordered_json::parse(take_string(js));
}

ordered_json pulse_json(const pulsecap_pulse& pulse) {
    char* js = nullptr;
    check(pulsecap_pulse_to_json(&pulse, &js), "pulse");
    return ordered_json::parse(take_string(js));
}

ordered_json schedule_json(const pulsecap_schedule& sched) {
    char* js = nullptr;
    check(pulsecap_schedule_to_json(&sched, &js), "schedule");
    return ordered_json::parse(take_string(js));
}

ordered_json acquisition_json(const pulsecap_acquisition& acq) {
    char* js = nullptr;
    check(pulsecap_acquisition_to_json(&acq, &js), "acquisition");
    return ordered_json::parse(take_string(js));
}

ordered_json estimate_json(const pulsecap_energy_estimate& e) {
    ordered_json j;
    j["value"] = e.value;
    j["variance"] = e.variance;
    j["n_points"] = e.n_points;
    j["t_begin"] = e.t_begin;
    j["t_end"] = e.t_end;
    return j;
}

ordered_json noise_json(const pulsecap_noise_estimate& n) {
    ordered_json j;
    j["value"] = n.value;
    j["variance"] = n.variance;
    j["n_points"] = n.n_points;
    j["corr_beat"] = n.corr_beat;
    j["corr_sq"] = n.corr_sq;
    return j;
}

// ---- point configuration (efficiency / scan) --------------------------------
//
// Two flag families describe the same physics:
//   dimensionless: --kappaT, --kappaTau, --kappaTprime, --deltaOverKappa,
//                  --kappaT1 — the run is placed in the kappa = 1 frame
//                  (kappa_on = 1, kappa_i = 1/kappaT1 or 0).
//   SI:            --kappa-hz, --T-ns, --tau-ns, --Tprime-ns,
//                  --detuning-mhz, --T1-us.
// Mixing the two families in one invocation is a usage error.

struct PointOpts {
    std::string config_path;
    std::string shape = "rect";
    std::string method = "analytic";
    double amplitude = 1.0;
    double phase_t1 = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 1;
    std::string output;
    bool json_stdout = false;

    // dimensionless family
    double kT = 0.0, kTau = 0.0, kTp = 0.0, dOverK = 0.0, kT1 = 0.0;
    // SI family
    double kappa_hz = 0.0, T_ns = 0.0, tau_ns = 0.0, Tp_ns = 0.0;
    double det_mhz = 0.0, T1_us = 0.0;

    CLI::Option* o_shape = nullptr;
    CLI::Option* o_amplitude = nullptr;
    CLI::Option* o_phase = nullptr;
    CLI::Option* o_dimless = nullptr;
    CLI::Option* o_kT = nullptr;
    CLI::Option* o_kTau = nullptr;
    CLI::Option* o_kTp = nullptr;
    CLI::Option* o_dOverK = nullptr;
    CLI::Option* o_kT1 = nullptr;
    CLI::Option* o_kappa = nullptr;
    CLI::Option* o_T = nullptr;
    CLI::Option* o_tau = nullptr;
    CLI::Option* o_Tp = nullptr;
    CLI::Option* o_det = nullptr;
    CLI::Option* o_T1 = nullptr;
};

void add_point_options(CLI::App* cmd, PointOpts& p) {
    cmd->add_option("--config", p.config_path,
                    "JSON config file; sections: system, pulse, schedule, "
                    "phase_t1.  Flags override config values.");
    p.o_shape = cmd->add_option("--shape", p.shape, "Pulse shape")
                    ->check(CLI::IsMember({"rect", "exp"}))
                    ->capture_default_str();
    p.o_amplitude =
        cmd->add_option("--amplitude", p.amplitude, "Envelope scale");
    p.o_phase = cmd->add_option("--phase-t1", p.phase_t1,
                                "Phase of the drive coupling coefficient, rad");
    cmd->add_option("--dt", p.dt,
                    "Integrator step in the active unit frame; <= 0 selects "
                    "the default");
    cmd->add_option("--seed", p.seed, "Seed recorded in the output")
        ->capture_default_str();

    p.o_dimless = cmd->add_flag(
        "--dimensionless",
        "Select the kappa = 1 frame without setting a value (useful when a "
        "scan axis supplies the times)");
    p.o_kT = cmd->add_option("--kappaT", p.kT,
                             "[dimensionless] capture time kappa*T");
    p.o_kTau = cmd->add_option("--kappaTau", p.kTau,
                               "[dimensionless] exponential constant "
                               "kappa*tau (signed)");
    p.o_kTp = cmd->add_option("--kappaTprime", p.kTp,
                              "[dimensionless] drive stop kappa*T' (default "
                              "kappa*T; 'inf' for an un-chopped decaying "
                              "drive)");
    p.o_dOverK = cmd->add_option("--deltaOverKappa", p.dOverK,
                                 "[dimensionless] detuning delta_omega/kappa "
                                 "(ode method only)");
    p.o_kT1 = cmd->add_option("--kappaT1", p.kT1,
                              "[dimensionless] internal-loss time kappa*T1");

    p.o_kappa = cmd->add_option("--kappa-hz", p.kappa_hz,
                                "[SI] coupler decay rate kappa, 1/s (1/(50 "
                                "ns) = 2e7)");
    p.o_T = cmd->add_option("--T-ns", p.T_ns, "[SI] capture time T, ns");
    p.o_tau = cmd->add_option("--tau-ns", p.tau_ns,
                              "[SI] exponential constant tau, ns (signed)");
    p.o_Tp = cmd->add_option("--Tprime-ns", p.Tp_ns,
                             "[SI] drive stop T', ns (default T; 'inf' for "
                             "an un-chopped decaying drive)");
    p.o_det = cmd->add_option("--detuning-mhz", p.det_mhz,
                              "[SI] drive detuning delta_omega/2pi, MHz (ode "
                              "method only)");
    p.o_T1 = cmd->add_option("--T1-us", p.T1_us,
                             "[SI] internal-loss time T1, us");
}

struct Resolved {
    pulsecap_system sys{};
    pulsecap_pulse pulse{};
    pulsecap_schedule sched{};
    double phase_t1 = 0.0;
    std::string units = "si";
    bool t_drive_pinned = false;  // drive stop set explicitly (flag or config)
};

Resolved resolve_point(const PointOpts& p, bool need_capture_time) {
    Resolved r;
    r.sys = {kDefaultOmega, kDefaultR1, kDefaultR2, 0.0, kDefaultKappa, 0.0};
    r.pulse = {PULSECAP_PULSE_RECTANGULAR, 1.0, 0.0, 0.0, 0.0};
    r.sched = {0.0, 0.0, 0.0, -1.0};

    if (!p.config_path.empty()) {
        const ordered_json cfg = read_json_file(p.config_path);
        for (const auto& [key, val] : cfg.items()) {
            if (key == "system") {
                check(pulsecap_system_from_json(val.dump().c_str(), &r.sys),
                      "config system");
            } else if (key == "pulse") {
                check(pulsecap_pulse_from_json(val.dump().c_str(), &r.pulse),
                      "config pulse");
                if (val.is_object() && val.contains("t_drive"))
                    r.t_drive_pinned = true;
            } else if (key == "schedule") {
                check(pulsecap_schedule_from_json(val.dump().c_str(), &r.sched),
                      "config schedule");
            } else if (key == "phase_t1") {
                if (!val.is_number())
                    throw CliFailure{1, "config phase_t1: expected a number"};
                r.phase_t1 = val.get<double>();
            } else {
                throw CliFailure{1, "config: unknown section '" + key +
                                        "' (expected system, pulse, schedule, "
                                        "phase_t1)"};
            }
        }
    }

    std::vector<std::string> dimensionless, si;
    const auto note = [](CLI::Option* o, std::vector<std::string>& group) {
        if (o != nullptr && o->count() > 0) group.push_back(o->get_name());
    };
    note(p.o_dimless, dimensionless);
    note(p.o_kT, dimensionless);
    note(p.o_kTau, dimensionless);
    note(p.o_kTp, dimensionless);
    note(p.o_dOverK, dimensionless);
    note(p.o_kT1, dimensionless);
    note(p.o_kappa, si);
    note(p.o_T, si);
    note(p.o_tau, si);
    note(p.o_Tp, si);
    note(p.o_det, si);
    note(p.o_T1, si);
    if (!dimensionless.empty() && !si.empty())
        throw CliFailure{1, "cannot mix dimensionless flags (" +
                                join(dimensionless, ", ") +
                                ") with SI flags (" + join(si, ", ") +
                                ") in one invocation"};

    if (!dimensionless.empty()) {
        r.units = "dimensionless";
        // kappa = 1 frame: every time flag is a kappa product.
        r.sys.kappa_on = 1.0;
        r.sys.kappa_i = p.o_kT1->count() > 0 ? 1.0 / p.kT1 : 0.0;
        if (p.o_kT->count() > 0) r.sched.t_close = p.kT;
        if (p.o_kTp->count() > 0) {
            r.pulse.t_drive = p.kTp;
            r.t_drive_pinned = true;
        }
        if (p.o_kTau->count() > 0) r.pulse.tau = p.kTau;
        if (p.o_dOverK->count() > 0) r.pulse.detuning = p.dOverK;
    } else {
        r.units = "si";
        if (p.o_kappa->count() > 0) r.sys.kappa_on = p.kappa_hz;
        if (p.o_T1->count() > 0) r.sys.kappa_i = 1.0 / (p.T1_us * 1e-6);
        if (p.o_T->count() > 0) r.sched.t_close = p.T_ns * 1e-9;
        if (p.o_Tp->count() > 0) {
            r.pulse.t_drive = p.Tp_ns * 1e-9;
            r.t_drive_pinned = true;
        }
        if (p.o_tau->count() > 0) r.pulse.tau = p.tau_ns * 1e-9;
        if (p.o_det->count() > 0) r.pulse.detuning = kTwoPi * p.det_mhz * 1e6;
    }

    if (p.o_shape->count() > 0)
        r.pulse.shape = p.shape == "exp" ? PULSECAP_PULSE_EXPONENTIAL
                                         : PULSECAP_PULSE_RECTANGULAR;
    if (p.o_amplitude->count() > 0) r.pulse.amplitude = p.amplitude;
    if (p.o_phase->count() > 0) r.phase_t1 = p.phase_t1;

    const bool tau_flag = p.o_kTau->count() > 0 || p.o_tau->count() > 0;
    if (r.pulse.shape == PULSECAP_PULSE_RECTANGULAR && tau_flag)
        throw CliFailure{1, "--kappaTau/--tau-ns apply to --shape exp only"};
    if (r.pulse.shape == PULSECAP_PULSE_EXPONENTIAL && !tau_flag &&
        r.pulse.tau == 0.0)
        throw CliFailure{1, "exponential shape needs --kappaTau "
                            "(dimensionless) or --tau-ns (SI)"};

    // The drive, unless told otherwise, stops when the coupler closes.
    if (r.pulse.t_drive <= 0.0 && r.sched.t_close > 0.0)
        r.pulse.t_drive = r.sched.t_close;

    if (need_capture_time &&
        (!(r.sched.t_close > 0.0) || std::isinf(r.sched.t_close)))
        throw CliFailure{1, "capture time required: pass --kappaT, --T-ns, "
                            "or schedule.t_close via --config"};
    return r;
}

ordered_json point_config_json(const Resolved& r, std::uint64_t seed) {
    ordered_json j;
    j["seed"] = seed;
    j["units"] = r.units;
    j["system"] = system_json(r.sys);
    j["pulse"] = pulse_json(r.pulse);
    j["schedule"] = schedule_json(r.sched);
    j["phase_t1"] = r.phase_t1;
    return j;
}

// Closed-form efficiency of a resolved point, delegated to the scan engine
// so `efficiency` and `scan` agree by construction.
double analytic_point(const Resolved& r) {
    const char* names[1] = {"T"};
    const double tvals[1] = {r.sched.t_close};
    const double* vals[1] = {tvals};
    const std::size_t lens[1] = {1};
    pulsecap_scan* scan = nullptr;
    check(pulsecap_scan_run(&r.sys, &r.pulse, &r.sched, r.phase_t1,
                            PULSECAP_SCAN_ANALYTIC, 1, names, vals, lens, 1,
                            &scan),
          "efficiency (analytic)");
    double coord = 0.0, eff = 0.0;
    int ok = 0;
    const pulsecap_status st = pulsecap_scan_row(scan, 0, &coord, &eff, &ok);
    const std::string err = ok ? "" : pulsecap_scan_row_error(scan, 0);
    pulsecap_scan_free(scan);
    check(st, "efficiency (analytic)");
    if (!ok) throw CliFailure{1, "efficiency (analytic): " + err};
    return eff;
}

// ---- coeffs ------------------------------------------------------------------

struct CoeffsOpts {
    std::string config_path;
    std::string output;
    double frequency_ghz = 0.0, r1 = 0.0, r2 = 0.0, tau_rt_ns = 0.0;
    double kappa_on = 0.0, T1_us = 0.0, kappa_eval = 0.0, phase_t1 = 0.0;
    std::uint64_t seed = 1;
    CLI::Option *o_freq = nullptr, *o_r1 = nullptr, *o_r2 = nullptr;
    CLI::Option *o_taurt = nullptr, *o_kon = nullptr, *o_T1 = nullptr;
    CLI::Option *o_keval = nullptr;
};

void run_coeffs(const CoeffsOpts& c) {
    pulsecap_system sys = {kDefaultOmega, kDefaultR1, kDefaultR2,
                           0.0,           kDefaultKappa, 0.0};
    if (!c.config_path.empty()) {
        const ordered_json cfg = read_json_file(c.config_path);
        for (const auto& [key, val] : cfg.items()) {
            if (key == "system") {
                check(pulsecap_system_from_json(val.dump().c_str(), &sys),
                      "config system");
            } else {
                throw CliFailure{1, "config: unknown section '" + key +
                                        "' (expected system)"};
            }
        }
    }
    if (c.o_freq->count() > 0) sys.omega = kTwoPi * c.frequency_ghz * 1e9;
    if (c.o_r1->count() > 0) sys.r1_impedance = c.r1;
    if (c.o_r2->count() > 0) sys.r2_impedance = c.r2;
    if (c.o_taurt->count() > 0) sys.tau_rt = c.tau_rt_ns * 1e-9;
    if (c.o_kon->count() > 0) sys.kappa_on = c.kappa_on;
    if (c.o_T1->count() > 0) sys.kappa_i = 1.0 / (c.T1_us * 1e-6);

    const double kappa =
        c.o_keval->count() > 0 ? c.kappa_eval : sys.kappa_on;
    pulsecap_coefficients k{};
    check(pulsecap_derive_coefficients(&sys, kappa, c.phase_t1, &k), "coeffs");

    const auto cplx = [](double re, double im) {
        ordered_json j;
        j["re"] = re;
        j["im"] = im;
        return j;
    };
    ordered_json out;
    out["seed"] = c.seed;
    out["system"] = system_json(sys);
    out["kappa"] = kappa;
    out["phase_t1"] = c.phase_t1;
    ordered_json coeffs;
    coeffs["t_drive"] = cplx(k.t_drive_re, k.t_drive_im);
    coeffs["t_res"] = cplx(k.t_res_re, k.t_res_im);
    coeffs["r_drive"] = cplx(k.r_drive_re, k.r_drive_im);
    coeffs["r_res"] = cplx(k.r_res_re, k.r_res_im);
    coeffs["r_mag"] = k.r_mag;
    coeffs["t_drive_mag_sq"] =
        k.t_drive_re * k.t_drive_re + k.t_drive_im * k.t_drive_im;
    out["coefficients"] = coeffs;

    const std::string text = out.dump(2);
    std::cout << text << "\n";
    if (!c.output.empty()) write_text(c.output, text);
}

// ---- efficiency ----------------------------------------------------------------

void run_efficiency(const PointOpts& p) {
    const Resolved r = resolve_point(p, /*need_capture_time=*/true);
    const bool want_analytic = p.method == "analytic" || p.method == "both";
    const bool want_ode = p.method == "ode" || p.method == "both";

    double analytic = 0.0, ode = 0.0;
    if (want_analytic) analytic = analytic_point(r);
    if (want_ode) {
        pulsecap_energy_ledger ledger{};
        check(pulsecap_efficiency_numeric(&r.sys, &r.pulse, &r.sched,
                                          r.phase_t1, p.dt, &ledger),
              "efficiency (ode)");
        ode = ledger.efficiency;
    }

    ordered_json out;
    out["method"] = p.method;
    out["config"] = point_config_json(r, p.seed);
    if (want_analytic) out["analytic"] = analytic;
    if (want_ode) out["ode"] = ode;
    if (want_analytic && want_ode) out["difference"] = analytic - ode;

    if (p.json_stdout) {
        std::cout << out.dump(2) << "\n";
    } else {
        if (want_analytic)
            std::cout << "efficiency (analytic) = " << fmt17(analytic) << "\n";
        if (want_ode)
            std::cout << "efficiency (ode)      = " << fmt17(ode) << "\n";
        if (want_analytic && want_ode)
            std::cout << "difference (analytic - ode) = "
                      << fmt17(analytic - ode) << "\n";
    }
    if (!p.output.empty()) write_text(p.output, out.dump(2));
}

// ---- scan ----------------------------------------------------------------------

struct AxisSpec {
    std::string name;
    std::vector<double> values;
};

AxisSpec parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw CliFailure{1, "--axis: expected NAME=start:stop:count or "
                            "NAME=v1,v2,..., got '" + spec + "'"};
    AxisSpec axis;
    axis.name = spec.substr(0, eq);
    const std::string rest = spec.substr(eq + 1);
    if (rest.empty())
        throw CliFailure{1, "--axis " + axis.name + ": empty value list"};

    if (rest.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::size_t begin = 0;
        while (true) {
            const auto pos = rest.find(':', begin);
            parts.push_back(rest.substr(begin, pos - begin));
            if (pos == std::string::npos) break;
            begin = pos + 1;
        }
        if (parts.size() != 3)
            throw CliFailure{1, "--axis " + axis.name +
                                    ": range form is start:stop:count"};
        const double start = parse_double(parts[0], "--axis " + axis.name);
        const double stop = parse_double(parts[1], "--axis " + axis.name);
        const double count_d = parse_double(parts[2], "--axis " + axis.name);
        if (!(count_d >= 1.0) || count_d != std::floor(count_d) ||
            count_d > 1e7)
            throw CliFailure{1, "--axis " + axis.name +
                                    ": count must be a positive integer"};
        const auto count = static_cast<std::size_t>(count_d);
        axis.values.reserve(count);
        if (count == 1) {
            axis.values.push_back(start);
        } else {
            for (std::size_t i = 0; i < count; ++i)
                axis.values.push_back(start + (stop - start) *
                                                  static_cast<double>(i) /
                                                  static_cast<double>(count - 1));
        }
    } else {
        std::size_t begin = 0;
        while (true) {
            const auto pos = rest.find(',', begin);
            axis.values.push_back(parse_double(rest.substr(begin, pos - begin),
                                               "--axis " + axis.name));
            if (pos == std::string::npos) break;
            begin = pos + 1;
        }
    }
    return axis;
}

std::string sidecar_path(const std::string& csv_path) {
    const auto slash = csv_path.find_last_of('/');
    const auto dot = csv_path.find_last_of('.');
    if (dot == std::string::npos ||
        (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

std::string csv_quote(const std::string& s) {
    if (s.empty()) return "";
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

struct ScanOpts {
    PointOpts point;
    std::vector<std::string> axis_specs;
    std::string output = "scan.csv";
    int threads = 4;
    bool emit_plot_data = false;
};

void run_scan(ScanOpts& s) {
    if (s.point.method == "both")
        throw CliFailure{1, "scan: --method must be analytic or ode"};
    Resolved r = resolve_point(s.point, /*need_capture_time=*/false);

    std::vector<AxisSpec> axes;
    axes.reserve(s.axis_specs.size());
    for (const auto& spec : s.axis_specs) axes.push_back(parse_axis(spec));

    // A swept capture/drive time stands in for a missing base value; per-row
    // application overwrites it anyway.  A delay axis derives the close from
    // the drive stop, so it satisfies the capture-time requirement too.
    const auto axis_front = [&axes](const char* name) -> const double* {
        for (const auto& ax : axes)
            if (ax.name == name) return &ax.values.front();
        return nullptr;
    };
    const double* t_axis = axis_front("T");
    const double* tp_axis = axis_front("Tprime");
    const bool delay_axis = axis_front("delay") != nullptr;
    if (!(r.pulse.t_drive > 0.0)) {
        if (tp_axis) r.pulse.t_drive = *tp_axis;
        else if (r.sched.t_close > 0.0) r.pulse.t_drive = r.sched.t_close;
        else if (t_axis) r.pulse.t_drive = *t_axis;
    }
    if (!(r.sched.t_close > 0.0)) {
        if (t_axis) r.sched.t_close = *t_axis;
        else if (delay_axis && r.pulse.t_drive > 0.0)
            r.sched.t_close = r.pulse.t_drive;
        else
            throw CliFailure{1, "scan: capture time required (--kappaT, "
                                "--T-ns, config, a T axis, or a delay axis "
                                "with a known drive stop)"};
    }

    // Matched-capture semantics: a "T" axis whose drive stop was never
    // pinned (no Tprime flag/config/axis, no delay axis) sweeps the drive
    // and the close together.  The library sees a Tprime axis plus a
    // constant zero delay axis; the output column keeps the name "T".
    bool has_T = false, has_Tp = false, has_delay = false;
    for (const auto& ax : axes) {
        if (ax.name == "T") has_T = true;
        else if (ax.name == "Tprime") has_Tp = true;
        else if (ax.name == "delay") has_delay = true;
    }
    const bool matched_T =
        has_T && !has_Tp && !has_delay && !r.t_drive_pinned;

    std::vector<std::string> lib_names;
    lib_names.reserve(axes.size() + 1);
    for (const auto& ax : axes)
        lib_names.push_back(matched_T && ax.name == "T" ? "Tprime" : ax.name);
    if (matched_T) lib_names.push_back("delay");

    static const double kZeroDelay[1] = {0.0};
    std::vector<const char*> names;
    std::vector<const double*> values;
    std::vector<std::size_t> lengths;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        names.push_back(lib_names[i].c_str());
        values.push_back(axes[i].values.data());
        lengths.push_back(axes[i].values.size());
    }
    if (matched_T) {
        names.push_back(lib_names.back().c_str());
        values.push_back(kZeroDelay);
        lengths.push_back(1);
    }
    const int method = s.point.method == "ode" ? PULSECAP_SCAN_ODE
                                               : PULSECAP_SCAN_ANALYTIC;
    pulsecap_scan* scan = nullptr;
    check(pulsecap_scan_run(&r.sys, &r.pulse, &r.sched, r.phase_t1, method,
                            s.threads, names.data(), values.data(),
                            lengths.data(), names.size(), &scan),
          "scan");

    std::size_t rows = 0;
    pulsecap_status st = pulsecap_scan_rows(scan, &rows);
    if (st != PULSECAP_OK) {
        pulsecap_scan_free(scan);
        check(st, "scan");
    }

    ordered_json cfg = point_config_json(r, s.point.seed);
    cfg["method"] = s.point.method;
    cfg["threads"] = s.threads;
    cfg["matched_close"] = matched_T;
    ordered_json axes_json = ordered_json::array();
    for (const auto& ax : axes) {
        ordered_json a;
        a["name"] = ax.name;
        a["values"] = ax.values;
        axes_json.push_back(a);
    }
    cfg["axes"] = axes_json;

    std::vector<double> coords(names.size());
    std::vector<double> effs(rows);
    std::vector<int> oks(rows);
    std::ostringstream body;
    std::size_t failures = 0;
    double max_eff = -std::numeric_limits<double>::infinity();
    std::ostringstream rowbuf;
    std::vector<std::string> row_text(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double eff = 0.0;
        int ok = 0;
        st = pulsecap_scan_row(scan, i, coords.data(), &eff, &ok);
        if (st != PULSECAP_OK) {
            pulsecap_scan_free(scan);
            check(st, "scan row");
        }
        effs[i] = eff;
        oks[i] = ok;
        if (ok) {
            max_eff = std::max(max_eff, eff);
        } else {
            ++failures;
        }
        std::string line;
        // Synthetic columns (the zero delay of a matched sweep) stay out of
        // the output; only the user's axes appear.
        for (std::size_t a = 0; a < axes.size(); ++a) {
            line += fmt17(coords[a]);
            line += ',';
        }
        line += fmt17(eff);
        row_text[i] = std::move(line);
        if (!ok) {
            // Stash the message before the handle is freed.
            row_text[i] += "\x1f";  // marker replaced below
            row_text[i] += pulsecap_scan_row_error(scan, i);
        }
    }
    pulsecap_scan_free(scan);

    std::ostringstream csv;
    csv << "# config " << cfg.dump() << "\n";
    for (const auto& ax : axes) csv << ax.name << ',';
    csv << "efficiency,";
    if (s.emit_plot_data) csv << "efficiency_norm,";
    csv << "ok,error\n";
    std::vector<std::string> columns;
    for (const auto& ax : axes) columns.push_back(ax.name);
    columns.push_back("efficiency");
    if (s.emit_plot_data) columns.push_back("efficiency_norm");
    columns.push_back("ok");
    columns.push_back("error");

    for (std::size_t i = 0; i < rows; ++i) {
        const auto marker = row_text[i].find('\x1f');
        const std::string base = row_text[i].substr(0, marker);
        const std::string err = marker == std::string::npos
                                    ? ""
                                    : row_text[i].substr(marker + 1);
        csv << base << ',';
        if (s.emit_plot_data) {
            const double norm = oks[i] && max_eff > 0.0
                                    ? effs[i] / max_eff
                                    : std::numeric_limits<double>::quiet_NaN();
            csv << fmt17(norm) << ',';
        }
        csv << (oks[i] ? 1 : 0) << ',' << csv_quote(err) << "\n";
    }

    {
        std::ofstream out(s.output, std::ios::binary);
        if (!out)
            throw CliFailure{1, "cannot open '" + s.output + "' for writing"};
        out << csv.str();
        out.flush();
        if (!out) throw CliFailure{1, "write to '" + s.output + "' failed"};
    }

    ordered_json sidecar;
    sidecar["config"] = cfg;
    sidecar["csv"] = s.output;
    sidecar["columns"] = columns;
    sidecar["rows"] = rows;
    sidecar["failures"] = failures;
    const std::string side_path = sidecar_path(s.output);
    write_text(side_path, sidecar.dump(2));

    std::cout << "wrote " << s.output << " (" << rows << " rows, " << failures
              << " failed) and " << side_path << "\n";
}

// ---- simulate ------------------------------------------------------------------

struct SimOpts {
    std::string recipe = "time-reversed";
    std::string config_path;
    std::string output = "simulate";
    std::string shape, filter;
    double kappa_hz = 0.0, T1_us = 0.0, amplitude = 0.0, tau_ns = 0.0;
    double drive_ns = 0.0, det_mhz = 0.0, phase_t1 = 0.0, close_ns = 0.0;
    double idle_ns = 0.0, release_ns = 0.0, dt = 0.0, noise_sigma = 0.0;
    double n_averages = 0.0, noise_window_ns = 0.0;
    std::uint64_t literal_averages = 0, seed = 0;
    bool raw = false, no_records = false, json_stdout = false;

    CLI::Option *o_shape = nullptr, *o_filter = nullptr, *o_kappa = nullptr;
    CLI::Option *o_T1 = nullptr, *o_amp = nullptr, *o_tau = nullptr;
    CLI::Option *o_drive = nullptr, *o_det = nullptr, *o_phase = nullptr;
    CLI::Option *o_close = nullptr, *o_idle = nullptr, *o_release = nullptr;
    CLI::Option *o_dt = nullptr, *o_sigma = nullptr, *o_navg = nullptr;
    CLI::Option *o_lit = nullptr, *o_nwin = nullptr, *o_seed = nullptr;
};

pulsecap_experiment build_experiment(const SimOpts& s) {
    pulsecap_experiment e{};
    // Defaults are the time-reversed capture recipe: rising exponential
    // tau = 2/kappa chopped at 4/kappa, closed on the drive stop, 30 ns idle,
    // released for observation, measured through the filtered heterodyne
    // chain at a realistic signal-to-noise ratio.
    e.sys = {kDefaultOmega, kDefaultR1, kDefaultR2, 0.0, kDefaultKappa,
             1.0 / 3.0e-6};
    e.pulse = {PULSECAP_PULSE_EXPONENTIAL, 1.0, 1.0e-7, 4.0e-7,
               kTwoPi * 2.5e5};
    e.phase_t1 = 0.0;
    e.close_offset = 0.0;
    e.idle = 30.0e-9;
    e.release = 0.0;
    e.dt = 0.0;
    e.noise_window = 0.0;
    pulsecap_acquisition_defaults(&e.acquisition);
    e.acquisition.filter = PULSECAP_FILTER_WINDOWED_SINC;
    e.acquisition.noise_sigma = 1500.0;

    if (s.recipe == "natural") {
        // Natural-decay reference: the resonator is driven at its own
        // emission profile (decaying exponential, tau = -2/kappa), at the
        // same peak amplitude as the time-reversed drive (whose envelope
        // rises to e^4 over the 400 ns pulse).
        e.pulse.amplitude = std::exp(4.0);
        e.pulse.tau = -1.0e-7;
        e.pulse.t_drive = 1.0e-7;
        e.pulse.detuning = 0.0;
    }

    if (!s.config_path.empty()) {
        const ordered_json cfg = read_json_file(s.config_path);
        for (const auto& [key, val] : cfg.items()) {
            if (key == "system") {
                check(pulsecap_system_from_json(val.dump().c_str(), &e.sys),
                      "config system");
            } else if (key == "pulse") {
                check(pulsecap_pulse_from_json(val.dump().c_str(), &e.pulse),
                      "config pulse");
            } else if (key == "acquisition") {
                check(pulsecap_acquisition_from_json(val.dump().c_str(),
                                                     &e.acquisition),
                      "config acquisition");
            } else if (key == "experiment") {
                if (!val.is_object())
                    throw CliFailure{1, "config experiment: expected an object"};
                for (const auto& [k2, v2] : val.items()) {
                    if (!v2.is_number())
                        throw CliFailure{1, "config experiment." + k2 +
                                                ": expected a number"};
                    const double d = v2.get<double>();
                    if (k2 == "phase_t1") e.phase_t1 = d;
                    else if (k2 == "close_offset") e.close_offset = d;
                    else if (k2 == "idle") e.idle = d;
                    else if (k2 == "release") e.release = d;
                    else if (k2 == "dt") e.dt = d;
                    else if (k2 == "noise_window") e.noise_window = d;
                    else
                        throw CliFailure{1, "config experiment: unknown key '" +
                                                k2 + "'"};
                }
            } else {
                throw CliFailure{1, "config: unknown section '" + key +
                                        "' (expected system, pulse, "
                                        "experiment, acquisition)"};
            }
        }
    }

    if (s.o_shape->count() > 0)
        e.pulse.shape = s.shape == "exp" ? PULSECAP_PULSE_EXPONENTIAL
                                         : PULSECAP_PULSE_RECTANGULAR;
    if (s.o_kappa->count() > 0) e.sys.kappa_on = s.kappa_hz;
    if (s.o_T1->count() > 0) e.sys.kappa_i = 1.0 / (s.T1_us * 1e-6);
    if (s.o_amp->count() > 0) e.pulse.amplitude = s.amplitude;
    if (s.o_tau->count() > 0) e.pulse.tau = s.tau_ns * 1e-9;
    if (s.o_drive->count() > 0) e.pulse.t_drive = s.drive_ns * 1e-9;
    if (s.o_det->count() > 0) e.pulse.detuning = kTwoPi * s.det_mhz * 1e6;
    if (s.o_phase->count() > 0) e.phase_t1 = s.phase_t1;
    if (s.o_close->count() > 0) e.close_offset = s.close_ns * 1e-9;
    if (s.o_idle->count() > 0) e.idle = s.idle_ns * 1e-9;
    if (s.o_release->count() > 0) e.release = s.release_ns * 1e-9;
    if (s.o_dt->count() > 0) e.dt = s.dt;
    if (s.o_sigma->count() > 0) e.acquisition.noise_sigma = s.noise_sigma;
    if (s.o_navg->count() > 0) e.acquisition.n_averages = s.n_averages;
    if (s.o_lit->count() > 0)
        e.acquisition.literal_averages =
            static_cast<uint32_t>(s.literal_averages);
    if (s.o_filter->count() > 0)
        e.acquisition.filter = s.filter == "windowed_sinc"
                                   ? PULSECAP_FILTER_WINDOWED_SINC
                                   : PULSECAP_FILTER_BRICKWALL;
    if (s.o_nwin->count() > 0) e.noise_window = s.noise_window_ns * 1e-9;
    if (s.o_seed->count() > 0) e.acquisition.seed = s.seed;
    return e;
}

ordered_json experiment_config_json(const pulsecap_experiment& e,
                                    const std::string& recipe) {
    ordered_json j;
    j["recipe"] = recipe;
    j["system"] = system_json(e.sys);
    j["pulse"] = pulse_json(e.pulse);
    ordered_json exp;
    exp["phase_t1"] = e.phase_t1;
    exp["close_offset"] = e.close_offset;
    exp["idle"] = e.idle;
    exp["release"] = e.release;
    exp["dt"] = e.dt;
    exp["noise_window"] = e.noise_window;
    j["experiment"] = exp;
    j["acquisition"] = acquisition_json(e.acquisition);
    return j;
}

void run_simulate(const SimOpts& s) {
    const pulsecap_experiment cfg = build_experiment(s);

    pulsecap_experiment_result res{};
    check(pulsecap_experiment_run(&cfg, &res), "simulate");

    ordered_json rep;
    rep["config"] = experiment_config_json(cfg, s.recipe);
    ordered_json timing;
    timing["t_close"] = res.t_close;
    timing["t_reopen"] = res.t_reopen;
    timing["horizon"] = res.horizon;
    rep["timing"] = timing;
    rep["noise"] = noise_json(res.noise);
    ordered_json energies;
    energies["reflect"] = estimate_json(res.e_reflect);
    energies["release"] = estimate_json(res.e_release);
    energies["on_total"] = estimate_json(res.e_on_total);
    energies["off_total"] = estimate_json(res.e_off_total);
    rep["energies"] = energies;
    ordered_json effs;
    const auto eff_pair = [](double v, double sig) {
        ordered_json j;
        j["value"] = v;
        j["sigma"] = sig;
        return j;
    };
    effs["absorption"] =
        eff_pair(res.report.absorption, res.report.absorption_sigma);
    effs["storage"] = eff_pair(res.report.storage, res.report.storage_sigma);
    effs["receiver"] =
        eff_pair(res.report.receiver, res.report.receiver_sigma);
    rep["efficiencies"] = effs;
    ordered_json dyn;
    dyn["e_res"] = res.dynamics.e_res;
    dyn["e_tot"] = res.dynamics.e_tot;
    dyn["e_out"] = res.dynamics.e_out;
    dyn["e_lost"] = res.dynamics.e_lost;
    dyn["efficiency"] = res.dynamics.efficiency;
    dyn["absorption"] = res.dynamics_absorption;
    rep["dynamics"] = dyn;

    const std::string report_path = s.output + "_report.json";
    write_text(report_path, rep.dump(2));
    std::vector<std::string> written{report_path};

    if (!s.no_records) {
        pulsecap_raw_record* raw_cap = nullptr;
        pulsecap_raw_record* raw_ref = nullptr;
        pulsecap_processed_record* proc_cap = nullptr;
        pulsecap_processed_record* proc_ref = nullptr;
        check(pulsecap_experiment_records(&cfg, s.raw ? &raw_cap : nullptr,
                                          &proc_cap,
                                          s.raw ? &raw_ref : nullptr,
                                          &proc_ref),
              "simulate records");
        const auto cleanup = [&] {
            pulsecap_raw_free(raw_cap);
            pulsecap_raw_free(raw_ref);
            pulsecap_processed_free(proc_cap);
            pulsecap_processed_free(proc_ref);
        };
        try {
            const std::string cap_path = s.output + "_capture.csv";
            const std::string ref_path = s.output + "_reference.csv";
            check(pulsecap_processed_write_csv(proc_cap, cap_path.c_str()),
                  "write " + cap_path);
            written.push_back(cap_path);
            check(pulsecap_processed_write_csv(proc_ref, ref_path.c_str()),
                  "write " + ref_path);
            written.push_back(ref_path);
            if (s.raw) {
                const std::string rc = s.output + "_capture_raw.csv";
                const std::string rr = s.output + "_reference_raw.csv";
                check(pulsecap_raw_write_csv(raw_cap, rc.c_str()),
                      "write " + rc);
                written.push_back(rc);
                check(pulsecap_raw_write_csv(raw_ref, rr.c_str()),
                      "write " + rr);
                written.push_back(rr);
            }
        } catch (...) {
            cleanup();
            throw;
        }
        cleanup();
    }

    if (s.json_stdout) {
        std::cout << rep.dump(2) << "\n";
    } else {
        char line[160];
        std::snprintf(line, sizeof line, "absorption = %.6f +- %.6f",
                      res.report.absorption, res.report.absorption_sigma);
        std::cout << line << "\n";
        std::snprintf(line, sizeof line, "storage    = %.6f +- %.6f",
                      res.report.storage, res.report.storage_sigma);
        std::cout << line << "\n";
        std::snprintf(line, sizeof line, "receiver   = %.6f +- %.6f",
                      res.report.receiver, res.report.receiver_sigma);
        std::cout << line << "\n";
        std::snprintf(line, sizeof line,
                      "dynamics (noise-free): absorption %.6f, efficiency %.6f",
                      res.dynamics_absorption, res.dynamics.efficiency);
        std::cout << line << "\n";
        std::cout << "wrote " << join(written, " ") << "\n";
    }
}

// ---- estimate ------------------------------------------------------------------

struct EstimateOpts {
    std::string capture_path, reference_path, output;
    std::string noise_spec, reflect_spec, release_spec, total_spec;
    bool raw = false;
    std::uint64_t seed = 1;
};

pulsecap_processed_record* read_record(const std::string& path, bool raw) {
    pulsecap_processed_record* rec = nullptr;
    if (raw) {
        pulsecap_raw_record* r = nullptr;
        check(pulsecap_raw_read_csv(path.c_str(), &r), "read " + path);
        const pulsecap_status st = pulsecap_process(r, &rec);
        pulsecap_raw_free(r);
        check(st, "process " + path);
    } else {
        check(pulsecap_processed_read_csv(path.c_str(), &rec), "read " + path);
    }
    return rec;
}

void run_estimate(const EstimateOpts& o) {
    const auto noise_win = parse_window(o.noise_spec, "--noise-window");
    const auto reflect_win = parse_window(o.reflect_spec, "--reflect-window");
    const auto release_win = parse_window(o.release_spec, "--release-window");
    std::pair<double, double> total_win{reflect_win.first, release_win.second};
    if (!o.total_spec.empty())
        total_win = parse_window(o.total_spec, "--total-window");

    pulsecap_processed_record* cap = read_record(o.capture_path, o.raw);
    pulsecap_processed_record* ref = nullptr;
    const auto cleanup = [&] {
        pulsecap_processed_free(cap);
        pulsecap_processed_free(ref);
    };
    try {
        pulsecap_noise_estimate noise{};
        check(pulsecap_noise_energy(cap, noise_win.first, noise_win.second,
                                    &noise),
              "noise window");

        const auto subtracted = [&noise](pulsecap_processed_record* rec,
                                         const std::pair<double, double>& win,
                                         const pulsecap_noise_estimate& nz,
                                         const char* what) {
            double e = 0.0;
            std::uint64_t n = 0;
            check(pulsecap_window_energy(rec, win.first, win.second, &e, &n),
                  what);
            pulsecap_energy_estimate est{};
            check(pulsecap_noise_subtract(e, n, &nz, &est), what);
            return est;
        };

        const pulsecap_energy_estimate e_reflect =
            subtracted(cap, reflect_win, noise, "reflect window");
        const pulsecap_energy_estimate e_release =
            subtracted(cap, release_win, noise, "release window");

        double absorption = 0.0, absorption_sigma = 0.0;
        check(pulsecap_absorption_uncertainty(&e_release, &e_reflect, &noise,
                                              &absorption, &absorption_sigma),
              "absorption");

        ordered_json out;
        out["seed"] = o.seed;
        ordered_json inputs;
        inputs["capture"] = o.capture_path;
        if (!o.reference_path.empty()) inputs["reference"] = o.reference_path;
        inputs["format"] = o.raw ? "raw" : "processed";
        out["inputs"] = inputs;
        ordered_json windows;
        windows["noise"] = {noise_win.first, noise_win.second};
        windows["reflect"] = {reflect_win.first, reflect_win.second};
        windows["release"] = {release_win.first, release_win.second};
        ordered_json energies;
        energies["reflect"] = estimate_json(e_reflect);
        energies["release"] = estimate_json(e_release);
        ordered_json effs;
        ordered_json abs_j;
        abs_j["value"] = absorption;
        abs_j["sigma"] = absorption_sigma;
        effs["absorption"] = abs_j;

        if (!o.reference_path.empty()) {
            ref = read_record(o.reference_path, o.raw);
            windows["total"] = {total_win.first, total_win.second};
            pulsecap_noise_estimate noise_ref{};
            check(pulsecap_noise_energy(ref, noise_win.first, noise_win.second,
                                        &noise_ref),
                  "reference noise window");
            const pulsecap_energy_estimate e_on =
                subtracted(cap, total_win, noise, "total window");
            const pulsecap_energy_estimate e_off =
                subtracted(ref, total_win, noise_ref, "reference total window");
            pulsecap_efficiency_report report{};
            check(pulsecap_storage_receiver(&e_on, &e_off, absorption,
                                            absorption_sigma, &report),
                  "storage/receiver");
            energies["on_total"] = estimate_json(e_on);
            energies["off_total"] = estimate_json(e_off);
            ordered_json st_j;
            st_j["value"] = report.storage;
            st_j["sigma"] = report.storage_sigma;
            effs["storage"] = st_j;
            ordered_json rc_j;
            rc_j["value"] = report.receiver;
            rc_j["sigma"] = report.receiver_sigma;
            effs["receiver"] = rc_j;
        }

        out["windows"] = windows;
        out["noise"] = noise_json(noise);
        out["energies"] = energies;
        out["efficiencies"] = effs;

        const std::string text = out.dump(2);
        std::cout << text << "\n";
        if (!o.output.empty()) write_text(o.output, text);
    } catch (...) {
        cleanup();
        throw;
    }
    cleanup();
}

// ---- validate ------------------------------------------------------------------

struct ValidateOpts {
    std::string suite = "all";
    std::string output;
    std::uint64_t trials = 0;
    std::uint64_t seed = 1;
};

void run_validate(const ValidateOpts& v) {
    char* report = nullptr;
    int passed = 0;
    check(pulsecap_validate(v.suite.c_str(), v.trials, v.seed, &report,
                            &passed),
          "validate");
    const std::string text = take_string(report);
    const std::string pretty = ordered_json::parse(text).dump(2);
    std::cout << pretty << "\n";
    if (!v.output.empty()) write_text(v.output, pretty);
    if (!passed)
        throw CliFailure{3, "one or more validation properties failed"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "pulse-capture toolkit: closed-form and numeric capture efficiencies, "
        "parameter scans, synthetic heterodyne measurements, energy "
        "estimation, and self-validation suites"};
    app.set_version_flag("--version", std::string(pulsecap_version()));
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 "
        "validation failure.\n"
        "Time flags come in two families; mixing them in one invocation is "
        "an error:\n"
        "  dimensionless  --kappaT, --kappaTau, --kappaTprime, "
        "--deltaOverKappa, --kappaT1\n"
        "  SI             --kappa-hz, --T-ns, --tau-ns, --Tprime-ns, "
        "--detuning-mhz, --T1-us\n"
        "CSV column layouts are documented in docs/csv_formats.md and in "
        "each subcommand's help.");

    // coeffs ---------------------------------------------------------------
    CoeffsOpts coeffs;
    CLI::App* c_cmd = app.add_subcommand(
        "coeffs",
        "Print the coupler scattering coefficients for a system as JSON");
    c_cmd->add_option("--config", coeffs.config_path,
                      "JSON config file with a 'system' section");
    coeffs.o_freq = c_cmd->add_option("--frequency-ghz", coeffs.frequency_ghz,
                                      "Resonator frequency, GHz");
    coeffs.o_r1 =
        c_cmd->add_option("--r1-ohm", coeffs.r1, "Drive line impedance, ohm");
    coeffs.o_r2 = c_cmd->add_option("--r2-ohm", coeffs.r2,
                                    "Resonator line impedance, ohm");
    coeffs.o_taurt = c_cmd->add_option("--tau-rt-ns", coeffs.tau_rt_ns,
                                       "Round-trip time, ns (<= 0 selects "
                                       "pi/omega)");
    coeffs.o_kon = c_cmd->add_option("--kappa-on-hz", coeffs.kappa_on,
                                     "Coupler-open decay rate, 1/s");
    coeffs.o_T1 = c_cmd->add_option("--T1-us", coeffs.T1_us,
                                    "Internal-loss time T1, us");
    coeffs.o_keval = c_cmd->add_option(
        "--kappa-hz", coeffs.kappa_eval,
        "Decay rate at which to evaluate the coefficients, 1/s (default: "
        "the system's coupler-open rate)");
    c_cmd->add_option("--phase-t1", coeffs.phase_t1,
                      "Phase of the drive coupling coefficient, rad");
    c_cmd->add_option("--seed", coeffs.seed, "Seed recorded in the output")
        ->capture_default_str();
    c_cmd->add_option("-o,--output", coeffs.output,
                      "Also write the JSON to this file");
    c_cmd->callback([&coeffs] { run_coeffs(coeffs); });

    // efficiency -----------------------------------------------------------
    PointOpts eff;
    CLI::App* e_cmd = app.add_subcommand(
        "efficiency",
        "Capture efficiency of one pulse/coupler configuration");
    add_point_options(e_cmd, eff);
    e_cmd->add_option("--method", eff.method,
                      "analytic (closed forms), ode (numeric integration), "
                      "or both (reports their difference)")
        ->check(CLI::IsMember({"analytic", "ode", "both"}))
        ->capture_default_str();
    e_cmd->add_flag("--json", eff.json_stdout,
                    "Print the full JSON result instead of plain lines");
    e_cmd->add_option("-o,--output", eff.output,
                      "Also write the JSON result to this file");
    e_cmd->callback([&eff] { run_efficiency(eff); });

    // scan -------------------------------------------------------------------
    ScanOpts scan;
    CLI::App* s_cmd = app.add_subcommand(
        "scan",
        "Cartesian efficiency scan over named axes.  CSV columns: one per "
        "axis (native units of the active flag family), efficiency, "
        "[efficiency_norm,] ok, error; a JSON sidecar carries the resolved "
        "config.  Axes: T (capture time; sweeps the drive stop along with "
        "it unless the drive stop is pinned by a flag, config, Tprime axis, "
        "or delay axis), Tprime (drive stop), tau, delta_omega, delay "
        "(close minus drive stop), kappa, T1.");
    add_point_options(s_cmd, scan.point);
    s_cmd->add_option("--method", scan.point.method,
                      "analytic (closed forms) or ode (numeric integration)")
        ->check(CLI::IsMember({"analytic", "ode"}))
        ->capture_default_str();
    s_cmd->add_option("--axis", scan.axis_specs,
                      "Axis NAME=start:stop:count (inclusive linear grid) or "
                      "NAME=v1,v2,...; repeatable, last axis fastest")
        ->required();
    s_cmd->add_option("--threads", scan.threads,
                      "Worker threads for row evaluation")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    s_cmd->add_flag("--emit-plot-data", scan.emit_plot_data,
                    "Add an efficiency_norm column (efficiency / best "
                    "successful row)");
    s_cmd->add_option("-o,--output", scan.output, "Output CSV path")
        ->capture_default_str();
    s_cmd->callback([&scan] { run_scan(scan); });

    // simulate ----------------------------------------------------------------
    SimOpts sim;
    CLI::App* m_cmd = app.add_subcommand(
        "simulate",
        "End-to-end synthetic measurement: integrate the capture dynamics, "
        "synthesize the heterodyne records (capture + coupler-closed "
        "reference), process them, and estimate the efficiencies with "
        "uncertainties.  Writes <prefix>_report.json plus processed-record "
        "CSVs (columns: t, re_v, im_v, energy; energy is the running "
        "noise-subtracted E(t) curve).");
    m_cmd->add_option("--recipe", sim.recipe,
                      "Preset: time-reversed (rising exponential tau = "
                      "2/kappa, 400 ns drive) or natural (decaying "
                      "exponential, 100 ns drive)")
        ->check(CLI::IsMember({"time-reversed", "natural"}))
        ->capture_default_str();
    m_cmd->add_option("--config", sim.config_path,
                      "JSON config file; sections: system, pulse, experiment "
                      "(phase_t1, close_offset, idle, release, dt, "
                      "noise_window), acquisition.  Applied on top of the "
                      "recipe; flags override both.");
    sim.o_shape = m_cmd->add_option("--shape", sim.shape, "Pulse shape")
                      ->check(CLI::IsMember({"rect", "exp"}));
    sim.o_kappa = m_cmd->add_option("--kappa-hz", sim.kappa_hz,
                                    "Coupler decay rate kappa, 1/s");
    sim.o_T1 =
        m_cmd->add_option("--T1-us", sim.T1_us, "Internal-loss time T1, us");
    sim.o_amp = m_cmd->add_option("--amplitude", sim.amplitude,
                                  "Drive envelope scale");
    sim.o_tau = m_cmd->add_option("--tau-ns", sim.tau_ns,
                                  "Exponential constant tau, ns (signed)");
    sim.o_drive = m_cmd->add_option("--drive-ns", sim.drive_ns,
                                    "Drive duration, ns");
    sim.o_det = m_cmd->add_option("--detuning-mhz", sim.det_mhz,
                                  "Drive detuning delta_omega/2pi, MHz");
    sim.o_phase = m_cmd->add_option("--phase-t1", sim.phase_t1,
                                    "Phase of the drive coupling, rad");
    sim.o_close = m_cmd->add_option("--close-offset-ns", sim.close_ns,
                                    "Coupler closes this long after the "
                                    "drive stops, ns");
    sim.o_idle = m_cmd->add_option("--idle-ns", sim.idle_ns,
                                   "Coupler-closed hold before release, ns");
    sim.o_release = m_cmd->add_option("--release-ns", sim.release_ns,
                                      "Release observation span, ns (<= 0 "
                                      "selects 8/kappa)");
    sim.o_dt = m_cmd->add_option("--dt", sim.dt,
                                 "Integrator step, s (<= 0 selects the "
                                 "default)");
    sim.o_sigma = m_cmd->add_option("--noise-sigma", sim.noise_sigma,
                                    "Per-quadrature noise level before "
                                    "averaging");
    sim.o_navg = m_cmd->add_option("--n-averages", sim.n_averages,
                                   "Averaging count (noise scales as "
                                   "1/sqrt(n))");
    sim.o_lit = m_cmd->add_option("--literal-averages", sim.literal_averages,
                                  "Actually synthesize and average this many "
                                  "records");
    sim.o_filter = m_cmd->add_option("--filter", sim.filter,
                                     "Low-pass filter implementation")
                       ->check(CLI::IsMember({"brickwall", "windowed_sinc"}));
    sim.o_nwin = m_cmd->add_option("--noise-window-ns", sim.noise_window_ns,
                                   "Noise-estimation window inside the "
                                   "pre-drive span, ns (<= 0 selects the "
                                   "full span minus guards)");
    sim.o_seed = m_cmd->add_option("--seed", sim.seed,
                                   "Noise seed recorded in every output");
    m_cmd->add_flag("--raw", sim.raw,
                    "Also write raw I/Q records (columns: t, i, q)");
    m_cmd->add_flag("--no-records", sim.no_records,
                    "Skip the record CSVs; write only the report");
    m_cmd->add_flag("--json", sim.json_stdout,
                    "Print the full report JSON instead of the summary");
    m_cmd->add_option("-o,--output", sim.output,
                      "Output file prefix")
        ->capture_default_str();
    m_cmd->callback([&sim] { run_simulate(sim); });

    // estimate ----------------------------------------------------------------
    EstimateOpts est;
    CLI::App* t_cmd = app.add_subcommand(
        "estimate",
        "Window-energy estimation on recorded CSVs: noise-subtracted "
        "energies, absorption efficiency with uncertainty, and (with a "
        "reference record) storage/receiver efficiencies.  Windows are "
        "begin:end in seconds on the record time axis.");
    t_cmd->add_option("--capture", est.capture_path,
                      "Capture record CSV (processed unless --raw)")
        ->required();
    t_cmd->add_option("--reference", est.reference_path,
                      "Coupler-closed reference record CSV");
    t_cmd->add_flag("--raw", est.raw,
                    "Inputs are raw I/Q records; demodulate and filter them "
                    "first");
    t_cmd->add_option("--noise-window", est.noise_spec,
                      "Signal-free window used for the noise estimate")
        ->required();
    t_cmd->add_option("--reflect-window", est.reflect_spec,
                      "Window holding the reflected/unabsorbed drive energy")
        ->required();
    t_cmd->add_option("--release-window", est.release_spec,
                      "Window holding the released (captured) energy")
        ->required();
    t_cmd->add_option("--total-window", est.total_spec,
                      "Window for the on/off energy ratio (default: reflect "
                      "begin to release end)");
    t_cmd->add_option("--seed", est.seed, "Seed recorded in the output")
        ->capture_default_str();
    t_cmd->add_option("-o,--output", est.output,
                      "Also write the report JSON to this file");
    t_cmd->callback([&est] { run_estimate(est); });

    // validate ----------------------------------------------------------------
    ValidateOpts val;
    CLI::App* v_cmd = app.add_subcommand(
        "validate",
        "Run the self-validation suites (closed-form vs numeric agreement, "
        "energy conservation, detuning symmetry, delay factors, estimator "
        "statistics) and print the JSON verdict");
    v_cmd->add_option("--suite", val.suite, "Suite to run")
        ->check(CLI::IsMember({"analytic", "conservation", "detuning", "delay",
                               "statistics", "all"}))
        ->capture_default_str();
    v_cmd->add_option("--trials", val.trials,
                      "Randomized trials per suite (0 selects each suite's "
                      "default)")
        ->capture_default_str();
    v_cmd->add_option("--seed", val.seed, "Suite seed")
        ->capture_default_str();
    v_cmd->add_option("-o,--output", val.output,
                      "Also write the verdict JSON to this file");
    v_cmd->callback([&val] { run_validate(val); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const CliFailure& f) {
        if (!f.message.empty()) std::cerr << "error: " << f.message << "\n";
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
