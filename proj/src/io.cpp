#include "pulsecap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pulsecap {

namespace {

using nlohmann::ordered_json;

ordered_json parse_object(const std::string& text, const char* who) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string(who) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument(std::string(who) + ": expected a JSON object");
    return j;
}

void reject_unknown(const ordered_json& j, const char* who,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument(std::string(who) + ": unknown key '" +
                                        item.key() + "'");
    }
}

double get_number(const ordered_json& j, const char* who, const char* key,
                  double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw std::invalid_argument(std::string(who) + ": key '" + key +
                                    "' must be a number");
    return j.at(key).get<double>();
}

// A time that may be infinite is serialized as the string "inf" (JSON has no
// infinity literal); parsers accept either a number or that string.
double get_time_or_inf(const ordered_json& j, const char* who, const char* key,
                       double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
        throw std::invalid_argument(std::string(who) + ": key '" + key +
                                    "' must be a number or \"inf\"");
    }
    if (!v.is_number())
        throw std::invalid_argument(std::string(who) + ": key '" + key +
                                    "' must be a number or \"inf\"");
    return v.get<double>();
}

std::uint64_t get_uint(const ordered_json& j, const char* who, const char* key,
                       std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_unsigned())
        throw std::invalid_argument(std::string(who) + ": key '" + key +
                                    "' must be a non-negative integer");
    return j.at(key).get<std::uint64_t>();
}

std::string get_string(const ordered_json& j, const char* who, const char* key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string())
        throw std::invalid_argument(std::string(who) + ": key '" + key +
                                    "' must be a string");
    return j.at(key).get<std::string>();
}

ordered_json time_or_inf_json(double t) {
    if (std::isinf(t)) return "inf";
    return t;
}

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    return out;
}

// Split one CSV data row into exactly `n` doubles.
std::vector<double> split_row(const std::string& line, std::size_t n,
                              const std::string& path) {
    std::vector<double> out;
    out.reserve(n);
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const std::size_t comma = line.find(',', pos);
        const std::string cell =
            line.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw std::runtime_error("read_csv: bad number '" + cell + "' in " +
                                     path);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.size() != n)
        throw std::runtime_error("read_csv: expected " + std::to_string(n) +
                                 " columns in " + path);
    return out;
}

// Shared reader scaffold: collects comment lines, checks the header, returns
// data rows of `cols` numbers each.
struct CsvBody {
    std::vector<std::string> comments;
    std::vector<std::vector<double>> rows;
};

CsvBody read_csv_body(const std::string& path, const std::string& header,
                      std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
    CsvBody body;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            body.comments.push_back(line);
            continue;
        }
        if (!header_seen) {
            if (line != header)
                throw std::runtime_error("read_csv: expected header '" + header +
                                         "' in " + path);
            header_seen = true;
            continue;
        }
        body.rows.push_back(split_row(line, cols, path));
    }
    if (!header_seen)
        throw std::runtime_error("read_csv: missing header in " + path);
    if (body.rows.size() < 2)
        throw std::runtime_error("read_csv: need at least 2 data rows in " + path);
    return body;
}

// Restore the acquisition config from the first parseable comment line.
bool config_from_comments(const std::vector<std::string>& comments,
                          AcquisitionConfig& out) {
    for (const auto& c : comments) {
        std::size_t start = 1;
        while (start < c.size() && c[start] == ' ') ++start;
        const std::string text = c.substr(start);
        if (text.empty() || text[0] != '{') continue;
        try {
            out = acquisition_from_json(text);
            return true;
        } catch (const std::exception&) {
            continue;  // a plain comment, not a config snapshot
        }
    }
    return false;
}

// The %.17g time column round-trips each sample, but differencing two of
// them still loses the last bit of dt; when the embedded config agrees with
// the column spacing, 1/sample_rate restores dt exactly.
double resolve_dt(bool have_config, const AcquisitionConfig& cfg,
                  const std::vector<std::vector<double>>& rows) {
    const double from_rows = rows[1][0] - rows[0][0];
    if (have_config && cfg.sample_rate > 0.0) {
        const double from_config = 1.0 / cfg.sample_rate;
        if (std::abs(from_config - from_rows) <= 1e-6 * std::abs(from_rows))
            return from_config;
    }
    return from_rows;
}

}  // namespace

SystemParams system_from_json(const std::string& text) {
    const char* who = "system_from_json";
    const ordered_json j = parse_object(text, who);
    reject_unknown(j, who,
                   {"omega_rad_s", "frequency_hz", "r1_impedance", "r2_impedance",
                    "tau_rt", "kappa_on", "kappa_i"});
    SystemParams sys;
    if (j.contains("omega_rad_s") && j.contains("frequency_hz"))
        throw std::invalid_argument(
            std::string(who) + ": give either omega_rad_s or frequency_hz, not both");
    if (j.contains("frequency_hz"))
        sys.omega = 2.0 * kPi * get_number(j, who, "frequency_hz", 0.0);
    else
        sys.omega = get_number(j, who, "omega_rad_s", sys.omega);
    sys.r1_impedance = get_number(j, who, "r1_impedance", sys.r1_impedance);
    sys.r2_impedance = get_number(j, who, "r2_impedance", sys.r2_impedance);
    sys.tau_rt = get_number(j, who, "tau_rt", sys.tau_rt);
    sys.kappa_on = get_number(j, who, "kappa_on", sys.kappa_on);
    sys.kappa_i = get_number(j, who, "kappa_i", sys.kappa_i);
    sys.validate();
    return sys;
}

PulseSpec pulse_from_json(const std::string& text) {
    const char* who = "pulse_from_json";
    const ordered_json j = parse_object(text, who);
    reject_unknown(j, who, {"shape", "amplitude", "tau", "t_drive", "detuning"});
    PulseSpec pulse;
    const std::string shape = get_string(j, who, "shape", "rectangular");
    if (shape == "rectangular")
        pulse.shape = PulseShape::rectangular;
    else if (shape == "exponential")
        pulse.shape = PulseShape::exponential;
    else
        throw std::invalid_argument(std::string(who) + ": unknown shape '" +
                                    shape + "'");
    pulse.amplitude = get_number(j, who, "amplitude", pulse.amplitude);
    pulse.tau = get_number(j, who, "tau", pulse.tau);
    pulse.t_drive = get_time_or_inf(j, who, "t_drive", pulse.t_drive);
    pulse.detuning = get_number(j, who, "detuning", pulse.detuning);
    pulse.validate();
    return pulse;
}

CouplerSchedule schedule_from_json(const std::string& text) {
    const char* who = "schedule_from_json";
    const ordered_json j = parse_object(text, who);
    reject_unknown(j, who, {"t_close", "kappa_off", "ramp", "t_reopen"});
    CouplerSchedule sched;
    sched.t_close = get_number(j, who, "t_close", sched.t_close);
    sched.kappa_off = get_number(j, who, "kappa_off", sched.kappa_off);
    sched.ramp = get_number(j, who, "ramp", sched.ramp);
    sched.t_reopen = get_time_or_inf(j, who, "t_reopen", sched.t_reopen);
    sched.validate();
    return sched;
}

AcquisitionConfig acquisition_from_json(const std::string& text) {
    const char* who = "acquisition_from_json";
    const ordered_json j = parse_object(text, who);
    reject_unknown(
        j, who,
        {"sample_rate", "f_sb", "q_scale", "dc_offset_i", "dc_offset_q",
         "noise_sigma", "n_averages", "literal_averages", "pre_drive", "duration",
         "lowpass_hz", "filter", "sinc_taps", "adc_bits", "adc_full_scale",
         "q_correction", "spur_freq", "spur_amplitude", "seed"});
    AcquisitionConfig cfg;
    cfg.sample_rate = get_number(j, who, "sample_rate", cfg.sample_rate);
    cfg.f_sb = get_number(j, who, "f_sb", cfg.f_sb);
    cfg.q_scale = get_number(j, who, "q_scale", cfg.q_scale);
    cfg.dc_offset = {get_number(j, who, "dc_offset_i", cfg.dc_offset.real()),
                     get_number(j, who, "dc_offset_q", cfg.dc_offset.imag())};
    cfg.noise_sigma = get_number(j, who, "noise_sigma", cfg.noise_sigma);
    cfg.n_averages = get_number(j, who, "n_averages", cfg.n_averages);
    cfg.literal_averages = static_cast<std::uint32_t>(
        get_uint(j, who, "literal_averages", cfg.literal_averages));
    cfg.pre_drive = get_number(j, who, "pre_drive", cfg.pre_drive);
    cfg.duration = get_number(j, who, "duration", cfg.duration);
    cfg.lowpass_hz = get_number(j, who, "lowpass_hz", cfg.lowpass_hz);
    const std::string filter = get_string(
        j, who, "filter",
        cfg.filter == FilterKind::brickwall ? "brickwall" : "windowed_sinc");
    if (filter == "brickwall")
        cfg.filter = FilterKind::brickwall;
    else if (filter == "windowed_sinc")
        cfg.filter = FilterKind::windowed_sinc;
    else
        throw std::invalid_argument(std::string(who) + ": unknown filter '" +
                                    filter + "'");
    cfg.sinc_taps =
        static_cast<int>(get_uint(j, who, "sinc_taps",
                                  static_cast<std::uint64_t>(cfg.sinc_taps)));
    cfg.adc_bits = static_cast<int>(
        get_uint(j, who, "adc_bits", static_cast<std::uint64_t>(cfg.adc_bits)));
    cfg.adc_full_scale = get_number(j, who, "adc_full_scale", cfg.adc_full_scale);
    cfg.q_correction = get_number(j, who, "q_correction", cfg.q_correction);
    cfg.spur_freq = get_number(j, who, "spur_freq", cfg.spur_freq);
    cfg.spur_amplitude = get_number(j, who, "spur_amplitude", cfg.spur_amplitude);
    cfg.seed = get_uint(j, who, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

std::string to_json(const SystemParams& sys) {
    ordered_json j;
    j["omega_rad_s"] = sys.omega;
    j["r1_impedance"] = sys.r1_impedance;
    j["r2_impedance"] = sys.r2_impedance;
    j["tau_rt"] = sys.tau_rt;
    j["kappa_on"] = sys.kappa_on;
    j["kappa_i"] = sys.kappa_i;
    return j.dump();
}

std::string to_json(const PulseSpec& pulse) {
    ordered_json j;
    j["shape"] =
        pulse.shape == PulseShape::rectangular ? "rectangular" : "exponential";
    j["amplitude"] = pulse.amplitude;
    j["tau"] = pulse.tau;
    j["t_drive"] = time_or_inf_json(pulse.t_drive);
    j["detuning"] = pulse.detuning;
    return j.dump();
}

std::string to_json(const CouplerSchedule& schedule) {
    ordered_json j;
    j["t_close"] = schedule.t_close;
    j["kappa_off"] = schedule.kappa_off;
    j["ramp"] = schedule.ramp;
    j["t_reopen"] = time_or_inf_json(schedule.t_reopen);
    return j.dump();
}

std::string to_json(const AcquisitionConfig& cfg) {
    ordered_json j;
    j["sample_rate"] = cfg.sample_rate;
    j["f_sb"] = cfg.f_sb;
    j["q_scale"] = cfg.q_scale;
    j["dc_offset_i"] = cfg.dc_offset.real();
    j["dc_offset_q"] = cfg.dc_offset.imag();
    j["noise_sigma"] = cfg.noise_sigma;
    j["n_averages"] = cfg.n_averages;
    j["literal_averages"] = cfg.literal_averages;
    j["pre_drive"] = cfg.pre_drive;
    j["duration"] = cfg.duration;
    j["lowpass_hz"] = cfg.lowpass_hz;
    j["filter"] =
        cfg.filter == FilterKind::brickwall ? "brickwall" : "windowed_sinc";
    j["sinc_taps"] = cfg.sinc_taps;
    j["adc_bits"] = cfg.adc_bits;
    j["adc_full_scale"] = cfg.adc_full_scale;
    j["q_correction"] = cfg.q_correction;
    j["spur_freq"] = cfg.spur_freq;
    j["spur_amplitude"] = cfg.spur_amplitude;
    j["seed"] = cfg.seed;
    return j.dump();
}

void write_csv(const FieldTrajectory& traj, const std::string& path,
               const std::string& config_json) {
    auto out = open_out(path);
    if (!config_json.empty()) out << "# " << config_json << "\n";
    out << "t,re_a,im_a,re_b,im_b,re_vout,im_vout,kappa\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << fmt17(traj.times[k]) << ',' << fmt17(traj.a_drive[k].real()) << ','
            << fmt17(traj.a_drive[k].imag()) << ',' << fmt17(traj.b_field[k].real())
            << ',' << fmt17(traj.b_field[k].imag()) << ','
            << fmt17(traj.v_out[k].real()) << ',' << fmt17(traj.v_out[k].imag())
            << ',' << fmt17(traj.kappa_of_t[k]) << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

void write_csv(const RawRecord& rec, const std::string& path) {
    auto out = open_out(path);
    out << "# " << to_json(rec.config) << "\n";
    out << "t,i,q\n";
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << fmt17(rec.time_at(k)) << ',' << fmt17(rec.i_samples[k]) << ','
            << fmt17(rec.q_samples[k]) << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

void write_csv(const ProcessedRecord& rec, const std::string& path) {
    auto out = open_out(path);
    out << "# " << to_json(rec.config) << "\n";
    // Derived state that is not a column: restored by read_processed_csv.
    ordered_json extra;
    extra["noise_power"] = rec.noise_power;
    extra["noise_corr_beat"] = rec.noise_corr_beat;
    extra["noise_corr_sq"] = rec.noise_corr_sq;
    out << "#! " << extra.dump() << "\n";
    out << "t,re_v,im_v,energy\n";
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << fmt17(rec.time_at(k)) << ',' << fmt17(rec.v[k].real()) << ','
            << fmt17(rec.v[k].imag()) << ',' << fmt17(rec.energy[k]) << '\n';
    }
    if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

RawRecord read_raw_csv(const std::string& path) {
    const CsvBody body = read_csv_body(path, "t,i,q", 3);
    RawRecord rec;
    const bool have_config = config_from_comments(body.comments, rec.config);
    rec.t0 = body.rows.front()[0];
    rec.dt = resolve_dt(have_config, rec.config, body.rows);
    if (rec.dt <= 0.0)
        throw std::runtime_error("read_raw_csv: non-increasing time column in " +
                                 path);
    rec.i_samples.reserve(body.rows.size());
    rec.q_samples.reserve(body.rows.size());
    for (const auto& row : body.rows) {
        rec.i_samples.push_back(row[1]);
        rec.q_samples.push_back(row[2]);
    }
    return rec;
}

ProcessedRecord read_processed_csv(const std::string& path) {
    const CsvBody body = read_csv_body(path, "t,re_v,im_v,energy", 4);
    ProcessedRecord rec;
    const bool have_config = config_from_comments(body.comments, rec.config);
    for (const auto& c : body.comments) {
        if (c.rfind("#! ", 0) != 0) continue;
        try {
            const ordered_json extra = ordered_json::parse(c.substr(3));
            rec.noise_power = extra.value("noise_power", 0.0);
            rec.noise_corr_beat = extra.value("noise_corr_beat", 1.0);
            rec.noise_corr_sq = extra.value("noise_corr_sq", 1.0);
        } catch (const std::exception&) {
            // plain comment
        }
    }
    rec.t0 = body.rows.front()[0];
    rec.dt = resolve_dt(have_config, rec.config, body.rows);
    if (rec.dt <= 0.0)
        throw std::runtime_error(
            "read_processed_csv: non-increasing time column in " + path);
    rec.v.reserve(body.rows.size());
    rec.energy.reserve(body.rows.size());
    for (const auto& row : body.rows) {
        rec.v.emplace_back(row[1], row[2]);
        rec.energy.push_back(row[3]);
    }
    return rec;
}

}  // namespace pulsecap
