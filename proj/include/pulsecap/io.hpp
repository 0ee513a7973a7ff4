// JSON config parsing for the domain structs and CSV import/export for
// trajectories and records.  CSV files start with a '# {json}' comment line
// embedding the configuration that produced them.
#pragma once

#include <string>

#include "pulsecap/dynamics.hpp"
#include "pulsecap/signalsim.hpp"

namespace pulsecap {

// Parsers accept a JSON object text with keys mirroring the struct fields.
// SystemParams additionally accepts "frequency_hz" (converted by 2*pi) as an
// alternative to "omega_rad_s"; passing both is an error.  Unknown keys are
// rejected.  All throw std::invalid_argument with a field-level message.
[[nodiscard]] SystemParams system_from_json(const std::string& text);
[[nodiscard]] PulseSpec pulse_from_json(const std::string& text);
[[nodiscard]] CouplerSchedule schedule_from_json(const std::string& text);
[[nodiscard]] AcquisitionConfig acquisition_from_json(const std::string& text);

// JSON snapshots (stable key order) for embedding in outputs.
[[nodiscard]] std::string to_json(const SystemParams& sys);
[[nodiscard]] std::string to_json(const PulseSpec& pulse);
[[nodiscard]] std::string to_json(const CouplerSchedule& schedule);
[[nodiscard]] std::string to_json(const AcquisitionConfig& cfg);

// CSV I/O.  Columns: trajectory t,re_a,im_a,re_b,im_b,re_vout,im_vout,kappa;
// raw record t,i,q; processed record t,re_v,im_v,energy.  Writers embed the
// config comment line; readers skip '#' lines.  Throw std::runtime_error on
// I/O or format errors.
void write_csv(const FieldTrajectory& traj, const std::string& path,
               const std::string& config_json);
void write_csv(const RawRecord& rec, const std::string& path);
void write_csv(const ProcessedRecord& rec, const std::string& path);
[[nodiscard]] RawRecord read_raw_csv(const std::string& path);
[[nodiscard]] ProcessedRecord read_processed_csv(const std::string& path);

}  // namespace pulsecap
