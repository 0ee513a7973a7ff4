// End-to-end experiment composition: dynamics -> acquisition -> processing ->
// window estimation, for a capture/idle/release protocol plus the coupler-off
// reference run the storage and receiver efficiencies need.
#pragma once

#include "pulsecap/estimation.hpp"

namespace pulsecap {

struct ExperimentConfig {
    SystemParams sys;
    PulseSpec pulse;
    double phase_t1 = 0.0;

    double close_offset = 0.0;  // coupler closes this long after the drive stops (s)
    double idle = 30.0e-9;      // coupler-closed hold before release (s)
    double release = 0.0;       // release observation span; <=0 -> 8/kappa_on
    double dt = 0.0;            // integrator step; <=0 -> default

    AcquisitionConfig acquisition;

    // Noise window inside the pre-drive span, relative to record start;
    // <=0 -> the full pre-drive span minus a 16-sample guard at each edge.
    double noise_window = 0.0;
};

struct ExperimentResult {
    EfficiencyReport report;

    // Window energies behind the report.
    EnergyEstimate e_reflect;   // drive/reflect window [0, t_close)
    EnergyEstimate e_release;   // release window [t_reopen, horizon)
    EnergyEstimate e_on_total;  // both windows combined
    EnergyEstimate e_off_total; // reference run, same span
    NoiseEstimate noise;

    // Dynamics-side ground truth of the capture run (for noiseless
    // consistency checks): e_res/e_tot plus the window ratio the pipeline
    // is expected to reproduce.
    EnergyLedger dynamics;
    double dynamics_absorption = 0.0;

    // Timing actually used.
    double t_close = 0.0;
    double t_reopen = 0.0;
    double horizon = 0.0;
};

// Run the capture experiment and the coupler-off reference (seed+1), process
// both records, and assemble the efficiency report.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& cfg);

// The processed records of the two runs, for export.
struct ExperimentRecords {
    RawRecord raw_capture;
    ProcessedRecord processed_capture;
    RawRecord raw_reference;
    ProcessedRecord processed_reference;
};

[[nodiscard]] ExperimentRecords experiment_records(const ExperimentConfig& cfg);

}  // namespace pulsecap
