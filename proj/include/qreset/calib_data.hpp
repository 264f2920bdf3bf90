#pragma once

#include <string>
#include <vector>

namespace qreset {

/// One sweep: x is a drive-frequency offset (MHz) for the spectroscopy steps
/// or a pulse duration (s) for the Rabi steps; y is a population in [0, 1]
/// up to readout noise.
struct CalibDataset {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;  // optional standard errors (may be empty)
    double amplitude_v = 0.0;   // drive amplitude this sweep was taken at
    int step = 0;               // calibration step 1-4

    void validate() const;
};

/// Amplitude and sweep grids for the four calibration steps. Frequency
/// windows are predicted from the rough priors below (experimenter
/// knowledge); they only need to contain the true resonance, not match it.
struct CalibPlan {
    std::vector<double> stark_amps_v = {0.15, 0.225, 0.30, 0.375, 0.45};   // steps 1 and 3
    std::vector<double> ef_amps_v = {0.004, 0.006, 0.008, 0.010, 0.012};   // step 2
    std::vector<double> f0g1_amps_v = {0.20, 0.2625, 0.325, 0.3875, 0.45}; // step 4
    int n_freq = 25;
    int n_time = 33;
    int shots_per_point = 2000;  // 0 = noiseless
    double prior_stark_f0g1_mhz_per_v2 = -25.0;  // true value unknown to the pipeline
    double prior_stark_ef_mhz_per_v2 = -10.0;
    double prior_slope_f0g1_mhz_per_v = 9.0;
    double prior_slope_ef_mhz_per_v = 320.0;
    double time_span_periods = 2.5;
};

struct CalibData {
    std::vector<CalibDataset> step1, step2, step3, step4;
};

}  // namespace qreset
