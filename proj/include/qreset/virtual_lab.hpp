#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "qreset/calib_data.hpp"
#include "qreset/params.hpp"
#include "qreset/readout.hpp"

namespace qreset {

/// Ground-truth readout geometry: the three (u, v) clusters with their shared
/// covariance, plus the 1-D herald model (ground cluster at larger c1).
struct GmmTruth {
    std::array<Eigen::Vector2d, 3> means;
    Eigen::Matrix2d sigma;
    double herald_mu_ground = 3.2;
    double herald_sigma_ground = 1.0;
    double herald_mu_excited = -3.2;
    double herald_sigma_excited = 1.0;
};

/// Everything the synthetic lab knows and the calibration must recover:
/// device parameters, the amplitude-to-rate slopes, the quadratic ac-Stark
/// coefficients and the readout truth. Fully deterministic given seed.
struct LabTruth {
    SystemParams params;
    double slope_f0g1_mhz_per_v = 10.8;   // g_tilde per volt
    double stark_f0g1_mhz_per_v2 = -30.0; // f0-g1 shift from its own drive
    double slope_ef_mhz_per_v = 375.0;    // omega_ef per volt
    double stark_ef_mhz_per_v2 = -12.0;   // e-f shift induced by the f0-g1 drive
    GmmTruth gmm;
    double pi_error = 0.005;   // symmetric population-swap error of the pi pulses
    double t_gap_s = 50e-9;    // wait between the last pulse and the readout
    double t_edge_s = 6e-9;    // extra effective drive time from pulse edges
    std::uint64_t seed = 0;
};

LabTruth default_lab_truth(std::uint64_t seed = 0);

/// Drive rates and detunings for given instrument amplitudes. Frequencies are
/// offsets (MHz) from the undriven transitions; the detuning is the offset
/// minus the amplitude-dependent Stark shift.
DriveConfig lab_drives(const LabTruth& truth, double v_f0g1, double nu_f0g1_offset_mhz,
                       double v_ef, double nu_ef_offset_mhz);

enum class SegmentKind { pi_ge, pi_ef, drive, idle, readout };

struct PulseSegment {
    SegmentKind kind = SegmentKind::idle;
    double duration_s = 0.0;  // drive/idle segments only
    DriveConfig drives;       // drive segments only
};

/// Ordered pulse sequence ending in a readout marker; t_gap idles the system
/// between the last pulse and the readout.
struct PulseSchedule {
    std::vector<PulseSegment> segments;
    double t_gap_s = 0.0;

    void validate() const;  // positive durations, exactly one readout marker
};

PulseSegment pi_ge();
PulseSegment pi_ef();
PulseSegment drive_segment(double duration_s, const DriveConfig& drives);
PulseSegment idle_segment(double duration_s);
PulseSegment readout_marker();

/// Evolves |g,0> through the schedule (pi pulses as instantaneous population
/// swaps with error truth.pi_error, drive/idle segments under the full master
/// equation) and returns (P_g, P_e, P_f) at the readout marker.
Eigen::Vector3d run_schedule(const LabTruth& truth, const PulseSchedule& schedule);

/// Draws n_shots latent states from `populations` and a (u, v) point from the
/// latent state's Gaussian. Addressed by (seed, experiment, point, shot):
/// bit-identical on any thread count. sample_shots uses OpenMP;
/// sample_shots_serial is the reference.
ShotSet sample_shots(const Eigen::Vector3d& populations, const GmmTruth& gmm, int n_shots,
                     std::uint64_t seed, std::uint64_t experiment = 0, std::uint64_t point = 0);
ShotSet sample_shots_serial(const Eigen::Vector3d& populations, const GmmTruth& gmm,
                            int n_shots, std::uint64_t seed, std::uint64_t experiment = 0,
                            std::uint64_t point = 0);

/// Multinomial population estimate: the observed fraction of n_shots latent
/// draws that landed in each state. n_shots = 0 returns the exact populations.
Eigen::Vector3d sample_population_fraction(const Eigen::Vector3d& populations, int n_shots,
                                           std::uint64_t seed, std::uint64_t experiment,
                                           std::uint64_t point);

/// The three reference shot sets (nominal preparations g, e, f) produced by
/// the heralded prepare-and-measure sequence.
std::array<ShotSet, 3> reference_shot_sets(const LabTruth& truth, int n_shots,
                                           std::uint64_t experiment = 40);

/// Bimodal herald samples (first principal component of the pre-selection
/// traces) with weights (1 - n_th, n_th).
std::vector<double> generate_herald_traces(const LabTruth& truth, int n, std::uint64_t seed);

// Per-step sweep generators. The frequency/amplitude settings that a real
// experimenter would derive from earlier steps are passed in explicitly;
// generate_calibration_data wires them from the plan priors.
std::vector<CalibDataset> generate_step1(const LabTruth& truth, const CalibPlan& plan);
std::vector<CalibDataset> generate_step2(const LabTruth& truth, const CalibPlan& plan);
std::vector<CalibDataset> generate_step3(const LabTruth& truth, const CalibPlan& plan,
                                         double ef_pi_amp_v,
                                         double stark_f0g1_est_mhz_per_v2);
std::vector<CalibDataset> generate_step3(const LabTruth& truth, const CalibPlan& plan,
                                         double ef_pi_amp_v);
std::vector<CalibDataset> generate_step4(const LabTruth& truth, const CalibPlan& plan,
                                         double stark_f0g1_est_mhz_per_v2);

/// All four steps with plan-prior settings (standalone data dumps). The
/// calibration pipeline instead calls the step generators with its own
/// intermediate estimates.
CalibData generate_calibration_data(const LabTruth& truth, const CalibPlan& plan);

}  // namespace qreset
