#pragma once

#include <optional>
#include <string>

#include "qreset/units.hpp"

namespace qreset {

/// Purcell-filter numbers carried along for bookkeeping only; the dynamics
/// model the resonator purely through its effective linewidth kappa.
struct PurcellMetadata {
    double omega_pf_mhz = 0.0;
    double q_pf = 0.0;
    double j_mhz = 0.0;
};

/// Device rates and coherence times. Immutable by convention: construct,
/// validate, share freely across threads.
struct SystemParams {
    Frequency omega_ge;   // g-e transition
    Frequency omega_r;    // reset resonator
    Frequency omega_m;    // readout resonator
    Frequency alpha;      // anharmonicity (negative)
    Frequency chi_r;      // dispersive shift, reset resonator (negative)
    Frequency chi_m;      // dispersive shift, readout resonator (negative)
    Frequency kappa;      // effective reset-resonator linewidth
    Frequency kappa_m;    // readout-resonator linewidth
    Frequency kappa_int;  // internal resonator loss (0 unless configured)
    Frequency g_r;        // transmon-reset resonator coupling
    Frequency g_m;        // transmon-readout resonator coupling

    double t1_ge_s = 0.0;
    double t1_ef_s = 0.0;
    double t2_ge_s = 0.0;
    double t2_ef_s = 0.0;

    double n_th = 0.0;  // equilibrium excited-state population
    Frequency k_up;     // upward thermalization rate

    std::optional<PurcellMetadata> purcell_r;
    std::optional<PurcellMetadata> purcell_m;

    double gamma1_ge() const { return 1.0 / t1_ge_s; }
    double gamma1_ef() const { return 1.0 / t1_ef_s; }
    // Pure dephasing, from 1/T2 = 1/(2 T1) + gamma_phi. Must be >= 0 for
    // physical input; validate() rejects otherwise.
    double gamma_phi_ge() const { return 1.0 / t2_ge_s - 0.5 / t1_ge_s; }
    double gamma_phi_ef() const { return 1.0 / t2_ef_s - 0.5 / t1_ef_s; }

    /// k_up * T1_ge, expected to be close to n_th for a self-consistent set.
    double thermal_consistency() const { return k_up.rad_per_s() * t1_ge_s; }

    /// Throws InvalidParameter on nonpositive rates/times, n_th outside
    /// [0, 0.5), or negative derived dephasing rates.
    void validate() const;
};

/// Table of sample parameters used throughout as the default device.
SystemParams default_params();

/// The four tunable reset knobs. Rates are the matrix elements entering the
/// effective three-level model; detunings are measured from the ac-Stark
/// shifted transitions and are zero in every stock configuration.
struct DriveConfig {
    Frequency g_tilde;     // f0-g1 effective coupling
    Frequency omega_ef;    // e-f Rabi rate
    Frequency delta_f0g1;  // f0-g1 drive detuning
    Frequency delta_ef;    // e-f drive detuning

    void validate() const;  // rates must be >= 0
};

inline DriveConfig drive_config_mhz(double omega_ef_mhz, double g_tilde_mhz,
                                    double delta_f0g1_mhz = 0.0, double delta_ef_mhz = 0.0) {
    return DriveConfig{Frequency::from_mhz(g_tilde_mhz), Frequency::from_mhz(omega_ef_mhz),
                       Frequency::from_mhz(delta_f0g1_mhz), Frequency::from_mhz(delta_ef_mhz)};
}

/// Key-value (JSON) serialization; keys are the ascii-fied symbol names
/// (omega_ge_mhz, alpha_mhz, ...). Unknown keys are rejected.
std::string params_to_json(const SystemParams& p);
SystemParams params_from_json(const std::string& text);
SystemParams params_from_file(const std::string& path);
void params_to_file(const SystemParams& p, const std::string& path);

/// Starts from `base` and overrides only the keys present in the JSON text.
SystemParams apply_param_overrides(const SystemParams& base, const std::string& json_text);

}  // namespace qreset
