#pragma once

#include <string>

#include "qreset/params.hpp"
#include "qreset/units.hpp"

namespace qreset {

/// Steady-state excitation floor from transmon thermalization: the upward
/// jump rate times the integrated excited population of one reset transient,
/// integral_0^inf (P_e + P_f)(tau) k_up d tau starting from |e,0>. The
/// integral is truncated once the tail bound k_up e^{-Gamma t} / Gamma drops
/// below tol. Throws DivergentIntegralError when the reset rate is zero.
double thermal_ceiling(const DriveConfig& config, Frequency kappa, Frequency k_up,
                       double tol = 1e-8);

struct ResonatorLimit {
    double transmon_temperature_k = 0;  // T_rr * omega_ge / omega_r
    double population = 0;              // two-level Boltzmann occupation at that temperature
    double reverse_rate = 0;            // kappa * exp(-hbar omega_r / k_B T_rr), 1/s
};

/// Steady-state limit set by a finite reset-resonator temperature.
ResonatorLimit resonator_limit(double t_rr_kelvin, const SystemParams& params);

/// Order-of-magnitude residual excitation from the e-f drive leaking onto the
/// g-e transition: Omega^2/(Omega^2 + alpha^2) * Omega / Gamma. Estimate
/// grade only.
double ef_leakage(Frequency omega_ef, Frequency alpha, Frequency gamma_reset);

enum class LimitMechanism { thermal, resonator, ef_leakage };

struct LimitReport {
    double p_thermal_ceiling = 0;
    double p_resonator_limit = 0;
    double p_ef_leakage = 0;  // estimate grade
    LimitMechanism dominant = LimitMechanism::thermal;
};

LimitReport limit_report(const DriveConfig& config, const SystemParams& params,
                         double t_rr_kelvin);

std::string limit_report_to_json(const LimitReport& r);
const char* mechanism_name(LimitMechanism m);

}  // namespace qreset
