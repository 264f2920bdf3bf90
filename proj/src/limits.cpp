#include "qreset/limits.hpp"

#include <cmath>
#include <functional>

#include <json.hpp>

#include "qreset/effective.hpp"
#include "qreset/errors.hpp"

namespace qreset {

namespace {

constexpr double k_hbar = 1.054571817e-34;  // J s
constexpr double k_boltzmann = 1.380649e-23;  // J / K

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double thermal_ceiling(const DriveConfig& config, Frequency kappa, Frequency k_up, double tol) {
    const EffectiveHamiltonian h = build_h3(config, kappa);
    const double gamma = decay_rates(h)[0];
    if (gamma <= 0)
        throw DivergentIntegralError(
            "thermal_ceiling: reset rate is zero, the excited population never drains");
    const double kup = k_up.rad_per_s();
    if (kup == 0) return 0.0;

    // Truncate where the tail bound k_up e^{-Gamma t} / Gamma falls below tol,
    // and no earlier than several reset times.
    const double t_max =
        std::max(-std::log(tol * gamma / kup) / gamma, 20.0 / gamma);
    auto integrand = [&](double t) { return excited_population(h, t); };
    // The integral itself is smooth and exponentially enveloped; an absolute
    // quadrature tolerance of tol/kup on it keeps the product below tol.
    const double integral = integrate(integrand, 0.0, t_max, 0.1 * tol / kup);
    return kup * integral;
}

ResonatorLimit resonator_limit(double t_rr_kelvin, const SystemParams& params) {
    if (t_rr_kelvin < 0) throw InvalidParameter("resonator_limit: temperature must be >= 0");
    ResonatorLimit out;
    if (t_rr_kelvin == 0.0) return out;

    out.transmon_temperature_k =
        t_rr_kelvin * (params.omega_ge.rad_per_s() / params.omega_r.rad_per_s());
    const double x = k_hbar * params.omega_ge.rad_per_s() /
                     (k_boltzmann * out.transmon_temperature_k);
    const double boltz = std::exp(-x);
    out.population = boltz / (1.0 + boltz);
    out.reverse_rate =
        params.kappa.rad_per_s() *
        std::exp(-k_hbar * params.omega_r.rad_per_s() / (k_boltzmann * t_rr_kelvin));
    return out;
}

double ef_leakage(Frequency omega_ef, Frequency alpha, Frequency gamma_reset) {
    if (gamma_reset.rad_per_s() <= 0)
        throw InvalidParameter("ef_leakage: reset rate must be positive");
    const double om2 = omega_ef.rad_per_s() * omega_ef.rad_per_s();
    const double al2 = alpha.rad_per_s() * alpha.rad_per_s();
    return om2 / (om2 + al2) * (omega_ef.rad_per_s() / gamma_reset.rad_per_s());
}

LimitReport limit_report(const DriveConfig& config, const SystemParams& params,
                         double t_rr_kelvin) {
    LimitReport r;
    r.p_thermal_ceiling = thermal_ceiling(config, params.kappa, params.k_up);
    r.p_resonator_limit = resonator_limit(t_rr_kelvin, params).population;
    const Frequency gamma = reset_rate(config, params.kappa);
    r.p_ef_leakage = ef_leakage(config.omega_ef, params.alpha, gamma);

    r.dominant = LimitMechanism::thermal;
    double best = r.p_thermal_ceiling;
    if (r.p_resonator_limit > best) {
        best = r.p_resonator_limit;
        r.dominant = LimitMechanism::resonator;
    }
    if (r.p_ef_leakage > best) r.dominant = LimitMechanism::ef_leakage;
    return r;
}

const char* mechanism_name(LimitMechanism m) {
    switch (m) {
        case LimitMechanism::thermal: return "thermal";
        case LimitMechanism::resonator: return "resonator";
        case LimitMechanism::ef_leakage: return "ef_leakage";
    }
    return "unknown";
}

std::string limit_report_to_json(const LimitReport& r) {
    nlohmann::ordered_json j;
    j["p_thermal_ceiling"] = r.p_thermal_ceiling;
    j["p_resonator_limit"] = r.p_resonator_limit;
    j["p_ef_leakage"] = r.p_ef_leakage;
    j["dominant"] = mechanism_name(r.dominant);
    return j.dump(2) + "\n";
}

}  // namespace qreset
