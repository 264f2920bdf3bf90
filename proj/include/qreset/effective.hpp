#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <span>
#include <vector>

#include "qreset/params.hpp"
#include "qreset/units.hpp"

namespace qreset {

/// Three-level non-Hermitian reset Hamiltonian in the basis
/// (|e,0>, |f,0>, |g,1>). The only imaginary entry is -i kappa/2 on the
/// |g,1> diagonal so that exp(-iHt) decays; reset rates are computed from
/// |Im(lambda)| and are insensitive to that sign choice.
struct EffectiveHamiltonian {
    Eigen::Matrix3cd matrix;
    Frequency kappa;
    DriveConfig drives;
};

/// Builds the reset Hamiltonian. Nonzero detunings enter as real diagonal
/// shifts (-delta_ef - delta_f0g1 on |e,0>, -delta_f0g1 on |f,0>), reducing
/// to the bare matrix when both are zero. Throws on negative kappa.
EffectiveHamiltonian build_h3(const DriveConfig& drives, Frequency kappa);

/// The three decay rates 2|Im(lambda_i)| in rad/s, ascending. Eigenvalues
/// come from the standard solver; if its residual exceeds 1e-8 (nearly
/// defective matrix, e.g. close to an exceptional point) the Schur form is
/// used instead, which needs no eigenvectors.
std::array<double, 3> decay_rates(const Eigen::Matrix3cd& h);
std::array<double, 3> decay_rates(const EffectiveHamiltonian& h);

/// Reset rate Gamma = 2 min|Im(lambda_i)|: the slowest decay toward |g,0>.
Frequency reset_rate(const DriveConfig& drives, Frequency kappa);
Frequency reset_rate(Frequency g_tilde, Frequency omega_ef, Frequency kappa);

struct RidgePoint {
    Frequency omega_ef;  // the rate maximizing Gamma at fixed g_tilde
    Frequency gamma;     // the maximized reset rate
};

/// 1-D maximization of Gamma over omega_ef at fixed g_tilde: 16-point coarse
/// scan of [0, 3 g_tilde] to bracket the peak, then golden-section refinement
/// to relative tolerance 1e-4.
RidgePoint optimal_ef_rate(Frequency g_tilde, Frequency kappa);

struct ResetRateLandscape {
    std::vector<Frequency> g_axis;
    std::vector<Frequency> ef_axis;
    Eigen::MatrixXd gamma;         // rad/s; gamma(i, j) at (g_axis[i], ef_axis[j])
    std::vector<RidgePoint> ridge; // refined per-g optimum
};

/// Full Gamma grid plus the ridge line. The grid cells are independent;
/// `landscape` evaluates them with OpenMP, `landscape_serial` is the
/// reference implementation and produces bit-identical results.
ResetRateLandscape landscape(std::span<const Frequency> g_axis,
                             std::span<const Frequency> ef_axis, Frequency kappa);
ResetRateLandscape landscape_serial(std::span<const Frequency> g_axis,
                                    std::span<const Frequency> ef_axis, Frequency kappa);

enum class ThreeLevelState { e0, f0, g1 };

/// Populations over time on the transmon (resonator traced out conceptually:
/// p_g collects both |g,1> and the dark |g,0>). photon holds the |g,1>
/// population.
struct PopulationTrajectory {
    std::vector<double> times_s;
    std::vector<double> p_g, p_e, p_f;
    std::vector<double> photon;
};

/// Propagates |psi0> under exp(-iHt) on a sorted, nonnegative time grid.
PopulationTrajectory propagate_h3(const EffectiveHamiltonian& h, ThreeLevelState initial,
                                  std::span<const double> times_s);

/// Excited-state population P_e + P_f at a single time from |e,0>.
double excited_population(const EffectiveHamiltonian& h, double t_s);

/// Closed-form |f> population of the two-level model with loss: the lossy
/// Rabi envelope with Omega = sqrt(-(2 g)^2 + (kappa - gamma)^2 / 4) handled
/// in complex arithmetic throughout. g_tilde, kappa, gamma in rad/s.
double two_level_pf(double t_s, double g_tilde, double kappa, double gamma);

/// Two-level matrix-exponential oracle for the same quantity (kept separate
/// from the closed form on purpose; tests compare the two routes).
double two_level_pf_expm(double t_s, double g_tilde, double kappa, double gamma);

}  // namespace qreset
