#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "qreset/effective.hpp"
#include "qreset/operators.hpp"
#include "qreset/params.hpp"

namespace qreset {

/// Driven transmon-resonator model in the rotating frame (resonator at
/// omega_r, transmon at omega_ge + alpha/2). The transmon keeps three levels;
/// the resonator is truncated at n_fock - 1 photons (default 2: the protocol
/// populates at most one photon, one guard level catches leakage).
struct DrivenModel {
    SystemParams params;
    DriveConfig drives;
    int n_fock = 3;

    int dim() const { return 3 * n_fock; }
    void validate() const;
};

/// Hamiltonian at time t: transmon anharmonic ladder, dispersive shift,
/// f0-g1 coupling and the e-f drive with its explicit e^{+-i alpha t/2}
/// phase. Drive detunings add e^{-+i delta t} phases on the corresponding
/// coupling terms. Hermitian at every t by construction.
QOperator hamiltonian_at(const DrivenModel& m, double t_s);

struct JumpChannel {
    double rate;  // 1/s
    QOperator op;
    std::string label;
};

/// The eight dissipation channels: resonator emission (external + internal),
/// thermally weighted transmon decay/excitation on both transitions, and the
/// two pure-dephasing channels. Transmon operators are tensored with the
/// resonator identity.
std::vector<JumpChannel> dissipators(const DrivenModel& m);

/// Integrates d rho/dt = -i[H(t), rho] + sum_k D[L_k] rho on a sorted time
/// grid with an adaptive embedded Runge-Kutta scheme (local tolerance tol).
/// Populations are traced over the resonator; photon holds <a^dag a>.
PopulationTrajectory evolve(const DrivenModel& m, const Eigen::MatrixXcd& rho0,
                            std::span<const double> times_s, double tol = 1e-8);

/// Same, with an explicit channel list instead of dissipators(m).
PopulationTrajectory evolve_with_channels(const DrivenModel& m,
                                          const std::vector<JumpChannel>& channels,
                                          const Eigen::MatrixXcd& rho0,
                                          std::span<const double> times_s, double tol = 1e-8);

/// Density matrix snapshot after evolving rho0 for duration_s (used by the
/// pulse scheduler, which stitches segments together).
Eigen::MatrixXcd evolve_state(const DrivenModel& m, const std::vector<JumpChannel>& channels,
                              Eigen::MatrixXcd rho0, double duration_s, double tol = 1e-8);

struct SteadyStateResult {
    double p_exc;     // P_e + P_f averaged over the final 10% of the horizon
    double drift;     // change of that average across the last two 5% windows
    bool converged;   // drift < 1e-5
};

/// Long-horizon saturation value starting from |e,0>. The Hamiltonian is
/// explicitly time-dependent, so the limit is taken by integration rather
/// than by a Liouvillian null space.
SteadyStateResult steady_state_excitation(const DrivenModel& m, double horizon_s,
                                          double tol = 1e-8);

/// Max over time of |P_s(master equation) - P_s(three-level model)| for
/// s in {e, f}, with every decoherence channel removed except the resonator
/// emission. Quantifies the rotating-wave ripple of the full drive term.
double compare_to_effective(const SystemParams& params, const DriveConfig& drives,
                            std::span<const double> times_s, int n_fock = 3,
                            double tol = 1e-9);

/// Thermal-equilibrium transmon populations implied by the dissipator rates
/// alone (detailed balance on the g-e and e-f pairs). Used as an independent
/// steady-state oracle for the no-drive case.
Eigen::Vector3d thermal_equilibrium_populations(const SystemParams& params);

}  // namespace qreset
