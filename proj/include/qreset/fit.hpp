#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace qreset {

struct FitOptions {
    int max_iterations = 300;
    double rel_cost_tol = 1e-10;  // converged when the relative cost change drops below this
    double lambda0 = 1e-3;
    int multi_starts = 8;
    double perturbation = 0.25;   // relative scatter of the random restarts
    std::uint64_t seed = 0x9d2c5680u;
};

struct FitResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1 at the optimum
    double cost = 0.0;           // sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Damped least squares (Levenberg-Marquardt) with a forward-difference
/// Jacobian. Parameters are rescaled internally by `scales` (defaults to
/// max(|p0_i|, 1)) so wildly mixed magnitudes fit cleanly.
FitResult fit_least_squares(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                            const FitOptions& opt = {},
                            const Eigen::VectorXd& scales = Eigen::VectorXd());

/// Runs fit_least_squares from p0 plus `multi_starts` randomly perturbed
/// starts (deterministic under opt.seed) and keeps the best converged result.
/// Throws FitFailure if nothing converges.
FitResult fit_multistart(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                         const FitOptions& opt = {},
                         const Eigen::VectorXd& scales = Eigen::VectorXd());

}  // namespace qreset
