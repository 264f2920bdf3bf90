#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qreset {

/// A labeled collection of integrated quadrature points. `latent` carries the
/// per-shot truth labels when the set came out of the synthetic lab (empty
/// for measured data); `prepared` is the nominal preparation of the whole
/// set (-1 when unknown).
struct ShotSet {
    Eigen::Matrix2Xd points;          // column i = (u_i, v_i)
    std::vector<std::int8_t> latent;  // optional ground-truth state per shot
    int prepared = -1;

    Eigen::Index size() const { return points.cols(); }
};

/// Trimodal shared-covariance Gaussian mixture. weights(s, p) is the weight
/// of component s when preparation p was nominally requested; each column
/// sums to one.
struct GmmModel {
    std::array<Eigen::Vector2d, 3> means;  // g, e, f
    Eigen::Matrix2d sigma;                 // shared covariance, SPD
    Eigen::Matrix3d weights;

    void validate() const;
};

struct EmOptions {
    int max_iterations = 500;
    double loglik_tol_per_shot = 1e-9;
};

/// Joint maximum-likelihood fit over the three reference sets: means and the
/// covariance are shared, weights are free per preparation. Initialized from
/// the per-label sample moments, then refined by EM (monotone in the total
/// log-likelihood). Throws FitFailure on degenerate covariance or collapsed
/// means.
GmmModel fit_gmm(const std::array<ShotSet, 3>& reference, const EmOptions& opt = {});

/// Maximum-posterior label under equal priors (minimum Mahalanobis distance
/// for a shared covariance); ties break toward the lower-energy state.
int classify(const GmmModel& model, const Eigen::Vector2d& point);

/// Labels for a whole set. OpenMP over shots; classify_batch_serial is the
/// bit-identical reference.
std::vector<int> classify_batch(const GmmModel& model, const Eigen::Matrix2Xd& points);
std::vector<int> classify_batch_serial(const GmmModel& model, const Eigen::Matrix2Xd& points);

/// Column-stochastic assignment matrix R[m][s] = p(assign m | prepared s),
/// estimated by classifying each reference set.
Eigen::Matrix3d assignment_matrix(const GmmModel& model,
                                  const std::array<ShotSet, 3>& reference);

/// P = R^-1 M, returned unclipped (components may leave [0,1] slightly).
/// Throws on a singular R.
Eigen::Vector3d correct_populations(const Eigen::Vector3d& measured,
                                    const Eigen::Matrix3d& r_matrix);

/// Clamp to [0,1] and renormalize: presentation-only convenience view.
Eigen::Vector3d clip_to_simplex(Eigen::Vector3d p);

/// Threshold with p(c1 > c_thr | excited) = p_tail, for a ground cluster
/// sitting at larger c1: c_thr = mu_exc + z(1 - p_tail) sigma_exc.
double herald_threshold(double mu_exc, double sigma_exc, double p_tail);

struct BimodalModel {
    double mu0, sigma0;  // excited component (smaller c1)
    double mu1, sigma1;  // ground component
    double w0;           // weight of component 0
};

/// 1-D two-component Gaussian MLE with free means, variances and weight.
BimodalModel fit_bimodal_herald(std::span<const double> samples, const EmOptions& opt = {});

struct PrincipalAxis {
    Eigen::Vector2d axis;            // unit vector, sign fixed (positive first coordinate)
    std::vector<double> projected;   // axis . (x - mean)
};

/// Leading eigenvector of the 2-D sample covariance. Throws
/// DegenerateDataError for fewer than 2 points or zero variance.
PrincipalAxis principal_axis(const Eigen::Matrix2Xd& points);

}  // namespace qreset
