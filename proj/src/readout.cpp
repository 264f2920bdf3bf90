#include "qreset/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qreset/errors.hpp"
#include "qreset/stats.hpp"
#include "qreset/units.hpp"

namespace qreset {

void GmmModel::validate() const {
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidParameter("GmmModel: covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sigma);
    if (es.eigenvalues().minCoeff() <= 0)
        throw InvalidParameter("GmmModel: covariance must be positive definite");
    for (int p = 0; p < 3; ++p)
        if (std::abs(weights.col(p).sum() - 1.0) > 1e-8)
            throw InvalidParameter("GmmModel: weights must sum to 1 per preparation");
}

namespace {

double sigma_condition(const Eigen::Matrix2d& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sigma);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

GmmModel fit_gmm(const std::array<ShotSet, 3>& reference, const EmOptions& opt) {
    Eigen::Index n_total = 0;
    for (const auto& set : reference) {
        if (set.size() < 100) throw FitFailure("fit_gmm: each reference set needs >= 100 shots");
        n_total += set.size();
    }

    GmmModel m;
    // Reference sets have known (controlled) preparations, so the per-label
    // sample moments are an excellent starting point; EM then mops up the
    // cross-contamination between sets.
    for (int p = 0; p < 3; ++p) m.means[p] = reference[p].points.rowwise().mean();
    m.sigma = Eigen::Matrix2d::Zero();
    for (int p = 0; p < 3; ++p) {
        const auto centered = reference[p].points.colwise() - m.means[p];
        m.sigma += centered * centered.transpose();
    }
    m.sigma /= double(n_total);
    m.weights = Eigen::Matrix3d::Constant(0.02);
    m.weights.diagonal().setConstant(0.96);

    double prev_ll = -std::numeric_limits<double>::infinity();
    std::array<Eigen::Matrix3Xd, 3> resp;  // responsibilities per set

    for (int it = 0; it < opt.max_iterations; ++it) {
        if (sigma_condition(m.sigma) > 1e12)
            throw FitFailure("fit_gmm: degenerate covariance (condition number > 1e12)");
        const Eigen::Matrix2d prec = m.sigma.inverse();
        const double log_norm = -std::log(two_pi * std::sqrt(m.sigma.determinant()));

        // E step
        double ll = 0.0;
        for (int p = 0; p < 3; ++p) {
            const Eigen::Index n = reference[p].size();
            resp[p].resize(3, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::Vector2d x = reference[p].points.col(i);
                Eigen::Vector3d logp;
                for (int s = 0; s < 3; ++s) {
                    const Eigen::Vector2d d = x - m.means[s];
                    logp(s) = std::log(std::max(m.weights(s, p), 1e-300)) + log_norm -
                              0.5 * d.dot(prec * d);
                }
                const double mx = logp.maxCoeff();
                const Eigen::Vector3d w = (logp.array() - mx).exp();
                const double z = w.sum();
                resp[p].col(i) = w / z;
                ll += mx + std::log(z);
            }
        }

        // M step: means and sigma pooled over all sets, weights per set.
        std::array<Eigen::Vector2d, 3> new_means;
        Eigen::Vector3d mass = Eigen::Vector3d::Zero();
        for (int s = 0; s < 3; ++s) new_means[s].setZero();
        for (int p = 0; p < 3; ++p) {
            for (int s = 0; s < 3; ++s) {
                new_means[s] += reference[p].points * resp[p].row(s).transpose();
                mass(s) += resp[p].row(s).sum();
            }
        }
        for (int s = 0; s < 3; ++s) {
            if (mass(s) < 1e-9) throw FitFailure("fit_gmm: component lost all weight");
            new_means[s] /= mass(s);
        }
        Eigen::Matrix2d new_sigma = Eigen::Matrix2d::Zero();
        for (int p = 0; p < 3; ++p) {
            for (int s = 0; s < 3; ++s) {
                const auto centered = reference[p].points.colwise() - new_means[s];
                new_sigma += (centered.array().rowwise() * resp[p].row(s).array()).matrix() *
                             centered.transpose();
            }
            for (int s = 0; s < 3; ++s)
                m.weights(s, p) = resp[p].row(s).sum() / double(reference[p].size());
        }
        m.sigma = new_sigma / double(n_total);
        m.means = new_means;

        if (std::abs(ll - prev_ll) < opt.loglik_tol_per_shot * double(n_total) && it > 0) break;
        prev_ll = ll;
    }

    // Collapsed solution (e.g. single-cluster data fed in for all three
    // preparations) is not a usable readout model.
    const Eigen::Matrix2d prec = m.sigma.inverse();
    for (int s = 0; s < 3; ++s)
        for (int t = s + 1; t < 3; ++t) {
            const Eigen::Vector2d d = m.means[s] - m.means[t];
            if (std::sqrt(d.dot(prec * d)) < 0.5)
                throw FitFailure("fit_gmm: collapsed means (clusters not separable)");
        }
    m.validate();
    return m;
}

int classify(const GmmModel& model, const Eigen::Vector2d& point) {
    const Eigen::Matrix2d prec = model.sigma.inverse();
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
        const Eigen::Vector2d d = point - model.means[s];
        const double d2 = d.dot(prec * d);
        if (d2 < best_d2) {  // strict: ties keep the lower-energy label
            best_d2 = d2;
            best = s;
        }
    }
    return best;
}

namespace {

std::vector<int> classify_batch_impl(const GmmModel& model, const Eigen::Matrix2Xd& points,
                                     bool parallel) {
    const Eigen::Matrix2d prec = model.sigma.inverse();
    std::vector<int> labels(points.cols());
#pragma omp parallel for schedule(static) if (parallel)
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int s = 0; s < 3; ++s) {
            const Eigen::Vector2d d = points.col(i) - model.means[s];
            const double d2 = d.dot(prec * d);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = s;
            }
        }
        labels[size_t(i)] = best;
    }
    return labels;
}

}  // namespace

std::vector<int> classify_batch(const GmmModel& model, const Eigen::Matrix2Xd& points) {
    return classify_batch_impl(model, points, true);
}

std::vector<int> classify_batch_serial(const GmmModel& model, const Eigen::Matrix2Xd& points) {
    return classify_batch_impl(model, points, false);
}

Eigen::Matrix3d assignment_matrix(const GmmModel& model,
                                  const std::array<ShotSet, 3>& reference) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
    for (int p = 0; p < 3; ++p) {
        const std::vector<int> labels = classify_batch(model, reference[p].points);
        Eigen::Vector3d counts = Eigen::Vector3d::Zero();
        for (const int m : labels) counts(m) += 1.0;
        r.col(p) = counts / double(labels.size());
    }
    return r;
}

Eigen::Vector3d correct_populations(const Eigen::Vector3d& measured,
                                    const Eigen::Matrix3d& r_matrix) {
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(r_matrix);
    if (!lu.isInvertible())
        throw InvalidParameter("correct_populations: assignment matrix is singular");
    return lu.solve(measured);
}

Eigen::Vector3d clip_to_simplex(Eigen::Vector3d p) {
    p = p.cwiseMax(0.0).cwiseMin(1.0);
    const double s = p.sum();
    return s > 0 ? Eigen::Vector3d(p / s) : Eigen::Vector3d(1.0, 0.0, 0.0);
}

double herald_threshold(double mu_exc, double sigma_exc, double p_tail) {
    if (!(p_tail > 0.0 && p_tail < 0.5))
        throw InvalidParameter("herald_threshold: p_tail must be in (0, 0.5)");
    if (sigma_exc <= 0) throw InvalidParameter("herald_threshold: sigma must be positive");
    return mu_exc + normal_quantile(1.0 - p_tail) * sigma_exc;
}

BimodalModel fit_bimodal_herald(std::span<const double> samples, const EmOptions& opt) {
    const size_t n = samples.size();
    if (n < 100) throw FitFailure("fit_bimodal_herald: need >= 100 samples");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[n / 2];

    auto moments = [&](auto pred) {
        double s = 0, s2 = 0;
        size_t c = 0;
        for (const double x : sorted)
            if (pred(x)) {
                s += x;
                s2 += x * x;
                ++c;
            }
        const double mu = c ? s / double(c) : 0.0;
        const double var = c > 1 ? std::max(s2 / double(c) - mu * mu, 1e-12) : 1e-12;
        return std::pair{mu, std::sqrt(var)};
    };
    auto [mu0, sd0] = moments([&](double x) { return x <= median; });
    auto [mu1, sd1] = moments([&](double x) { return x > median; });
    BimodalModel m{mu0, sd0, mu1, sd1, 0.5};

    auto log_pdf = [](double x, double mu, double sd) {
        const double z = (x - mu) / sd;
        return -0.5 * z * z - std::log(sd * std::sqrt(two_pi));
    };

    double prev_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> gamma0(n);
    for (int it = 0; it < opt.max_iterations; ++it) {
        double ll = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double l0 = std::log(std::max(m.w0, 1e-300)) + log_pdf(sorted[i], m.mu0, m.sigma0);
            const double l1 =
                std::log(std::max(1.0 - m.w0, 1e-300)) + log_pdf(sorted[i], m.mu1, m.sigma1);
            const double mx = std::max(l0, l1);
            const double z = std::exp(l0 - mx) + std::exp(l1 - mx);
            gamma0[i] = std::exp(l0 - mx) / z;
            ll += mx + std::log(z);
        }
        double w = 0, s0 = 0, s1 = 0;
        for (size_t i = 0; i < n; ++i) {
            w += gamma0[i];
            s0 += gamma0[i] * sorted[i];
            s1 += (1 - gamma0[i]) * sorted[i];
        }
        if (w < 1e-9 || (double(n) - w) < 1e-9)
            throw FitFailure("fit_bimodal_herald: component collapsed");
        m.mu0 = s0 / w;
        m.mu1 = s1 / (double(n) - w);
        double v0 = 0, v1 = 0;
        for (size_t i = 0; i < n; ++i) {
            v0 += gamma0[i] * (sorted[i] - m.mu0) * (sorted[i] - m.mu0);
            v1 += (1 - gamma0[i]) * (sorted[i] - m.mu1) * (sorted[i] - m.mu1);
        }
        m.sigma0 = std::sqrt(std::max(v0 / w, 1e-300));
        m.sigma1 = std::sqrt(std::max(v1 / (double(n) - w), 1e-300));
        if (m.sigma0 < 1e-12 || m.sigma1 < 1e-12)
            throw FitFailure("fit_bimodal_herald: variance collapsed");
        m.w0 = w / double(n);

        if (std::abs(ll - prev_ll) < opt.loglik_tol_per_shot * double(n) && it > 0) break;
        prev_ll = ll;
    }
    // Keep component 0 = smaller mean (excited side in the herald convention).
    if (m.mu0 > m.mu1) {
        std::swap(m.mu0, m.mu1);
        std::swap(m.sigma0, m.sigma1);
        m.w0 = 1.0 - m.w0;
    }
    return m;
}

PrincipalAxis principal_axis(const Eigen::Matrix2Xd& points) {
    if (points.cols() < 2) throw DegenerateDataError("principal_axis: need >= 2 points");
    const Eigen::Vector2d mean = points.rowwise().mean();
    const Eigen::Matrix2Xd centered = points.colwise() - mean;
    const Eigen::Matrix2d cov = centered * centered.transpose() / double(points.cols() - 1);
    if (cov.cwiseAbs().maxCoeff() <= 0)
        throw DegenerateDataError("principal_axis: zero-variance data");

    // Closed-form leading eigenvector of a symmetric 2x2.
    const double a = cov(0, 0), b = cov(0, 1), d = cov(1, 1);
    const double lam = 0.5 * (a + d + std::sqrt((a - d) * (a - d) + 4 * b * b));
    Eigen::Vector2d v;
    if (std::abs(b) > 1e-300) v = Eigen::Vector2d(b, lam - a);
    else v = a >= d ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
    v.normalize();
    if (v(0) < 0 || (v(0) == 0 && v(1) < 0)) v = -v;

    PrincipalAxis out;
    out.axis = v;
    out.projected.resize(size_t(points.cols()));
    for (Eigen::Index i = 0; i < points.cols(); ++i) out.projected[size_t(i)] = v.dot(centered.col(i));
    return out;
}

}  // namespace qreset
