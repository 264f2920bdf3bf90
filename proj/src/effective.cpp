#include "qreset/effective.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "qreset/errors.hpp"

namespace qreset {

using cplx = std::complex<double>;

EffectiveHamiltonian build_h3(const DriveConfig& drives, Frequency kappa) {
    drives.validate();
    if (kappa.rad_per_s() < 0) throw InvalidParameter("build_h3: kappa must be >= 0");
    const double om = drives.omega_ef.rad_per_s();
    const double g = drives.g_tilde.rad_per_s();
    const double d_f0g1 = drives.delta_f0g1.rad_per_s();
    const double d_ef = drives.delta_ef.rad_per_s();
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(0, 0) = -d_ef - d_f0g1;
    h(0, 1) = om;
    h(1, 0) = om;
    h(1, 1) = -d_f0g1;
    h(1, 2) = g;
    h(2, 1) = g;
    h(2, 2) = cplx(0.0, -0.5 * kappa.rad_per_s());
    return EffectiveHamiltonian{h, kappa, drives};
}

std::array<double, 3> decay_rates(const Eigen::Matrix3cd& h) {
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(h, /*computeEigenvectors=*/true);
    Eigen::Vector3cd lam = es.eigenvalues();

    const double scale = std::max(h.cwiseAbs().maxCoeff(), 1e-300);
    double residual = 0.0;
    if (es.info() == Eigen::Success) {
        const Eigen::Matrix3cd v = es.eigenvectors();
        residual = (h * v - v * lam.asDiagonal()).cwiseAbs().maxCoeff() / scale;
    }
    if (es.info() != Eigen::Success || residual > 1e-8) {
        // Near-defective input: eigenvectors may be close to parallel, but the
        // Schur diagonal still carries the eigenvalues to full accuracy.
        Eigen::ComplexSchur<Eigen::Matrix3cd> schur(h, /*computeU=*/false);
        lam = schur.matrixT().diagonal();
    }

    std::array<double, 3> rates{2.0 * std::abs(lam(0).imag()), 2.0 * std::abs(lam(1).imag()),
                                2.0 * std::abs(lam(2).imag())};
    std::sort(rates.begin(), rates.end());
    return rates;
}

std::array<double, 3> decay_rates(const EffectiveHamiltonian& h) { return decay_rates(h.matrix); }

Frequency reset_rate(const DriveConfig& drives, Frequency kappa) {
    return Frequency::from_rad_per_s(decay_rates(build_h3(drives, kappa))[0]);
}

Frequency reset_rate(Frequency g_tilde, Frequency omega_ef, Frequency kappa) {
    return reset_rate(DriveConfig{g_tilde, omega_ef, {}, {}}, kappa);
}

RidgePoint optimal_ef_rate(Frequency g_tilde, Frequency kappa) {
    if (g_tilde.rad_per_s() <= 0) throw InvalidParameter("optimal_ef_rate: g_tilde must be > 0");
    const double g = g_tilde.rad_per_s();
    const double k = kappa.rad_per_s();
    auto gamma_of = [&](double om) {
        return decay_rates(build_h3(
            DriveConfig{g_tilde, Frequency::from_rad_per_s(om), {}, {}}, kappa))[0];
    };

    // Coarse pre-scan guards the bracket against a misplaced unimodal peak.
    const double hi = 3.0 * g;
    constexpr int n_scan = 16;
    double best_om = 0.0, best_val = -1.0;
    for (int i = 0; i <= n_scan; ++i) {
        const double om = hi * double(i) / n_scan;
        const double val = gamma_of(om);
        if (val > best_val) {
            best_val = val;
            best_om = om;
        }
    }
    double a = std::max(0.0, best_om - hi / n_scan);
    double b = std::min(hi, best_om + hi / n_scan);

    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = gamma_of(x1), f2 = gamma_of(x2);
    const double tol = 1e-4 * std::max(g, k);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = gamma_of(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = gamma_of(x1);
        }
    }
    const double om_opt = 0.5 * (a + b);
    return RidgePoint{Frequency::from_rad_per_s(om_opt),
                      Frequency::from_rad_per_s(gamma_of(om_opt))};
}

namespace {

ResetRateLandscape landscape_impl(std::span<const Frequency> g_axis,
                                  std::span<const Frequency> ef_axis, Frequency kappa,
                                  bool parallel) {
    if (g_axis.empty() || ef_axis.empty())
        throw InvalidParameter("landscape: axes must be non-empty");
    for (const Frequency f : g_axis)
        if (f.rad_per_s() <= 0) throw InvalidParameter("landscape: g_tilde grid must be positive");
    for (const Frequency f : ef_axis)
        if (f.rad_per_s() <= 0) throw InvalidParameter("landscape: omega_ef grid must be positive");

    ResetRateLandscape out;
    out.g_axis.assign(g_axis.begin(), g_axis.end());
    out.ef_axis.assign(ef_axis.begin(), ef_axis.end());
    const int ng = int(g_axis.size()), ne = int(ef_axis.size());
    out.gamma.resize(ng, ne);

#pragma omp parallel for schedule(static) if (parallel)
    for (int idx = 0; idx < ng * ne; ++idx) {
        const int i = idx / ne, j = idx % ne;
        out.gamma(i, j) =
            decay_rates(build_h3(DriveConfig{g_axis[i], ef_axis[j], {}, {}}, kappa))[0];
    }

    out.ridge.resize(ng);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < ng; ++i) out.ridge[i] = optimal_ef_rate(g_axis[i], kappa);
    return out;
}

}  // namespace

ResetRateLandscape landscape(std::span<const Frequency> g_axis,
                             std::span<const Frequency> ef_axis, Frequency kappa) {
    return landscape_impl(g_axis, ef_axis, kappa, true);
}

ResetRateLandscape landscape_serial(std::span<const Frequency> g_axis,
                                    std::span<const Frequency> ef_axis, Frequency kappa) {
    return landscape_impl(g_axis, ef_axis, kappa, false);
}

PopulationTrajectory propagate_h3(const EffectiveHamiltonian& h, ThreeLevelState initial,
                                  std::span<const double> times_s) {
    for (size_t i = 0; i < times_s.size(); ++i) {
        if (times_s[i] < 0) throw InvalidParameter("propagate_h3: times must be >= 0");
        if (i > 0 && times_s[i] < times_s[i - 1])
            throw InvalidParameter("propagate_h3: times must be sorted");
    }
    Eigen::Vector3cd psi0 = Eigen::Vector3cd::Zero();
    psi0(int(initial)) = 1.0;

    PopulationTrajectory traj;
    traj.times_s.assign(times_s.begin(), times_s.end());
    const size_t n = times_s.size();
    traj.p_g.resize(n);
    traj.p_e.resize(n);
    traj.p_f.resize(n);
    traj.photon.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Matrix3cd u = (cplx(0, -1) * times_s[i] * h.matrix).exp();
        const Eigen::Vector3cd psi = u * psi0;
        const double pe = std::norm(psi(0));
        const double pf = std::norm(psi(1));
        const double pg1 = std::norm(psi(2));
        traj.p_e[i] = pe;
        traj.p_f[i] = pf;
        traj.photon[i] = pg1;
        // |g,0> is dark, so everything lost from the three-state manifold is
        // ground population; |g,1> also has the transmon in g.
        traj.p_g[i] = 1.0 - pe - pf;
    }
    return traj;
}

double excited_population(const EffectiveHamiltonian& h, double t_s) {
    const Eigen::Matrix3cd u = (cplx(0, -1) * t_s * h.matrix).exp();
    const Eigen::Vector3cd psi = u.col(0);  // from |e,0>
    return std::norm(psi(0)) + std::norm(psi(1));
}

double two_level_pf(double t_s, double g_tilde, double kappa, double gamma) {
    if (t_s < 0) throw InvalidParameter("two_level_pf: t must be >= 0");
    const cplx omega = std::sqrt(cplx(-4.0 * g_tilde * g_tilde +
                                      0.25 * (kappa - gamma) * (kappa - gamma)));
    const cplx z = 0.5 * omega * t_s;
    // sinh(z)/z, safe at z = 0
    const cplx sinhc = (std::abs(z) == 0.0) ? cplx(1.0) : std::sinh(z) / z;
    const cplx inner = std::cosh(z) + 0.25 * (kappa - gamma) * t_s * sinhc;
    return std::exp(-0.5 * (kappa + gamma) * t_s) * std::norm(inner);
}

double two_level_pf_expm(double t_s, double g_tilde, double kappa, double gamma) {
    Eigen::Matrix2cd h;
    h << cplx(0.0, -0.5 * gamma), cplx(g_tilde, 0.0), cplx(g_tilde, 0.0),
        cplx(0.0, -0.5 * kappa);
    const Eigen::Matrix2cd u = (cplx(0, -1) * t_s * h).exp();
    return std::norm(u(0, 0));  // starts and is observed in |f,0>
}

}  // namespace qreset
