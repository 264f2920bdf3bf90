#include "qreset/fit.hpp"

#include <cmath>
#include <limits>

#include "qreset/errors.hpp"
#include "qreset/rng.hpp"

namespace qreset {

namespace {

Eigen::VectorXd default_scales(const Eigen::VectorXd& p0) {
    Eigen::VectorXd s(p0.size());
    for (Eigen::Index i = 0; i < p0.size(); ++i) s(i) = std::max(std::abs(p0(i)), 1.0);
    return s;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

FitResult fit_least_squares(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                            const FitOptions& opt, const Eigen::VectorXd& scales_in) {
    const Eigen::Index n = p0.size();
    const Eigen::VectorXd scales = scales_in.size() == n ? scales_in : default_scales(p0);

    auto eval = [&](const Eigen::VectorXd& q) { return residuals(q.cwiseProduct(scales)); };

    Eigen::VectorXd q = p0.cwiseQuotient(scales);
    Eigen::VectorXd r = eval(q);
    if (!finite(r)) throw FitFailure("fit_least_squares: residuals not finite at start");
    const Eigen::Index m = r.size();
    double cost = r.squaredNorm();

    const double fd_step = std::sqrt(std::numeric_limits<double>::epsilon());
    Eigen::MatrixXd jac(m, n);
    double lambda = opt.lambda0;
    int iter = 0;
    bool converged = false;

    for (; iter < opt.max_iterations; ++iter) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double h = fd_step * std::max(std::abs(q(j)), 1e-2);
            Eigen::VectorXd qj = q;
            qj(j) += h;
            jac.col(j) = (eval(qj) - r) / h;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        if (jtr.cwiseAbs().maxCoeff() < 1e-14 * std::max(1.0, cost)) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (lambda < 1e14) {
            Eigen::MatrixXd damped = jtj;
            for (Eigen::Index j = 0; j < n; ++j)
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            const Eigen::VectorXd q_new = q + step;
            const Eigen::VectorXd r_new = eval(q_new);
            const double cost_new = finite(r_new) ? r_new.squaredNorm()
                                                  : std::numeric_limits<double>::infinity();
            if (cost_new < cost) {
                const double rel_drop = (cost - cost_new) / std::max(cost, 1e-300);
                q = q_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel_drop < opt.rel_cost_tol) converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted || converged) {
            converged = converged || accepted;
            if (!accepted && cost < 1e-20) converged = true;  // already at a numerical zero
            break;
        }
    }

    FitResult out;
    out.params = q.cwiseProduct(scales);
    out.cost = cost;
    out.iterations = iter;
    out.converged = converged || cost < 1e-20;

    // Covariance in original parameter units from the final Jacobian.
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = fd_step * std::max(std::abs(q(j)), 1e-2);
        Eigen::VectorXd qj = q;
        qj(j) += h;
        jac.col(j) = (eval(qj) - r) / h;
    }
    const double dof = double(m) - double(n);
    const double s2 = dof > 0 ? cost / dof : 0.0;
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    jtj.diagonal().array() += 1e-300;
    const Eigen::MatrixXd cov_q = jtj.ldlt().solve(Eigen::MatrixXd::Identity(n, n)) * s2;
    out.covariance = scales.asDiagonal() * cov_q * scales.asDiagonal();
    return out;
}

FitResult fit_multistart(const ResidualFn& residuals, const Eigen::VectorXd& p0,
                         const FitOptions& opt, const Eigen::VectorXd& scales_in) {
    const Eigen::Index n = p0.size();
    const Eigen::VectorXd scales = scales_in.size() == n ? scales_in : default_scales(p0);

    FitResult best;
    best.cost = std::numeric_limits<double>::infinity();
    bool have_any = false;

    CounterRng rng(opt.seed, 0);
    for (int s = 0; s <= opt.multi_starts; ++s) {
        Eigen::VectorXd start = p0;
        if (s > 0) {
            for (Eigen::Index j = 0; j < n; ++j)
                start(j) += opt.perturbation * scales(j) *
                            rng.normal(std::uint64_t(s) * 1024 + std::uint64_t(j));
        }
        try {
            FitResult r = fit_least_squares(residuals, start, opt, scales);
            if (r.converged && r.cost < best.cost) {
                best = r;
                have_any = true;
            }
        } catch (const FitFailure&) {
            // a bad start is not an error; other starts may land
        }
    }
    if (!have_any)
        throw FitFailure("fit_multistart: no start converged after " +
                         std::to_string(opt.multi_starts + 1) + " attempts");
    return best;
}

}  // namespace qreset
