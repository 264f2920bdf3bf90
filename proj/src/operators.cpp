#include "qreset/operators.hpp"

#include <cmath>

#include "qreset/errors.hpp"

namespace qreset {

QOperator transmon_lowering(int n_levels) {
    if (n_levels < 2)
        throw InvalidDimension("transmon_lowering: need at least 2 levels, got " +
                               std::to_string(n_levels));
    QOperator b = QOperator::Zero(n_levels, n_levels);
    for (int i = 0; i + 1 < n_levels; ++i) b(i, i + 1) = std::sqrt(double(i + 1));
    return b;
}

QOperator resonator_lowering(int n_fock) {
    if (n_fock < 2)
        throw InvalidDimension("resonator_lowering: need at least 2 Fock states, got " +
                               std::to_string(n_fock));
    return transmon_lowering(n_fock);
}

QOperator tensor(const QOperator& a, const QOperator& b) {
    const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    QOperator out(ra * rb, ca * cb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index j = 0; j < ca; ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

QOperator dagger(const QOperator& a) { return a.adjoint(); }

QKet basis_ket(int dim, int idx) {
    if (idx < 0 || idx >= dim) throw InvalidDimension("basis_ket: index out of range");
    QKet v = QKet::Zero(dim);
    v(idx) = 1.0;
    return v;
}

QKet product_ket(int s, int n, int n_levels, int n_fock) {
    if (s < 0 || s >= n_levels || n < 0 || n >= n_fock)
        throw InvalidDimension("product_ket: state index out of range");
    return basis_ket(n_levels * n_fock, product_index(s, n, n_fock));
}

Eigen::MatrixXcd density_from_ket(const QKet& psi) { return psi * psi.adjoint(); }

QOperator ketbra(int i, int j, int n) {
    QOperator m = QOperator::Zero(n, n);
    m(i, j) = 1.0;
    return m;
}

bool is_valid_density(const Eigen::MatrixXcd& rho, double trace_tol, double eig_tol) {
    if (rho.rows() != rho.cols()) return false;
    if (std::abs(rho.trace().real() - 1.0) > trace_tol) return false;
    if (std::abs(rho.trace().imag()) > trace_tol) return false;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > -eig_tol;
}

}  // namespace qreset
