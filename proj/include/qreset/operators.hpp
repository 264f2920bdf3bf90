#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qreset {

using QOperator = Eigen::MatrixXcd;
using QKet = Eigen::VectorXcd;

/// Lowering operator b on a transmon truncated to n_levels eigenstates:
/// entries (i, i+1) = sqrt(i+1). Throws InvalidDimension for n_levels < 2.
QOperator transmon_lowering(int n_levels);

/// Lowering operator a on a Fock space truncated at n_fock - 1 photons.
QOperator resonator_lowering(int n_fock);

/// Kronecker product. Index ordering is transmon-major everywhere:
/// product state |s, n> lives at index s * n_fock + n.
QOperator tensor(const QOperator& a, const QOperator& b);

QOperator dagger(const QOperator& a);

inline int product_index(int s, int n, int n_fock) { return s * n_fock + n; }

/// Computational basis ket e_idx in a dim-dimensional space.
QKet basis_ket(int dim, int idx);

/// |s, n> on the transmon (x) resonator product space.
QKet product_ket(int s, int n, int n_levels, int n_fock);

Eigen::MatrixXcd density_from_ket(const QKet& psi);

/// |ket_i><bra_j| on an n-dimensional space.
QOperator ketbra(int i, int j, int n);

/// Trace and positivity checks for a density matrix after trace-preserving
/// evolution: |tr rho - 1| < trace_tol and min eigenvalue > -eig_tol.
bool is_valid_density(const Eigen::MatrixXcd& rho, double trace_tol = 1e-8,
                      double eig_tol = 1e-9);

}  // namespace qreset
