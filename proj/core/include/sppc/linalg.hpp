#pragma once

#include <Eigen/Dense>

namespace sppc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005).
Matrix expm(const Matrix& M);

/// Numerical rank: singular values above rows * sigma_max * 1e-12.
int numerical_rank(const Matrix& M);

/// Symmetric PSD square root through an eigendecomposition. Tiny negative
/// eigenvalues from roundoff are clamped to zero.
Matrix sym_sqrt(const Matrix& S);

/// True when the symmetric part of S admits a Cholesky factorization.
bool is_positive_definite(const Matrix& S);

/// True when S + tol * max(1, |S|) * I is positive definite.
bool is_positive_semidefinite(const Matrix& S, double tol = 1e-10);

/// Extreme eigenvalues of the symmetric-definite pencil (A, B): A v = l B v
/// with B positive definite.
double pencil_max_eigenvalue(const Matrix& A, const Matrix& B);
double pencil_min_eigenvalue(const Matrix& A, const Matrix& B);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration_max(const Matrix& S, int max_iters = 1000,
                           double rel_tol = 1e-12);

Matrix symmetrize(const Matrix& S);

bool all_finite(const Matrix& M);

}  // namespace linalg
}  // namespace sppc
