#include "sppc/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sppc/error.hpp"

namespace sppc::linalg {

Matrix expm(const Matrix& M) {
  if (M.rows() != M.cols()) throw ValidationError("expm: matrix is not square");
  const Eigen::Index n = M.rows();
  if (n == 0) return M;
  if (!all_finite(M)) throw NumericError("expm: non-finite input");

  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Matrix A = M / std::ldexp(1.0, s);

  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;

  const Matrix U =
      A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 +
           b[5] * A4 + b[3] * A2 + b[1] * I);
  const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                   b[4] * A4 + b[2] * A2 + b[0] * I;

  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < s; ++i) R = R * R;

  if (!all_finite(R)) throw NumericError("expm: result overflowed");
  return R;
}

int numerical_rank(const Matrix& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  const double dim = static_cast<double>(std::max(M.rows(), M.cols()));
  const double thresh = dim * smax * 1e-12;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  return rank;
}

Matrix sym_sqrt(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
  if (es.info() != Eigen::Success) throw NumericError("sym_sqrt: eigensolver failed");
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

bool is_positive_definite(const Matrix& S) {
  if (S.rows() != S.cols() || S.size() == 0) return false;
  Eigen::LLT<Matrix> llt(symmetrize(S));
  return llt.info() == Eigen::Success;
}

bool is_positive_semidefinite(const Matrix& S, double tol) {
  if (S.rows() != S.cols()) return false;
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  return is_positive_definite(S + tol * scale * Matrix::Identity(S.rows(), S.cols()));
}

namespace {

Vector pencil_eigenvalues(const Matrix& A, const Matrix& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(
      symmetrize(A), symmetrize(B), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw NumericError("generalized eigenproblem failed (B not positive definite?)");
  return ges.eigenvalues();
}

}  // namespace

double pencil_max_eigenvalue(const Matrix& A, const Matrix& B) {
  return pencil_eigenvalues(A, B).maxCoeff();
}

double pencil_min_eigenvalue(const Matrix& A, const Matrix& B) {
  return pencil_eigenvalues(A, B).minCoeff();
}

double power_iteration_max(const Matrix& S, int max_iters, double rel_tol) {
  const Eigen::Index n = S.rows();
  if (n == 0) return 0.0;
  // Deterministic start with components in every direction.
  Vector v = Vector::LinSpaced(n, 1.0, 2.0).normalized();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = S * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / nw;
    if (std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

Matrix symmetrize(const Matrix& S) { return 0.5 * (S + S.transpose()); }

bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace sppc::linalg
