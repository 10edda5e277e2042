#include "sppc/horizon.hpp"

#include "sppc/error.hpp"

namespace sppc {

HorizonMatrices build_horizon(const PlantModel& m, const Matrix& Q,
                              const Matrix& P, int N) {
  validate(m);
  const int n = m.n();
  if (N < 1) throw ValidationError("horizon N must be >= 1");
  if (Q.rows() != n || Q.cols() != n || P.rows() != n || P.cols() != n)
    throw ValidationError("Q and P must be n x n");
  if (!linalg::is_positive_definite(Q) || !linalg::is_positive_definite(P))
    throw ValidationError("Q and P must be symmetric positive definite");

  HorizonMatrices hm;
  hm.n = n;
  hm.N = N;

  // A^k B for k = 0..N-1 and A^k for k = 1..N.
  std::vector<Vector> AkB(static_cast<std::size_t>(N));
  AkB[0] = m.B;
  for (int k = 1; k < N; ++k) AkB[k] = m.A * AkB[k - 1];

  hm.Phi = Matrix::Zero(N * n, N);
  hm.Upsilon.resize(N * n, n);
  Matrix Ak = m.A;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= i; ++j) hm.Phi.block(i * n, j, n, 1) = AkB[i - j];
    hm.Upsilon.block(i * n, 0, n, n) = Ak;
    Ak = m.A * Ak;
  }
  hm.Phi_i.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) hm.Phi_i.push_back(hm.Phi.block(i * n, 0, n, N));

  const Matrix Qs = linalg::sym_sqrt(Q);
  const Matrix Ps = linalg::sym_sqrt(P);
  hm.Qbar = Matrix::Zero(N * n, N * n);
  hm.QbarSqrt = Matrix::Zero(N * n, N * n);
  for (int i = 0; i < N - 1; ++i) {
    hm.Qbar.block(i * n, i * n, n, n) = linalg::symmetrize(Q);
    hm.QbarSqrt.block(i * n, i * n, n, n) = Qs;
  }
  hm.Qbar.block((N - 1) * n, (N - 1) * n, n, n) = linalg::symmetrize(P);
  hm.QbarSqrt.block((N - 1) * n, (N - 1) * n, n, n) = Ps;

  // Block-diagonal weight applied row block by row block.
  hm.G.resize(N * n, N);
  hm.H.resize(N * n, n);
  for (int i = 0; i < N; ++i) {
    const Matrix& S = (i == N - 1) ? Ps : Qs;
    hm.G.block(i * n, 0, n, N) = S * hm.Phi.block(i * n, 0, n, N);
    hm.H.block(i * n, 0, n, n) = -S * hm.Upsilon.block(i * n, 0, n, n);
  }

  if (linalg::numerical_rank(hm.G) != N)
    throw DesignInfeasibleError("prediction operator G is rank deficient");
  return hm;
}

double cost_quadratic(const HorizonMatrices& hm, const Vector& u,
                      const Vector& x) {
  if (u.size() != hm.N || x.size() != hm.n)
    throw ValidationError("cost_quadratic: dimension mismatch");
  return (hm.G * u - hm.H * x).squaredNorm();
}

}  // namespace sppc
