#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "sppc/design.hpp"
#include "sppc/error.hpp"

using namespace sppc;

namespace {

double min_eig(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((S + S.transpose()) / 2);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("Cessna DARE agrees with long-double value iteration") {
  const auto m = cessna500();
  const Matrix Q = Matrix::Identity(4, 4);
  const auto res = solve_dare(m, Q);
  const Matrix ref = oracle::value_iteration_dare(m.A, m.B, Q);
  CHECK((res.P - ref).norm() <= 1e-9 * ref.norm());
  CHECK(res.residual <= 1e-9 * res.P.norm());
  CHECK(dare_residual(m, Q, res.P) == doctest::Approx(res.residual).epsilon(1e-6));
  CHECK(linalg::is_positive_definite(res.P));
}

TEST_CASE("DARE on random reachable systems") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 6;
    auto [A, B] = oracle::random_reachable(rng, n);
    const PlantModel m{A, B};
    const Matrix Q = Matrix::Identity(n, n);
    const auto res = solve_dare(m, Q);
    const Matrix ref = oracle::value_iteration_dare(A, B, Q);
    CHECK((res.P - ref).norm() <= 1e-8 * ref.norm());
  }
}

TEST_CASE("LQ gain annihilates B'P(A + BK) and satisfies the closed-loop Lyapunov identity") {
  const auto m = cessna500();
  const Matrix Q = Matrix::Identity(4, 4);
  const Matrix P = solve_dare(m, Q).P;
  const Eigen::RowVectorXd K = lq_gain(m, P);
  const Matrix Acl = m.A + m.B * K;
  CHECK((Acl.transpose() * P * Acl - P + Q).norm() <= 1e-8 * P.norm());
  CHECK((m.B.transpose() * P * Acl).cwiseAbs().maxCoeff() <= 1e-8 * P.norm() * m.B.norm());
}

TEST_CASE("delta-regularized Riccati") {
  const auto m = cessna500();
  const Matrix Q = Matrix::Identity(4, 4);
  DareOptions opts;
  opts.delta = 1.0;
  const auto res = solve_dare(m, Q, opts);
  CHECK(dare_residual(m, Q, res.P, 1.0) <= 1e-9 * res.P.norm());
  CHECK(dare_residual(m, Q, res.P, 0.0) > 1e-6 * res.P.norm());
  // More expensive input means a larger value function.
  CHECK(min_eig(res.P - solve_dare(m, Q).P) > -1e-9);
}

TEST_CASE("design constants match independent computations") {
  const auto m = cessna500();
  const auto d = build_design(m, Matrix::Identity(4, 4), 10);
  const auto hm = build_horizon(m, d.Q, d.P, 10);
  const Matrix GtG = hm.G.transpose() * hm.G;
  double c1 = 0.0;
  for (const auto& Pi : hm.Phi_i)
    c1 = std::max(c1, oracle::pencil_max(Pi.transpose() * d.P * Pi, GtG));
  CHECK(d.c1 == doctest::Approx(c1).epsilon(1e-6));

  const double rho = oracle::pencil_max(d.P - d.Q, d.P);
  CHECK(d.rho == doctest::Approx(rho).epsilon(1e-9));
  CHECK(d.c == doctest::Approx(d.c1 * (1 - std::pow(d.rho, 10)) / (1 - d.rho)).epsilon(1e-12));

  CHECK(d.rho > 0.0);
  CHECK(d.rho < 1.0);
  CHECK(d.c1 >= 1.0 - 1e-9);
}

TEST_CASE("Cessna design reference values") {
  const auto d = build_design(cessna500(), Matrix::Identity(4, 4), 10);
  CHECK(d.rho == doctest::Approx(0.999853758399607).epsilon(1e-9));
  CHECK(d.c1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(d.c == doctest::Approx(9.993421693724088).epsilon(1e-7));
  CHECK(d.N == 10);
  CHECK(d.eta == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("slack and constraint weight invariants") {
  const auto d = build_design(cessna500(), Matrix::Identity(4, 4), 10);
  CHECK((d.Wstar - (d.P - d.Q)).norm() <= 1e-12 * d.P.norm());
  CHECK((d.Eps - d.eta * (1 - d.rho) * d.P / d.c).norm() <= 1e-12 * d.Eps.norm());
  CHECK(linalg::is_positive_definite(d.Eps));
  CHECK(linalg::is_positive_definite((1 - d.rho) * d.P / d.c - d.Eps));
  CHECK(linalg::is_positive_definite(d.W));
  CHECK((d.W - d.Wstar - d.Eps).norm() <= 1e-12 * d.W.norm());
  CHECK_NOTHROW(check_design_invariants(d));

  auto broken = d;
  broken.Eps *= 2.0;
  broken.W = broken.Wstar + broken.Eps;
  CHECK_THROWS_AS(check_design_invariants(broken), DesignInfeasibleError);
}

TEST_CASE("unconstrained horizon optimum equals x'W*x") {
  const auto m = cessna500();
  const auto d = build_design(m, Matrix::Identity(4, 4), 10);
  const auto hm = build_horizon(m, d.Q, d.P, 10);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(4);
    for (auto& e : x) e = g(rng);
    const Vector u = hm.G.colPivHouseholderQr().solve(hm.H * x);
    const double best = (hm.G * u - hm.H * x).squaredNorm();
    const double ref = x.dot(d.Wstar * x);
    CHECK(std::abs(best - ref) <= 1e-6 * ref);
  }
}

TEST_CASE("build_design argument checks") {
  const auto m = cessna500();
  const Matrix I = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(build_design(m, I, 10, 0.0), ValidationError);
  CHECK_THROWS_AS(build_design(m, I, 10, 1.0), ValidationError);
  CHECK_THROWS_AS(build_design(m, I, 10, -0.5), ValidationError);
  CHECK_THROWS_AS(build_design(m, I, 0), ValidationError);
  CHECK_THROWS_AS(build_design(m, -I, 10), ValidationError);
  Matrix asym = I;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(build_design(m, asym, 10), ValidationError);
  PlantModel unreachable{Matrix::Identity(2, 2), Vector::Zero(2)};
  unreachable.B(0) = 1.0;
  CHECK_THROWS_AS(build_design(unreachable, Matrix::Identity(2, 2), 4), ValidationError);
}

TEST_CASE("eta scales the slack linearly") {
  const auto m = cessna500();
  const auto a = build_design(m, Matrix::Identity(4, 4), 10, 0.2);
  const auto b = build_design(m, Matrix::Identity(4, 4), 10, 0.4);
  CHECK((2.0 * a.Eps - b.Eps).norm() <= 1e-12 * b.Eps.norm());
}

TEST_CASE("design JSON roundtrip") {
  const auto m = cessna500();
  const auto d = build_design(m, Matrix::Identity(4, 4), 10);
  const auto loaded = design_from_json_text(design_to_json_text(d, m));
  CHECK(loaded.plant.A.isApprox(m.A, 1e-15));
  CHECK(loaded.design.P.isApprox(d.P, 1e-15));
  CHECK(loaded.design.W.isApprox(d.W, 1e-15));
  CHECK(loaded.design.K.isApprox(d.K, 1e-15));
  CHECK(loaded.design.N == d.N);
  CHECK(loaded.design.c == doctest::Approx(d.c));
  CHECK_THROWS_AS(design_from_json_text("{}"), ValidationError);
}
