#include "sppc/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json_util.hpp"
#include "sppc/error.hpp"

namespace sppc {

namespace {

void require_spd(const Matrix& Q, int n, const char* name) {
  if (Q.rows() != n || Q.cols() != n)
    throw ValidationError(std::string(name) + " must be n x n");
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError(std::string(name) + " must be symmetric");
  if (!linalg::is_positive_definite(Q))
    throw ValidationError(std::string(name) + " must be positive definite");
}

}  // namespace

double dare_residual(const PlantModel& m, const Matrix& Q, const Matrix& P,
                     double delta) {
  const Vector PB = P * m.B;
  const double s = m.B.dot(PB) + delta;
  const Vector AtPB = m.A.transpose() * PB;
  const Matrix R = m.A.transpose() * P * m.A - AtPB * AtPB.transpose() / s + Q - P;
  return R.norm();
}

DareResult solve_dare(const PlantModel& m, const Matrix& Q,
                      const DareOptions& opts) {
  validate(m);
  require_spd(Q, m.n(), "Q");
  if (opts.delta < 0.0) throw ValidationError("delta must be >= 0");

  const Matrix Qs = linalg::symmetrize(Q);
  Matrix P = Qs;
  DareResult out;
  bool converged = false;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const Vector PB = P * m.B;
    const double s = m.B.dot(PB) + opts.delta;
    if (!(s > 0.0)) throw NumericError("solve_dare: B'PB + delta is not positive");
    const Vector AtPB = m.A.transpose() * PB;
    Matrix next = m.A.transpose() * P * m.A - AtPB * AtPB.transpose() / s + Qs;
    next = linalg::symmetrize(next);
    if (!next.allFinite()) throw NumericError("solve_dare: iterate diverged");
    const double change = (next - P).norm() / next.norm();
    P = std::move(next);
    out.iterations = it;
    if (change <= opts.rel_tol) {
      converged = true;
      break;
    }
  }
  out.P = P;
  out.residual = dare_residual(m, Qs, P, opts.delta);
  if (!converged)
    throw SolverError("solve_dare: no convergence after " +
                          std::to_string(opts.max_iters) + " iterations",
                      out.residual);
  if (out.residual > 1e-9 * P.norm())
    throw SolverError("solve_dare: residual above tolerance", out.residual);
  if (!linalg::is_positive_definite(P))
    throw SolverError("solve_dare: solution is not positive definite", out.residual);
  return out;
}

Eigen::RowVectorXd lq_gain(const PlantModel& m, const Matrix& P) {
  validate(m);
  const Vector PB = P * m.B;
  const double s = m.B.dot(PB);
  if (!(s > 0.0)) throw NumericError("lq_gain: B'PB is not positive");
  return -(PB.transpose() * m.A) / s;
}

DesignConstants design_constants(const Matrix& Q, const Matrix& P,
                                 const HorizonMatrices& hm) {
  const Matrix GtG = hm.G.transpose() * hm.G;
  DesignConstants dc;
  dc.c1 = 0.0;
  for (const auto& Phi_i : hm.Phi_i) {
    const Matrix num = Phi_i.transpose() * P * Phi_i;
    dc.c1 = std::max(dc.c1, linalg::pencil_max_eigenvalue(num, GtG));
  }
  if (!(dc.c1 > 0.0)) throw DesignInfeasibleError("design constant c1 is not positive");

  double rho = 1.0 - linalg::pencil_min_eigenvalue(Q, P);
  if (rho < 0.0 && rho > -1e-12) rho = 0.0;
  if (!(rho >= 0.0 && rho < 1.0))
    throw DesignInfeasibleError("rho = " + std::to_string(rho) +
                                " outside [0, 1): P >= Q violated");
  dc.rho = rho;
  dc.c = rho == 0.0 ? dc.c1 : dc.c1 * (1.0 - std::pow(rho, hm.N)) / (1.0 - rho);
  return dc;
}

CostDesign build_design(const PlantModel& m, const Matrix& Q, int N,
                        double eta, double delta) {
  validate(m);
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("eta must lie in (0, 1)");
  if (N < 1) throw ValidationError("horizon N must be >= 1");
  require_spd(Q, m.n(), "Q");
  if (!is_reachable(m)) throw ValidationError("plant (A, B) is not reachable");

  CostDesign d;
  d.Q = linalg::symmetrize(Q);
  d.N = N;
  d.eta = eta;
  d.delta = delta;

  DareOptions opts;
  opts.delta = delta;
  const DareResult dare = solve_dare(m, d.Q, opts);
  d.P = dare.P;
  d.dare_iterations = dare.iterations;
  d.dare_residual = dare.residual;
  d.K = lq_gain(m, d.P);

  const HorizonMatrices hm = build_horizon(m, d.Q, d.P, N);
  const DesignConstants dc = design_constants(d.Q, d.P, hm);
  d.c1 = dc.c1;
  d.rho = dc.rho;
  d.c = dc.c;

  d.Wstar = d.P - d.Q;
  d.Eps = eta * (1.0 - d.rho) / d.c * d.P;
  d.W = d.Wstar + d.Eps;
  check_design_invariants(d);
  return d;
}

void check_design_invariants(const CostDesign& d) {
  if (!linalg::is_positive_definite(d.Q)) throw DesignInfeasibleError("Q is not positive definite");
  if (!linalg::is_positive_definite(d.P)) throw DesignInfeasibleError("P is not positive definite");
  if (!linalg::is_positive_definite(d.W)) throw DesignInfeasibleError("W is not positive definite");
  if (!linalg::is_positive_semidefinite(d.Wstar))
    throw DesignInfeasibleError("W* = P - Q is not positive semidefinite");
  if (!linalg::is_positive_definite(d.Eps)) throw DesignInfeasibleError("Eps is not positive definite");
  if (!(d.rho >= 0.0 && d.rho < 1.0)) throw DesignInfeasibleError("rho outside [0, 1)");
  if (!(d.c > 0.0)) throw DesignInfeasibleError("c is not positive");
  if (!linalg::is_positive_definite((1.0 - d.rho) / d.c * d.P - d.Eps))
    throw DesignInfeasibleError("Eps exceeds (1 - rho) P / c");
}

std::string design_to_json_text(const CostDesign& d, const PlantModel& m) {
  using detail::json;
  json j;
  j["plant"] = {{"A", detail::matrix_to_json(m.A)}, {"B", detail::vector_to_json(m.B)}};
  j["N"] = d.N;
  j["eta"] = d.eta;
  j["delta"] = d.delta;
  j["Q"] = detail::matrix_to_json(d.Q);
  j["P"] = detail::matrix_to_json(d.P);
  j["K"] = detail::vector_to_json(d.K.transpose());
  j["Wstar"] = detail::matrix_to_json(d.Wstar);
  j["Eps"] = detail::matrix_to_json(d.Eps);
  j["W"] = detail::matrix_to_json(d.W);
  j["c1"] = d.c1;
  j["rho"] = d.rho;
  j["c"] = d.c;
  j["dare_iterations"] = d.dare_iterations;
  j["dare_residual"] = d.dare_residual;
  return j.dump(2) + "\n";
}

LoadedDesign design_from_json_text(const std::string& text) {
  using detail::json;
  const json j = detail::parse_json(text, "design");
  try {
    LoadedDesign out;
    const auto& pj = j.at("plant");
    out.plant = PlantModel{detail::matrix_from_json(pj.at("A"), "A"),
                           detail::vector_from_json(pj.at("B"), "B")};
    validate(out.plant);
    CostDesign& d = out.design;
    d.N = j.at("N").get<int>();
    d.eta = j.at("eta").get<double>();
    d.delta = j.value("delta", 0.0);
    d.Q = detail::matrix_from_json(j.at("Q"), "Q");
    d.P = detail::matrix_from_json(j.at("P"), "P");
    d.K = detail::vector_from_json(j.at("K"), "K").transpose();
    d.Wstar = detail::matrix_from_json(j.at("Wstar"), "Wstar");
    d.Eps = detail::matrix_from_json(j.at("Eps"), "Eps");
    d.W = detail::matrix_from_json(j.at("W"), "W");
    d.c1 = j.at("c1").get<double>();
    d.rho = j.at("rho").get<double>();
    d.c = j.at("c").get<double>();
    d.dare_iterations = j.value("dare_iterations", 0);
    d.dare_residual = j.value("dare_residual", 0.0);
    const int n = out.plant.n();
    for (const Matrix* M : {&d.Q, &d.P, &d.Wstar, &d.Eps, &d.W})
      if (M->rows() != n || M->cols() != n)
        throw ValidationError("design matrices must be n x n");
    if (d.K.size() != n) throw ValidationError("K must have n entries");
    if (d.N < 1) throw ValidationError("N must be >= 1");
    check_design_invariants(d);
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("design JSON: ") + e.what());
  } catch (const DesignInfeasibleError& e) {
    throw ValidationError(std::string("design JSON: ") + e.what());
  }
}

}  // namespace sppc
