#pragma once

#include <string>

#include "sppc/horizon.hpp"
#include "sppc/linalg.hpp"
#include "sppc/plant.hpp"

namespace sppc {

/// Cost matrices and constants that make sparse packets stabilizing under
/// dropout bursts shorter than the horizon.
///
/// W = (P - Q) + Eps with 0 < Eps < (1 - rho) P / c.
struct CostDesign {
  Matrix Q;
  Matrix P;
  Eigen::RowVectorXd K;
  Matrix Wstar;
  Matrix Eps;
  Matrix W;
  double c1 = 0.0;
  double rho = 0.0;
  double c = 0.0;
  int N = 0;
  double eta = 2.0 / 3.0;
  double delta = 0.0;
  int dare_iterations = 0;
  double dare_residual = 0.0;
};

struct DareOptions {
  double delta = 0.0;  ///< adds delta inside (B'PB + delta)^{-1}
  double rel_tol = 1e-13;
  int max_iters = 100000;
};

struct DareResult {
  Matrix P;
  int iterations = 0;
  double residual = 0.0;  ///< Frobenius norm of the Riccati residual
};

/// P = A'PA - A'PB (B'PB + delta)^{-1} B'PA + Q by fixed-point iteration
/// from P = Q.
DareResult solve_dare(const PlantModel& m, const Matrix& Q,
                      const DareOptions& opts = {});

/// Frobenius norm of A'PA - A'PB (B'PB + delta)^{-1} B'PA + Q - P.
double dare_residual(const PlantModel& m, const Matrix& Q, const Matrix& P,
                     double delta = 0.0);

/// K = -(B'PB)^{-1} B'PA.
Eigen::RowVectorXd lq_gain(const PlantModel& m, const Matrix& P);

struct DesignConstants {
  double c1 = 0.0;
  double rho = 0.0;
  double c = 0.0;
};

DesignConstants design_constants(const Matrix& Q, const Matrix& P,
                                 const HorizonMatrices& hm);

/// Runs the whole procedure: DARE, gain, horizon, constants, slack, W.
CostDesign build_design(const PlantModel& m, const Matrix& Q, int N,
                        double eta = 2.0 / 3.0, double delta = 0.0);

/// Throws DesignInfeasibleError if a CostDesign invariant is violated.
void check_design_invariants(const CostDesign& d);

std::string design_to_json_text(const CostDesign& d, const PlantModel& m);

struct LoadedDesign {
  PlantModel plant;
  CostDesign design;
};
LoadedDesign design_from_json_text(const std::string& text);

}  // namespace sppc
