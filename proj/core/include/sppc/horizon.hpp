#pragma once

#include <vector>

#include "sppc/linalg.hpp"
#include "sppc/plant.hpp"

namespace sppc {

/// Stacked N-step prediction operators. Row block i of Phi/Upsilon predicts
/// x'_{i+1}; G = Qbar^{1/2} Phi and H = -Qbar^{1/2} Upsilon turn the
/// finite-horizon cost into ||G u - H x||^2.
struct HorizonMatrices {
  int n = 0;
  int N = 0;
  Matrix Phi;                 // (N n) x N, block lower triangular
  std::vector<Matrix> Phi_i;  // N blocks, each n x N
  Matrix Upsilon;             // (N n) x n, [A; A^2; ...; A^N]
  Matrix Qbar;                // blockdiag(Q, ..., Q, P)
  Matrix QbarSqrt;
  Matrix G;                   // (N n) x N
  Matrix H;                   // (N n) x n
};

HorizonMatrices build_horizon(const PlantModel& m, const Matrix& Q,
                              const Matrix& P, int N);

/// ||G u - H x||^2.
double cost_quadratic(const HorizonMatrices& hm, const Vector& u,
                      const Vector& x);

}  // namespace sppc
