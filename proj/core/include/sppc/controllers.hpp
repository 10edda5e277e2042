#pragma once

#include <string>
#include <vector>

#include "sppc/horizon.hpp"
#include "sppc/linalg.hpp"

namespace sppc {

/// N tentative plant inputs sent in one transmission.
struct ControlPacket {
  Vector u;
  int sparsity = 0;  ///< exact count of nonzero entries
  int solver_iters = 0;
  double solve_seconds = 0.0;
  bool converged = true;
};

int count_nonzeros(const Vector& u);

struct FeasibilityCertificate {
  double residual_sq = 0.0;
  double budget = 0.0;
  bool feasible = false;
};

/// Relative slack applied to the budget when testing ||Gu - Hx||^2 <= x'Wx.
inline constexpr double kFeasibilitySlack = 1e-9;

FeasibilityCertificate check_feasible(const HorizonMatrices& hm,
                                      const Matrix& W, const Vector& u,
                                      const Vector& x);

/// Per-iteration record of an OMP run.
struct OmpRun {
  ControlPacket packet;
  std::vector<int> selection_order;
  std::vector<double> residuals;  ///< ||r[k]||^2 for k = 0..iterations
  double budget = 0.0;
};

/// Greedy sparse packet: add the column whose one-dimensional fit leaves the
/// smallest residual, refit on the whole support, stop once
/// ||r||^2 <= x'Wx. Ties go to the smallest column index.
OmpRun omp_run(const HorizonMatrices& hm, const Matrix& W, const Vector& x);
ControlPacket omp_packet(const HorizonMatrices& hm, const Matrix& W,
                         const Vector& x);

inline constexpr int kExhaustiveDefaultCap = 12;

/// Minimum-sparsity feasible packet by enumerating supports in increasing
/// size and lexicographic order. Exponential; test/oracle use only.
ControlPacket exhaustive_l0_packet(const HorizonMatrices& hm, const Matrix& W,
                                   const Vector& x,
                                   int N_max = kExhaustiveDefaultCap);

/// Least-squares fit restricted to `support` (column indices of G).
Vector support_least_squares(const HorizonMatrices& hm,
                             const std::vector<int>& support,
                             const Vector& x);

/// Unconstrained minimizer of ||G u - H x||^2.
ControlPacket least_squares_packet(const HorizonMatrices& hm, const Vector& x);

/// u = (nu2 I + G'G)^{-1} G'H x.
ControlPacket l2_packet(const HorizonMatrices& hm, const Vector& x,
                        double nu2);

struct FistaOptions {
  int max_iters = 10000;
  double rel_tol = 1e-10;  ///< relative objective change
  /// Proximal-gradient step norm relative to ||G'Hx||.
  double grad_tol = 1e-10;
  /// Entries below clamp_rel * ||u||_inf are zeroed before counting.
  double clamp_rel = 1e-8;
};

/// nu1 ||u||_1 + 0.5 ||G u - H x||^2.
double l1l2_objective(const HorizonMatrices& hm, const Vector& x,
                      const Vector& u, double nu1);

/// FISTA with step 1/lambda_max(G'G) and gradient-based restart. Returns the
/// zero packet directly when nu1 >= ||G'Hx||_inf.
ControlPacket l1l2_packet(const HorizonMatrices& hm, const Vector& x,
                          double nu1, const FistaOptions& opts = {});

enum class ControllerKind { Omp, L1L2, L2, LeastSquares, Oracle };

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Omp;
  double nu = 0.0;  ///< nu1 for L1L2, nu2 for L2

  /// Short stable label such as "omp" or "l2(310)".
  std::string label() const;
};

ControllerSpec parse_controller(const std::string& text);
std::string to_string(ControllerKind kind);

/// Binds a controller family to a horizon and constraint weight.
class PacketSolver {
 public:
  PacketSolver(const HorizonMatrices& hm, const Matrix& W, ControllerSpec spec);

  ControlPacket solve(const Vector& x) const;
  const ControllerSpec& spec() const { return spec_; }

 private:
  HorizonMatrices hm_;
  Matrix W_;
  ControllerSpec spec_;
};

}  // namespace sppc
