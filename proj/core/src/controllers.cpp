#include "sppc/controllers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "sppc/error.hpp"

namespace sppc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_dims(const HorizonMatrices& hm, const Vector& x) {
  if (x.size() != hm.n) throw ValidationError("state dimension does not match horizon");
}

ControlPacket make_packet(Vector u, int iters, Clock::time_point start) {
  ControlPacket p;
  p.sparsity = count_nonzeros(u);
  p.u = std::move(u);
  p.solver_iters = iters;
  p.solve_seconds = seconds_since(start);
  return p;
}

}  // namespace

int count_nonzeros(const Vector& u) {
  int nnz = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u(i) != 0.0) ++nnz;
  return nnz;
}

FeasibilityCertificate check_feasible(const HorizonMatrices& hm,
                                      const Matrix& W, const Vector& u,
                                      const Vector& x) {
  check_dims(hm, x);
  if (u.size() != hm.N) throw ValidationError("packet length does not match horizon");
  FeasibilityCertificate cert;
  cert.residual_sq = (hm.G * u - hm.H * x).squaredNorm();
  cert.budget = x.dot(W * x);
  cert.feasible =
      cert.residual_sq <= cert.budget + kFeasibilitySlack * std::max(1.0, cert.budget);
  return cert;
}

Vector support_least_squares(const HorizonMatrices& hm,
                             const std::vector<int>& support,
                             const Vector& x) {
  Vector u = Vector::Zero(hm.N);
  if (support.empty()) return u;
  Matrix Gs(hm.G.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t c = 0; c < support.size(); ++c) Gs.col(static_cast<Eigen::Index>(c)) = hm.G.col(support[c]);
  const Vector coeffs = Gs.householderQr().solve(hm.H * x);
  for (std::size_t c = 0; c < support.size(); ++c) u(support[c]) = coeffs(static_cast<Eigen::Index>(c));
  return u;
}

OmpRun omp_run(const HorizonMatrices& hm, const Matrix& W, const Vector& x) {
  check_dims(hm, x);
  const auto start = Clock::now();
  const int N = hm.N;
  const Vector Hx = hm.H * x;
  const double budget = x.dot(W * x);

  OmpRun run;
  run.budget = budget;
  Vector u = Vector::Zero(N);
  Vector r = Hx;
  double rsq = r.squaredNorm();
  run.residuals.push_back(rsq);

  std::vector<bool> in_support(static_cast<std::size_t>(N), false);
  Vector col_norm_sq(N);
  for (int j = 0; j < N; ++j) col_norm_sq(j) = hm.G.col(j).squaredNorm();

  while (rsq > budget) {
    if (static_cast<int>(run.selection_order.size()) == N)
      throw FeasibilityError("omp: full support does not meet the budget", rsq, budget);

    int best = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) {
      if (in_support[j]) continue;
      const double z = hm.G.col(j).dot(r) / col_norm_sq(j);
      const double err = (hm.G.col(j) * z - r).squaredNorm();
      if (err < best_err) {
        best_err = err;
        best = j;
      }
    }
    in_support[best] = true;
    run.selection_order.push_back(best);

    u = support_least_squares(hm, run.selection_order, x);
    r = Hx - hm.G * u;
    rsq = r.squaredNorm();
    run.residuals.push_back(rsq);
  }

  run.packet = make_packet(std::move(u), static_cast<int>(run.selection_order.size()), start);
  return run;
}

ControlPacket omp_packet(const HorizonMatrices& hm, const Matrix& W,
                         const Vector& x) {
  return omp_run(hm, W, x).packet;
}

ControlPacket exhaustive_l0_packet(const HorizonMatrices& hm, const Matrix& W,
                                   const Vector& x, int N_max) {
  check_dims(hm, x);
  const int N = hm.N;
  if (N > N_max)
    throw ValidationError("exhaustive search refused: N = " + std::to_string(N) +
                          " exceeds cap " + std::to_string(N_max));
  const auto start = Clock::now();
  int evaluated = 0;

  for (int k = 0; k <= N; ++k) {
    // Lexicographic enumeration of k-subsets of {0..N-1}.
    std::vector<int> support(static_cast<std::size_t>(k));
    std::iota(support.begin(), support.end(), 0);
    while (true) {
      Vector u = support_least_squares(hm, support, x);
      ++evaluated;
      if (check_feasible(hm, W, u, x).feasible)
        return make_packet(std::move(u), evaluated, start);
      int i = k - 1;
      while (i >= 0 && support[i] == N - k + i) --i;
      if (i < 0) break;
      ++support[i];
      for (int j = i + 1; j < k; ++j) support[j] = support[j - 1] + 1;
    }
  }
  const double rsq = (hm.G * support_least_squares(hm, [&] {
                        std::vector<int> all(static_cast<std::size_t>(N));
                        std::iota(all.begin(), all.end(), 0);
                        return all;
                      }(), x) - hm.H * x).squaredNorm();
  throw FeasibilityError("exhaustive search found no feasible support", rsq, x.dot(W * x));
}

ControlPacket least_squares_packet(const HorizonMatrices& hm, const Vector& x) {
  check_dims(hm, x);
  const auto start = Clock::now();
  Vector u = hm.G.householderQr().solve(hm.H * x);
  if (!u.allFinite()) throw NumericError("least squares: singular G'G");
  return make_packet(std::move(u), 1, start);
}

ControlPacket l2_packet(const HorizonMatrices& hm, const Vector& x, double nu2) {
  check_dims(hm, x);
  if (!(nu2 > 0.0)) throw ValidationError("nu2 must be positive");
  const auto start = Clock::now();
  Matrix M = hm.G.transpose() * hm.G;
  M.diagonal().array() += nu2;
  Vector u = M.llt().solve(hm.G.transpose() * (hm.H * x));
  return make_packet(std::move(u), 1, start);
}

double l1l2_objective(const HorizonMatrices& hm, const Vector& x,
                      const Vector& u, double nu1) {
  return nu1 * u.lpNorm<1>() + 0.5 * (hm.G * u - hm.H * x).squaredNorm();
}

ControlPacket l1l2_packet(const HorizonMatrices& hm, const Vector& x,
                          double nu1, const FistaOptions& opts) {
  check_dims(hm, x);
  if (!(nu1 > 0.0)) throw ValidationError("nu1 must be positive");
  const auto start = Clock::now();
  const int N = hm.N;
  const Matrix GtG = hm.G.transpose() * hm.G;
  const Vector b = hm.G.transpose() * (hm.H * x);
  const double L = linalg::power_iteration_max(GtG);
  if (!(L > 0.0)) throw NumericError("fista: zero Lipschitz constant");
  const double thresh = nu1 / L;
  const double c0 = (hm.H * x).squaredNorm();
  const double b_scale = b.norm();

  if (nu1 >= (1.0 - 1e-12) * b.cwiseAbs().maxCoeff()) {
    ControlPacket p = make_packet(Vector::Zero(N), 0, start);
    return p;
  }

  auto soft = [thresh](const Vector& v) {
    return v.unaryExpr([thresh](double e) {
      return e > thresh ? e - thresh : (e < -thresh ? e + thresh : 0.0);
    }).eval();
  };
  auto objective = [&](const Vector& v) {
    return nu1 * v.lpNorm<1>() + 0.5 * (v.dot(GtG * v) - 2.0 * b.dot(v) + c0);
  };

  Vector u = Vector::Zero(N);
  Vector y = u;
  double t = 1.0;
  double f_prev = objective(u);
  Vector best = u;
  double f_best = f_prev;
  bool converged = false;
  int it = 0;
  while (it < opts.max_iters) {
    ++it;
    const Vector next = soft(y - (GtG * y - b) / L);
    const double f = objective(next);
    if (f < f_best) {
      f_best = f;
      best = next;
    }
    const double step_norm = L * (y - next).norm();
    // Momentum restart once the step opposes the proximal gradient direction.
    if ((y - next).dot(next - u) > 0.0) {
      t = 1.0;
      y = next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - u);
      t = t_next;
    }
    u = next;
    if (std::abs(f - f_prev) <= opts.rel_tol * std::abs(f) &&
        step_norm <= opts.grad_tol * b_scale) {
      converged = true;
      break;
    }
    f_prev = f;
  }

  Vector out = converged ? u : best;
  if (out.size() > 0) {
    const double cut = opts.clamp_rel * out.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (std::abs(out(i)) < cut) out(i) = 0.0;
  }
  ControlPacket p = make_packet(std::move(out), it, start);
  p.converged = converged;
  return p;
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Omp: return "omp";
    case ControllerKind::L1L2: return "l1l2";
    case ControllerKind::L2: return "l2";
    case ControllerKind::LeastSquares: return "least_squares";
    case ControllerKind::Oracle: return "oracle";
  }
  return "unknown";
}

std::string ControllerSpec::label() const {
  if (kind == ControllerKind::L1L2 || kind == ControllerKind::L2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%g)", to_string(kind).c_str(), nu);
    return buf;
  }
  return to_string(kind);
}

ControllerSpec parse_controller(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  ControllerSpec spec;
  if (name == "omp") spec.kind = ControllerKind::Omp;
  else if (name == "l1l2") spec.kind = ControllerKind::L1L2;
  else if (name == "l2") spec.kind = ControllerKind::L2;
  else if (name == "least_squares" || name == "ls") spec.kind = ControllerKind::LeastSquares;
  else if (name == "oracle") spec.kind = ControllerKind::Oracle;
  else throw ValidationError("unknown controller '" + name + "'");

  const bool needs_nu = spec.kind == ControllerKind::L1L2 || spec.kind == ControllerKind::L2;
  if (needs_nu) {
    if (colon == std::string::npos)
      throw ValidationError("controller '" + name + "' needs a parameter, e.g. " + name + ":310");
    try {
      std::size_t used = 0;
      const std::string arg = text.substr(colon + 1);
      spec.nu = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw ValidationError("bad controller parameter in '" + text + "'");
    }
    if (!(spec.nu > 0.0)) throw ValidationError("controller parameter must be positive");
  } else if (colon != std::string::npos) {
    throw ValidationError("controller '" + name + "' takes no parameter");
  }
  return spec;
}

PacketSolver::PacketSolver(const HorizonMatrices& hm, const Matrix& W,
                           ControllerSpec spec)
    : hm_(hm), W_(W), spec_(spec) {
  if (W_.rows() != hm_.n || W_.cols() != hm_.n)
    throw ValidationError("W must be n x n");
  if ((spec_.kind == ControllerKind::L1L2 || spec_.kind == ControllerKind::L2) &&
      !(spec_.nu > 0.0))
    throw ValidationError("regularization parameter must be positive");
}

ControlPacket PacketSolver::solve(const Vector& x) const {
  switch (spec_.kind) {
    case ControllerKind::Omp: return omp_packet(hm_, W_, x);
    case ControllerKind::L1L2: return l1l2_packet(hm_, x, spec_.nu);
    case ControllerKind::L2: return l2_packet(hm_, x, spec_.nu);
    case ControllerKind::LeastSquares: return least_squares_packet(hm_, x);
    case ControllerKind::Oracle: return exhaustive_l0_packet(hm_, W_, x);
  }
  throw ValidationError("unknown controller kind");
}

}  // namespace sppc
