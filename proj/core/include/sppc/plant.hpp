#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sppc/linalg.hpp"

namespace sppc {

/// Continuous-time scalar-input plant  xc' = Ac xc + Bc u.
struct ContinuousPlant {
  Matrix Ac;
  Vector Bc;

  int n() const { return static_cast<int>(Ac.rows()); }
};

/// Discrete-time scalar-input plant  x(k+1) = A x(k) + B u(k) + v(k).
struct PlantModel {
  Matrix A;
  Vector B;

  int n() const { return static_cast<int>(A.rows()); }
};

struct PlantState {
  Vector x;
  std::int64_t k = 0;
};

/// Throws ValidationError unless Ac is square and Bc has matching rows.
void validate(const ContinuousPlant& cp);
void validate(const PlantModel& m);

/// Zero-order-hold discretization via the exponential of the augmented
/// block matrix [[Ac, Bc], [0, 0]] * Ts.
PlantModel zoh_discretize(const ContinuousPlant& cp, double Ts);

PlantState step(const PlantModel& m, const PlantState& s, double u,
                const Vector& v);

/// Rank of [B, AB, ..., A^{n-1}B].
int reachability_rank(const PlantModel& m);
Matrix reachability_matrix(const PlantModel& m);

inline bool is_reachable(const PlantModel& m) {
  return reachability_rank(m) == m.n();
}

/// Linearized Cessna Citation 500 pitch dynamics at 128.2 m/s.
ContinuousPlant cessna500_continuous();

/// cessna500_continuous() held at Ts = 0.5 s.
PlantModel cessna500();
inline constexpr double kCessnaSampleTime = 0.5;

/// Named plant presets. Throws ValidationError for unknown names.
PlantModel plant_preset(std::string_view name);

/// Parses `{"Ac": [[..]], "Bc": [..], "Ts": ..}` or `{"A": .., "B": ..}`.
PlantModel plant_from_json_text(const std::string& text);

}  // namespace sppc
