#include "sppc/plant.hpp"

#include <cmath>
#include <string>

#include "json_util.hpp"
#include "sppc/error.hpp"

namespace sppc {

void validate(const ContinuousPlant& cp) {
  if (cp.Ac.rows() == 0 || cp.Ac.rows() != cp.Ac.cols())
    throw ValidationError("Ac must be a non-empty square matrix");
  if (cp.Bc.size() != cp.Ac.rows())
    throw ValidationError("Bc must have as many rows as Ac");
  if (!cp.Ac.allFinite() || !cp.Bc.allFinite())
    throw ValidationError("continuous plant has non-finite entries");
}

void validate(const PlantModel& m) {
  if (m.A.rows() == 0 || m.A.rows() != m.A.cols())
    throw ValidationError("A must be a non-empty square matrix");
  if (m.B.size() != m.A.rows())
    throw ValidationError("B must have as many rows as A");
  if (!m.A.allFinite() || !m.B.allFinite())
    throw ValidationError("plant has non-finite entries");
}

PlantModel zoh_discretize(const ContinuousPlant& cp, double Ts) {
  validate(cp);
  if (!(Ts > 0.0) || !std::isfinite(Ts))
    throw ValidationError("sample time must be positive and finite");
  const int n = cp.n();
  Matrix M = Matrix::Zero(n + 1, n + 1);
  M.topLeftCorner(n, n) = cp.Ac * Ts;
  M.topRightCorner(n, 1) = cp.Bc * Ts;
  const Matrix E = linalg::expm(M);
  PlantModel m{E.topLeftCorner(n, n), E.topRightCorner(n, 1)};
  if (!m.A.allFinite() || !m.B.allFinite())
    throw NumericError("zoh_discretize: non-finite result");
  return m;
}

PlantState step(const PlantModel& m, const PlantState& s, double u,
                const Vector& v) {
  if (s.x.size() != m.n() || v.size() != m.n())
    throw ValidationError("step: dimension mismatch");
  return PlantState{m.A * s.x + m.B * u + v, s.k + 1};
}

Matrix reachability_matrix(const PlantModel& m) {
  const int n = m.n();
  Matrix C(n, n);
  Vector col = m.B;
  for (int j = 0; j < n; ++j) {
    C.col(j) = col;
    col = m.A * col;
  }
  return C;
}

int reachability_rank(const PlantModel& m) {
  return linalg::numerical_rank(reachability_matrix(m));
}

ContinuousPlant cessna500_continuous() {
  ContinuousPlant cp;
  cp.Ac.resize(4, 4);
  cp.Ac << -1.2822, 0.0, 0.98, 0.0,
           0.0, 0.0, 1.0, 0.0,
           -5.4293, 0.0, -1.8366, 0.0,
           -128.2, 128.2, 0.0, 0.0;
  cp.Bc.resize(4);
  cp.Bc << -0.3, 0.0, -17.0, 0.0;
  return cp;
}

PlantModel cessna500() {
  return zoh_discretize(cessna500_continuous(), kCessnaSampleTime);
}

PlantModel plant_preset(std::string_view name) {
  if (name == "cessna500") return cessna500();
  throw ValidationError("unknown plant preset '" + std::string(name) + "'");
}

PlantModel plant_from_json_text(const std::string& text) {
  using detail::json;
  const json j = detail::parse_json(text, "plant");
  if (j.is_string()) return plant_preset(j.get<std::string>());
  if (!j.is_object()) throw ValidationError("plant must be a JSON object or preset name");
  if (j.contains("preset")) return plant_preset(j.at("preset").get<std::string>());
  if (j.contains("Ac")) {
    if (!j.contains("Bc") || !j.contains("Ts"))
      throw ValidationError("continuous plant needs Ac, Bc and Ts");
    ContinuousPlant cp{detail::matrix_from_json(j.at("Ac"), "Ac"),
                       detail::vector_from_json(j.at("Bc"), "Bc")};
    return zoh_discretize(cp, detail::to_double(j.at("Ts"), "Ts"));
  }
  if (j.contains("A")) {
    if (!j.contains("B")) throw ValidationError("discrete plant needs A and B");
    PlantModel m{detail::matrix_from_json(j.at("A"), "A"),
                 detail::vector_from_json(j.at("B"), "B")};
    validate(m);
    return m;
  }
  throw ValidationError("plant JSON needs either {Ac, Bc, Ts} or {A, B}");
}

}  // namespace sppc
