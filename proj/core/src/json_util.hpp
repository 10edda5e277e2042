#pragma once

#include <string>

#include <json.hpp>

#include "sppc/error.hpp"
#include "sppc/linalg.hpp"

namespace sppc::detail {

using nlohmann::json;

inline json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

inline double to_double(const json& j, const std::string& key) {
  if (!j.is_number()) throw ValidationError("'" + key + "' must be a number");
  return j.get<double>();
}

/// Row-major nested array -> matrix.
inline Matrix matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw ValidationError("'" + key + "' must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty())
    throw ValidationError("'" + key + "' rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("'" + key + "' is ragged");
    for (Eigen::Index c = 0; c < cols; ++c)
      M(r, c) = to_double(row[static_cast<std::size_t>(c)], key);
  }
  return M;
}

/// Accepts [..] or [[..],[..]] (a column).
inline Vector vector_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw ValidationError("'" + key + "' must be a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (e.is_array()) {
      if (e.size() != 1) throw ValidationError("'" + key + "' must be a column vector");
      v(static_cast<Eigen::Index>(i)) = to_double(e[0], key);
    } else {
      v(static_cast<Eigen::Index>(i)) = to_double(e, key);
    }
  }
  return v;
}

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace sppc::detail
