#pragma once

#include <string>
#include <vector>

#include "sppc/sim.hpp"

namespace sppc::report {

/// Fixed-precision decimal rendering used for every CSV cell.
std::string fmt(double v);

std::string trajectory_csv(const std::vector<const MonteCarloReport*>& reports);
std::string summary_csv(const std::vector<const MonteCarloReport*>& reports);
std::string trace_csv(const SimConfig& cfg, std::uint64_t master_seed);
std::string rates_csv(const BitrateExperiment& exp);
std::string sweep_csv(const SweepCurve& curve);
std::string timing_csv(const std::vector<const MonteCarloReport*>& reports);
std::string matrix_csv(const Matrix& M);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal standalone SVG line chart.
std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<Series>& series, bool log_x,
                          bool log_y);

}  // namespace sppc::report
