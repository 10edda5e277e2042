#include "sppc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sppc::report {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trajectory_csv(const std::vector<const MonteCarloReport*>& reports) {
  std::ostringstream os;
  os << "controller,trial,k,norm,V,u,sparsity\n";
  for (const auto* mc : reports) {
    const std::string label = mc->controller.label();
    for (std::size_t t = 0; t < mc->trials.size(); ++t) {
      const auto& r = mc->trials[t];
      for (std::size_t k = 0; k < r.norm.size(); ++k)
        os << label << ',' << t << ',' << k << ',' << fmt(r.norm[k]) << ',' << fmt(r.V[k])
           << ',' << fmt(r.u[k]) << ',' << r.sparsity[k] << '\n';
    }
  }
  return os.str();
}

std::string summary_csv(const std::vector<const MonteCarloReport*>& reports) {
  std::ostringstream os;
  os << "controller,k,mean_norm,median_norm,max_norm,mean_sparsity\n";
  for (const auto* mc : reports) {
    const std::string label = mc->controller.label();
    for (std::size_t k = 0; k < mc->mean_norm.size(); ++k)
      os << label << ',' << k << ',' << fmt(mc->mean_norm[k]) << ','
         << fmt(mc->median_norm[k]) << ',' << fmt(mc->max_norm[k]) << ','
         << fmt(mc->mean_sparsity[k]) << '\n';
  }
  return os.str();
}

std::string trace_csv(const SimConfig& cfg, std::uint64_t master_seed) {
  std::ostringstream os;
  os << "trial,k,d\n";
  for (int t = 0; t < cfg.trials; ++t) {
    const TrialInputs in = make_trial_inputs(cfg, master_seed, t);
    for (std::size_t k = 0; k < in.trace.d.size(); ++k)
      os << t << ',' << k << ',' << static_cast<int>(in.trace.d[k]) << '\n';
  }
  return os.str();
}

std::string rates_csv(const BitrateExperiment& exp) {
  std::ostringstream os;
  os << "trial,k,scheme,bits\n";
  for (const auto& r : exp.records)
    os << r.trial << ',' << r.k << ',' << r.scheme << ',' << r.bits << '\n';
  return os.str();
}

std::string sweep_csv(const SweepCurve& curve) {
  std::ostringstream os;
  os << "family,nu,performance,argmin\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    os << to_string(curve.family) << ',' << fmt(curve.points[i].nu) << ','
       << fmt(curve.points[i].performance) << ',' << (i == curve.argmin ? 1 : 0) << '\n';
  return os.str();
}

std::string timing_csv(const std::vector<const MonteCarloReport*>& reports) {
  std::ostringstream os;
  os << "controller,trial,k,solve_seconds\n";
  for (const auto* mc : reports) {
    const std::string label = mc->controller.label();
    for (std::size_t t = 0; t < mc->trials.size(); ++t) {
      const auto& r = mc->trials[t];
      for (std::size_t k = 0; k < r.solve_seconds.size(); ++k)
        os << label << ',' << t << ',' << k << ',' << fmt(r.solve_seconds[k]) << '\n';
    }
  }
  return os.str();
}

std::string matrix_csv(const Matrix& M) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) os << (c ? "," : "") << fmt(M(r, c));
    os << '\n';
  }
  return os.str();
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return hi > lo ? (t - lo) / (hi - lo) : 0.5;
  }
};

Axis fit_axis(const std::vector<Series>& series, bool use_x, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series)
    for (double v : use_x ? s.x : s.y) {
      if (!std::isfinite(v) || (log && v <= 0.0)) continue;
      const double t = log ? std::log10(v) : v;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  if (!std::isfinite(lo)) return a;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

std::string tick_label(const Axis& a, double t) {
  return a.log ? "1e" + fmt(std::round(t * 100.0) / 100.0) : fmt(t);
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<Series>& series,
                          bool log_x, bool log_y) {
  constexpr double W = 720, H = 440, L = 80, R = 170, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  const Axis ax = fit_axis(series, true, log_x);
  const Axis ay = fit_axis(series, false, log_y);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double f = static_cast<double>(i) / kTicks;
    const double px = L + f * pw, py = T + ph - f * ph;
    os << "<line x1=\"" << px << "\" y1=\"" << T << "\" x2=\"" << px << "\" y2=\"" << T + ph
       << "\" stroke=\"#ddd\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << py << "\" x2=\"" << L + pw << "\" y2=\"" << py
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << T + ph + 16 << "\" text-anchor=\"middle\">"
       << tick_label(ax, ax.lo + f * (ax.hi - ax.lo)) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
       << tick_label(ay, ay.lo + f * (ay.hi - ay.lo)) << "</text>\n";
  }
  os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
     << escape_xml(xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << T + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) {
      const double x = sr.x[i], y = sr.y[i];
      if (!std::isfinite(x) || !std::isfinite(y) || (log_x && x <= 0) || (log_y && y <= 0))
        continue;
      os << (first ? "" : " ") << fmt(L + ax.map(x) * pw) << ',' << fmt(T + ph - ay.map(y) * ph);
      first = false;
    }
    os << "\"/>\n";
    const double ly = T + 14 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << L + pw + 36
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << L + pw + 42 << "\" y=\"" << ly << "\">" << escape_xml(sr.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sppc::report
