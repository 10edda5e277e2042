#include "sppc/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace sppc {

using detail::json;

namespace {

int to_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ValidationError("'" + key + "' must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ValidationError("'" + key + "' is out of range");
  return static_cast<int>(v);
}

std::string to_str(const json& j, const std::string& key) {
  if (!j.is_string()) throw ValidationError("'" + key + "' must be a string");
  return j.get<std::string>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [k, v] : obj.items())
    if (!known.count(k)) throw ValidationError("unknown key '" + k + "' in " + where);
}

ControllerSpec controller_from_json(const json& j) {
  if (j.is_string()) return parse_controller(j.get<std::string>());
  if (!j.is_object()) throw ValidationError("'controller' must be a string or object");
  reject_unknown(j, {"kind", "nu"}, "controller");
  std::string text = to_str(j.at("kind"), "controller.kind");
  if (j.contains("nu")) {
    std::ostringstream nu;
    nu.precision(17);
    nu << detail::to_double(j.at("nu"), "controller.nu");
    text += ":" + nu.str();
  }
  return parse_controller(text);
}

json controller_to_json(const ControllerSpec& c) {
  json j = {{"kind", to_string(c.kind)}};
  if (c.kind == ControllerKind::L1L2 || c.kind == ControllerKind::L2) j["nu"] = c.nu;
  return j;
}

void dropout_from_json(const json& j, DropoutModel& dm) {
  if (!j.is_object()) throw ValidationError("'dropout' must be an object");
  reject_unknown(j, {"kind", "p_drop", "p_dd", "p_dg", "script"}, "dropout");
  if (j.contains("kind")) dm.kind = parse_dropout_kind(to_str(j.at("kind"), "dropout.kind"));
  if (j.contains("p_drop")) dm.p_drop = detail::to_double(j.at("p_drop"), "dropout.p_drop");
  if (j.contains("p_dd")) dm.p_dd = detail::to_double(j.at("p_dd"), "dropout.p_dd");
  if (j.contains("p_dg")) dm.p_dg = detail::to_double(j.at("p_dg"), "dropout.p_dg");
  if (j.contains("script")) dm.script = trace_from_json_text(j.at("script").dump());
}

json dropout_to_json(const DropoutModel& dm) {
  json j = {{"kind", to_string(dm.kind)}};
  switch (dm.kind) {
    case DropoutKind::Iid: j["p_drop"] = dm.p_drop; break;
    case DropoutKind::Markov:
      j["p_dd"] = dm.p_dd;
      j["p_dg"] = dm.p_dg;
      break;
    case DropoutKind::Scripted: {
      json s = json::array();
      for (auto b : dm.script) s.push_back(static_cast<int>(b));
      j["script"] = std::move(s);
      break;
    }
  }
  return j;
}

ControllerKind sweep_family_from(const std::string& s) {
  if (s == "l2") return ControllerKind::L2;
  if (s == "l1l2") return ControllerKind::L1L2;
  throw ValidationError("sweep family must be 'l2' or 'l1l2'");
}

}  // namespace

SimConfig config_from_json_text(const std::string& text, const SimConfig& defaults) {
  const json j = detail::parse_json(text, "config");
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j, {"plant", "N", "Q", "eta", "delta", "controller", "dropout", "T",
                     "trials", "noise", "x0", "seed", "threads", "bitrate", "sweep"},
                 "config");
  SimConfig cfg = defaults;
  try {
    if (j.contains("plant")) {
      const json& p = j.at("plant");
      cfg.plant = plant_from_json_text(p.dump());
      cfg.plant_source = p.is_string() ? p.get<std::string>()
                         : p.contains("preset") ? to_str(p.at("preset"), "plant.preset")
                                                : "inline";
    }
    if (j.contains("N")) cfg.N = to_int(j.at("N"), "N");
    if (j.contains("Q")) {
      const json& q = j.at("Q");
      if (q.is_string()) {
        if (q.get<std::string>() != "identity")
          throw ValidationError("'Q' must be \"identity\" or a matrix");
        cfg.Q.resize(0, 0);
      } else {
        cfg.Q = detail::matrix_from_json(q, "Q");
      }
    }
    if (j.contains("eta")) cfg.eta = detail::to_double(j.at("eta"), "eta");
    if (j.contains("delta")) cfg.delta = detail::to_double(j.at("delta"), "delta");
    if (j.contains("controller")) cfg.controller = controller_from_json(j.at("controller"));
    if (j.contains("dropout")) dropout_from_json(j.at("dropout"), cfg.dropout);
    if (j.contains("T")) cfg.T = to_int(j.at("T"), "T");
    if (j.contains("trials")) cfg.trials = to_int(j.at("trials"), "trials");
    if (j.contains("noise")) {
      const json& n = j.at("noise");
      if (n.is_string() && n.get<std::string>() == "none") {
        cfg.noise_sigma = 0.0;
      } else if (n.is_number()) {
        cfg.noise_sigma = n.get<double>();
      } else if (n.is_object()) {
        reject_unknown(n, {"kind", "sigma"}, "noise");
        const std::string kind = n.contains("kind") ? to_str(n.at("kind"), "noise.kind") : "gaussian";
        if (kind == "none") {
          cfg.noise_sigma = 0.0;
        } else if (kind == "gaussian") {
          cfg.noise_sigma = detail::to_double(n.at("sigma"), "noise.sigma");
        } else {
          throw ValidationError("noise kind must be 'none' or 'gaussian'");
        }
      } else {
        throw ValidationError("'noise' must be \"none\", a number or an object");
      }
    }
    if (j.contains("x0")) {
      const json& x = j.at("x0");
      if (x.is_string()) {
        if (x.get<std::string>() != "standard_normal")
          throw ValidationError("'x0' must be \"standard_normal\" or a vector");
        cfg.x0_kind = InitialStateKind::StandardNormal;
        cfg.x0.resize(0);
      } else {
        cfg.x0_kind = InitialStateKind::Explicit;
        cfg.x0 = detail::vector_from_json(x, "x0");
      }
    }
    if (j.contains("seed")) {
      const json& s = j.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        throw ValidationError("'seed' must be a non-negative integer");
      cfg.seed = s.get<std::uint64_t>();
    }
    if (j.contains("threads")) cfg.threads = to_int(j.at("threads"), "threads");
    if (j.contains("bitrate")) {
      const json& b = j.at("bitrate");
      if (!b.is_object()) throw ValidationError("'bitrate' must be an object");
      reject_unknown(b, {"quant_delta", "train_trials", "test_trials", "l2_nu"}, "bitrate");
      if (b.contains("quant_delta")) cfg.quant_delta = detail::to_double(b.at("quant_delta"), "bitrate.quant_delta");
      if (b.contains("train_trials")) cfg.train_trials = to_int(b.at("train_trials"), "bitrate.train_trials");
      if (b.contains("test_trials")) cfg.test_trials = to_int(b.at("test_trials"), "bitrate.test_trials");
      if (b.contains("l2_nu")) cfg.l2_nu = detail::to_double(b.at("l2_nu"), "bitrate.l2_nu");
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      if (!s.is_object()) throw ValidationError("'sweep' must be an object");
      reject_unknown(s, {"family", "grid"}, "sweep");
      if (s.contains("family")) cfg.sweep_family = sweep_family_from(to_str(s.at("family"), "sweep.family"));
      if (s.contains("grid") && s.at("grid").is_array() && s.at("grid").empty()) {
        cfg.sweep_grid.clear();
      } else if (s.contains("grid")) {
        const Vector g = detail::vector_from_json(s.at("grid"), "sweep.grid");
        cfg.sweep_grid.assign(g.data(), g.data() + g.size());
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string config_to_json_text(const SimConfig& cfg, int indent) {
  json j;
  if (cfg.plant_source == "inline")
    j["plant"] = {{"A", detail::matrix_to_json(cfg.plant.A)},
                  {"B", detail::matrix_to_json(cfg.plant.B)}};
  else
    j["plant"] = cfg.plant_source;
  j["N"] = cfg.N;
  j["Q"] = detail::matrix_to_json(cfg.resolved_Q());
  j["eta"] = cfg.eta;
  j["delta"] = cfg.delta;
  j["controller"] = controller_to_json(cfg.controller);
  j["dropout"] = dropout_to_json(cfg.dropout);
  j["T"] = cfg.T;
  j["trials"] = cfg.trials;
  if (cfg.noise_sigma > 0.0)
    j["noise"] = {{"kind", "gaussian"}, {"sigma", cfg.noise_sigma}};
  else
    j["noise"] = {{"kind", "none"}};
  if (cfg.x0_kind == InitialStateKind::Explicit)
    j["x0"] = detail::vector_to_json(cfg.x0);
  else
    j["x0"] = "standard_normal";
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["bitrate"] = {{"quant_delta", cfg.quant_delta},
                  {"train_trials", cfg.train_trials},
                  {"test_trials", cfg.test_trials},
                  {"l2_nu", cfg.l2_nu}};
  j["sweep"] = {{"family", to_string(cfg.sweep_family)}, {"grid", cfg.sweep_grid}};
  return j.dump(indent) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace sppc
