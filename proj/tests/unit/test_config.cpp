#include <doctest.h>

#include "sppc/config.hpp"
#include "sppc/error.hpp"

using namespace sppc;

TEST_CASE("empty object keeps every default") {
  const auto cfg = config_from_json_text("{}");
  const SimConfig def;
  CHECK(cfg.N == def.N);
  CHECK(cfg.T == def.T);
  CHECK(cfg.trials == def.trials);
  CHECK(cfg.eta == def.eta);
  CHECK(cfg.dropout.p_dd == 0.8);
  CHECK(cfg.dropout.p_dg == 0.2);
  CHECK(cfg.controller.kind == ControllerKind::Omp);
  CHECK(cfg.plant_source == "cessna500");
}

TEST_CASE("full configuration parses") {
  const auto cfg = config_from_json_text(R"({
    "plant": {"Ac": [[0, 1], [0, 0]], "Bc": [0, 1], "Ts": 0.1},
    "N": 6, "Q": [[2, 0], [0, 1]], "eta": 0.5, "delta": 0.0,
    "controller": {"kind": "l1l2", "nu": 12.5},
    "dropout": {"kind": "iid", "p_drop": 0.25},
    "T": 40, "trials": 7, "noise": {"kind": "gaussian", "sigma": 0.02},
    "x0": [1, -1], "seed": 99, "threads": 2,
    "bitrate": {"quant_delta": 0.01, "train_trials": 3, "test_trials": 4, "l2_nu": 50},
    "sweep": {"family": "l1l2", "grid": [1, 10, 100]}
  })");
  CHECK(cfg.plant.n() == 2);
  CHECK(cfg.plant_source == "inline");
  CHECK(cfg.N == 6);
  CHECK(cfg.Q(0, 0) == 2.0);
  CHECK(cfg.eta == 0.5);
  CHECK(cfg.controller.kind == ControllerKind::L1L2);
  CHECK(cfg.controller.nu == 12.5);
  CHECK(cfg.dropout.kind == DropoutKind::Iid);
  CHECK(cfg.dropout.p_drop == 0.25);
  CHECK(cfg.T == 40);
  CHECK(cfg.trials == 7);
  CHECK(cfg.noise_sigma == 0.02);
  CHECK(cfg.x0_kind == InitialStateKind::Explicit);
  CHECK(cfg.x0(1) == -1.0);
  CHECK(cfg.seed == 99);
  CHECK(cfg.threads == 2);
  CHECK(cfg.quant_delta == 0.01);
  CHECK(cfg.train_trials == 3);
  CHECK(cfg.test_trials == 4);
  CHECK(cfg.l2_nu == 50.0);
  CHECK(cfg.sweep_family == ControllerKind::L1L2);
  CHECK(cfg.sweep_grid == std::vector<double>{1, 10, 100});
}

TEST_CASE("resolved configuration roundtrips") {
  const auto cfg = config_from_json_text(R"({"controller": "l2:310", "noise": 0.01,
      "dropout": {"kind": "scripted", "script": [0, 1, 0, 0]}, "T": 4, "x0": [1, 2, 3, 4]})");
  const std::string text = config_to_json_text(cfg);
  const auto again = config_from_json_text(text);
  CHECK(config_to_json_text(again) == text);
  CHECK(again.controller.nu == 310.0);
  CHECK(again.dropout.script == cfg.dropout.script);
  CHECK(again.Q.isApprox(Matrix::Identity(4, 4)));
  CHECK(text.find("\"p_dd\"") == std::string::npos);
}

TEST_CASE("defaults argument supplies unspecified values") {
  SimConfig def;
  def.noise_sigma = 0.01;
  CHECK(config_from_json_text("{}", def).noise_sigma == 0.01);
  CHECK(config_from_json_text(R"({"noise": "none"})", def).noise_sigma == 0.0);
}

TEST_CASE("invalid configurations are rejected") {
  for (const char* bad : {
           "[]", "{", R"({"unknown": 1})", R"({"eta": 1.5})", R"({"T": 0})",
           R"({"trials": -3})", R"({"N": "ten"})", R"({"noise": {"kind": "laplace"}})",
           R"({"noise": -0.1})", R"({"Q": "diag"})", R"({"x0": "uniform"})",
           R"({"x0": [1, 2]})", R"({"controller": "l2"})", R"({"dropout": {"p_dd": 2}})",
           R"({"seed": -1})", R"({"sweep": {"family": "omp"}})", R"({"plant": "boeing"})",
           R"({"bitrate": {"quant_delta": 0}})", R"({"dropout": {"kind": "scripted", "script": [0, 1]}})"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(config_from_json_text(bad), ValidationError);
  }
}

TEST_CASE("file helpers") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/sppc.json"), ValidationError);
}
