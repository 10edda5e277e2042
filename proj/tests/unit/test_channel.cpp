#include <map>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "sppc/channel.hpp"
#include "sppc/error.hpp"

using namespace sppc;

namespace {

DropoutModel markov(double p_dd, double p_dg, int N, std::uint64_t seed) {
  DropoutModel m;
  m.kind = DropoutKind::Markov;
  m.p_dd = p_dd;
  m.p_dg = p_dg;
  m.N = N;
  m.seed = seed;
  return m;
}

// |observed - expected| within 5 binomial standard deviations.
void check_frequency(std::int64_t hits, std::int64_t total, double p) {
  const double expected = p * static_cast<double>(total);
  const double sd = std::sqrt(static_cast<double>(total) * p * (1 - p));
  CHECK(std::abs(static_cast<double>(hits) - expected) <= 5 * sd + 1);
}

}  // namespace

TEST_CASE("generated traces start with a delivery and respect the burst cap") {
  for (int N : {1, 2, 5, 10}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto tr = generate_trace(markov(0.9, 0.5, N, seed), 500);
      REQUIRE(tr.size() == 500);
      CHECK(tr.d[0] == 0);
      CHECK(tr.max_run() <= N - 1);
      CHECK_NOTHROW(validate_trace(tr.d, N));
    }
  }
}

TEST_CASE("traces are a function of the seed") {
  const auto a = generate_trace(markov(0.8, 0.2, 10, 42), 1000);
  const auto b = generate_trace(markov(0.8, 0.2, 10, 42), 1000);
  const auto c = generate_trace(markov(0.8, 0.2, 10, 43), 1000);
  CHECK(a.d == b.d);
  CHECK(a.overrides == b.overrides);
  CHECK(a.d != c.d);
}

TEST_CASE("Markov gap lengths follow the capped geometric law") {
  const double p_dd = 0.8, p_dg = 0.2;
  const int N = 10;
  const auto tr = generate_trace(markov(p_dd, p_dg, N, 7), 1'000'000);
  const auto gaps = tr.gaps();
  std::map<std::int64_t, std::int64_t> hist;
  for (auto m : gaps) ++hist[m];
  const auto total = static_cast<std::int64_t>(gaps.size());

  check_frequency(hist[0], total, 1 - p_dg);
  for (int j = 1; j < N - 1; ++j)
    check_frequency(hist[j], total, p_dg * (1 - p_dd) * std::pow(p_dd, j - 1));
  check_frequency(hist[N - 1], total, p_dg * std::pow(p_dd, N - 2));
  CHECK(hist.rbegin()->first == N - 1);

  // A full-length burst is overridden when the next draw is a drop again.
  check_frequency(tr.overrides, hist[N - 1], p_dd);
}

TEST_CASE("uncapped Markov chain has the stationary drop rate") {
  const double p_dd = 0.6, p_dg = 0.3;
  const auto tr = generate_trace(markov(p_dd, p_dg, 1000, 3), 1'000'000);
  std::int64_t drops = 0;
  for (auto v : tr.d) drops += v;
  const double pi = p_dg / (1 - p_dd + p_dg);
  CHECK(static_cast<double>(drops) / 1e6 == doctest::Approx(pi).epsilon(0.01));
  CHECK(tr.overrides == 0);
}

TEST_CASE("i.i.d. drops have the requested rate") {
  DropoutModel m;
  m.kind = DropoutKind::Iid;
  m.p_drop = 0.3;
  m.N = 1000;
  m.seed = 5;
  const auto tr = generate_trace(m, 200'000);
  std::int64_t drops = 0;
  for (auto v : tr.d) drops += v;
  check_frequency(drops, 199'999, 0.3);
}

TEST_CASE("always-drop channel is forced to deliver every N steps") {
  const auto tr = generate_trace(markov(1.0, 1.0, 4, 1), 41);
  for (auto m : tr.gaps()) CHECK(m == 3);
  CHECK(tr.delivery_instants() == std::vector<std::int64_t>{0, 4, 8, 12, 16, 20, 24, 28, 32, 36, 40});
  CHECK(tr.overrides == 10);
}

TEST_CASE("N = 1 means every packet is delivered") {
  const auto tr = generate_trace(markov(1.0, 1.0, 1, 1), 50);
  for (auto v : tr.d) CHECK(v == 0);
}

TEST_CASE("scripted traces are validated and replayed") {
  DropoutModel m;
  m.kind = DropoutKind::Scripted;
  m.N = 3;
  m.script = {0, 1, 1, 0, 1, 0};
  const auto tr = generate_trace(m, 6);
  CHECK(tr.d == m.script);
  CHECK(tr.gaps() == std::vector<std::int64_t>{2, 1});
  CHECK(tr.max_run() == 2);
  CHECK_THROWS_AS(generate_trace(m, 7), ValidationError);
  m.script = {0, 1, 1, 1};
  CHECK_THROWS_AS(generate_trace(m, 4), ValidationError);
  m.script = {1, 0};
  CHECK_THROWS_AS(validate(m), ValidationError);
  CHECK_THROWS_AS(validate_trace({}, 3), ValidationError);
  CHECK_THROWS_AS(validate_trace({0, 2}, 3), ValidationError);
}

TEST_CASE("dropout model validation") {
  CHECK_THROWS_AS(validate(markov(1.2, 0.2, 10, 0)), ValidationError);
  CHECK_THROWS_AS(validate(markov(0.8, -0.1, 10, 0)), ValidationError);
  CHECK_THROWS_AS(validate(markov(0.8, 0.2, 0, 0)), ValidationError);
  CHECK_THROWS_AS(generate_trace(markov(0.8, 0.2, 10, 0), 0), ValidationError);
}

TEST_CASE("buffer interpreter matches the trace oracle") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 2000; ++trial) {
    const int N = 1 + trial % 10;
    const auto tr = generate_trace(markov(0.7, 0.4, N, rng()), 60);
    std::vector<Vector> sent;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      Vector p(N);
      for (auto& e : p) e = g(rng);
      sent.push_back(p);
    }
    const auto ref = oracle::interpret_trace(tr.d, sent);
    BufferState buf;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const auto act = actuate(buf, tr.d[k], tr.d[k] == 0 ? std::optional<Vector>(sent[k]) : std::nullopt);
      CHECK(act.u == ref[k]);
      buf = act.buffer;
    }
  }
}

TEST_CASE("buffer protocol violations") {
  BufferState empty;
  CHECK_THROWS_AS(actuate(empty, 1, std::nullopt), ProtocolError);
  CHECK_THROWS_AS(actuate(empty, 0, std::nullopt), ProtocolError);
  CHECK_THROWS_AS(actuate(empty, 2, Vector::Ones(3)), ProtocolError);
  auto act = actuate(empty, 0, Vector::LinSpaced(3, 1.0, 3.0));
  CHECK(act.u == 1.0);
  act = actuate(act.buffer, 1, std::nullopt);
  CHECK(act.u == 2.0);
  act = actuate(act.buffer, 1, std::nullopt);
  CHECK(act.u == 3.0);
  CHECK_THROWS_AS(actuate(act.buffer, 1, std::nullopt), ProtocolError);
  // A dropped packet never touches the buffer.
  const auto kept = actuate(act.buffer, 0, Vector::Constant(3, 9.0));
  CHECK(kept.buffer.packet(0) == 9.0);
}

TEST_CASE("trace JSON and CSV") {
  CHECK(trace_from_json_text("[0, 1, 1, 0]") == std::vector<std::uint8_t>{0, 1, 1, 0});
  CHECK(trace_from_json_text(R"({"d": [0, 0]})") == std::vector<std::uint8_t>{0, 0});
  CHECK_THROWS_AS(trace_from_json_text("[0, 2]"), ValidationError);
  CHECK_THROWS_AS(trace_from_json_text("{\"x\": 1}"), ValidationError);
  ChannelTrace tr;
  tr.d = {0, 1};
  CHECK(trace_to_csv(tr) == "k,d\n0,0\n1,1\n");
  CHECK(parse_dropout_kind(to_string(DropoutKind::Iid)) == DropoutKind::Iid);
  CHECK(parse_dropout_kind("markov") == DropoutKind::Markov);
  CHECK_THROWS_AS(parse_dropout_kind("bursty"), ValidationError);
}
