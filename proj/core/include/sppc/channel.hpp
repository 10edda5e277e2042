#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sppc/linalg.hpp"

namespace sppc {

enum class DropoutKind { Iid, Markov, Scripted };

/// Erasure process d(k): 1 = packet lost, 0 = delivered.
struct DropoutModel {
  DropoutKind kind = DropoutKind::Markov;
  double p_drop = 0.0;  ///< iid
  double p_dd = 0.8;    ///< markov: P(drop | previous drop)
  double p_dg = 0.2;    ///< markov: P(drop | previous delivery)
  std::vector<std::uint8_t> script;
  int N = 10;  ///< bursts are capped at N - 1
  std::uint64_t seed = 0;
};

void validate(const DropoutModel& model);

struct ChannelTrace {
  std::vector<std::uint8_t> d;
  std::int64_t overrides = 0;  ///< drops converted to deliveries by the cap

  std::size_t size() const { return d.size(); }
  std::vector<std::int64_t> delivery_instants() const;
  /// m_i = k_{i+1} - k_i - 1 between consecutive deliveries.
  std::vector<std::int64_t> gaps() const;
  /// Longest run of consecutive drops.
  std::int64_t max_run() const;
};

/// Throws ValidationError unless d(0) = 0 and every burst has length <= N-1.
void validate_trace(const std::vector<std::uint8_t>& d, int N);

/// Deterministic given the model seed. A drop that would make the burst
/// reach N is forced to a delivery and counted in `overrides`.
ChannelTrace generate_trace(const DropoutModel& model, std::int64_t T);

/// Plant-side buffer: last delivered packet plus elements consumed since.
struct BufferState {
  Vector packet;
  int age = 0;

  bool empty() const { return packet.size() == 0; }
};

struct Actuation {
  double u = 0.0;
  BufferState buffer;
};

/// d_k = 0 stores `incoming` and applies its first element; d_k = 1 advances
/// into the stored packet.
Actuation actuate(const BufferState& buf, int d_k,
                  const std::optional<Vector>& incoming);

std::vector<std::uint8_t> trace_from_json_text(const std::string& text);
std::string trace_to_csv(const ChannelTrace& trace);

std::string to_string(DropoutKind kind);
DropoutKind parse_dropout_kind(const std::string& text);

}  // namespace sppc
