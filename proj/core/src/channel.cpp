#include "sppc/channel.hpp"

#include <random>
#include <sstream>

#include "json_util.hpp"
#include "sppc/error.hpp"

namespace sppc {

namespace {

// 53-bit uniform in [0, 1); portable across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void validate(const DropoutModel& model) {
  if (model.N < 1) throw ValidationError("dropout bound horizon N must be >= 1");
  switch (model.kind) {
    case DropoutKind::Iid:
      if (!is_probability(model.p_drop)) throw ValidationError("p_drop must lie in [0, 1]");
      break;
    case DropoutKind::Markov:
      if (!is_probability(model.p_dd) || !is_probability(model.p_dg))
        throw ValidationError("p_dd and p_dg must lie in [0, 1]");
      break;
    case DropoutKind::Scripted:
      validate_trace(model.script, model.N);
      break;
  }
}

void validate_trace(const std::vector<std::uint8_t>& d, int N) {
  if (d.empty()) throw ValidationError("dropout trace is empty");
  if (d[0] != 0) throw ValidationError("dropout trace must start with a delivery (d(0) = 0)");
  std::int64_t run = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] > 1) throw ValidationError("dropout trace entries must be 0 or 1");
    run = d[k] ? run + 1 : 0;
    if (run > N - 1)
      throw ValidationError("dropout burst ending at k = " + std::to_string(k) +
                            " exceeds N - 1 = " + std::to_string(N - 1));
  }
}

ChannelTrace generate_trace(const DropoutModel& model, std::int64_t T) {
  if (T < 1) throw ValidationError("trace length must be >= 1");
  validate(model);

  ChannelTrace trace;
  if (model.kind == DropoutKind::Scripted) {
    if (static_cast<std::int64_t>(model.script.size()) < T)
      throw ValidationError("scripted trace shorter than the requested length");
    trace.d.assign(model.script.begin(), model.script.begin() + T);
    return trace;
  }

  std::mt19937_64 rng(model.seed);
  trace.d.resize(static_cast<std::size_t>(T));
  trace.d[0] = 0;
  std::int64_t run = 0;
  for (std::int64_t k = 1; k < T; ++k) {
    const bool prev_dropped = trace.d[k - 1] != 0;
    const double p = model.kind == DropoutKind::Iid
                         ? model.p_drop
                         : (prev_dropped ? model.p_dd : model.p_dg);
    bool drop = uniform01(rng) < p;
    if (drop && run >= model.N - 1) {
      drop = false;
      ++trace.overrides;
    }
    run = drop ? run + 1 : 0;
    trace.d[k] = drop ? 1 : 0;
  }
  return trace;
}

std::vector<std::int64_t> ChannelTrace::delivery_instants() const {
  std::vector<std::int64_t> out;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (d[k] == 0) out.push_back(static_cast<std::int64_t>(k));
  return out;
}

std::vector<std::int64_t> ChannelTrace::gaps() const {
  const auto ki = delivery_instants();
  std::vector<std::int64_t> m;
  for (std::size_t i = 0; i + 1 < ki.size(); ++i) m.push_back(ki[i + 1] - ki[i] - 1);
  return m;
}

std::int64_t ChannelTrace::max_run() const {
  std::int64_t run = 0, best = 0;
  for (auto bit : d) {
    run = bit ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

Actuation actuate(const BufferState& buf, int d_k,
                  const std::optional<Vector>& incoming) {
  Actuation out;
  if (d_k == 0) {
    if (!incoming || incoming->size() == 0)
      throw ProtocolError("delivery without a packet");
    out.buffer.packet = *incoming;
    out.buffer.age = 0;
    out.u = out.buffer.packet(0);
    return out;
  }
  if (d_k != 1) throw ProtocolError("dropout indicator must be 0 or 1");
  if (buf.empty()) throw ProtocolError("drop before the first delivered packet");
  const int age = buf.age + 1;
  if (age >= buf.packet.size())
    throw ProtocolError("buffer exhausted: " + std::to_string(age) +
                        " consecutive drops with packet length " +
                        std::to_string(buf.packet.size()));
  out.buffer.packet = buf.packet;
  out.buffer.age = age;
  out.u = buf.packet(age);
  return out;
}

std::vector<std::uint8_t> trace_from_json_text(const std::string& text) {
  const auto j = detail::parse_json(text, "trace");
  const auto& arr = j.is_object() && j.contains("d") ? j.at("d") : j;
  if (!arr.is_array()) throw ValidationError("trace JSON must be an array of bits");
  std::vector<std::uint8_t> d;
  d.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_number_integer() || (e.get<int>() != 0 && e.get<int>() != 1))
      throw ValidationError("trace entries must be 0 or 1");
    d.push_back(static_cast<std::uint8_t>(e.get<int>()));
  }
  return d;
}

std::string trace_to_csv(const ChannelTrace& trace) {
  std::ostringstream os;
  os << "k,d\n";
  for (std::size_t k = 0; k < trace.d.size(); ++k) os << k << ',' << int(trace.d[k]) << '\n';
  return os.str();
}

std::string to_string(DropoutKind kind) {
  switch (kind) {
    case DropoutKind::Iid: return "iid";
    case DropoutKind::Markov: return "markov";
    case DropoutKind::Scripted: return "scripted";
  }
  return "unknown";
}

DropoutKind parse_dropout_kind(const std::string& text) {
  if (text == "iid") return DropoutKind::Iid;
  if (text == "markov") return DropoutKind::Markov;
  if (text == "scripted") return DropoutKind::Scripted;
  throw ValidationError("unknown dropout kind '" + text + "'");
}

}  // namespace sppc
