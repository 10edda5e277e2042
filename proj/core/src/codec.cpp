#include "sppc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "json_util.hpp"
#include "sppc/error.hpp"

namespace sppc {

// ---------------------------------------------------------------- BitString

void BitString::push(bool bit) {
  if (size_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (size_ % 8));
  ++size_;
}

void BitString::push_bits(std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) push(((value >> i) & 1u) != 0);
}

void BitString::append(const BitString& other) {
  for (std::size_t i = 0; i < other.size(); ++i) push(other[i]);
}

bool BitString::operator[](std::size_t i) const {
  return (bytes_[i / 8] >> (7 - i % 8)) & 1u;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
  return s;
}

BitString BitString::from_string(const std::string& bits) {
  BitString b;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ValidationError("bit string must contain only 0 and 1");
    b.push(c == '1');
  }
  return b;
}

std::string BitString::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto byte : bytes_) {
    s.push_back(digits[byte >> 4]);
    s.push_back(digits[byte & 0xF]);
  }
  return s;
}

BitString BitString::from_hex(const std::string& hex, std::size_t bit_count) {
  if (hex.size() % 2 != 0 || hex.size() * 4 < bit_count)
    throw ValidationError("hex dump too short for the stated bit count");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw ValidationError("invalid hex digit");
  };
  BitString b;
  for (std::size_t i = 0; i < bit_count; ++i) {
    const unsigned v = nibble(hex[i / 4]);
    b.push(((v >> (3 - i % 4)) & 1u) != 0);
  }
  return b;
}

bool BitString::operator==(const BitString& other) const {
  if (size_ != other.size_) return false;
  for (std::size_t i = 0; i < size_; ++i)
    if ((*this)[i] != other[i]) return false;
  return true;
}

// ---------------------------------------------------------------- Quantizer

Quantizer::Result Quantizer::quantize(double v) const {
  if (!(delta > 0.0)) throw ValidationError("quantizer step must be positive");
  if (!std::isfinite(v)) throw RangeError("cannot quantize a non-finite value");
  const double ratio = v / delta;
  constexpr double limit = std::numeric_limits<std::int32_t>::max();
  if (std::abs(ratio) > limit) throw RangeError("value outside the quantizer index range");
  double r = std::round(ratio);  // half away from zero
  if (std::abs(ratio - std::trunc(ratio)) == 0.5) r = 2.0 * std::round(ratio / 2.0);
  const auto index = static_cast<std::int64_t>(r);
  return {index, reconstruct(index)};
}

// ---------------------------------------------------------------- Huffman

std::vector<int> huffman_code_lengths(const std::vector<std::uint64_t>& freqs) {
  const std::size_t n = freqs.size();
  std::vector<int> lengths(n, 0);
  if (n == 0) return lengths;
  if (n == 1) {
    lengths[0] = 1;
    return lengths;
  }
  // Node key (frequency, order); leaves take order 0..n-1 and merged nodes
  // continue the count, so ties resolve deterministically.
  using Key = std::tuple<std::uint64_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  std::vector<std::size_t> parent(2 * n - 1, 0);
  for (std::size_t i = 0; i < n; ++i) heap.emplace(freqs[i], i);
  std::size_t next = n;
  while (heap.size() > 1) {
    const auto [fa, a] = heap.top();
    heap.pop();
    const auto [fb, b] = heap.top();
    heap.pop();
    parent[a] = next;
    parent[b] = next;
    heap.emplace(fa + fb, next);
    ++next;
  }
  const std::size_t root = next - 1;
  for (std::size_t i = 0; i < n; ++i) {
    int depth = 0;
    for (std::size_t v = i; v != root; v = parent[v]) ++depth;
    lengths[i] = depth;
  }
  return lengths;
}

namespace {

// Canonical code assignment: shorter codes first, ties by symbol order.
std::vector<BitString> canonical_codes(const std::vector<int>& lengths) {
  std::vector<std::size_t> order(lengths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<BitString> codes(lengths.size());
  std::uint64_t code = 0;
  int prev_len = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t i = order[rank];
    const int len = lengths[i];
    if (len > 63) throw NumericError("Huffman code length exceeds 63 bits");
    if (rank > 0) ++code;
    code <<= (len - prev_len);
    prev_len = len;
    codes[i].push_bits(code, len);
  }
  return codes;
}

}  // namespace

PositionCoder PositionCoder::train(int position,
                                   const std::map<std::int64_t, std::uint64_t>& counts) {
  std::vector<std::int64_t> symbols;
  std::vector<std::uint64_t> freqs;
  for (const auto& [sym, cnt] : counts) {
    if (cnt == 0) continue;
    symbols.push_back(sym);
    freqs.push_back(cnt);
  }
  freqs.push_back(1);  // escape, ordered after every real symbol
  const auto codes = canonical_codes(huffman_code_lengths(freqs));

  PositionCoder pc;
  pc.position_ = position;
  for (std::size_t i = 0; i < symbols.size(); ++i) pc.codebook_[symbols[i]] = codes[i];
  pc.escape_ = codes.back();
  pc.build_trie();
  return pc;
}

PositionCoder PositionCoder::from_codebook(int position,
                                           std::map<std::int64_t, BitString> codebook,
                                           BitString escape) {
  PositionCoder pc;
  pc.position_ = position;
  pc.codebook_ = std::move(codebook);
  pc.escape_ = std::move(escape);
  if (!pc.is_prefix_free()) throw ValidationError("codebook is not prefix-free");
  pc.build_trie();
  return pc;
}

void PositionCoder::build_trie() {
  trie_.assign(1, TrieNode{});
  auto insert = [this](const BitString& code, bool is_escape, std::int64_t sym) {
    if (code.empty()) throw ValidationError("empty codeword");
    int node = 0;
    for (std::size_t i = 0; i < code.size(); ++i) {
      if (trie_[node].leaf) throw ValidationError("codebook is not prefix-free");
      const int bit = code[i] ? 1 : 0;
      if (trie_[node].child[bit] < 0) {
        trie_[node].child[bit] = static_cast<int>(trie_.size());
        trie_.emplace_back();
      }
      node = trie_[node].child[bit];
    }
    TrieNode& leaf = trie_[node];
    if (leaf.leaf || leaf.child[0] >= 0 || leaf.child[1] >= 0)
      throw ValidationError("codebook is not prefix-free");
    leaf.leaf = true;
    leaf.is_escape = is_escape;
    leaf.symbol = sym;
  };
  for (const auto& [sym, code] : codebook_) insert(code, false, sym);
  insert(escape_, true, 0);
}

std::size_t PositionCoder::cost(std::int64_t index) const {
  const auto it = codebook_.find(index);
  if (it != codebook_.end()) return it->second.size();
  return escape_.size() + kEscapeRawBits;
}

void PositionCoder::encode(std::int64_t index, BitString& out) const {
  const auto it = codebook_.find(index);
  if (it != codebook_.end()) {
    out.append(it->second);
    return;
  }
  if (index < std::numeric_limits<std::int32_t>::min() ||
      index > std::numeric_limits<std::int32_t>::max())
    throw RangeError("escaped index does not fit in 32 bits");
  out.append(escape_);
  out.push_bits(static_cast<std::uint32_t>(static_cast<std::int32_t>(index)), kEscapeRawBits);
}

std::int64_t PositionCoder::decode(const BitString& in, std::size_t& pos) const {
  int node = 0;
  while (!trie_[node].leaf) {
    if (pos >= in.size()) throw DecodeError("truncated codeword", pos);
    const int next = trie_[node].child[in[pos] ? 1 : 0];
    if (next < 0) throw DecodeError("invalid codeword", pos);
    node = next;
    ++pos;
  }
  if (!trie_[node].is_escape) return trie_[node].symbol;
  if (pos + kEscapeRawBits > in.size()) throw DecodeError("truncated escape payload", pos);
  std::uint32_t raw = 0;
  for (int i = 0; i < kEscapeRawBits; ++i) raw = (raw << 1) | (in[pos++] ? 1u : 0u);
  return static_cast<std::int32_t>(raw);
}

double PositionCoder::kraft_sum() const {
  double s = std::ldexp(1.0, -static_cast<int>(escape_.size()));
  for (const auto& [sym, code] : codebook_) s += std::ldexp(1.0, -static_cast<int>(code.size()));
  return s;
}

bool PositionCoder::is_prefix_free() const {
  std::vector<std::string> words;
  words.reserve(codebook_.size() + 1);
  for (const auto& [sym, code] : codebook_) words.push_back(code.to_string());
  words.push_back(escape_.to_string());
  std::sort(words.begin(), words.end());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty()) return false;
    if (i + 1 < words.size() && words[i + 1].compare(0, words[i].size(), words[i]) == 0)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------- PacketCodec

std::string to_string(CodingScheme s) { return s == CodingScheme::Sparse ? "sparse" : "dense"; }

std::vector<double> QuantizedPacket::values(const Quantizer& q) const {
  std::vector<double> v;
  v.reserve(index.size());
  for (auto i : index) v.push_back(q.reconstruct(i));
  return v;
}

PacketCodec::PacketCodec(int N, Quantizer q, CodingScheme scheme,
                         std::vector<PositionCoder> coders)
    : N_(N), quantizer_(q), scheme_(scheme), coders_(std::move(coders)) {
  if (N_ < 1) throw ValidationError("codec packet length must be >= 1");
  if (scheme_ == CodingScheme::Sparse && N_ % 2 != 0)
    throw ValidationError("sparse scheme requires an even packet length");
  if (static_cast<int>(coders_.size()) != N_)
    throw ValidationError("codec needs one coder per packet position");
  if (!(quantizer_.delta > 0.0)) throw ValidationError("quantizer step must be positive");
}

QuantizedPacket PacketCodec::quantize(const std::vector<double>& u) const {
  if (static_cast<int>(u.size()) != N_) throw ValidationError("packet length mismatch");
  QuantizedPacket p;
  p.index.reserve(u.size());
  for (double v : u) p.index.push_back(quantizer_.quantize(v).index);
  return p;
}

EncodedPacket PacketCodec::encode(const QuantizedPacket& p) const {
  if (static_cast<int>(p.index.size()) != N_) throw ValidationError("packet length mismatch");
  EncodedPacket enc;
  if (scheme_ == CodingScheme::Dense) {
    for (int i = 0; i < N_; ++i) coders_[i].encode(p.index[i], enc.bits);
  } else {
    const int half = N_ / 2;
    for (int i = 0; i < half; ++i) coders_[i].encode(p.index[i], enc.bits);
    for (int i = half; i < N_; ++i) enc.bitmap.push(p.index[i] != 0);
    enc.bits.append(enc.bitmap);
    for (int i = half; i < N_; ++i)
      if (p.index[i] != 0) coders_[i].encode(p.index[i], enc.bits);
  }
  enc.bit_count = enc.bits.size();
  return enc;
}

QuantizedPacket PacketCodec::decode(const EncodedPacket& enc) const {
  if (enc.bit_count != enc.bits.size())
    throw DecodeError("bit_count disagrees with the stream length", enc.bits.size());
  QuantizedPacket p;
  p.index.assign(static_cast<std::size_t>(N_), 0);
  std::size_t pos = 0;
  if (scheme_ == CodingScheme::Dense) {
    for (int i = 0; i < N_; ++i) p.index[i] = coders_[i].decode(enc.bits, pos);
  } else {
    const int half = N_ / 2;
    for (int i = 0; i < half; ++i) p.index[i] = coders_[i].decode(enc.bits, pos);
    if (pos + static_cast<std::size_t>(N_ - half) > enc.bits.size())
      throw DecodeError("truncated presence bitmap", pos);
    std::vector<bool> present(static_cast<std::size_t>(N_ - half));
    for (auto&& flag : present) flag = enc.bits[pos++];
    for (int i = half; i < N_; ++i) {
      if (!present[static_cast<std::size_t>(i - half)]) continue;
      const std::size_t at = pos;
      p.index[i] = coders_[i].decode(enc.bits, pos);
      if (p.index[i] == 0) throw DecodeError("flagged position decoded to zero", at);
    }
  }
  if (pos != enc.bits.size()) throw DecodeError("trailing bits after packet", pos);
  return p;
}

std::string PacketCodec::to_json_text() const {
  using detail::json;
  json j;
  j["N"] = N_;
  j["delta"] = quantizer_.delta;
  j["scheme"] = to_string(scheme_);
  json coders = json::array();
  for (const auto& c : coders_) {
    json book = json::object();
    for (const auto& [sym, code] : c.codebook()) book[std::to_string(sym)] = code.to_string();
    coders.push_back({{"position", c.position()},
                      {"escape", c.escape().to_string()},
                      {"codebook", std::move(book)}});
  }
  j["coders"] = std::move(coders);
  return j.dump(2) + "\n";
}

PacketCodec PacketCodec::from_json_text(const std::string& text) {
  using detail::json;
  const json j = detail::parse_json(text, "codec");
  try {
    const int N = j.at("N").get<int>();
    Quantizer q{j.at("delta").get<double>()};
    const std::string scheme_name = j.at("scheme").get<std::string>();
    CodingScheme scheme;
    if (scheme_name == "sparse") scheme = CodingScheme::Sparse;
    else if (scheme_name == "dense") scheme = CodingScheme::Dense;
    else throw ValidationError("unknown coding scheme '" + scheme_name + "'");
    std::vector<PositionCoder> coders;
    for (const auto& cj : j.at("coders")) {
      std::map<std::int64_t, BitString> book;
      for (const auto& [key, val] : cj.at("codebook").items())
        book[std::stoll(key)] = BitString::from_string(val.get<std::string>());
      coders.push_back(PositionCoder::from_codebook(
          cj.at("position").get<int>(), std::move(book),
          BitString::from_string(cj.at("escape").get<std::string>())));
    }
    return PacketCodec(N, q, scheme, std::move(coders));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("codec JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ValidationError("codec JSON: codebook keys must be integers");
  }
}

PacketCodec train_codec(const std::vector<QuantizedPacket>& samples, int N,
                        Quantizer q, CodingScheme scheme) {
  if (samples.empty()) throw ValidationError("cannot train a codec on an empty set");
  if (N < 1) throw ValidationError("codec packet length must be >= 1");
  if (scheme == CodingScheme::Sparse && N % 2 != 0)
    throw ValidationError("sparse scheme requires an even packet length");
  std::vector<std::map<std::int64_t, std::uint64_t>> counts(static_cast<std::size_t>(N));
  const int unconditional = scheme == CodingScheme::Sparse ? N / 2 : N;
  for (const auto& s : samples) {
    if (static_cast<int>(s.index.size()) != N)
      throw ValidationError("training packet length mismatch");
    for (int i = 0; i < N; ++i)
      if (i < unconditional || s.index[i] != 0) ++counts[i][s.index[i]];
  }
  std::vector<PositionCoder> coders;
  coders.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) coders.push_back(PositionCoder::train(i, counts[i]));
  return PacketCodec(N, q, scheme, std::move(coders));
}

BitrateReport bitrate_report(const PacketCodec& codec,
                             const std::vector<QuantizedPacket>& packets) {
  if (packets.empty()) throw ValidationError("bit-rate report needs at least one packet");
  BitrateReport r;
  r.per_packet.reserve(packets.size());
  double total = 0.0;
  for (const auto& p : packets) {
    const std::size_t bits = codec.encode(p).bit_count;
    r.per_packet.push_back(bits);
    total += static_cast<double>(bits);
  }
  r.mean_bits = total / static_cast<double>(packets.size());
  return r;
}

}  // namespace sppc
