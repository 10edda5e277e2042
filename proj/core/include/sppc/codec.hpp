#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sppc {

/// Growable bit sequence, MSB-first when packed into bytes.
class BitString {
 public:
  void push(bool bit);
  /// Appends the low `width` bits of `value`, most significant first.
  void push_bits(std::uint64_t value, int width);
  void append(const BitString& other);

  bool operator[](std::size_t i) const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  std::string to_string() const;  ///< "0101..."
  static BitString from_string(const std::string& bits);
  std::string to_hex() const;
  static BitString from_hex(const std::string& hex, std::size_t bit_count);

  bool operator==(const BitString& other) const;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

/// Mid-tread uniform scalar quantizer, index = round_half_even(v / delta).
struct Quantizer {
  double delta = 0.001;

  struct Result {
    std::int64_t index;
    double value;
  };

  Result quantize(double v) const;
  double reconstruct(std::int64_t index) const { return index * delta; }
};

/// Huffman code lengths for symbols with the given frequencies (index i of
/// the result belongs to freqs[i]). Merges the two lowest (frequency, order)
/// nodes first; a lone symbol gets length 1.
std::vector<int> huffman_code_lengths(const std::vector<std::uint64_t>& freqs);

/// Canonical prefix code for one packet position with an escape codeword for
/// indices absent from training. Escaped indices are followed by a 32-bit
/// two's-complement raw index.
class PositionCoder {
 public:
  PositionCoder() = default;
  /// Pseudo-count 1 is added for the escape symbol.
  static PositionCoder train(int position,
                             const std::map<std::int64_t, std::uint64_t>& counts);
  static PositionCoder from_codebook(int position,
                                     std::map<std::int64_t, BitString> codebook,
                                     BitString escape);

  int position() const { return position_; }
  const std::map<std::int64_t, BitString>& codebook() const { return codebook_; }
  const BitString& escape() const { return escape_; }

  /// Number of bits `encode` emits for `index`.
  std::size_t cost(std::int64_t index) const;
  void encode(std::int64_t index, BitString& out) const;
  /// Reads one symbol starting at `pos`; advances `pos`.
  std::int64_t decode(const BitString& in, std::size_t& pos) const;

  /// Sum of 2^-len over all codewords including the escape.
  double kraft_sum() const;
  bool is_prefix_free() const;

 private:
  void build_trie();

  struct TrieNode {
    int child[2] = {-1, -1};
    bool leaf = false;
    bool is_escape = false;
    std::int64_t symbol = 0;
  };

  int position_ = 0;
  std::map<std::int64_t, BitString> codebook_;
  BitString escape_;
  std::vector<TrieNode> trie_;
};

inline constexpr int kEscapeRawBits = 32;

enum class CodingScheme { Sparse, Dense };

std::string to_string(CodingScheme s);

struct EncodedPacket {
  BitString bits;
  std::size_t bit_count = 0;
  BitString bitmap;  ///< sparse scheme only: presence flags for the tail half
};

/// Quantized packet: indices plus reconstructed values.
struct QuantizedPacket {
  std::vector<std::int64_t> index;

  std::vector<double> values(const Quantizer& q) const;
  bool operator==(const QuantizedPacket&) const = default;
};

/// Per-position entropy coders for N-element packets. The sparse scheme codes
/// the first N/2 positions unconditionally and the rest behind an N/2-bit
/// presence bitmap; the dense scheme codes every position.
class PacketCodec {
 public:
  PacketCodec(int N, Quantizer q, CodingScheme scheme,
              std::vector<PositionCoder> coders);

  int N() const { return N_; }
  const Quantizer& quantizer() const { return quantizer_; }
  CodingScheme scheme() const { return scheme_; }
  const std::vector<PositionCoder>& coders() const { return coders_; }

  QuantizedPacket quantize(const std::vector<double>& u) const;
  EncodedPacket encode(const QuantizedPacket& p) const;
  QuantizedPacket decode(const EncodedPacket& enc) const;

  std::string to_json_text() const;
  static PacketCodec from_json_text(const std::string& text);

 private:
  int N_;
  Quantizer quantizer_;
  CodingScheme scheme_;
  std::vector<PositionCoder> coders_;
};

PacketCodec train_codec(const std::vector<QuantizedPacket>& samples, int N,
                        Quantizer q, CodingScheme scheme);

struct BitrateReport {
  double mean_bits = 0.0;
  std::vector<std::size_t> per_packet;
};

BitrateReport bitrate_report(const PacketCodec& codec,
                             const std::vector<QuantizedPacket>& packets);

}  // namespace sppc
