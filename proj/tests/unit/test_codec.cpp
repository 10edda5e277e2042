#include <cmath>
#include <map>
#include <random>

#include <doctest.h>

#include "sppc/codec.hpp"
#include "sppc/error.hpp"

using namespace sppc;

namespace {

std::vector<QuantizedPacket> random_packets(std::mt19937_64& rng, int count, int N,
                                            double zero_prob, int spread) {
  std::bernoulli_distribution zero(zero_prob);
  std::geometric_distribution<int> mag(1.0 / spread);
  std::bernoulli_distribution sign(0.5);
  std::vector<QuantizedPacket> out;
  for (int c = 0; c < count; ++c) {
    QuantizedPacket p;
    for (int i = 0; i < N; ++i) {
      std::int64_t v = 0;
      if (!zero(rng)) v = (1 + mag(rng)) * (sign(rng) ? 1 : -1);
      p.index.push_back(v);
    }
    out.push_back(std::move(p));
  }
  return out;
}

double entropy_bits(const std::map<std::int64_t, std::uint64_t>& counts) {
  double total = 0.0, h = 0.0;
  for (const auto& [s, c] : counts) total += static_cast<double>(c);
  for (const auto& [s, c] : counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

TEST_CASE("quantizer examples") {
  const Quantizer q{0.001};
  CHECK(q.quantize(0.0).index == 0);
  CHECK(q.quantize(0.0).value == 0.0);
  CHECK(q.quantize(0.0004).index == 0);
  CHECK(q.quantize(0.0015).index == 2);
  CHECK(q.quantize(0.0015).value == doctest::Approx(0.002));
  CHECK(q.quantize(0.0025).index == 2);
  CHECK(q.quantize(-0.0025).index == -2);
  CHECK(q.quantize(-0.0035).index == -4);
  CHECK(q.quantize(0.0026).index == 3);
  CHECK(q.quantize(-0.7).index == -700);
}

TEST_CASE("quantizer error never exceeds half a step") {
  const Quantizer q{0.001};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 50.0);
  for (int i = 0; i < 100000; ++i) {
    const double v = g(rng);
    const auto r = q.quantize(v);
    CHECK(std::abs(v - r.value) <= q.delta / 2 * (1 + 1e-9));
    CHECK(r.value == q.reconstruct(r.index));
  }
}

TEST_CASE("quantizer range errors") {
  const Quantizer q{0.001};
  CHECK_THROWS_AS(q.quantize(1e7), RangeError);
  CHECK_THROWS_AS(q.quantize(std::nan("")), RangeError);
  CHECK_THROWS_AS(Quantizer{0.0}.quantize(1.0), ValidationError);
}

TEST_CASE("Huffman lengths on small alphabets") {
  CHECK(huffman_code_lengths({}).empty());
  CHECK(huffman_code_lengths({5}) == std::vector<int>{1});
  CHECK(huffman_code_lengths({1, 1}) == std::vector<int>{1, 1});
  CHECK(huffman_code_lengths({3, 3, 3, 3}) == std::vector<int>{2, 2, 2, 2});
  CHECK(huffman_code_lengths({4, 2, 1, 1}) == std::vector<int>{1, 2, 3, 3});
  CHECK(huffman_code_lengths({1, 1, 2, 4}) == std::vector<int>{3, 3, 2, 1});
}

TEST_CASE("Huffman lengths are optimal against entropy bounds") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint64_t> f(1, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 40;
    std::vector<std::uint64_t> freqs(n);
    for (auto& v : freqs) v = f(rng);
    const auto len = huffman_code_lengths(freqs);
    double total = 0.0, avg = 0.0, h = 0.0, kraft = 0.0;
    for (auto v : freqs) total += static_cast<double>(v);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = static_cast<double>(freqs[i]) / total;
      avg += p * len[i];
      h -= p * std::log2(p);
      kraft += std::ldexp(1.0, -len[i]);
    }
    CHECK(kraft == doctest::Approx(1.0));
    CHECK(avg >= h - 1e-12);
    CHECK(avg < h + 1.0);
  }
}

TEST_CASE("trained position coders are complete prefix codes") {
  std::map<std::int64_t, std::uint64_t> counts{{0, 900}, {1, 100}};
  const auto pc = PositionCoder::train(0, counts);
  CHECK(pc.is_prefix_free());
  CHECK(pc.kraft_sum() == doctest::Approx(1.0));
  CHECK(pc.codebook().size() == 2);
  // Expected length on the training set stays within H + 1 plus the escape mass.
  const double h = entropy_bits(counts);
  double avg = 0.0;
  for (const auto& [s, c] : counts) avg += static_cast<double>(c) * pc.cost(s) / 1000.0;
  CHECK(avg <= h + 1.0 + 1.0 / 1001.0);

  const auto single = PositionCoder::train(1, {{7, 10}});
  CHECK(single.is_prefix_free());
  CHECK(single.cost(7) == 1);
  CHECK(single.cost(8) == 1 + kEscapeRawBits);

  const auto empty = PositionCoder::train(2, {});
  CHECK(empty.escape().size() == 1);
  CHECK(empty.cost(0) == 1 + kEscapeRawBits);
}

TEST_CASE("escape-coded indices roundtrip") {
  const auto pc = PositionCoder::train(0, {{0, 50}, {1, 20}, {-1, 20}});
  for (std::int64_t v : {std::int64_t{0}, std::int64_t{1}, std::int64_t{123456}, std::int64_t{-2147483647}, std::int64_t{2147483647}}) {
    BitString bits;
    pc.encode(v, bits);
    CHECK(bits.size() == pc.cost(v));
    std::size_t pos = 0;
    CHECK(pc.decode(bits, pos) == v);
    CHECK(pos == bits.size());
  }
}

TEST_CASE("bit string serialization") {
  BitString b;
  b.push_bits(0b1011, 4);
  b.push(true);
  b.push_bits(0x3FF, 10);
  CHECK(b.size() == 15);
  CHECK(b.to_string() == "101111111111111");
  CHECK(BitString::from_string(b.to_string()) == b);
  CHECK(BitString::from_hex(b.to_hex(), b.size()) == b);
  CHECK_THROWS(BitString::from_string("10x"));
}

TEST_CASE("sparse scheme on the all-zero packet") {
  std::mt19937_64 rng(3);
  const auto train = random_packets(rng, 500, 10, 0.6, 5);
  const auto codec = train_codec(train, 10, Quantizer{}, CodingScheme::Sparse);
  QuantizedPacket zero;
  zero.index.assign(10, 0);
  const auto enc = codec.encode(zero);
  std::size_t head = 0;
  for (int i = 0; i < 5; ++i) head += codec.coders()[i].cost(0);
  CHECK(enc.bit_count == head + 5);
  CHECK(enc.bitmap.to_string() == "00000");
  CHECK(codec.decode(enc) == zero);
}

TEST_CASE("dense bit count is the sum of position costs") {
  std::mt19937_64 rng(4);
  const auto train = random_packets(rng, 500, 10, 0.1, 20);
  const auto codec = train_codec(train, 10, Quantizer{}, CodingScheme::Dense);
  for (const auto& p : random_packets(rng, 100, 10, 0.1, 20)) {
    std::size_t expected = 0;
    for (int i = 0; i < 10; ++i) expected += codec.coders()[i].cost(p.index[i]);
    CHECK(codec.encode(p).bit_count == expected);
  }
}

TEST_CASE("training-set rate matches the code-length accounting") {
  std::mt19937_64 rng(5);
  const auto train = random_packets(rng, 2000, 10, 0.5, 8);
  for (auto scheme : {CodingScheme::Sparse, CodingScheme::Dense}) {
    const auto codec = train_codec(train, 10, Quantizer{}, scheme);
    const int head = scheme == CodingScheme::Sparse ? 5 : 10;
    std::vector<std::map<std::int64_t, std::uint64_t>> counts(10);
    for (const auto& p : train)
      for (int i = 0; i < 10; ++i)
        if (i < head || p.index[i] != 0) ++counts[i][p.index[i]];
    const double bitmap = scheme == CodingScheme::Sparse ? 5.0 : 0.0;
    double estimate = 0.0;
    double entropy = bitmap;
    for (int i = 0; i < 10; ++i) {
      double total = 0.0;
      for (const auto& [s, c] : counts[i]) {
        estimate += static_cast<double>(c) * codec.coders()[i].cost(s);
        total += static_cast<double>(c);
      }
      entropy += entropy_bits(counts[i]) * total / 2000.0;
    }
    estimate = estimate / 2000.0 + bitmap;
    const double mean = bitrate_report(codec, train).mean_bits;
    CHECK(std::abs(mean - estimate) <= 0.1);
    CHECK(mean >= entropy - 1e-9);
    CHECK(mean <= entropy + 10.0);
  }
}

TEST_CASE("random packets roundtrip through both schemes") {
  std::mt19937_64 rng(6);
  const auto train = random_packets(rng, 300, 10, 0.5, 10);
  for (auto scheme : {CodingScheme::Sparse, CodingScheme::Dense}) {
    const auto codec = train_codec(train, 10, Quantizer{}, scheme);
    for (const auto& p : random_packets(rng, 10000, 10, 0.4, 40)) {
      const auto enc = codec.encode(p);
      CHECK(enc.bit_count == enc.bits.size());
      const auto back = codec.decode(enc);
      if (!(back == p)) FAIL("roundtrip mismatch");
    }
  }
}

TEST_CASE("codec JSON roundtrip preserves encodings") {
  std::mt19937_64 rng(7);
  const auto train = random_packets(rng, 300, 10, 0.5, 10);
  const auto codec = train_codec(train, 10, Quantizer{}, CodingScheme::Sparse);
  const auto again = PacketCodec::from_json_text(codec.to_json_text());
  CHECK(again.N() == 10);
  CHECK(again.scheme() == CodingScheme::Sparse);
  for (const auto& p : random_packets(rng, 200, 10, 0.5, 10))
    CHECK(again.encode(p).bits == codec.encode(p).bits);
  CHECK_THROWS_AS(PacketCodec::from_json_text("{}"), ValidationError);
}

TEST_CASE("malformed streams raise decode errors") {
  std::mt19937_64 rng(8);
  const auto train = random_packets(rng, 300, 10, 0.5, 10);
  const auto codec = train_codec(train, 10, Quantizer{}, CodingScheme::Sparse);
  auto enc = codec.encode(train.front());
  EncodedPacket truncated;
  truncated.bits = BitString::from_string(enc.bits.to_string().substr(0, enc.bits.size() / 2));
  truncated.bit_count = truncated.bits.size();
  CHECK_THROWS_AS(codec.decode(truncated), DecodeError);
  enc.bit_count += 1;
  CHECK_THROWS_AS(codec.decode(enc), DecodeError);
  EncodedPacket padded = codec.encode(train.front());
  padded.bits.push(false);
  padded.bit_count += 1;
  CHECK_THROWS_AS(codec.decode(padded), DecodeError);
}

TEST_CASE("codec argument checks") {
  std::mt19937_64 rng(9);
  const auto train = random_packets(rng, 10, 9, 0.5, 10);
  CHECK_THROWS_AS(train_codec(train, 9, Quantizer{}, CodingScheme::Sparse), ValidationError);
  CHECK_THROWS_AS(train_codec({}, 10, Quantizer{}, CodingScheme::Dense), ValidationError);
  CHECK_THROWS_AS(train_codec(train, 10, Quantizer{}, CodingScheme::Dense), ValidationError);
}

TEST_CASE("bit-rate report averages") {
  std::mt19937_64 rng(10);
  const auto train = random_packets(rng, 100, 2, 0.0, 10);
  const auto codec = train_codec(train, 2, Quantizer{}, CodingScheme::Dense);
  const auto one = bitrate_report(codec, {train[0]});
  CHECK(one.mean_bits == static_cast<double>(codec.encode(train[0]).bit_count));
  const auto two = bitrate_report(codec, {train[0], train[1]});
  CHECK(two.mean_bits == doctest::Approx((two.per_packet[0] + two.per_packet[1]) / 2.0));
}
