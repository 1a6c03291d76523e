#include <doctest.h>

#include "oracles.hpp"
#include "patmap/index_stream.hpp"
#include "patmap/mapper.hpp"
#include "patmap/synthetic.hpp"

using namespace patmap;

namespace {

// The 16-kernel example spread over 512 output channels.
LayerWeights wide_example() {
  const auto small = example16_layer();
  LayerWeights l = small;
  l.out_channels = 512;
  l.weights.assign(512 * 9, 0);
  for (int o = 0; o < 16; ++o) {
    const auto k = small.kernel(o, 0);
    std::copy(k.begin(), k.end(), l.kernel(o * 32, 0).begin());
  }
  return l;
}

}  // namespace

TEST_SUITE("index_stream") {

TEST_CASE("bit writer is MSB first") {
  BitWriter w;
  w.put(0b101, 3);
  w.put(0x1f, 5);
  w.put(1, 1);
  CHECK(w.bit_length() == 9);
  const auto bytes = w.take();
  REQUIRE(bytes.size() == 2);
  CHECK(bytes[0] == 0b10111111);
  CHECK(bytes[1] == 0b10000000);
  BitReader r(bytes, 9);
  CHECK(r.get(3) == 0b101);
  CHECK(r.get(5) == 0x1f);
  CHECK(r.get(1) == 1);
  CHECK_THROWS_AS(r.get(1), Error);
}

TEST_CASE("14 kernels in 3 records at O = 512 take 201 bits after the header") {
  const auto l = wide_example();
  const auto m = map_layer(l, assignment_from_supports(l), HardwareConfig{});
  const auto h = m.stream.header();
  CHECK(h.index_bits == 9);
  CHECK(h.out_channels == 512);
  const auto records = m.stream.decode();
  REQUIRE(records.size() == 3);
  CHECK(index_overhead_bits(m.stream) - kIndexHeaderBits == 201);
  CHECK(index_overhead_bits(m.stream) == 3 * (9 + 16) + 14 * 9 + 112);
  CHECK(index_overhead_bytes(m.stream) == (313 + 7) / 8);
  CHECK(records[0].out_channels == std::vector<int>{0, 96, 192, 288, 384, 480});
}

TEST_CASE("header-only stream") {
  const IndexHeader h{8, 1, 3, 3, 3};
  const auto s = IndexStream::encode(h, {});
  CHECK(s.bit_length() == kIndexHeaderBits);
  CHECK(s.bytes().size() == 14);
  CHECK(s.header() == h);
  CHECK(s.decode().empty());
}

TEST_CASE("records encode and decode") {
  const IndexHeader h{10, 2, 2, 2, 4};
  const std::vector<IndexRecord> recs{{Pattern::parse("1001", 2, 2), {3, 1, 9}},
                                      {Pattern::zero(2, 2), {}},
                                      {Pattern::parse("0100", 2, 2), {0}}};
  const auto s = IndexStream::encode(h, recs);
  CHECK(s.decode() == recs);
  CHECK(s.bit_length() == oracle::stream_bits(4, 4, {3, 0, 1}));
  CHECK(IndexStream::from_bytes(s.bytes()).decode() == recs);
}

TEST_CASE("closed-form length on random layers") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const auto inst = random_instance(rng);
    const auto pruned = prune_layer(inst.layer, inst.budget, inst.metric, inst.include_zero);
    const auto m = map_layer(pruned.layer, pruned.assignment, HardwareConfig{});
    std::vector<int> counts;
    for (const auto& r : m.stream.decode()) counts.push_back(static_cast<int>(r.out_channels.size()));
    const auto h = m.stream.header();
    CHECK(m.stream.bit_length() == oracle::stream_bits(h.kernel_h * h.kernel_w, h.index_bits, counts));
    // Separators: exactly one fewer than the input channel count.
    CHECK(std::count(counts.begin(), counts.end(), 0) == inst.layer.in_channels - 1);
  }
}

TEST_CASE("malformed streams are rejected") {
  const IndexHeader h{4, 1, 1, 2, 2};
  CHECK_THROWS_WITH_AS(IndexStream::encode(h, {{Pattern::parse("11", 1, 2), {4}}}), doctest::Contains("out of range"),
                       Error);
  CHECK_THROWS_AS(IndexStream::encode(h, {{Pattern::parse("1", 1, 1), {0}}}), Error);

  // Output index >= O, written by hand past the encoder's check.
  BitWriter w;
  w.put(kIndexStreamVersion, 8);
  w.put(4, 32);
  w.put(1, 32);
  w.put(1, 16);
  w.put(2, 16);
  w.put(3, 8);
  w.put(0b11, 2);
  w.put(1, 16);
  w.put(6, 3);
  const auto bad = IndexStream::from_bytes(w.take());
  CHECK_THROWS_WITH_AS(bad.decode(), doctest::Contains(">= O"), Error);

  // Truncated: drop the last byte of a multi-record stream.
  const auto good = IndexStream::encode(h, {{Pattern::parse("11", 1, 2), {0, 1, 2, 3}}, {Pattern::parse("01", 1, 2), {2}}});
  auto bytes = good.bytes();
  bytes.pop_back();
  CHECK_THROWS_WITH_AS(IndexStream::from_bytes(bytes).decode(), doctest::Contains("truncated"), Error);

  // Nonzero trailing padding.
  const auto one = IndexStream::encode(h, {{Pattern::parse("01", 1, 2), {1}}});
  std::vector<std::uint8_t> padded = one.bytes();
  REQUIRE(padded.size() == 17);
  padded[16] = static_cast<std::uint8_t>(padded[16] | 0x01);
  CHECK_THROWS_WITH_AS(IndexStream::from_bytes(padded).decode(), doctest::Contains("padding"), Error);

  // Separator carrying kernels.
  BitWriter s;
  s.put(kIndexStreamVersion, 8);
  s.put(4, 32);
  s.put(2, 32);
  s.put(1, 16);
  s.put(2, 16);
  s.put(2, 8);
  s.put(0, 2);
  s.put(1, 16);
  s.put(0, 2);
  CHECK_THROWS_WITH_AS(IndexStream::from_bytes(s.take()).decode(), doctest::Contains("separator"), Error);

  CHECK_THROWS_AS(IndexStream::from_bytes({1, 2, 3}).header(), Error);
  CHECK_THROWS_AS(IndexStream::encode({0, 1, 1, 1, 1}, {}), Error);
}

TEST_CASE("swapping two records breaks the roundtrip") {
  const auto l = example16_layer();
  const auto m = map_layer(l, assignment_from_supports(l), HardwareConfig{});
  auto recs = m.stream.decode();
  std::swap(recs[0], recs[2]);
  const auto swapped = IndexStream::encode(m.stream.header(), recs);
  CHECK(reconstruct_placement(swapped, HardwareConfig{}) != m.placement);
}

}  // TEST_SUITE
