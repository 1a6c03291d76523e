#include <doctest.h>

#include "oracles.hpp"
#include "patmap/mapper.hpp"
#include "patmap/ou_sim.hpp"
#include "patmap/reference.hpp"
#include "patmap/synthetic.hpp"

using namespace patmap;

namespace {

Placement one_block(int h, int w, int kh = 3, int kw = 3) {
  std::vector<bool> mask(static_cast<std::size_t>(kh * kw), false);
  for (int k = 0; k < h; ++k) mask[static_cast<std::size_t>(k)] = true;
  Placement pl;
  PlacedBlock b;
  b.pattern = Pattern(kh, kw, mask);
  for (int k = 0; k < w; ++k) b.kernel_order.push_back(k);
  pl.blocks.push_back(b);
  return pl;
}

std::vector<std::pair<int, int>> spans(const std::vector<OUTile>& tiles) {
  std::vector<std::pair<int, int>> out;
  for (const auto& t : tiles) out.emplace_back(t.rows, t.cols);
  return out;
}

FeatureMap ramp(int c, int h, int w) {
  FeatureMap fm;
  fm.channels = c;
  fm.height = h;
  fm.width = w;
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) fm.data.push_back(static_cast<std::int16_t>(100 * k + 10 * y + x + 1));
  return fm;
}

}  // namespace

TEST_SUITE("ou_sim") {

TEST_CASE("tiling examples") {
  HardwareConfig hw;
  CHECK(spans(tile_blocks(one_block(9, 8), hw)) == std::vector<std::pair<int, int>>{{9, 8}});
  CHECK(spans(tile_blocks(one_block(3, 11), hw)) == std::vector<std::pair<int, int>>{{3, 8}, {3, 3}});
  hw.ou_rows = 4;
  hw.ou_cols = 4;
  CHECK(spans(tile_blocks(one_block(4, 5), hw)) == std::vector<std::pair<int, int>>{{4, 4}, {4, 1}});
  const auto t = tile_blocks(one_block(9, 9), hw);
  CHECK(t.size() == 9);
  CHECK(t[1].row == 0);
  CHECK(t[1].col == 4);
  CHECK(t[3].row == 4);
}

TEST_CASE("tiles cover every block exactly") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto inst = random_instance(rng);
    const auto pruned = prune_layer(inst.layer, inst.budget, inst.metric, inst.include_zero);
    HardwareConfig hw;
    hw.ou_rows = 1 + static_cast<int>(seed % 9);
    hw.ou_cols = 1 + static_cast<int>(seed % 8);
    const auto m = map_layer(pruned.layer, pruned.assignment, hw);
    std::vector<std::int64_t> covered(m.placement.blocks.size(), 0);
    std::int64_t expected_tiles = 0;
    for (const auto& t : tile_blocks(m.placement, hw)) {
      const auto& b = m.placement.blocks[static_cast<std::size_t>(t.fragment)];
      CHECK(t.rows <= hw.ou_rows);
      CHECK(t.cols <= hw.ou_cols);
      CHECK(t.row + t.rows <= b.height());
      CHECK(t.col + t.cols <= b.width());
      covered[static_cast<std::size_t>(t.fragment)] += static_cast<std::int64_t>(t.rows) * t.cols;
    }
    for (std::size_t f = 0; f < covered.size(); ++f) {
      const auto& b = m.placement.blocks[f];
      CHECK(covered[f] == static_cast<std::int64_t>(b.height()) * b.width());
      expected_tiles += ((b.height() + hw.ou_rows - 1) / hw.ou_rows) * ((b.width() + hw.ou_cols - 1) / hw.ou_cols);
    }
    CHECK(static_cast<std::int64_t>(tile_blocks(m.placement, hw).size()) == expected_tiles);
  }
}

TEST_CASE("input selection") {
  const auto fm = ramp(2, 4, 4);
  const auto dense = select_inputs(fm, {1, 1}, 1, Pattern::dense(3, 3), 0);
  CHECK(dense == std::vector<std::int16_t>{112, 113, 114, 122, 123, 124, 132, 133, 134});
  CHECK(select_inputs(fm, {0, 0}, 0, Pattern::parse("100000000", 3, 3), 0) == std::vector<std::int16_t>{1});
  CHECK(select_inputs(fm, {0, 0}, 0, Pattern::parse("010000001", 3, 3), 0) == std::vector<std::int16_t>{2, 23});
  // Padded window corner reads zeros.
  CHECK(select_inputs(fm, {0, 0}, 0, Pattern::parse("100010000", 3, 3), 1) == std::vector<std::int16_t>{0, 1});
  CHECK_THROWS_AS(select_inputs(fm, {2, 2}, 0, Pattern::dense(3, 3), 0), Error);
  CHECK_THROWS_AS(select_inputs(fm, {0, 0}, 2, Pattern::dense(3, 3), 0), Error);
}

TEST_CASE("zero detection") {
  const std::int16_t z[] = {0, 0, 0};
  const std::int16_t nz[] = {0, 1, 0};
  CHECK(zero_detect(z));
  CHECK_FALSE(zero_detect(nz));
  CHECK(zero_detect(std::span<const std::int16_t>{}));
}

TEST_CASE("1x1 identity kernel reproduces the input") {
  LayerWeights l;
  l.name = "id";
  l.out_channels = l.in_channels = l.kernel_h = l.kernel_w = 1;
  l.weights = {1};
  const auto fm = ramp(1, 5, 3);
  const auto a = assignment_from_supports(l);
  const auto m = map_layer(l, a, HardwareConfig{});
  const auto r = run_layer(l, a, m.placement, m.stream, fm, HardwareConfig{});
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 3; ++x) CHECK(r.output.at(0, y, x) == fm.at(0, y, x));
  const auto b = run_baseline_layer(l, fm, HardwareConfig{});
  CHECK(b.output == r.output);
  CHECK(b.stats.ou_activations == 15);
}

TEST_CASE("random pruned layer matches the im2col oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    auto inst = random_instance(rng, 12, 8);
    const auto pruned = prune_layer(inst.layer, inst.budget, inst.metric, inst.include_zero);
    const auto m = map_layer(pruned.layer, pruned.assignment, HardwareConfig{});
    const auto r = run_layer(pruned.layer, pruned.assignment, m.placement, m.stream, inst.input, HardwareConfig{});
    CHECK(r.output == oracle::conv_im2col(pruned.layer, inst.input));
    CHECK(reference_conv2d(pruned.layer, inst.input) == r.output);
    const auto b = run_baseline_layer(inst.layer, inst.input, HardwareConfig{});
    CHECK(b.output == oracle::conv_im2col(inst.layer, inst.input));
  }
}

TEST_CASE("all-zero input skips every tile") {
  Rng rng(9);
  auto inst = random_instance(rng);
  std::fill(inst.input.data.begin(), inst.input.data.end(), std::int16_t{0});
  const auto pruned = prune_layer(inst.layer, inst.budget, inst.metric, inst.include_zero);
  const auto m = map_layer(pruned.layer, pruned.assignment, HardwareConfig{});
  const auto r = run_layer(pruned.layer, pruned.assignment, m.placement, m.stream, inst.input, HardwareConfig{});
  CHECK(r.stats.adc_conversions == 0);
  CHECK(r.stats.ou_activations == 0);
  CHECK(r.stats.cycles == 0);
  CHECK(std::all_of(r.output.data.begin(), r.output.data.end(), [](std::int64_t v) { return v == 0; }));
  const auto slow = run_layer(pruned.layer, pruned.assignment, m.placement, m.stream, inst.input, HardwareConfig{},
                              {true, false});
  CHECK(slow.stats.cycles == slow.stats.skipped_ou_activations);
}

TEST_CASE("50% sparse activations produce skips") {
  Rng rng(1);
  const auto l = example16_layer();
  const auto fm = synthesize_feature_map(1, 16, 16, 0.5, rng);
  const auto a = assignment_from_supports(l);
  const auto m = map_layer(l, a, HardwareConfig{});
  const auto r = run_layer(l, a, m.placement, m.stream, fm, HardwareConfig{});
  CHECK(r.stats.skipped_ou_activations > 0);
}

TEST_CASE("statistics invariants") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng, 16, 10);
    const auto pruned = prune_layer(inst.layer, inst.budget, inst.metric, inst.include_zero);
    HardwareConfig hw;
    const auto m = map_layer(pruned.layer, pruned.assignment, hw);
    const auto tiles = tile_blocks(m.placement, hw);
    const auto off = run_layer(pruned.layer, pruned.assignment, m.placement, m.stream, inst.input, hw, {false, true});
    const auto positions = static_cast<std::uint64_t>(off.output.height) * static_cast<std::uint64_t>(off.output.width);
    CHECK(off.stats.ou_activations == tiles.size() * positions);
    std::uint64_t adc = 0, dac = 0;
    for (const auto& t : tiles) {
      adc += static_cast<std::uint64_t>(t.cols);
      dac += static_cast<std::uint64_t>(t.rows);
    }
    CHECK(off.stats.adc_conversions == adc * positions);
    CHECK(off.stats.dac_conversions == dac * positions);
    CHECK(off.stats.cycles == off.stats.ou_activations);

    const auto on = run_layer(pruned.layer, pruned.assignment, m.placement, m.stream, inst.input, hw);
    CHECK(on.output == off.output);
    CHECK(on.stats.ou_activations + on.stats.skipped_ou_activations == off.stats.ou_activations);
    CHECK(on.stats.cycles == on.stats.ou_activations);

    const auto base = run_baseline_layer(inst.layer, inst.input, hw);
    CHECK(base.stats.skipped_ou_activations == 0);
    CHECK(base.stats.ou_activations == baseline_tiles_per_position(baseline_map(inst.layer, hw), hw) * positions);
  }
}

TEST_CASE("baseline tiles per position") {
  HardwareConfig hw;
  CHECK(baseline_tiles_per_position(baseline_map(example16_layer(), hw), hw) == 2);
  LayerWeights unit;
  unit.name = "u";
  unit.out_channels = unit.in_channels = unit.kernel_h = unit.kernel_w = 1;
  unit.weights = {3};
  CHECK(baseline_tiles_per_position(baseline_map(unit, hw), hw) == 1);
}

TEST_CASE("inconsistent artifacts are rejected") {
  const auto l = example16_layer();
  const auto a = assignment_from_supports(l);
  const auto m = map_layer(l, a, HardwareConfig{});
  Rng rng(2);
  const auto fm = synthesize_feature_map(1, 6, 6, 0.2, rng);

  const auto wrong_channels = synthesize_feature_map(2, 6, 6, 0.2, rng);
  CHECK_THROWS_AS(run_layer(l, a, m.placement, m.stream, wrong_channels, HardwareConfig{}), Error);

  auto recs = m.stream.decode();
  std::swap(recs[0], recs[1]);
  const auto swapped = IndexStream::encode(m.stream.header(), recs);
  CHECK_THROWS_WITH_AS(run_layer(l, a, m.placement, swapped, fm, HardwareConfig{}), doctest::Contains("inconsistency"),
                       Error);

  auto overlap = m.placement;
  overlap.blocks[1].col = 0;
  CHECK_THROWS_WITH_AS(run_layer(l, a, overlap, m.stream, fm, HardwareConfig{}), doctest::Contains("overlapping"), Error);

  HardwareConfig other;
  other.crossbar_cols = 256;
  CHECK_THROWS_AS(run_layer(l, a, m.placement, m.stream, fm, other), Error);
}

}  // TEST_SUITE
