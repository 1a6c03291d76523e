#include <doctest.h>

#include <cmath>

#include "patmap/energy.hpp"

using namespace patmap;

TEST_SUITE("energy") {

TEST_CASE("one full 9x8 OU activation") {
  CycleStats s;
  s.ou_activations = 1;
  s.adc_conversions = 8;
  s.dac_conversions = 9;
  s.activated_cells = 72;
  const auto e = energy_of(s, HardwareConfig{});
  CHECK(e.e_crossbar_pj == doctest::Approx(4.8));
  CHECK(e.e_adc_pj_total == doctest::Approx(13.36));
  CHECK(e.e_dac_pj_total == doctest::Approx(0.1638));
  CHECK(e.e_total_pj == doctest::Approx(18.3238).epsilon(1e-12));
  CHECK(e.e_total_pj == e.e_crossbar_pj + e.e_adc_pj_total + e.e_dac_pj_total);
  CHECK(e.adc_share() > 0.5);
  CHECK(e.adc_share() == doctest::Approx(13.36 / 18.3238));
  // A full OU costs the same in both modes.
  CHECK(energy_of(s, HardwareConfig{}, OuEnergyMode::scaled_cells).e_total_pj == doctest::Approx(18.3238));
}

TEST_CASE("zero activity costs nothing") {
  const auto e = energy_of(CycleStats{}, HardwareConfig{});
  CHECK(e.e_total_pj == 0.0);
  CHECK(e.adc_share() == 0.0);
  CycleStats skipped;
  skipped.skipped_ou_activations = 40;
  CHECK(energy_of(skipped, HardwareConfig{}).e_total_pj == 0.0);
}

TEST_CASE("partial tiles in scaled mode") {
  CycleStats s;
  s.ou_activations = 1;
  s.adc_conversions = 4;
  s.dac_conversions = 3;
  s.activated_cells = 12;
  CHECK(energy_of(s, HardwareConfig{}).e_crossbar_pj == doctest::Approx(4.8));
  CHECK(energy_of(s, HardwareConfig{}, OuEnergyMode::scaled_cells).e_crossbar_pj == doctest::Approx(4.8 * 12 / 72));
}

TEST_CASE("linearity") {
  CycleStats s{7, 3, 41, 55, 300, 7};
  CycleStats s3 = s;
  s3 += s;
  s3 += s;
  const auto a = energy_of(s, HardwareConfig{});
  const auto b = energy_of(s3, HardwareConfig{});
  CHECK(b.e_crossbar_pj == doctest::Approx(3 * a.e_crossbar_pj));
  CHECK(b.e_adc_pj_total == doctest::Approx(3 * a.e_adc_pj_total));
  CHECK(b.e_dac_pj_total == doctest::Approx(3 * a.e_dac_pj_total));
}

TEST_CASE("comparison") {
  CycleStats s{10, 0, 80, 90, 720, 10};
  const auto e = energy_of(s, HardwareConfig{});
  const auto same = compare(e, e);
  CHECK(same.normalized == 1.0);
  CHECK(same.efficiency == 1.0);

  CycleStats half{5, 0, 40, 45, 360, 5};
  const auto h = compare(energy_of(half, HardwareConfig{}), e);
  CHECK(h.normalized == doctest::Approx(0.5));
  CHECK(h.efficiency == doctest::Approx(2.0));

  CHECK_THROWS_AS(compare(e, EnergyStats{}), Error);
  CHECK(std::isinf(compare(EnergyStats{}, e).efficiency));
}

TEST_CASE("energy ratios do not depend on cells per weight") {
  CycleStats a{10, 0, 80, 90, 720, 10};
  CycleStats b{4, 6, 20, 30, 100, 4};
  HardwareConfig one, four;
  four.cells_per_weight = 4;
  const double r1 = compare(energy_of(b, one), energy_of(a, one)).normalized;
  const double r4 = compare(energy_of(b, four), energy_of(a, four)).normalized;
  CHECK(r1 == r4);
}

}  // TEST_SUITE
