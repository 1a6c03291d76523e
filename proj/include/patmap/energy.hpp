#pragma once

#include "patmap/core.hpp"
#include "patmap/ou_sim.hpp"

namespace patmap {

enum class OuEnergyMode {
  flat,          // e_ou_pj per activation regardless of span
  scaled_cells,  // e_ou_pj * activated cells / (ou_rows * ou_cols)
};

/// Crossbar, ADC and DAC energy in pJ. Only those components are modeled.
struct EnergyStats {
  double e_crossbar_pj = 0.0;
  double e_adc_pj_total = 0.0;
  double e_dac_pj_total = 0.0;
  double e_total_pj = 0.0;
  double normalized_vs_baseline = 1.0;

  double adc_share() const { return e_total_pj > 0.0 ? e_adc_pj_total / e_total_pj : 0.0; }
};

EnergyStats energy_of(const CycleStats& stats, const HardwareConfig& hw, OuEnergyMode mode = OuEnergyMode::flat);

struct EnergyComparison {
  double normalized = 1.0;  // pattern / baseline
  double efficiency = 1.0;  // baseline / pattern
};

EnergyComparison compare(const EnergyStats& pattern, const EnergyStats& baseline);

}  // namespace patmap
