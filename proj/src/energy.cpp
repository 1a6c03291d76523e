#include "patmap/energy.hpp"

#include <limits>

namespace patmap {

EnergyStats energy_of(const CycleStats& stats, const HardwareConfig& hw, OuEnergyMode mode) {
  hw.validate();
  EnergyStats e;
  if (mode == OuEnergyMode::flat) {
    e.e_crossbar_pj = static_cast<double>(stats.ou_activations) * hw.e_ou_pj;
  } else {
    const double full = static_cast<double>(hw.ou_rows) * static_cast<double>(hw.ou_cols);
    e.e_crossbar_pj = static_cast<double>(stats.activated_cells) / full * hw.e_ou_pj;
  }
  e.e_adc_pj_total = static_cast<double>(stats.adc_conversions) * hw.e_adc_pj;
  e.e_dac_pj_total = static_cast<double>(stats.dac_conversions) * hw.e_dac_pj;
  e.e_total_pj = e.e_crossbar_pj + e.e_adc_pj_total + e.e_dac_pj_total;
  return e;
}

EnergyComparison compare(const EnergyStats& pattern, const EnergyStats& baseline) {
  if (!(baseline.e_total_pj > 0.0)) throw Error("compare: baseline energy is zero");
  EnergyComparison c;
  c.normalized = pattern.e_total_pj / baseline.e_total_pj;
  c.efficiency = pattern.e_total_pj > 0.0 ? baseline.e_total_pj / pattern.e_total_pj
                                          : std::numeric_limits<double>::infinity();
  return c;
}

}  // namespace patmap
