#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patmap/energy.hpp"
#include "patmap/ou_sim.hpp"

namespace patmap {

inline constexpr int kReportSchemaVersion = 1;

struct CandidateUsage {
  std::string mask;
  int size = 0;
  std::uint64_t kernels = 0;
  friend bool operator==(const CandidateUsage&, const CandidateUsage&) = default;
};

struct LayerReport {
  int index = 0;
  std::string name;
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int input_h = 0;
  int input_w = 0;
  int budget = 0;

  double sparsity_before = 0.0;  // after magnitude pruning, before projection
  double sparsity_after = 0.0;
  std::uint64_t total_weights = 0;
  std::uint64_t nonzero_weights = 0;  // after projection
  std::uint64_t all_zero_kernels = 0;
  int pattern_count = 0;  // candidate list length
  std::vector<CandidateUsage> candidates;
  double all_zero_kernel_ratio = 0.0;

  std::int64_t baseline_cells = 0;
  int baseline_crossbars = 0;
  std::int64_t payload_cells = 0;
  std::int64_t waste_cells = 0;
  std::int64_t pattern_cells = 0;  // (payload + waste) * cells_per_weight
  int pattern_crossbars = 0;
  double area_efficiency = 0.0;

  bool simulated = false;
  CycleStats pattern_stats;
  CycleStats baseline_stats;
  EnergyStats pattern_energy;
  EnergyStats baseline_energy;
  double energy_efficiency = 0.0;
  double speedup = 0.0;

  int index_bits = 0;
  std::uint64_t index_overhead_bits = 0;
  std::uint64_t index_overhead_bytes = 0;
  std::uint64_t mapped_model_bytes = 0;
  double index_overhead_fraction = 0.0;
};

struct AggregateReport {
  std::uint64_t total_weights = 0;
  std::uint64_t nonzero_weights = 0;
  double sparsity_after = 0.0;
  std::uint64_t total_kernels = 0;
  std::uint64_t all_zero_kernels = 0;
  double all_zero_kernel_ratio = 0.0;
  std::int64_t baseline_cells = 0;
  int baseline_crossbars = 0;
  std::int64_t payload_cells = 0;
  std::int64_t waste_cells = 0;
  std::int64_t pattern_cells = 0;
  int pattern_crossbars = 0;
  double area_efficiency = 0.0;
  double area_efficiency_bound = 0.0;  // 1 / (1 - sparsity_after)
  CycleStats pattern_stats;
  CycleStats baseline_stats;
  EnergyStats pattern_energy;
  EnergyStats baseline_energy;
  double energy_efficiency = 0.0;
  double speedup = 0.0;
  std::uint64_t index_overhead_bits = 0;
  std::uint64_t index_overhead_bytes = 0;
  std::uint64_t mapped_model_bytes = 0;
  double index_overhead_fraction = 0.0;
};

struct ReferenceLine {
  std::string metric;
  double low = 0.0;
  double high = 0.0;
  std::string note;
};

struct Report {
  int schema_version = kReportSchemaVersion;
  std::string source;   // manifest path or synthetic workload name
  std::string settings; // flattened run settings, informational
  std::vector<LayerReport> layers;
  AggregateReport aggregate;
  std::vector<ReferenceLine> reference_lines;
};

/// Fills the derived fields of `aggregate` from the per-layer entries.
AggregateReport aggregate_layers(const std::vector<LayerReport>& layers, int weight_bits);

/// Full-scale VGG16 figures the desk-scale numbers are read against.
std::vector<ReferenceLine> default_reference_lines();

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& text);
std::string report_to_csv(const Report& report);
/// Bar chart of per-layer normalized energy and area (pattern / baseline).
std::string report_to_svg(const Report& report);

}  // namespace patmap
