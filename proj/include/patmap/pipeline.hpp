#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "patmap/core.hpp"
#include "patmap/energy.hpp"
#include "patmap/ou_sim.hpp"
#include "patmap/pruner.hpp"
#include "patmap/report.hpp"

namespace patmap {

struct RunConfig {
  std::string manifest;   // weight manifest; empty selects `synthetic`
  std::string synthetic = "vgg16";  // "vgg16" or "example16"
  std::string inputs;     // optional feature-map manifest, one map per layer

  std::vector<int> budgets;  // per layer; a single value applies to all layers
  int default_budget = 8;
  std::optional<double> sparsity;  // magnitude-prune target before projection
  DistanceMetric metric = DistanceMetric::hamming;
  bool include_zero = true;
  bool pre_pruned = false;

  HardwareConfig hw;
  SimOptions pattern_sim;
  SimOptions baseline_sim = baseline_sim_options();
  OuEnergyMode energy_mode = OuEnergyMode::flat;
  bool simulate = true;

  std::uint64_t seed = 1;
  int input_size = 32;
  double input_zero_fraction = 0.5;
  int width_divisor = 1;
  int threads = 0;  // 0: hardware concurrency
};

/// Sparsity used for the synthetic VGG16 stack when none is given.
inline constexpr double kSyntheticSparsity = 0.8595;

/// Prune, map and simulate every layer; the result is deterministic in `config`.
Report run_pipeline(const RunConfig& config);

/// One layer through the same path run_pipeline() uses.
LayerReport evaluate_layer(int index, const LayerWeights& layer, const FeatureMap& input, int budget,
                           const RunConfig& config);

struct VerifyResult {
  bool ok = true;
  int instances = 0;
  std::string failed_check;
  std::string counterexample;  // JSON
};

/// Functional equivalence, index roundtrip, payload conservation and the
/// index length formula over `count` seeded random layers. With
/// `swap_records` the emitted stream has two records exchanged before
/// reconstruction.
VerifyResult run_verify(int count, std::uint64_t seed, bool swap_records = false);

}  // namespace patmap
