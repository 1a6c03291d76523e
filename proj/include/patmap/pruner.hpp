#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "patmap/core.hpp"

namespace patmap {

struct PatternCount {
  Pattern pattern;
  std::uint64_t count = 0;
};

/// Distribution of kernel supports over all O*I kernels of a layer.
/// Counts are exact; probability() divides by the kernel total.
struct PatternHistogram {
  std::vector<PatternCount> entries;  // ordered by mask
  std::uint64_t total = 0;

  double probability(std::size_t entry) const {
    return static_cast<double>(entries[entry].count) / static_cast<double>(total);
  }
};

/// Per-kernel pattern ids (index o*I + i) into a per-layer candidate list.
struct PatternAssignment {
  std::vector<Pattern> candidates;
  std::vector<int> kernel_pattern;
  int in_channels = 0;

  int pattern_of(int o, int i) const { return kernel_pattern[static_cast<std::size_t>(o) * static_cast<std::size_t>(in_channels) + static_cast<std::size_t>(i)]; }
  const Pattern& pattern(int o, int i) const { return candidates[static_cast<std::size_t>(pattern_of(o, i))]; }
};

enum class DistanceMetric { hamming, cosine };

DistanceMetric parse_metric(const std::string& name);
std::string to_string(DistanceMetric metric);

/// Zeroes the smallest-magnitude weights until the zero fraction reaches the target.
/// Ties go to the earliest (out_channel, in_channel, row, col) position.
LayerWeights magnitude_prune(const LayerWeights& layer, double target_sparsity);

PatternHistogram extract_histogram(const LayerWeights& layer);

/// Highest-count patterns first; ties prefer larger patterns, then the smaller mask.
/// With include_zero the all-zero pattern is appended when not already chosen.
std::vector<Pattern> select_candidates(const PatternHistogram& hist, int budget, bool include_zero);

double pattern_distance(std::span<const std::int16_t> kernel, const Pattern& candidate, DistanceMetric metric);

struct Projection {
  int pattern_id = 0;
  std::vector<std::int16_t> kernel;
};

/// Picks the closest candidate (ties: larger retained L2 norm, then lower index)
/// and returns the kernel masked by it.
Projection project_kernel(std::span<const std::int16_t> kernel, std::span<const Pattern> candidates,
                          DistanceMetric metric);

struct PrunedLayer {
  LayerWeights layer;
  PatternAssignment assignment;
};

PrunedLayer prune_layer(const LayerWeights& layer, int budget, DistanceMetric metric, bool include_zero = true);

/// Zeroes every weight of `dense` outside its kernel's assigned mask.
LayerWeights apply_masks(const LayerWeights& dense, const PatternAssignment& assignment);

/// Assignment that uses each kernel's own support, for layers that are already pattern-pruned.
PatternAssignment assignment_from_supports(const LayerWeights& layer);

/// Throws unless every kernel's nonzeros lie inside its assigned mask.
void check_assignment(const LayerWeights& layer, const PatternAssignment& assignment);

}  // namespace patmap
