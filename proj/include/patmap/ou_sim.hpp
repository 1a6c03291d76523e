#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patmap/core.hpp"
#include "patmap/mapper.hpp"
#include "patmap/pruner.hpp"

namespace patmap {

struct SimOptions {
  /// Skip an OU activation when its input slice is all zero.
  bool skip_zero_inputs = true;
  /// Skipped activations cost no cycle (otherwise they still occupy one).
  bool skip_saves_cycles = true;
};

/// Defaults for the dense baseline: no zero-input detection.
inline SimOptions baseline_sim_options() { return {false, true}; }

struct CycleStats {
  std::uint64_t ou_activations = 0;
  std::uint64_t skipped_ou_activations = 0;
  std::uint64_t adc_conversions = 0;  // one per activated bitline
  std::uint64_t dac_conversions = 0;  // one per activated wordline
  std::uint64_t activated_cells = 0;  // sum of rows*cols over executed tiles
  std::uint64_t cycles = 0;

  CycleStats& operator+=(const CycleStats& o);
  friend bool operator==(const CycleStats&, const CycleStats&) = default;
};

/// One OU-sized sub-rectangle of a placed block fragment.
struct OUTile {
  int fragment = 0;  // index into Placement::blocks
  int crossbar = 0;
  int row = 0;  // offset inside the fragment
  int col = 0;
  int rows = 0;
  int cols = 0;
  friend bool operator==(const OUTile&, const OUTile&) = default;
};

/// Row-major OU tiling of every placed fragment; tiles never cross a block edge.
std::vector<OUTile> tile_blocks(const Placement& placement, const HardwareConfig& hw);

/// OU tiles the dense mapping activates per output position.
std::uint64_t baseline_tiles_per_position(const DenseMapping& mapping, const HardwareConfig& hw);

/// Top-left corner of a convolution window in padded input coordinates.
struct Window {
  int row = 0;
  int col = 0;
};

/// Activations under the pattern's set positions, in row-major kernel order.
std::vector<std::int16_t> select_inputs(const FeatureMap& input, Window window, int in_channel, const Pattern& pattern,
                                        int padding);

bool zero_detect(std::span<const std::int16_t> values);

struct SimResult {
  OutputMap output;
  CycleStats stats;
};

/// Executes a pattern-mapped layer tile by tile. `layer` must hold the projected weights.
SimResult run_layer(const LayerWeights& layer, const PatternAssignment& assignment, const Placement& placement,
                    const IndexStream& stream, const FeatureMap& input, const HardwareConfig& hw,
                    const SimOptions& options = {});

/// Executes the dense mapping of `layer` tile by tile.
SimResult run_baseline_layer(const LayerWeights& layer, const FeatureMap& input, const HardwareConfig& hw,
                             const SimOptions& options = baseline_sim_options());

}  // namespace patmap
