#pragma once

#include <cstdint>
#include <vector>

#include "patmap/core.hpp"
#include "patmap/index_stream.hpp"
#include "patmap/pruner.hpp"

namespace patmap {

/// All kernels of one input channel that share one non-zero pattern, compressed
/// to pattern.size() rows by kernel_order.size() columns.
struct PatternBlock {
  int in_channel = 0;
  int pattern_id = 0;
  Pattern pattern;
  std::vector<int> kernel_order;  // output channels, one per column

  int height() const { return pattern.size(); }
  int width() const { return static_cast<int>(kernel_order.size()); }
  std::int64_t area() const { return static_cast<std::int64_t>(height()) * width(); }
  friend bool operator==(const PatternBlock&, const PatternBlock&) = default;
};

struct BlockOrigin {
  int row = 0;
  int col = 0;
  friend bool operator==(const BlockOrigin&, const BlockOrigin&) = default;
};

/// Packed layout of one input channel's blocks, origins relative to the strip.
struct StripLayout {
  std::vector<PatternBlock> blocks;  // packing order
  std::vector<BlockOrigin> origins;
  int height = 0;
  int width = 0;
  std::int64_t payload_cells = 0;
  std::int64_t wasted_cells = 0;
};

/// One placed rectangle. A logical block crossing a crossbar column boundary
/// appears as several fragments sharing `block`.
struct PlacedBlock {
  int block = 0;          // logical block index in placement order
  int column_offset = 0;  // first column of this fragment inside the logical block
  int in_channel = 0;
  Pattern pattern;
  std::vector<int> kernel_order;
  int crossbar = 0;
  int row = 0;
  int col = 0;

  int height() const { return pattern.size(); }
  int width() const { return static_cast<int>(kernel_order.size()); }
  friend bool operator==(const PlacedBlock&, const PlacedBlock&) = default;
};

struct ChannelStrip {
  int in_channel = 0;
  int band = 0;  // crossbar row band
  int row = 0;   // row offset inside the band
  int height = 0;
  int width = 0;
  std::int64_t wasted_cells = 0;
  friend bool operator==(const ChannelStrip&, const ChannelStrip&) = default;
};

struct Placement {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int crossbar_rows = 0;
  int crossbar_cols = 0;
  int column_bands = 0;
  std::vector<PlacedBlock> blocks;
  std::vector<ChannelStrip> strips;
  std::int64_t payload_cells = 0;
  std::int64_t wasted_cells = 0;
  std::int64_t total_cells_used = 0;  // payload + waste
  int crossbars_used = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct MappedLayer {
  Placement placement;
  IndexStream stream;
};

/// Dense (naive) mapping: every filter is one column of Kh*Kw*I cells.
struct DenseMapping {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  int row_bands = 0;
  int col_bands = 0;
  int crossbars_used = 0;
  std::int64_t cells = 0;  // rows * cols
};

/// Gathers same-pattern kernels of one input channel; all-zero kernels are dropped.
std::vector<PatternBlock> reorder_and_compress(const LayerWeights& layer, const PatternAssignment& assignment,
                                               int in_channel);

/// Height desc, width desc, then mask ascending.
void sort_blocks(std::vector<PatternBlock>& blocks);

/// Column-group packing of blocks in the given order (no sorting).
StripLayout pack_in_order(std::vector<PatternBlock> blocks);

/// sort_blocks() followed by pack_in_order().
StripLayout pack_blocks(std::vector<PatternBlock> blocks);

/// Stacks per-channel strips (index = input channel) into crossbars.
Placement assemble_placement(int out_channels, int in_channels, int kernel_h, int kernel_w,
                             const std::vector<StripLayout>& strips, const HardwareConfig& hw);

MappedLayer map_layer(const LayerWeights& layer, const PatternAssignment& assignment, const HardwareConfig& hw);

DenseMapping baseline_map(const LayerWeights& layer, const HardwareConfig& hw);

IndexStream emit_index_stream(const Placement& placement, int index_bits);

/// Rebuilds the placement from record order, pattern shapes and kernel counts alone.
Placement reconstruct_placement(const IndexStream& stream, const HardwareConfig& hw);

/// Cells charged for area: (payload + waste) * cells_per_weight.
std::int64_t area_cells(const Placement& placement, const HardwareConfig& hw);
int area_crossbars(const Placement& placement, const HardwareConfig& hw);
std::int64_t area_cells(const DenseMapping& mapping, const HardwareConfig& hw);
int area_crossbars(const DenseMapping& mapping, const HardwareConfig& hw);

}  // namespace patmap
