#include "patmap/mapper.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace patmap {

std::vector<PatternBlock> reorder_and_compress(const LayerWeights& layer, const PatternAssignment& assignment,
                                               int in_channel) {
  if (in_channel < 0 || in_channel >= layer.in_channels) throw Error("reorder_and_compress: input channel out of range");
  if (assignment.in_channels != layer.in_channels || assignment.kernel_pattern.size() != layer.kernel_count())
    throw Error("reorder_and_compress: assignment does not cover layer '" + layer.name + "'");

  std::map<int, PatternBlock> by_pattern;
  for (int o = 0; o < layer.out_channels; ++o) {
    const int id = assignment.pattern_of(o, in_channel);
    if (id < 0 || static_cast<std::size_t>(id) >= assignment.candidates.size())
      throw Error("reorder_and_compress: pattern id out of range");
    const Pattern& mask = assignment.candidates[static_cast<std::size_t>(id)];
    const auto kernel = layer.kernel(o, in_channel);
    for (std::size_t p = 0; p < kernel.size(); ++p)
      if (kernel[p] != 0 && !mask.test(static_cast<int>(p)))
        throw Error("assignment/kernel support mismatch at kernel (" + std::to_string(o) + ", " +
                    std::to_string(in_channel) + ")");
    if (mask.empty()) continue;
    auto [it, fresh] = by_pattern.try_emplace(id);
    if (fresh) {
      it->second.in_channel = in_channel;
      it->second.pattern_id = id;
      it->second.pattern = mask;
    }
    it->second.kernel_order.push_back(o);
  }

  std::vector<PatternBlock> blocks;
  blocks.reserve(by_pattern.size());
  for (auto& [id, block] : by_pattern) blocks.push_back(std::move(block));
  return blocks;
}

void sort_blocks(std::vector<PatternBlock>& blocks) {
  std::stable_sort(blocks.begin(), blocks.end(), [](const PatternBlock& a, const PatternBlock& b) {
    if (a.height() != b.height()) return a.height() > b.height();
    if (a.width() != b.width()) return a.width() > b.width();
    if (a.pattern != b.pattern) return a.pattern < b.pattern;
    return a.pattern_id < b.pattern_id;
  });
}

StripLayout pack_in_order(std::vector<PatternBlock> blocks) {
  StripLayout strip;
  for (const auto& b : blocks) {
    if (b.height() < 1 || b.width() < 1) throw Error("pack_blocks: empty pattern block");
    strip.height = std::max(strip.height, b.height());
  }

  int group_start = 0, group_width = 0, group_fill = 0;
  std::int64_t group_area = 0;
  bool open = false;
  const auto close_group = [&] {
    strip.wasted_cells += static_cast<std::int64_t>(group_width) * strip.height - group_area;
    strip.width = group_start + group_width;
  };

  strip.origins.reserve(blocks.size());
  for (const auto& b : blocks) {
    if (open && strip.height - group_fill >= b.height()) {
      strip.origins.push_back({group_fill, group_start});
      group_fill += b.height();
      group_width = std::max(group_width, b.width());
    } else {
      if (open) close_group();
      group_start = strip.width;
      group_width = b.width();
      group_fill = b.height();
      group_area = 0;
      open = true;
      strip.origins.push_back({0, group_start});
    }
    group_area += b.area();
    strip.payload_cells += b.area();
  }
  if (open) close_group();
  strip.blocks = std::move(blocks);
  return strip;
}

StripLayout pack_blocks(std::vector<PatternBlock> blocks) {
  sort_blocks(blocks);
  return pack_in_order(std::move(blocks));
}

Placement assemble_placement(int out_channels, int in_channels, int kernel_h, int kernel_w,
                             const std::vector<StripLayout>& strips, const HardwareConfig& hw) {
  hw.validate();
  if (strips.size() != static_cast<std::size_t>(in_channels)) throw Error("assemble_placement: one strip per input channel");

  Placement pl;
  pl.out_channels = out_channels;
  pl.in_channels = in_channels;
  pl.kernel_h = kernel_h;
  pl.kernel_w = kernel_w;
  pl.crossbar_rows = hw.crossbar_rows;
  pl.crossbar_cols = hw.crossbar_cols;

  int widest = 0;
  for (const auto& s : strips) widest = std::max(widest, s.width);
  pl.column_bands = std::max(1, (widest + hw.crossbar_cols - 1) / hw.crossbar_cols);

  int band = 0, band_row = 0, logical = 0;
  for (int ch = 0; ch < in_channels; ++ch) {
    const auto& s = strips[static_cast<std::size_t>(ch)];
    if (s.height > hw.crossbar_rows)
      throw Error("map_layer: pattern height " + std::to_string(s.height) + " exceeds crossbar rows");
    // A strip never straddles a crossbar row boundary.
    if (band_row + s.height > hw.crossbar_rows) {
      ++band;
      band_row = 0;
    }
    pl.strips.push_back({ch, band, band_row, s.height, s.width, s.wasted_cells});

    for (std::size_t k = 0; k < s.blocks.size(); ++k, ++logical) {
      const auto& b = s.blocks[k];
      const auto& origin = s.origins[k];
      int col = origin.col;
      for (int offset = 0; offset < b.width();) {
        const int in_band = col % hw.crossbar_cols;
        const int take = std::min(b.width() - offset, hw.crossbar_cols - in_band);
        PlacedBlock frag;
        frag.block = logical;
        frag.column_offset = offset;
        frag.in_channel = ch;
        frag.pattern = b.pattern;
        frag.kernel_order.assign(b.kernel_order.begin() + offset, b.kernel_order.begin() + offset + take);
        frag.crossbar = band * pl.column_bands + col / hw.crossbar_cols;
        frag.row = band_row + origin.row;
        frag.col = in_band;
        pl.blocks.push_back(std::move(frag));
        offset += take;
        col += take;
      }
    }
    pl.payload_cells += s.payload_cells;
    pl.wasted_cells += s.wasted_cells;
    band_row += s.height;
  }
  pl.total_cells_used = pl.payload_cells + pl.wasted_cells;

  std::set<int> used;
  for (const auto& b : pl.blocks) used.insert(b.crossbar);
  pl.crossbars_used = static_cast<int>(used.size());
  return pl;
}

MappedLayer map_layer(const LayerWeights& layer, const PatternAssignment& assignment, const HardwareConfig& hw) {
  layer.validate(hw.weight_bits);
  hw.validate();
  check_assignment(layer, assignment);

  std::vector<StripLayout> strips;
  strips.reserve(static_cast<std::size_t>(layer.in_channels));
  for (int i = 0; i < layer.in_channels; ++i) strips.push_back(pack_blocks(reorder_and_compress(layer, assignment, i)));

  MappedLayer out;
  out.placement = assemble_placement(layer.out_channels, layer.in_channels, layer.kernel_h, layer.kernel_w, strips, hw);
  out.stream = emit_index_stream(out.placement, hw.resolve_index_bits(layer.out_channels));
  return out;
}

DenseMapping baseline_map(const LayerWeights& layer, const HardwareConfig& hw) {
  layer.validate(hw.weight_bits);
  hw.validate();
  DenseMapping m;
  m.rows = static_cast<std::int64_t>(layer.kernel_area()) * layer.in_channels;
  m.cols = layer.out_channels;
  m.row_bands = static_cast<int>((m.rows + hw.crossbar_rows - 1) / hw.crossbar_rows);
  m.col_bands = static_cast<int>((m.cols + hw.crossbar_cols - 1) / hw.crossbar_cols);
  m.crossbars_used = m.row_bands * m.col_bands;
  m.cells = m.rows * m.cols;
  return m;
}

IndexStream emit_index_stream(const Placement& placement, int index_bits) {
  IndexHeader h{placement.out_channels, placement.in_channels, placement.kernel_h, placement.kernel_w, index_bits};
  std::vector<IndexRecord> records;
  int channel = 0;
  for (std::size_t k = 0; k < placement.blocks.size();) {
    const auto& first = placement.blocks[k];
    while (channel < first.in_channel) {
      records.push_back({Pattern::zero(h.kernel_h, h.kernel_w), {}});
      ++channel;
    }
    IndexRecord rec{first.pattern, {}};
    for (; k < placement.blocks.size() && placement.blocks[k].block == first.block; ++k)
      rec.out_channels.insert(rec.out_channels.end(), placement.blocks[k].kernel_order.begin(),
                              placement.blocks[k].kernel_order.end());
    records.push_back(std::move(rec));
  }
  for (; channel < placement.in_channels - 1; ++channel) records.push_back({Pattern::zero(h.kernel_h, h.kernel_w), {}});
  return IndexStream::encode(h, records);
}

Placement reconstruct_placement(const IndexStream& stream, const HardwareConfig& hw) {
  const IndexHeader h = stream.header();
  const auto records = stream.decode();

  std::vector<std::vector<PatternBlock>> per_channel(static_cast<std::size_t>(h.in_channels));
  std::vector<std::set<int>> seen(static_cast<std::size_t>(h.in_channels));
  int channel = 0;
  for (const auto& rec : records) {
    if (rec.is_separator()) {
      if (++channel >= h.in_channels) throw Error("index stream: more channel separators than input channels");
      continue;
    }
    if (rec.out_channels.empty()) throw Error("index stream: empty pattern record");
    PatternBlock b;
    b.in_channel = channel;
    b.pattern_id = static_cast<int>(per_channel[static_cast<std::size_t>(channel)].size());
    b.pattern = rec.pattern;
    b.kernel_order = rec.out_channels;
    for (int o : b.kernel_order)
      if (!seen[static_cast<std::size_t>(channel)].insert(o).second)
        throw Error("index stream: output channel " + std::to_string(o) + " appears twice in input channel " +
                    std::to_string(channel));
    per_channel[static_cast<std::size_t>(channel)].push_back(std::move(b));
  }

  std::vector<StripLayout> strips;
  strips.reserve(per_channel.size());
  for (auto& blocks : per_channel) strips.push_back(pack_in_order(std::move(blocks)));
  return assemble_placement(h.out_channels, h.in_channels, h.kernel_h, h.kernel_w, strips, hw);
}

std::int64_t area_cells(const Placement& placement, const HardwareConfig& hw) {
  return placement.total_cells_used * hw.cells_per_weight;
}

int area_crossbars(const Placement& placement, const HardwareConfig& hw) {
  return placement.crossbars_used * hw.cells_per_weight;
}

std::int64_t area_cells(const DenseMapping& mapping, const HardwareConfig& hw) { return mapping.cells * hw.cells_per_weight; }

int area_crossbars(const DenseMapping& mapping, const HardwareConfig& hw) {
  return mapping.crossbars_used * hw.cells_per_weight;
}

}  // namespace patmap
