#include "patmap/ou_sim.hpp"

#include <algorithm>
#include <map>

namespace patmap {

CycleStats& CycleStats::operator+=(const CycleStats& o) {
  ou_activations += o.ou_activations;
  skipped_ou_activations += o.skipped_ou_activations;
  adc_conversions += o.adc_conversions;
  dac_conversions += o.dac_conversions;
  activated_cells += o.activated_cells;
  cycles += o.cycles;
  return *this;
}

std::vector<OUTile> tile_blocks(const Placement& placement, const HardwareConfig& hw) {
  hw.validate();
  std::vector<OUTile> tiles;
  for (std::size_t f = 0; f < placement.blocks.size(); ++f) {
    const auto& b = placement.blocks[f];
    for (int r = 0; r < b.height(); r += hw.ou_rows)
      for (int c = 0; c < b.width(); c += hw.ou_cols)
        tiles.push_back({static_cast<int>(f), b.crossbar, r, c, std::min(hw.ou_rows, b.height() - r),
                         std::min(hw.ou_cols, b.width() - c)});
  }
  return tiles;
}

namespace {

struct DenseTile {
  std::int64_t row = 0;  // in the K*K*I x O matrix
  std::int64_t col = 0;
  int rows = 0;
  int cols = 0;
};

std::vector<DenseTile> dense_tiles(const DenseMapping& m, const HardwareConfig& hw) {
  std::vector<DenseTile> tiles;
  for (int rb = 0; rb < m.row_bands; ++rb) {
    const std::int64_t r0 = static_cast<std::int64_t>(rb) * hw.crossbar_rows;
    const std::int64_t r1 = std::min<std::int64_t>(m.rows, r0 + hw.crossbar_rows);
    for (int cb = 0; cb < m.col_bands; ++cb) {
      const std::int64_t c0 = static_cast<std::int64_t>(cb) * hw.crossbar_cols;
      const std::int64_t c1 = std::min<std::int64_t>(m.cols, c0 + hw.crossbar_cols);
      for (std::int64_t r = r0; r < r1; r += hw.ou_rows)
        for (std::int64_t c = c0; c < c1; c += hw.ou_cols)
          tiles.push_back({r, c, static_cast<int>(std::min<std::int64_t>(hw.ou_rows, r1 - r)),
                           static_cast<int>(std::min<std::int64_t>(hw.ou_cols, c1 - c))});
    }
  }
  return tiles;
}

void check_window(const FeatureMap& input, Window w, int kernel_h, int kernel_w, int padding) {
  if (w.row < 0 || w.col < 0 || w.row + kernel_h > input.height + 2 * padding || w.col + kernel_w > input.width + 2 * padding)
    throw Error("select_inputs: window (" + std::to_string(w.row) + ", " + std::to_string(w.col) +
                ") outside padded feature map");
}

std::int16_t padded_at(const FeatureMap& input, int c, int y, int x, int padding) {
  y -= padding;
  x -= padding;
  if (y < 0 || x < 0 || y >= input.height || x >= input.width) return 0;
  return input.at(c, y, x);
}

void gather(const FeatureMap& input, Window w, int in_channel, const Pattern& pattern, int padding,
            std::vector<std::int16_t>& out) {
  out.clear();
  for (int p : pattern.positions())
    out.push_back(padded_at(input, in_channel, w.row + p / pattern.kernel_w(), w.col + p % pattern.kernel_w(), padding));
}

void check_input(const LayerWeights& layer, const FeatureMap& input) {
  input.validate();
  if (input.channels != layer.in_channels)
    throw Error("run_layer: input has " + std::to_string(input.channels) + " channels, layer expects " +
                std::to_string(layer.in_channels));
}

OutputMap make_output(const LayerWeights& layer, const FeatureMap& input) {
  OutputMap out;
  out.channels = layer.out_channels;
  out.height = conv_output_extent(input.height, layer.kernel_h, layer.stride, layer.padding);
  out.width = conv_output_extent(input.width, layer.kernel_w, layer.stride, layer.padding);
  out.data.assign(static_cast<std::size_t>(out.channels) * static_cast<std::size_t>(out.height) *
                      static_cast<std::size_t>(out.width),
                  0);
  return out;
}

void count_activation(CycleStats& s, int rows, int cols) {
  ++s.ou_activations;
  s.dac_conversions += static_cast<std::uint64_t>(rows);
  s.adc_conversions += static_cast<std::uint64_t>(cols);
  s.activated_cells += static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
}

void finish_cycles(CycleStats& s, const SimOptions& options) {
  s.cycles = options.skip_saves_cycles ? s.ou_activations : s.ou_activations + s.skipped_ou_activations;
}

/// Crossbar cell storage programmed from a placement.
class CrossbarBank {
 public:
  CrossbarBank(int rows, int cols) : rows_(rows), cols_(cols) {}

  void program(int crossbar, int row, int col, std::int16_t value) {
    if (row < 0 || col < 0 || row >= rows_ || col >= cols_) throw Error("run_layer: block outside crossbar bounds");
    auto& xb = arrays_[crossbar];
    if (xb.cells.empty()) {
      xb.cells.assign(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_), 0);
      xb.used.assign(xb.cells.size(), 0);
    }
    const auto k = index(row, col);
    if (xb.used[k]) throw Error("run_layer: overlapping blocks in crossbar " + std::to_string(crossbar));
    xb.used[k] = 1;
    xb.cells[k] = value;
  }

  const std::int16_t* data(int crossbar) const { return arrays_.at(crossbar).cells.data(); }

 private:
  struct Array {
    std::vector<std::int16_t> cells;
    std::vector<std::uint8_t> used;
  };
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
  }
  int rows_;
  int cols_;
  std::map<int, Array> arrays_;
};

}  // namespace

std::uint64_t baseline_tiles_per_position(const DenseMapping& mapping, const HardwareConfig& hw) {
  return dense_tiles(mapping, hw).size();
}

std::vector<std::int16_t> select_inputs(const FeatureMap& input, Window window, int in_channel, const Pattern& pattern,
                                        int padding) {
  input.validate();
  if (in_channel < 0 || in_channel >= input.channels) throw Error("select_inputs: channel out of range");
  check_window(input, window, pattern.kernel_h(), pattern.kernel_w(), padding);
  std::vector<std::int16_t> out;
  gather(input, window, in_channel, pattern, padding, out);
  return out;
}

bool zero_detect(std::span<const std::int16_t> values) {
  return std::all_of(values.begin(), values.end(), [](std::int16_t v) { return v == 0; });
}

SimResult run_layer(const LayerWeights& layer, const PatternAssignment& assignment, const Placement& placement,
                    const IndexStream& stream, const FeatureMap& input, const HardwareConfig& hw,
                    const SimOptions& options) {
  layer.validate(hw.weight_bits);
  hw.validate();
  check_input(layer, input);
  check_assignment(layer, assignment);
  if (placement.out_channels != layer.out_channels || placement.in_channels != layer.in_channels ||
      placement.kernel_h != layer.kernel_h || placement.kernel_w != layer.kernel_w)
    throw Error("run_layer: placement does not match layer dimensions");
  if (placement.crossbar_rows != hw.crossbar_rows || placement.crossbar_cols != hw.crossbar_cols)
    throw Error("run_layer: placement was built for a different crossbar size");
  const IndexHeader header = stream.header();
  if (header.out_channels != layer.out_channels || header.in_channels != layer.in_channels ||
      header.kernel_h != layer.kernel_h || header.kernel_w != layer.kernel_w)
    throw Error("run_layer: index stream header does not match layer");

  // Output routing comes from the index stream: the record for logical block b
  // lists the output channel of every column.
  std::vector<IndexRecord> records;
  for (auto& rec : stream.decode())
    if (!rec.is_separator()) records.push_back(std::move(rec));
  std::vector<const std::vector<int>*> routes(placement.blocks.size(), nullptr);
  for (std::size_t f = 0; f < placement.blocks.size(); ++f) {
    const auto& frag = placement.blocks[f];
    if (frag.block < 0 || static_cast<std::size_t>(frag.block) >= records.size())
      throw Error("run_layer: stream/placement inconsistency (missing record)");
    const auto& rec = records[static_cast<std::size_t>(frag.block)];
    if (rec.pattern != frag.pattern || frag.column_offset + frag.width() > static_cast<int>(rec.out_channels.size()) ||
        !std::equal(frag.kernel_order.begin(), frag.kernel_order.end(),
                    rec.out_channels.begin() + frag.column_offset))
      throw Error("run_layer: stream/placement inconsistency at block " + std::to_string(frag.block));
    routes[f] = &rec.out_channels;
  }
  if (!placement.blocks.empty() && static_cast<std::size_t>(placement.blocks.back().block) + 1 != records.size())
    throw Error("run_layer: stream/placement inconsistency (extra records)");
  if (placement.blocks.empty() && !records.empty())
    throw Error("run_layer: stream/placement inconsistency (extra records)");

  // Program crossbars with the compressed weights.
  CrossbarBank bank(hw.crossbar_rows, hw.crossbar_cols);
  std::size_t programmed_nonzero = 0;
  for (std::size_t f = 0; f < placement.blocks.size(); ++f) {
    const auto& frag = placement.blocks[f];
    const auto& route = *routes[f];
    const auto& pos = frag.pattern.positions();
    for (int r = 0; r < frag.height(); ++r)
      for (int c = 0; c < frag.width(); ++c) {
        const int o = route[static_cast<std::size_t>(frag.column_offset + c)];
        const auto w = layer.kernel(o, frag.in_channel)[static_cast<std::size_t>(pos[static_cast<std::size_t>(r)])];
        bank.program(frag.crossbar, frag.row + r, frag.col + c, w);
        programmed_nonzero += w != 0;
      }
  }
  if (programmed_nonzero != count_nonzero(layer.weights))
    throw Error("run_layer: placement does not hold every nonzero weight");

  // Top-left cell of every fragment; rows are crossbar_cols apart.
  const auto pitch = static_cast<std::size_t>(hw.crossbar_cols);
  std::vector<const std::int16_t*> origin(placement.blocks.size());
  for (std::size_t f = 0; f < placement.blocks.size(); ++f) {
    const auto& frag = placement.blocks[f];
    origin[f] = bank.data(frag.crossbar) + static_cast<std::size_t>(frag.row) * pitch + static_cast<std::size_t>(frag.col);
  }

  const auto tiles = tile_blocks(placement, hw);
  SimResult result{make_output(layer, input), {}};
  std::vector<std::int16_t> inputs;
  for (int oy = 0; oy < result.output.height; ++oy)
    for (int ox = 0; ox < result.output.width; ++ox) {
      const Window w{oy * layer.stride, ox * layer.stride};
      int gathered_for = -1;
      for (const auto& t : tiles) {
        const auto& frag = placement.blocks[static_cast<std::size_t>(t.fragment)];
        if (gathered_for != t.fragment) {
          gather(input, w, frag.in_channel, frag.pattern, layer.padding, inputs);
          gathered_for = t.fragment;
        }
        const std::span<const std::int16_t> slice(inputs.data() + t.row, static_cast<std::size_t>(t.rows));
        if (options.skip_zero_inputs && zero_detect(slice)) {
          ++result.stats.skipped_ou_activations;
          continue;
        }
        count_activation(result.stats, t.rows, t.cols);
        const auto& route = *routes[static_cast<std::size_t>(t.fragment)];
        const std::int16_t* cells = origin[static_cast<std::size_t>(t.fragment)] +
                                    static_cast<std::size_t>(t.row) * pitch + static_cast<std::size_t>(t.col);
        for (int c = 0; c < t.cols; ++c) {
          std::int64_t acc = 0;
          for (int r = 0; r < t.rows; ++r)
            acc += static_cast<std::int64_t>(slice[static_cast<std::size_t>(r)]) *
                   cells[static_cast<std::size_t>(r) * pitch + static_cast<std::size_t>(c)];
          result.output.at(route[static_cast<std::size_t>(frag.column_offset + t.col + c)], oy, ox) += acc;
        }
      }
    }
  finish_cycles(result.stats, options);
  return result;
}

SimResult run_baseline_layer(const LayerWeights& layer, const FeatureMap& input, const HardwareConfig& hw,
                             const SimOptions& options) {
  const DenseMapping mapping = baseline_map(layer, hw);
  check_input(layer, input);

  // Dense K*K*I x O weight matrix: row (i, p), column o.
  const auto rows = static_cast<std::size_t>(mapping.rows);
  const auto cols = static_cast<std::size_t>(mapping.cols);
  const auto area = static_cast<std::size_t>(layer.kernel_area());
  std::vector<std::int16_t> matrix(rows * cols);
  for (int o = 0; o < layer.out_channels; ++o)
    for (int i = 0; i < layer.in_channels; ++i) {
      const auto k = layer.kernel(o, i);
      for (std::size_t p = 0; p < area; ++p)
        matrix[(static_cast<std::size_t>(i) * area + p) * cols + static_cast<std::size_t>(o)] = k[p];
    }

  const auto tiles = dense_tiles(mapping, hw);
  SimResult result{make_output(layer, input), {}};
  std::vector<std::int16_t> column(rows);
  for (int oy = 0; oy < result.output.height; ++oy)
    for (int ox = 0; ox < result.output.width; ++ox) {
      for (int i = 0; i < layer.in_channels; ++i)
        for (std::size_t p = 0; p < area; ++p)
          column[static_cast<std::size_t>(i) * area + p] =
              padded_at(input, i, oy * layer.stride + static_cast<int>(p) / layer.kernel_w,
                        ox * layer.stride + static_cast<int>(p) % layer.kernel_w, layer.padding);
      for (const auto& t : tiles) {
        const std::span<const std::int16_t> slice(column.data() + t.row, static_cast<std::size_t>(t.rows));
        if (options.skip_zero_inputs && zero_detect(slice)) {
          ++result.stats.skipped_ou_activations;
          continue;
        }
        count_activation(result.stats, t.rows, t.cols);
        for (int c = 0; c < t.cols; ++c) {
          std::int64_t acc = 0;
          for (int r = 0; r < t.rows; ++r)
            acc += static_cast<std::int64_t>(slice[static_cast<std::size_t>(r)]) *
                   matrix[static_cast<std::size_t>(t.row + r) * cols + static_cast<std::size_t>(t.col + c)];
          result.output.at(static_cast<int>(t.col) + c, oy, ox) += acc;
        }
      }
    }
  finish_cycles(result.stats, options);
  return result;
}

}  // namespace patmap
