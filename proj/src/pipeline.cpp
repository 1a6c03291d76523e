#include "patmap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

#include <json.hpp>

#include "patmap/mapper.hpp"
#include "patmap/reference.hpp"
#include "patmap/synthetic.hpp"
#include "patmap/weights_io.hpp"

namespace patmap {
namespace {

Rng layer_rng(std::uint64_t seed, std::uint64_t stream, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

double ratio(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

struct Workload {
  std::string source;
  std::vector<LayerWeights> layers;
  std::vector<FeatureMap> inputs;
};

int budget_for(const RunConfig& config, std::size_t index) {
  if (config.budgets.empty()) return config.default_budget;
  if (config.budgets.size() == 1) return config.budgets.front();
  return config.budgets[index];
}

Workload build_workload(const RunConfig& config) {
  Workload w;
  if (!config.manifest.empty()) {
    w.source = config.manifest;
    w.layers = load_weights(config.manifest, config.hw.weight_bits);
  } else if (config.synthetic == "example16") {
    w.source = "synthetic:example16";
    w.layers.push_back(example16_layer());
  } else if (config.synthetic == "vgg16") {
    w.source = "synthetic:vgg16";
    const auto shapes = vgg16_conv_shapes(config.input_size, config.width_divisor);
    if (config.budgets.size() > 1 && config.budgets.size() != shapes.size())
      throw Error("budget list has " + std::to_string(config.budgets.size()) + " entries for " +
                  std::to_string(shapes.size()) + " layers");
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      auto rng = layer_rng(config.seed, 1, static_cast<int>(k));
      w.layers.push_back(synthesize_patterned_layer(shapes[k], budget_for(config, k), {}, rng));
    }
  } else {
    throw Error("unknown synthetic workload '" + config.synthetic + "'");
  }

  if (config.budgets.size() > 1 && config.budgets.size() != w.layers.size())
    throw Error("budget list has " + std::to_string(config.budgets.size()) + " entries for " +
                std::to_string(w.layers.size()) + " layers");

  if (!config.inputs.empty()) {
    w.inputs = load_feature_maps(config.inputs, config.hw.weight_bits);
    if (w.inputs.size() != w.layers.size())
      throw Error("input manifest has " + std::to_string(w.inputs.size()) + " maps for " +
                  std::to_string(w.layers.size()) + " layers");
  } else {
    const auto shapes = config.manifest.empty() && config.synthetic == "vgg16"
                            ? vgg16_conv_shapes(config.input_size, config.width_divisor)
                            : std::vector<ConvShape>{};
    for (std::size_t k = 0; k < w.layers.size(); ++k) {
      const int size = shapes.empty() ? config.input_size : shapes[k].input_size;
      auto rng = layer_rng(config.seed, 2, static_cast<int>(k));
      w.inputs.push_back(synthesize_feature_map(w.layers[k].in_channels, size, size, config.input_zero_fraction, rng));
    }
  }
  return w;
}

std::string settings_string(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["budgets"] = c.budgets;
  j["default_budget"] = c.default_budget;
  j["sparsity"] = c.sparsity ? nlohmann::ordered_json(*c.sparsity) : nlohmann::ordered_json(nullptr);
  j["metric"] = to_string(c.metric);
  j["include_zero"] = c.include_zero;
  j["pre_pruned"] = c.pre_pruned;
  j["ou"] = std::to_string(c.hw.ou_rows) + "x" + std::to_string(c.hw.ou_cols);
  j["crossbar"] = std::to_string(c.hw.crossbar_rows) + "x" + std::to_string(c.hw.crossbar_cols);
  j["cells_per_weight"] = c.hw.cells_per_weight;
  j["weight_bits"] = c.hw.weight_bits;
  j["skip_zero_inputs"] = c.pattern_sim.skip_zero_inputs;
  j["baseline_skip_zero_inputs"] = c.baseline_sim.skip_zero_inputs;
  j["skip_saves_cycles"] = c.pattern_sim.skip_saves_cycles;
  j["energy_mode"] = c.energy_mode == OuEnergyMode::flat ? "flat" : "scaled_cells";
  j["seed"] = c.seed;
  j["input_size"] = c.input_size;
  j["input_zero_fraction"] = c.input_zero_fraction;
  j["width_divisor"] = c.width_divisor;
  return j.dump();
}

}  // namespace

LayerReport evaluate_layer(int index, const LayerWeights& original, const FeatureMap& input, int budget,
                           const RunConfig& config) {
  const auto& hw = config.hw;
  LayerReport r;
  r.index = index;
  r.name = original.name;
  r.out_channels = original.out_channels;
  r.in_channels = original.in_channels;
  r.kernel_h = original.kernel_h;
  r.kernel_w = original.kernel_w;
  r.input_h = input.height;
  r.input_w = input.width;

  LayerWeights layer;
  PatternAssignment assignment;
  if (config.pre_pruned) {
    layer = original;
    assignment = assignment_from_supports(layer);
    r.sparsity_before = sparsity(layer);
    r.budget = static_cast<int>(assignment.candidates.size());
  } else {
    const LayerWeights pruned = config.sparsity ? magnitude_prune(original, *config.sparsity) : original;
    r.sparsity_before = sparsity(pruned);
    auto result = prune_layer(pruned, budget, config.metric, config.include_zero);
    assignment = std::move(result.assignment);
    // Masks chosen on the pruned copy are applied to the unpruned weights.
    layer = config.sparsity ? apply_masks(original, assignment) : std::move(result.layer);
    r.budget = budget;
  }
  r.sparsity_after = sparsity(layer);
  r.total_weights = layer.size();
  r.nonzero_weights = count_nonzero(layer.weights);
  r.pattern_count = static_cast<int>(assignment.candidates.size());

  std::vector<std::uint64_t> usage(assignment.candidates.size(), 0);
  for (int id : assignment.kernel_pattern) ++usage[static_cast<std::size_t>(id)];
  for (std::size_t c = 0; c < usage.size(); ++c) {
    const auto& p = assignment.candidates[c];
    r.candidates.push_back({p.to_string(), p.size(), usage[c]});
    if (p.empty()) r.all_zero_kernels += usage[c];
  }
  r.all_zero_kernel_ratio = static_cast<double>(r.all_zero_kernels) / static_cast<double>(layer.kernel_count());

  const DenseMapping dense = baseline_map(layer, hw);
  r.baseline_cells = area_cells(dense, hw);
  r.baseline_crossbars = area_crossbars(dense, hw);

  const MappedLayer mapped = map_layer(layer, assignment, hw);
  r.payload_cells = mapped.placement.payload_cells;
  r.waste_cells = mapped.placement.wasted_cells;
  r.pattern_cells = area_cells(mapped.placement, hw);
  r.pattern_crossbars = area_crossbars(mapped.placement, hw);
  r.area_efficiency = ratio(static_cast<double>(r.baseline_cells), static_cast<double>(r.pattern_cells));

  r.index_bits = mapped.stream.header().index_bits;
  r.index_overhead_bits = index_overhead_bits(mapped.stream);
  r.index_overhead_bytes = index_overhead_bytes(mapped.stream);
  r.mapped_model_bytes = (static_cast<std::uint64_t>(mapped.placement.total_cells_used) *
                              static_cast<std::uint64_t>(hw.weight_bits) + 7) / 8;
  r.index_overhead_fraction =
      ratio(static_cast<double>(r.index_overhead_bytes), static_cast<double>(r.mapped_model_bytes));

  if (config.simulate) {
    const auto pattern = run_layer(layer, assignment, mapped.placement, mapped.stream, input, hw, config.pattern_sim);
    const auto baseline = run_baseline_layer(layer, input, hw, config.baseline_sim);
    if (pattern.output != baseline.output)
      throw Error("layer '" + layer.name + "': pattern-mapped output differs from the dense mapping");
    r.simulated = true;
    r.pattern_stats = pattern.stats;
    r.baseline_stats = baseline.stats;
    r.pattern_energy = energy_of(pattern.stats, hw, config.energy_mode);
    r.baseline_energy = energy_of(baseline.stats, hw, config.energy_mode);
    if (r.baseline_energy.e_total_pj > 0.0) {
      const auto cmp = compare(r.pattern_energy, r.baseline_energy);
      r.pattern_energy.normalized_vs_baseline = cmp.normalized;
      r.energy_efficiency = cmp.efficiency;
    } else {
      r.pattern_energy.normalized_vs_baseline = 1.0;
      r.energy_efficiency = 1.0;
    }
    r.speedup = ratio(static_cast<double>(baseline.stats.cycles), static_cast<double>(pattern.stats.cycles));
  }
  return r;
}

Report run_pipeline(const RunConfig& config) {
  config.hw.validate();
  if (config.sparsity && (*config.sparsity < 0.0 || *config.sparsity >= 1.0))
    throw Error("sparsity must be in [0, 1)");
  for (int b : config.budgets)
    if (b < 1) throw Error("pattern budget must be >= 1");

  RunConfig effective = config;
  if (config.manifest.empty() && config.synthetic == "vgg16") {
    if (!config.sparsity && !config.pre_pruned) effective.sparsity = kSyntheticSparsity;
    if (config.budgets.empty()) effective.budgets = vgg16_reference_budgets();
  }

  const Workload work = build_workload(effective);
  const std::size_t n = work.layers.size();
  std::vector<LayerReport> layers(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        layers[k] = evaluate_layer(static_cast<int>(k), work.layers[k], work.inputs[k], budget_for(effective, k), effective);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned hc = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t threads =
      std::min<std::size_t>(n, effective.threads > 0 ? static_cast<std::size_t>(effective.threads) : hc);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Report report;
  report.source = work.source;
  report.settings = settings_string(effective);
  report.layers = std::move(layers);
  report.aggregate = aggregate_layers(report.layers, effective.hw.weight_bits);
  report.reference_lines = default_reference_lines();
  return report;
}

namespace {

struct VerifyFailure {
  std::string check;
  std::string detail;
};

std::vector<IndexRecord> swap_two_records(std::vector<IndexRecord> records) {
  for (std::size_t a = 0; a < records.size(); ++a) {
    if (records[a].is_separator()) continue;
    for (std::size_t b = a + 1; b < records.size(); ++b)
      if (!records[b].is_separator() && records[b] != records[a]) {
        std::swap(records[a], records[b]);
        return records;
      }
  }
  return records;
}

std::uint64_t closed_form_bits(const std::vector<IndexRecord>& records, const IndexHeader& h) {
  std::uint64_t bits = kIndexHeaderBits;
  for (const auto& rec : records)
    bits += static_cast<std::uint64_t>(h.kernel_h * h.kernel_w + kIndexCountBits) +
            rec.out_channels.size() * static_cast<std::uint64_t>(h.index_bits);
  return bits;
}

std::optional<VerifyFailure> check_instance(const RandomInstance& inst, bool swap_records) {
  const HardwareConfig hw;
  const auto pruned = prune_layer(inst.layer, inst.budget, inst.metric, inst.include_zero);
  const auto mapped = map_layer(pruned.layer, pruned.assignment, hw);

  IndexStream stream = mapped.stream;
  if (swap_records) {
    const auto records = mapped.stream.decode();
    stream = IndexStream::encode(mapped.stream.header(), swap_two_records(records));
  }
  Placement rebuilt;
  try {
    rebuilt = reconstruct_placement(stream, hw);
  } catch (const Error& e) {
    return VerifyFailure{"roundtrip", e.what()};
  }
  if (rebuilt != mapped.placement) return VerifyFailure{"roundtrip", "reconstructed placement differs"};

  const auto records = mapped.stream.decode();
  if (mapped.stream.bit_length() != closed_form_bits(records, mapped.stream.header()))
    return VerifyFailure{"index_formula", "bit length " + std::to_string(mapped.stream.bit_length())};

  std::int64_t in_masks = 0;
  for (int o = 0; o < pruned.layer.out_channels; ++o)
    for (int i = 0; i < pruned.layer.in_channels; ++i) in_masks += pruned.assignment.pattern(o, i).size();
  std::int64_t block_area = 0;
  for (const auto& b : mapped.placement.blocks) block_area += static_cast<std::int64_t>(b.height()) * b.width();
  if (block_area != in_masks || mapped.placement.payload_cells != in_masks)
    return VerifyFailure{"conservation", "block area " + std::to_string(block_area) + " vs " + std::to_string(in_masks)};

  const auto exact = map_layer(pruned.layer, assignment_from_supports(pruned.layer), hw);
  if (exact.placement.payload_cells != static_cast<std::int64_t>(count_nonzero(pruned.layer.weights)))
    return VerifyFailure{"conservation", "support-mapped payload differs from nonzero count"};

  const auto expected = reference_conv2d(pruned.layer, inst.input);
  const auto pattern = run_layer(pruned.layer, pruned.assignment, mapped.placement, mapped.stream, inst.input, hw);
  if (pattern.output != expected) return VerifyFailure{"functional", "pattern path differs from dense convolution"};
  const auto unskipped =
      run_layer(pruned.layer, pruned.assignment, mapped.placement, mapped.stream, inst.input, hw, {false, true});
  if (unskipped.output != expected) return VerifyFailure{"functional", "unskipped pattern path differs"};
  if (pattern.stats.adc_conversions > unskipped.stats.adc_conversions)
    return VerifyFailure{"skipping", "zero skipping increased conversions"};
  const auto baseline = run_baseline_layer(inst.layer, inst.input, hw);
  if (baseline.output != reference_conv2d(inst.layer, inst.input))
    return VerifyFailure{"functional", "baseline path differs from dense convolution"};
  return std::nullopt;
}

}  // namespace

VerifyResult run_verify(int count, std::uint64_t seed, bool swap_records) {
  if (count < 0) throw Error("verify: instance count must be >= 0");
  VerifyResult result;
  for (int k = 0; k < count; ++k) {
    auto rng = layer_rng(seed, 3, k);
    const auto inst = random_instance(rng);
    std::optional<VerifyFailure> failure;
    try {
      failure = check_instance(inst, swap_records);
    } catch (const Error& e) {
      failure = VerifyFailure{"exception", e.what()};
    }
    ++result.instances;
    if (!failure) continue;

    nlohmann::ordered_json j;
    j["instance"] = k;
    j["seed"] = seed;
    j["check"] = failure->check;
    j["detail"] = failure->detail;
    j["out_channels"] = inst.layer.out_channels;
    j["in_channels"] = inst.layer.in_channels;
    j["kernel"] = inst.layer.kernel_h;
    j["stride"] = inst.layer.stride;
    j["padding"] = inst.layer.padding;
    j["input"] = {inst.input.height, inst.input.width};
    j["budget"] = inst.budget;
    j["metric"] = to_string(inst.metric);
    j["include_zero"] = inst.include_zero;
    result.ok = false;
    result.failed_check = failure->check;
    result.counterexample = j.dump(2);
    break;
  }
  return result;
}

}  // namespace patmap
