// Acceptance checks; prints one [PASS]/[FAIL] line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "patmap/energy.hpp"
#include "patmap/index_stream.hpp"
#include "patmap/mapper.hpp"
#include "patmap/ou_sim.hpp"
#include "patmap/pipeline.hpp"
#include "patmap/pruner.hpp"
#include "patmap/reference.hpp"
#include "patmap/synthetic.hpp"

using namespace patmap;

namespace {

constexpr int kInstances = 100;
constexpr std::uint64_t kSeed = 2024;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt >= limit_s) {
    o.ok = false;
    o.detail += " (runtime limit exceeded)";
  }
  if (!o.ok) ++failures;
  std::printf("[%s] AC%d %s: %s [%.2fs < %.0fs]\n", o.ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), dt, limit_s);
  std::fflush(stdout);
}

struct Instance {
  RandomInstance inst;
  PrunedLayer pruned;
  MappedLayer mapped;
};

std::vector<Instance> instances() {
  std::vector<Instance> out;
  Rng rng(kSeed);
  for (int k = 0; k < kInstances; ++k) {
    Instance x;
    x.inst = random_instance(rng);
    x.pruned = prune_layer(x.inst.layer, x.inst.budget, x.inst.metric, x.inst.include_zero);
    x.mapped = map_layer(x.pruned.layer, x.pruned.assignment, HardwareConfig{});
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Report> vgg_stacks() {
  std::vector<Report> out;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    out.push_back(run_pipeline(cfg));
  }
  return out;
}

}  // namespace

int main() {
  HardwareConfig hw;

  criterion(1, "baseline footprint of the 16-kernel example", 1.0, [&] {
    const auto d = baseline_map(example16_layer(), hw);
    std::ostringstream s;
    s << d.rows << "x" << d.cols << ", " << area_cells(d, hw) << " cells";
    return Outcome{d.rows == 9 && d.cols == 16 && area_cells(d, hw) == 144, s.str()};
  });

  std::vector<Instance> inst;
  criterion(2, "functional equivalence", 60.0, [&] {
    inst = instances();
    int bad = 0;
    for (const auto& x : inst) {
      const auto r = run_layer(x.pruned.layer, x.pruned.assignment, x.mapped.placement, x.mapped.stream, x.inst.input, hw);
      const auto b = run_baseline_layer(x.inst.layer, x.inst.input, hw);
      if (r.output != oracle::conv_im2col(x.pruned.layer, x.inst.input)) ++bad;
      if (b.output != oracle::conv_im2col(x.inst.layer, x.inst.input)) ++bad;
    }
    return Outcome{bad == 0, std::to_string(inst.size()) + " layers, " + std::to_string(bad) + " mismatches"};
  });

  criterion(3, "index roundtrip", 60.0, [&] {
    int bad = 0;
    for (const auto& x : inst)
      if (reconstruct_placement(x.mapped.stream, hw) != x.mapped.placement) ++bad;
    return Outcome{!inst.empty() && bad == 0, std::to_string(inst.size()) + " layers, " + std::to_string(bad) + " mismatches"};
  });

  criterion(4, "payload conservation", 60.0, [&] {
    int bad = 0;
    for (const auto& x : inst) {
      std::int64_t area = 0;
      for (const auto& b : x.mapped.placement.blocks) area += static_cast<std::int64_t>(b.height()) * b.width();
      const auto masked = oracle::masked_cells(x.pruned.layer, x.pruned.assignment.candidates,
                                               x.pruned.assignment.kernel_pattern);
      if (area != masked || area != x.mapped.placement.payload_cells) ++bad;
      // On the layer's own supports the payload is exactly its nonzero count.
      const auto support = assignment_from_supports(x.inst.layer);
      const auto m = map_layer(x.inst.layer, support, hw);
      std::int64_t support_area = 0;
      for (const auto& b : m.placement.blocks) support_area += static_cast<std::int64_t>(b.height()) * b.width();
      if (support_area != static_cast<std::int64_t>(count_nonzero(x.inst.layer.weights))) ++bad;
    }
    return Outcome{!inst.empty() && bad == 0, std::to_string(2 * inst.size()) + " mappings, " + std::to_string(bad) + " violations"};
  });

  std::vector<Report> stacks;
  criterion(5, "area efficiency within [0.80, 1.00] of 1/(1-s)", 300.0, [&] {
    stacks = vgg_stacks();
    bool ok = true;
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    for (std::size_t k = 0; k < stacks.size(); ++k) {
      const auto& a = stacks[k].aggregate;
      const double lo = 0.80 * a.area_efficiency_bound;
      const bool pass = a.area_efficiency >= lo && a.area_efficiency <= a.area_efficiency_bound;
      ok = ok && pass;
      s << (k ? "; " : "") << "seed " << k + 1 << " s=" << a.sparsity_after << " eff=" << a.area_efficiency
        << " bound=" << a.area_efficiency_bound << " ratio=" << a.area_efficiency / a.area_efficiency_bound;
    }
    return Outcome{ok, s.str()};
  });

  criterion(6, "energy identity and ADC dominance", 60.0, [&] {
    bool ok = true;
    std::ostringstream s;
    CycleStats one{1, 0, 8, 9, 72, 1};
    const auto e1 = energy_of(one, hw);
    ok = ok && std::abs(e1.e_total_pj - 18.3238) < 1e-9;
    s << "full OU " << e1.e_total_pj << " pJ";

    LayerWeights dense;
    dense.name = "dense";
    dense.out_channels = 16;
    dense.in_channels = 4;
    dense.kernel_h = dense.kernel_w = 3;
    dense.weights.assign(16 * 4 * 9, 1);
    Rng rng(3);
    const auto fm = synthesize_feature_map(4, 8, 8, 0.0, rng);
    const auto full = energy_of(run_baseline_layer(dense, fm, hw).stats, hw);
    ok = ok && full.adc_share() > 0.5;
    ok = ok && full.e_total_pj == full.e_crossbar_pj + full.e_adc_pj_total + full.e_dac_pj_total;
    s << ", ADC share " << full.adc_share();

    int suites = 0;
    for (const auto& r : stacks) {
      for (const auto* e : {&r.aggregate.pattern_energy, &r.aggregate.baseline_energy})
        ok = ok && e->e_total_pj == e->e_crossbar_pj + e->e_adc_pj_total + e->e_dac_pj_total;
      if (r.aggregate.all_zero_kernels == 0) continue;
      ++suites;
      ok = ok && r.aggregate.pattern_energy.e_total_pj <= r.aggregate.baseline_energy.e_total_pj;
      ok = ok && r.aggregate.pattern_stats.cycles <= r.aggregate.baseline_stats.cycles;
    }
    ok = ok && suites > 0;
    s << ", " << suites << " suites with pattern energy and cycles <= baseline";
    if (!stacks.empty())
      s << " (seed 1: energy " << stacks[0].aggregate.energy_efficiency << "x, speedup " << stacks[0].aggregate.speedup
        << "x)";
    return Outcome{ok, s.str()};
  });

  criterion(7, "skipping soundness", 60.0, [&] {
    int bad = 0, checked = 0;
    for (auto x : inst) {
      // Channel 0 all zero guarantees every tile on it sees a zero slice.
      const auto plane = static_cast<std::size_t>(x.inst.input.height) * static_cast<std::size_t>(x.inst.input.width);
      std::fill(x.inst.input.data.begin(), x.inst.input.data.begin() + static_cast<std::ptrdiff_t>(plane),
                std::int16_t{0});
      const auto on = run_layer(x.pruned.layer, x.pruned.assignment, x.mapped.placement, x.mapped.stream, x.inst.input, hw,
                                {true, true});
      const auto off = run_layer(x.pruned.layer, x.pruned.assignment, x.mapped.placement, x.mapped.stream, x.inst.input,
                                 hw, {false, true});
      if (on.output != off.output) ++bad;
      bool channel0 = false;
      for (const auto& b : x.mapped.placement.blocks) channel0 = channel0 || b.in_channel == 0;
      if (channel0) {
        ++checked;
        if (!(on.stats.adc_conversions < off.stats.adc_conversions)) ++bad;
      }
    }
    return Outcome{checked > 0 && bad == 0,
                   std::to_string(checked) + " layers with zero windows, " + std::to_string(bad) + " violations"};
  });

  criterion(8, "index overhead formula", 60.0, [&] {
    int bad = 0;
    for (const auto& x : inst) {
      std::vector<int> counts;
      for (const auto& r : x.mapped.stream.decode()) counts.push_back(static_cast<int>(r.out_channels.size()));
      const auto h = x.mapped.stream.header();
      if (x.mapped.stream.bit_length() != oracle::stream_bits(h.kernel_h * h.kernel_w, h.index_bits, counts)) ++bad;
    }
    LayerWeights wide;
    wide.name = "wide";
    wide.out_channels = 512;
    wide.in_channels = 1;
    wide.kernel_h = wide.kernel_w = 3;
    wide.weights.assign(512 * 9, 0);
    wide.weights[0] = 1;
    const auto m = map_layer(wide, assignment_from_supports(wide), hw);
    const int bits = m.stream.header().index_bits;
    return Outcome{!inst.empty() && bad == 0 && bits == 9,
                   std::to_string(inst.size()) + " streams, " + std::to_string(bad) + " mismatches, index_bits(512)=" +
                       std::to_string(bits)};
  });

  criterion(9, "deterministic report.json", 60.0, [&] {
    RunConfig cfg;
    cfg.seed = 11;
    cfg.width_divisor = 4;
    const auto a = report_to_json(run_pipeline(cfg));
    cfg.threads = 1;
    const auto b = report_to_json(run_pipeline(cfg));
    return Outcome{a == b, std::to_string(a.size()) + " bytes, repeated run " + (a == b ? "identical" : "differs")};
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
