#include "patmap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace patmap {
namespace {

using nlohmann::ordered_json;

double ratio(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

// JSON has no infinity; non-finite ratios are written as null.
ordered_json real(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double read_real(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

ordered_json cycles_json(const CycleStats& s) {
  ordered_json j;
  j["ou_activations"] = s.ou_activations;
  j["skipped_ou_activations"] = s.skipped_ou_activations;
  j["adc_conversions"] = s.adc_conversions;
  j["dac_conversions"] = s.dac_conversions;
  j["activated_cells"] = s.activated_cells;
  j["cycles"] = s.cycles;
  return j;
}

CycleStats cycles_from(const ordered_json& j) {
  CycleStats s;
  s.ou_activations = j.at("ou_activations").get<std::uint64_t>();
  s.skipped_ou_activations = j.at("skipped_ou_activations").get<std::uint64_t>();
  s.adc_conversions = j.at("adc_conversions").get<std::uint64_t>();
  s.dac_conversions = j.at("dac_conversions").get<std::uint64_t>();
  s.activated_cells = j.at("activated_cells").get<std::uint64_t>();
  s.cycles = j.at("cycles").get<std::uint64_t>();
  return s;
}

ordered_json energy_json(const EnergyStats& e) {
  ordered_json j;
  j["e_crossbar_pj"] = real(e.e_crossbar_pj);
  j["e_adc_pj"] = real(e.e_adc_pj_total);
  j["e_dac_pj"] = real(e.e_dac_pj_total);
  j["e_total_pj"] = real(e.e_total_pj);
  j["normalized_vs_baseline"] = real(e.normalized_vs_baseline);
  return j;
}

EnergyStats energy_from(const ordered_json& j) {
  EnergyStats e;
  e.e_crossbar_pj = read_real(j.at("e_crossbar_pj"));
  e.e_adc_pj_total = read_real(j.at("e_adc_pj"));
  e.e_dac_pj_total = read_real(j.at("e_dac_pj"));
  e.e_total_pj = read_real(j.at("e_total_pj"));
  e.normalized_vs_baseline = read_real(j.at("normalized_vs_baseline"));
  return e;
}

ordered_json layer_json(const LayerReport& l) {
  ordered_json j;
  j["index"] = l.index;
  j["name"] = l.name;
  j["out_channels"] = l.out_channels;
  j["in_channels"] = l.in_channels;
  j["kernel_h"] = l.kernel_h;
  j["kernel_w"] = l.kernel_w;
  j["input_h"] = l.input_h;
  j["input_w"] = l.input_w;
  j["budget"] = l.budget;
  j["sparsity_before"] = real(l.sparsity_before);
  j["sparsity_after"] = real(l.sparsity_after);
  j["total_weights"] = l.total_weights;
  j["nonzero_weights"] = l.nonzero_weights;
  j["all_zero_kernels"] = l.all_zero_kernels;
  j["all_zero_kernel_ratio"] = real(l.all_zero_kernel_ratio);
  j["pattern_count"] = l.pattern_count;
  j["candidates"] = ordered_json::array();
  for (const auto& c : l.candidates) j["candidates"].push_back({{"mask", c.mask}, {"size", c.size}, {"kernels", c.kernels}});
  j["area"] = {{"baseline_cells", l.baseline_cells},       {"baseline_crossbars", l.baseline_crossbars},
               {"payload_cells", l.payload_cells},         {"waste_cells", l.waste_cells},
               {"pattern_cells", l.pattern_cells},         {"pattern_crossbars", l.pattern_crossbars},
               {"area_efficiency", real(l.area_efficiency)}};
  j["simulated"] = l.simulated;
  j["pattern_stats"] = cycles_json(l.pattern_stats);
  j["baseline_stats"] = cycles_json(l.baseline_stats);
  j["pattern_energy"] = energy_json(l.pattern_energy);
  j["baseline_energy"] = energy_json(l.baseline_energy);
  j["energy_efficiency"] = real(l.energy_efficiency);
  j["speedup"] = real(l.speedup);
  j["index_overhead"] = {{"index_bits", l.index_bits},
                         {"bits", l.index_overhead_bits},
                         {"bytes", l.index_overhead_bytes},
                         {"mapped_model_bytes", l.mapped_model_bytes},
                         {"fraction_of_model", real(l.index_overhead_fraction)}};
  return j;
}

LayerReport layer_from(const ordered_json& j) {
  LayerReport l;
  l.index = j.at("index").get<int>();
  l.name = j.at("name").get<std::string>();
  l.out_channels = j.at("out_channels").get<int>();
  l.in_channels = j.at("in_channels").get<int>();
  l.kernel_h = j.at("kernel_h").get<int>();
  l.kernel_w = j.at("kernel_w").get<int>();
  l.input_h = j.at("input_h").get<int>();
  l.input_w = j.at("input_w").get<int>();
  l.budget = j.at("budget").get<int>();
  l.sparsity_before = read_real(j.at("sparsity_before"));
  l.sparsity_after = read_real(j.at("sparsity_after"));
  l.total_weights = j.at("total_weights").get<std::uint64_t>();
  l.nonzero_weights = j.at("nonzero_weights").get<std::uint64_t>();
  l.all_zero_kernels = j.at("all_zero_kernels").get<std::uint64_t>();
  l.all_zero_kernel_ratio = read_real(j.at("all_zero_kernel_ratio"));
  l.pattern_count = j.at("pattern_count").get<int>();
  for (const auto& c : j.at("candidates"))
    l.candidates.push_back({c.at("mask").get<std::string>(), c.at("size").get<int>(), c.at("kernels").get<std::uint64_t>()});
  const auto& a = j.at("area");
  l.baseline_cells = a.at("baseline_cells").get<std::int64_t>();
  l.baseline_crossbars = a.at("baseline_crossbars").get<int>();
  l.payload_cells = a.at("payload_cells").get<std::int64_t>();
  l.waste_cells = a.at("waste_cells").get<std::int64_t>();
  l.pattern_cells = a.at("pattern_cells").get<std::int64_t>();
  l.pattern_crossbars = a.at("pattern_crossbars").get<int>();
  l.area_efficiency = read_real(a.at("area_efficiency"));
  l.simulated = j.at("simulated").get<bool>();
  l.pattern_stats = cycles_from(j.at("pattern_stats"));
  l.baseline_stats = cycles_from(j.at("baseline_stats"));
  l.pattern_energy = energy_from(j.at("pattern_energy"));
  l.baseline_energy = energy_from(j.at("baseline_energy"));
  l.energy_efficiency = read_real(j.at("energy_efficiency"));
  l.speedup = read_real(j.at("speedup"));
  const auto& ix = j.at("index_overhead");
  l.index_bits = ix.at("index_bits").get<int>();
  l.index_overhead_bits = ix.at("bits").get<std::uint64_t>();
  l.index_overhead_bytes = ix.at("bytes").get<std::uint64_t>();
  l.mapped_model_bytes = ix.at("mapped_model_bytes").get<std::uint64_t>();
  l.index_overhead_fraction = read_real(ix.at("fraction_of_model"));
  return l;
}

EnergyStats add(const EnergyStats& a, const EnergyStats& b) {
  EnergyStats e;
  e.e_crossbar_pj = a.e_crossbar_pj + b.e_crossbar_pj;
  e.e_adc_pj_total = a.e_adc_pj_total + b.e_adc_pj_total;
  e.e_dac_pj_total = a.e_dac_pj_total + b.e_dac_pj_total;
  e.e_total_pj = e.e_crossbar_pj + e.e_adc_pj_total + e.e_dac_pj_total;
  return e;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

AggregateReport aggregate_layers(const std::vector<LayerReport>& layers, int weight_bits) {
  AggregateReport a;
  for (const auto& l : layers) {
    a.total_weights += l.total_weights;
    a.nonzero_weights += l.nonzero_weights;
    a.total_kernels += static_cast<std::uint64_t>(l.out_channels) * static_cast<std::uint64_t>(l.in_channels);
    a.all_zero_kernels += l.all_zero_kernels;
    a.baseline_cells += l.baseline_cells;
    a.baseline_crossbars += l.baseline_crossbars;
    a.payload_cells += l.payload_cells;
    a.waste_cells += l.waste_cells;
    a.pattern_cells += l.pattern_cells;
    a.pattern_crossbars += l.pattern_crossbars;
    a.pattern_stats += l.pattern_stats;
    a.baseline_stats += l.baseline_stats;
    a.pattern_energy = add(a.pattern_energy, l.pattern_energy);
    a.baseline_energy = add(a.baseline_energy, l.baseline_energy);
    a.index_overhead_bits += l.index_overhead_bits;
  }
  a.sparsity_after = a.total_weights ? 1.0 - static_cast<double>(a.nonzero_weights) / static_cast<double>(a.total_weights) : 0.0;
  a.all_zero_kernel_ratio = a.total_kernels ? static_cast<double>(a.all_zero_kernels) / static_cast<double>(a.total_kernels) : 0.0;
  a.area_efficiency = ratio(static_cast<double>(a.baseline_cells), static_cast<double>(a.pattern_cells));
  a.area_efficiency_bound = ratio(1.0, 1.0 - a.sparsity_after);
  a.pattern_energy.normalized_vs_baseline = ratio(a.pattern_energy.e_total_pj, a.baseline_energy.e_total_pj);
  a.baseline_energy.normalized_vs_baseline = 1.0;
  const bool simulated = a.baseline_stats.cycles > 0;
  a.energy_efficiency = simulated ? ratio(a.baseline_energy.e_total_pj, a.pattern_energy.e_total_pj) : 0.0;
  a.speedup = simulated ? ratio(static_cast<double>(a.baseline_stats.cycles), static_cast<double>(a.pattern_stats.cycles)) : 0.0;
  if (!simulated) a.pattern_energy.normalized_vs_baseline = 0.0;
  a.index_overhead_bytes = (a.index_overhead_bits + 7) / 8;
  a.mapped_model_bytes =
      (static_cast<std::uint64_t>(a.payload_cells + a.waste_cells) * static_cast<std::uint64_t>(weight_bits) + 7) / 8;
  a.index_overhead_fraction = ratio(static_cast<double>(a.index_overhead_bytes), static_cast<double>(a.mapped_model_bytes));
  return a;
}

std::vector<ReferenceLine> default_reference_lines() {
  const std::string note = "full-scale VGG16 (CIFAR-10/CIFAR-100/ImageNet); not reproduced at desk scale";
  return {{"area_efficiency", 4.16, 5.20, note},
          {"energy_efficiency", 1.98, 2.15, note},
          {"speedup", 1.15, 1.35, note},
          {"index_overhead_fraction", 0.122, 0.122, "CIFAR-10 VGG16, 16-bit weights"}};
}

std::string report_to_json(const Report& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["source"] = r.source;
  j["settings"] = r.settings;
  j["layers"] = ordered_json::array();
  for (const auto& l : r.layers) j["layers"].push_back(layer_json(l));

  const auto& a = r.aggregate;
  ordered_json agg;
  agg["total_weights"] = a.total_weights;
  agg["nonzero_weights"] = a.nonzero_weights;
  agg["sparsity_after"] = real(a.sparsity_after);
  agg["total_kernels"] = a.total_kernels;
  agg["all_zero_kernels"] = a.all_zero_kernels;
  agg["all_zero_kernel_ratio"] = real(a.all_zero_kernel_ratio);
  agg["baseline_cells"] = a.baseline_cells;
  agg["baseline_crossbars"] = a.baseline_crossbars;
  agg["payload_cells"] = a.payload_cells;
  agg["waste_cells"] = a.waste_cells;
  agg["pattern_cells"] = a.pattern_cells;
  agg["pattern_crossbars"] = a.pattern_crossbars;
  agg["area_efficiency"] = real(a.area_efficiency);
  agg["area_efficiency_bound"] = real(a.area_efficiency_bound);
  agg["pattern_stats"] = cycles_json(a.pattern_stats);
  agg["baseline_stats"] = cycles_json(a.baseline_stats);
  agg["pattern_energy"] = energy_json(a.pattern_energy);
  agg["baseline_energy"] = energy_json(a.baseline_energy);
  agg["energy_efficiency"] = real(a.energy_efficiency);
  agg["speedup"] = real(a.speedup);
  agg["index_overhead_bits"] = a.index_overhead_bits;
  agg["index_overhead_bytes"] = a.index_overhead_bytes;
  agg["mapped_model_bytes"] = a.mapped_model_bytes;
  agg["index_overhead_fraction"] = real(a.index_overhead_fraction);
  j["aggregate"] = std::move(agg);

  j["reference_lines"] = ordered_json::array();
  for (const auto& ref : r.reference_lines)
    j["reference_lines"].push_back({{"metric", ref.metric}, {"low", ref.low}, {"high", ref.high}, {"note", ref.note}});
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
  try {
    Report r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw Error("report: unsupported schema_version " + std::to_string(r.schema_version));
    r.source = j.at("source").get<std::string>();
    r.settings = j.at("settings").get<std::string>();
    for (const auto& l : j.at("layers")) r.layers.push_back(layer_from(l));

    const auto& agg = j.at("aggregate");
    auto& a = r.aggregate;
    a.total_weights = agg.at("total_weights").get<std::uint64_t>();
    a.nonzero_weights = agg.at("nonzero_weights").get<std::uint64_t>();
    a.sparsity_after = read_real(agg.at("sparsity_after"));
    a.total_kernels = agg.at("total_kernels").get<std::uint64_t>();
    a.all_zero_kernels = agg.at("all_zero_kernels").get<std::uint64_t>();
    a.all_zero_kernel_ratio = read_real(agg.at("all_zero_kernel_ratio"));
    a.baseline_cells = agg.at("baseline_cells").get<std::int64_t>();
    a.baseline_crossbars = agg.at("baseline_crossbars").get<int>();
    a.payload_cells = agg.at("payload_cells").get<std::int64_t>();
    a.waste_cells = agg.at("waste_cells").get<std::int64_t>();
    a.pattern_cells = agg.at("pattern_cells").get<std::int64_t>();
    a.pattern_crossbars = agg.at("pattern_crossbars").get<int>();
    a.area_efficiency = read_real(agg.at("area_efficiency"));
    a.area_efficiency_bound = read_real(agg.at("area_efficiency_bound"));
    a.pattern_stats = cycles_from(agg.at("pattern_stats"));
    a.baseline_stats = cycles_from(agg.at("baseline_stats"));
    a.pattern_energy = energy_from(agg.at("pattern_energy"));
    a.baseline_energy = energy_from(agg.at("baseline_energy"));
    a.energy_efficiency = read_real(agg.at("energy_efficiency"));
    a.speedup = read_real(agg.at("speedup"));
    a.index_overhead_bits = agg.at("index_overhead_bits").get<std::uint64_t>();
    a.index_overhead_bytes = agg.at("index_overhead_bytes").get<std::uint64_t>();
    a.mapped_model_bytes = agg.at("mapped_model_bytes").get<std::uint64_t>();
    a.index_overhead_fraction = read_real(agg.at("index_overhead_fraction"));

    for (const auto& ref : j.at("reference_lines"))
      r.reference_lines.push_back({ref.at("metric").get<std::string>(), ref.at("low").get<double>(),
                                   ref.at("high").get<double>(), ref.at("note").get<std::string>()});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
}

std::string report_to_csv(const Report& r) {
  std::ostringstream out;
  out << "index,name,out_channels,in_channels,kernel_h,kernel_w,budget,pattern_count,sparsity_before,sparsity_after,"
         "all_zero_kernel_ratio,baseline_cells,baseline_crossbars,payload_cells,waste_cells,pattern_cells,"
         "pattern_crossbars,area_efficiency,pattern_cycles,baseline_cycles,speedup,pattern_energy_pj,"
         "baseline_energy_pj,energy_efficiency,index_bits,index_overhead_bits,index_overhead_fraction\n";
  for (const auto& l : r.layers) {
    out << l.index << ',' << l.name << ',' << l.out_channels << ',' << l.in_channels << ',' << l.kernel_h << ','
        << l.kernel_w << ',' << l.budget << ',' << l.pattern_count << ',' << fmt(l.sparsity_before) << ','
        << fmt(l.sparsity_after) << ',' << fmt(l.all_zero_kernel_ratio) << ',' << l.baseline_cells << ','
        << l.baseline_crossbars << ',' << l.payload_cells << ',' << l.waste_cells << ',' << l.pattern_cells << ','
        << l.pattern_crossbars << ',' << fmt(l.area_efficiency) << ',' << l.pattern_stats.cycles << ','
        << l.baseline_stats.cycles << ',' << fmt(l.speedup) << ',' << fmt(l.pattern_energy.e_total_pj) << ','
        << fmt(l.baseline_energy.e_total_pj) << ',' << fmt(l.energy_efficiency) << ',' << l.index_bits << ','
        << l.index_overhead_bits << ',' << fmt(l.index_overhead_fraction) << '\n';
  }
  return out.str();
}

std::string report_to_svg(const Report& r) {
  const int n = static_cast<int>(r.layers.size());
  const int left = 60, top = 40, plot_h = 240, group_w = 44, bar_w = 16;
  const int width = left + std::max(1, n) * group_w + 160;
  const int height = top + plot_h + 90;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">Pattern mapping normalized to baseline (lower is better)</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t * 0.25;
    const double y = top + plot_h - v * plot_h;
    s << "<line x1=\"" << left << "\" y1=\"" << fmt(y) << "\" x2=\"" << left + n * group_w << "\" y2=\"" << fmt(y)
      << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  for (int k = 0; k < n; ++k) {
    const auto& l = r.layers[static_cast<std::size_t>(k)];
    const double energy = std::clamp(l.pattern_energy.normalized_vs_baseline, 0.0, 1.0);
    const double area = std::clamp(l.baseline_cells > 0 ? static_cast<double>(l.pattern_cells) / static_cast<double>(l.baseline_cells) : 0.0, 0.0, 1.0);
    const int x = left + k * group_w + 4;
    s << "<rect x=\"" << x << "\" y=\"" << fmt(top + plot_h - energy * plot_h) << "\" width=\"" << bar_w
      << "\" height=\"" << fmt(energy * plot_h) << "\" fill=\"#d9534f\"><title>" << xml_escape(l.name)
      << " energy " << fmt(energy) << "</title></rect>\n";
    s << "<rect x=\"" << x + bar_w << "\" y=\"" << fmt(top + plot_h - area * plot_h) << "\" width=\"" << bar_w
      << "\" height=\"" << fmt(area * plot_h) << "\" fill=\"#337ab7\"><title>" << xml_escape(l.name) << " area "
      << fmt(area) << "</title></rect>\n";
    s << "<text transform=\"translate(" << x + bar_w << "," << top + plot_h + 12 << ") rotate(45)\">"
      << xml_escape(l.name) << "</text>\n";
  }
  const int lx = left + n * group_w + 20;
  s << "<rect x=\"" << lx << "\" y=\"" << top << "\" width=\"12\" height=\"12\" fill=\"#d9534f\"/>"
    << "<text x=\"" << lx + 18 << "\" y=\"" << top + 10 << "\">normalized energy</text>\n";
  s << "<rect x=\"" << lx << "\" y=\"" << top + 20 << "\" width=\"12\" height=\"12\" fill=\"#337ab7\"/>"
    << "<text x=\"" << lx + 18 << "\" y=\"" << top + 30 << "\">normalized area</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace patmap
