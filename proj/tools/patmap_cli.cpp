#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "patmap/pipeline.hpp"
#include "patmap/report.hpp"
#include "patmap/synthetic.hpp"
#include "patmap/weights_io.hpp"

namespace fs = std::filesystem;
using namespace patmap;

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

std::pair<int, int> parse_dims(const std::string& text, const char* flag) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int r = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const int c = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {r, c};
  } catch (const std::logic_error&) {
    throw Error(std::string(flag) + ": expected ROWSxCOLS, got '" + text + "'");
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void print_summary(const Report& r) {
  std::printf("%-10s %5s %5s %4s %8s %10s %10s %8s %8s %8s %8s\n", "layer", "O", "I", "pat", "sparsity", "base_cells",
              "pat_cells", "area_x", "energy_x", "speedup", "idx_frac");
  for (const auto& l : r.layers)
    std::printf("%-10s %5d %5d %4d %8.4f %10lld %10lld %8.3f %8.3f %8.3f %8.4f\n", l.name.c_str(), l.out_channels,
                l.in_channels, l.pattern_count, l.sparsity_after, static_cast<long long>(l.baseline_cells),
                static_cast<long long>(l.pattern_cells), l.area_efficiency, l.energy_efficiency, l.speedup,
                l.index_overhead_fraction);
  const auto& a = r.aggregate;
  std::printf("total: sparsity %.4f  area %.3fx (bound %.3fx)  energy %.3fx  speedup %.3fx  index %.4f of model\n",
              a.sparsity_after, a.area_efficiency, a.area_efficiency_bound, a.energy_efficiency, a.speedup,
              a.index_overhead_fraction);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern-pruned CNN mapping onto RRAM crossbars: map, simulate, report"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_dir = ".";
  std::string ou = "9x8", crossbar = "512x512", metric = "hamming";
  std::string skip_zero = "on", skip_cycles = "on", baseline_skip = "off", energy_mode = "flat";
  double sparsity = -1.0;
  bool chart = false, no_zero = false, quiet = false;
  int index_bits = 0;

  auto* run = app.add_subcommand("run", "Prune, map and simulate a network; write report.json and report.csv");
  run->add_option("--manifest", cfg.manifest, "Weight manifest (JSON)");
  run->add_option("--synthetic", cfg.synthetic, "Built-in workload when no manifest is given")
      ->check(CLI::IsMember({"vgg16", "example16"}));
  run->add_option("--inputs", cfg.inputs, "Feature-map manifest, one map per layer");
  run->add_option("--budget-per-layer", cfg.budgets, "Pattern budget per layer, comma separated")->delimiter(',');
  run->add_option("--sparsity", sparsity, "Magnitude-prune target before projection");
  run->add_option("--metric", metric, "Projection distance")->check(CLI::IsMember({"hamming", "cosine"}));
  run->add_flag("--no-zero-pattern", no_zero, "Do not add the all-zero pattern to the candidates");
  run->add_flag("--pre-pruned", cfg.pre_pruned, "Weights are already pattern-pruned; map supports as given");
  run->add_option("--ou", ou, "OU size ROWSxCOLS");
  run->add_option("--crossbar", crossbar, "Crossbar size ROWSxCOLS");
  run->add_option("--cells-per-weight", cfg.hw.cells_per_weight, "Cells charged per stored weight")
      ->check(CLI::PositiveNumber);
  run->add_option("--index-bits", index_bits, "Output index width (default ceil(log2 O))");
  run->add_option("--skip-zero-inputs", skip_zero, "All-zero input detection on the pattern path")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--baseline-skip-zero-inputs", baseline_skip, "All-zero input detection on the baseline")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--skip-saves-cycles", skip_cycles, "Skipped OU activations cost no cycle")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--energy-mode", energy_mode, "OU energy per activation")
      ->check(CLI::IsMember({"flat", "scaled"}));
  run->add_option("--seed", cfg.seed, "Seed for synthetic weights and inputs");
  run->add_option("--input-size", cfg.input_size, "Input extent for generated feature maps")
      ->check(CLI::PositiveNumber);
  run->add_option("--input-zero-fraction", cfg.input_zero_fraction, "Zero share of generated feature maps")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--width-divisor", cfg.width_divisor, "Divide synthetic VGG16 channel widths")
      ->check(CLI::PositiveNumber);
  run->add_option("--threads", cfg.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "Output directory");
  bool no_sim = false;
  run->add_flag("--no-simulate", no_sim, "Area and index accounting only");
  run->add_flag("--chart", chart, "Also write chart.svg");
  run->add_flag("-q,--quiet", quiet, "No summary table");

  int verify_count = 100;
  std::uint64_t verify_seed = 1;
  bool inject = false;
  auto* verify = app.add_subcommand("verify", "Property checks over seeded random layers");
  verify->add_option("--count", verify_count, "Number of random layers")->check(CLI::NonNegativeNumber);
  verify->add_option("--seed", verify_seed, "Base seed");
  verify->add_flag("--inject-fault", inject, "Swap two index records before reconstruction");

  std::string fixture_dir = "data/example16";
  auto* fixture = app.add_subcommand("export-fixture", "Write the 16-kernel single-channel example layer");
  fixture->add_option("--out", fixture_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) {
      if (sparsity >= 0.0) cfg.sparsity = sparsity;
      cfg.simulate = !no_sim;
      cfg.metric = parse_metric(metric);
      cfg.include_zero = !no_zero;
      std::tie(cfg.hw.ou_rows, cfg.hw.ou_cols) = parse_dims(ou, "--ou");
      std::tie(cfg.hw.crossbar_rows, cfg.hw.crossbar_cols) = parse_dims(crossbar, "--crossbar");
      if (index_bits > 0) cfg.hw.index_bits = index_bits;
      cfg.pattern_sim.skip_zero_inputs = skip_zero == "on";
      cfg.pattern_sim.skip_saves_cycles = skip_cycles == "on";
      cfg.baseline_sim.skip_zero_inputs = baseline_skip == "on";
      cfg.baseline_sim.skip_saves_cycles = skip_cycles == "on";
      cfg.energy_mode = energy_mode == "flat" ? OuEnergyMode::flat : OuEnergyMode::scaled_cells;

      const Report report = run_pipeline(cfg);
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.json", report_to_json(report));
      write_file(fs::path(out_dir) / "report.csv", report_to_csv(report));
      if (chart) write_file(fs::path(out_dir) / "chart.svg", report_to_svg(report));
      if (!quiet) print_summary(report);
      return 0;
    }
    if (*verify) {
      const auto result = run_verify(verify_count, verify_seed, inject);
      if (result.ok) {
        std::printf("verify: %d instances passed\n", result.instances);
        return 0;
      }
      std::fprintf(stderr, "verify: %s check failed\n%s\n", result.failed_check.c_str(), result.counterexample.c_str());
      return kExitVerifyFailed;
    }
    if (*fixture) {
      fs::create_directories(fixture_dir);
      save_weights(fs::path(fixture_dir) / "manifest.json", "weights.i16", {example16_layer()});
      std::printf("wrote %s\n", (fs::path(fixture_dir) / "manifest.json").string().c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
