#include "patmap/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace patmap {

DistanceMetric parse_metric(const std::string& name) {
  if (name == "hamming") return DistanceMetric::hamming;
  if (name == "cosine") return DistanceMetric::cosine;
  throw Error("unsupported distance metric '" + name + "'");
}

std::string to_string(DistanceMetric metric) { return metric == DistanceMetric::hamming ? "hamming" : "cosine"; }

LayerWeights magnitude_prune(const LayerWeights& layer, double target_sparsity) {
  if (!(target_sparsity >= 0.0 && target_sparsity < 1.0))
    throw Error("magnitude_prune: target sparsity must be in [0, 1), got " + std::to_string(target_sparsity));
  layer.validate();

  const std::size_t n = layer.weights.size();
  // Smallest zero count k with k/n >= target.
  auto needed = static_cast<std::size_t>(std::ceil(target_sparsity * static_cast<double>(n)));
  while (needed > 0 && static_cast<double>(needed - 1) / static_cast<double>(n) >= target_sparsity) --needed;
  while (needed < n && static_cast<double>(needed) / static_cast<double>(n) < target_sparsity) ++needed;

  LayerWeights out = layer;
  const std::size_t zeros = n - count_nonzero(layer.weights);
  if (zeros >= needed) return out;

  std::vector<std::size_t> order;
  order.reserve(n - zeros);
  for (std::size_t k = 0; k < n; ++k)
    if (layer.weights[k] != 0) order.push_back(k);
  const auto magnitude = [&](std::size_t k) { return std::abs(static_cast<int>(layer.weights[k])); };
  const std::size_t cut = needed - zeros;
  // Flat index order is (o, i, r, c) ascending, so it doubles as the tie-break.
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut - 1), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const int ma = magnitude(a), mb = magnitude(b);
                     return ma != mb ? ma < mb : a < b;
                   });
  for (std::size_t k = 0; k < cut; ++k) out.weights[order[k]] = 0;
  return out;
}

PatternHistogram extract_histogram(const LayerWeights& layer) {
  layer.validate();
  std::map<Pattern, std::uint64_t> counts;
  for (int o = 0; o < layer.out_channels; ++o)
    for (int i = 0; i < layer.in_channels; ++i)
      ++counts[Pattern::from_kernel(layer.kernel(o, i), layer.kernel_h, layer.kernel_w)];

  PatternHistogram hist;
  hist.total = layer.kernel_count();
  hist.entries.reserve(counts.size());
  for (auto& [pattern, count] : counts) hist.entries.push_back({pattern, count});
  return hist;
}

std::vector<Pattern> select_candidates(const PatternHistogram& hist, int budget, bool include_zero) {
  if (hist.entries.empty()) throw Error("select_candidates: empty histogram");
  if (budget < 1) throw Error("select_candidates: budget must be >= 1");

  std::vector<const PatternCount*> ranked;
  ranked.reserve(hist.entries.size());
  for (const auto& e : hist.entries) ranked.push_back(&e);
  std::sort(ranked.begin(), ranked.end(), [](const PatternCount* a, const PatternCount* b) {
    if (a->count != b->count) return a->count > b->count;
    if (a->pattern.size() != b->pattern.size()) return a->pattern.size() > b->pattern.size();
    return a->pattern < b->pattern;
  });

  std::vector<Pattern> chosen;
  const auto take = std::min(ranked.size(), static_cast<std::size_t>(budget));
  for (std::size_t k = 0; k < take; ++k) chosen.push_back(ranked[k]->pattern);
  if (include_zero && std::none_of(chosen.begin(), chosen.end(), [](const Pattern& p) { return p.empty(); })) {
    const auto& shape = chosen.front();
    chosen.push_back(Pattern::zero(shape.kernel_h(), shape.kernel_w()));
  }
  return chosen;
}

double pattern_distance(std::span<const std::int16_t> kernel, const Pattern& candidate, DistanceMetric metric) {
  if (kernel.size() != static_cast<std::size_t>(candidate.area()))
    throw Error("pattern_distance: kernel/pattern size mismatch");
  if (metric == DistanceMetric::hamming) {
    int d = 0;
    for (std::size_t p = 0; p < kernel.size(); ++p) d += (kernel[p] != 0) != candidate.test(static_cast<int>(p));
    return d;
  }
  // Cosine between |kernel| and the 0/1 mask.
  double dot = 0.0, norm_sq = 0.0;
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    const double a = std::abs(static_cast<double>(kernel[p]));
    norm_sq += a * a;
    if (candidate.test(static_cast<int>(p))) dot += a;
  }
  const bool kernel_zero = norm_sq == 0.0;
  const bool mask_zero = candidate.empty();
  if (kernel_zero || mask_zero) return kernel_zero && mask_zero ? 0.0 : 1.0;
  return 1.0 - dot / (std::sqrt(norm_sq) * std::sqrt(static_cast<double>(candidate.size())));
}

namespace {

std::int64_t retained_norm_sq(std::span<const std::int16_t> kernel, const Pattern& mask) {
  std::int64_t s = 0;
  for (int p : mask.positions()) s += static_cast<std::int64_t>(kernel[static_cast<std::size_t>(p)]) * kernel[static_cast<std::size_t>(p)];
  return s;
}

bool same_distance(double a, double b, DistanceMetric metric) {
  if (metric == DistanceMetric::hamming) return a == b;
  return std::fabs(a - b) <= 1e-12;
}

}  // namespace

Projection project_kernel(std::span<const std::int16_t> kernel, std::span<const Pattern> candidates,
                          DistanceMetric metric) {
  if (candidates.empty()) throw Error("project_kernel: empty candidate list");
  int best = 0;
  double best_dist = pattern_distance(kernel, candidates[0], metric);
  std::int64_t best_norm = retained_norm_sq(kernel, candidates[0]);
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    const double d = pattern_distance(kernel, candidates[j], metric);
    const std::int64_t norm = retained_norm_sq(kernel, candidates[j]);
    const bool tie = same_distance(d, best_dist, metric);
    if ((!tie && d < best_dist) || (tie && norm > best_norm)) {
      best = static_cast<int>(j);
      best_dist = d;
      best_norm = norm;
    }
  }
  Projection out{best, std::vector<std::int16_t>(kernel.size(), 0)};
  for (int p : candidates[static_cast<std::size_t>(best)].positions())
    out.kernel[static_cast<std::size_t>(p)] = kernel[static_cast<std::size_t>(p)];
  return out;
}

PrunedLayer prune_layer(const LayerWeights& layer, int budget, DistanceMetric metric, bool include_zero) {
  const auto hist = extract_histogram(layer);
  PrunedLayer out{layer, {}};
  out.assignment.candidates = select_candidates(hist, budget, include_zero);
  out.assignment.in_channels = layer.in_channels;
  out.assignment.kernel_pattern.resize(layer.kernel_count());
  for (int o = 0; o < layer.out_channels; ++o) {
    for (int i = 0; i < layer.in_channels; ++i) {
      auto proj = project_kernel(layer.kernel(o, i), out.assignment.candidates, metric);
      std::copy(proj.kernel.begin(), proj.kernel.end(), out.layer.kernel(o, i).begin());
      out.assignment.kernel_pattern[layer.offset(o, i) / static_cast<std::size_t>(layer.kernel_area())] = proj.pattern_id;
    }
  }
  return out;
}

LayerWeights apply_masks(const LayerWeights& dense, const PatternAssignment& assignment) {
  if (assignment.in_channels != dense.in_channels || assignment.kernel_pattern.size() != dense.kernel_count())
    throw Error("assignment does not cover layer '" + dense.name + "'");
  LayerWeights out = dense;
  for (int o = 0; o < dense.out_channels; ++o)
    for (int i = 0; i < dense.in_channels; ++i) {
      const auto& mask = assignment.pattern(o, i);
      auto k = out.kernel(o, i);
      for (std::size_t p = 0; p < k.size(); ++p)
        if (!mask.test(static_cast<int>(p))) k[p] = 0;
    }
  return out;
}

PatternAssignment assignment_from_supports(const LayerWeights& layer) {
  const auto hist = extract_histogram(layer);
  PatternAssignment a;
  a.in_channels = layer.in_channels;
  for (const auto& e : hist.entries) a.candidates.push_back(e.pattern);
  a.kernel_pattern.resize(layer.kernel_count());
  for (int o = 0; o < layer.out_channels; ++o)
    for (int i = 0; i < layer.in_channels; ++i) {
      const auto p = Pattern::from_kernel(layer.kernel(o, i), layer.kernel_h, layer.kernel_w);
      const auto it = std::lower_bound(a.candidates.begin(), a.candidates.end(), p);
      a.kernel_pattern[static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in_channels) + static_cast<std::size_t>(i)] =
          static_cast<int>(it - a.candidates.begin());
    }
  return a;
}

void check_assignment(const LayerWeights& layer, const PatternAssignment& assignment) {
  if (assignment.in_channels != layer.in_channels || assignment.kernel_pattern.size() != layer.kernel_count())
    throw Error("assignment does not cover layer '" + layer.name + "'");
  for (const auto& c : assignment.candidates)
    if (c.kernel_h() != layer.kernel_h || c.kernel_w() != layer.kernel_w)
      throw Error("assignment pattern shape does not match layer '" + layer.name + "'");
  for (int o = 0; o < layer.out_channels; ++o)
    for (int i = 0; i < layer.in_channels; ++i) {
      const int id = assignment.pattern_of(o, i);
      if (id < 0 || static_cast<std::size_t>(id) >= assignment.candidates.size())
        throw Error("assignment pattern id out of range");
      const auto& mask = assignment.candidates[static_cast<std::size_t>(id)];
      const auto k = layer.kernel(o, i);
      for (std::size_t p = 0; p < k.size(); ++p)
        if (k[p] != 0 && !mask.test(static_cast<int>(p)))
          throw Error("assignment/kernel support mismatch at kernel (" + std::to_string(o) + ", " + std::to_string(i) +
                      ")");
    }
}

}  // namespace patmap
