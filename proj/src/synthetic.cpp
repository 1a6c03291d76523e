#include "patmap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace patmap {

std::vector<ConvShape> vgg16_conv_shapes(int input_size, int width_divisor) {
  if (input_size < 16 || width_divisor < 1) throw Error("vgg16: input size must be >= 16 and divisor >= 1");
  struct Stage {
    int width;
    int layers;
  };
  const Stage stages[] = {{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}};
  std::vector<ConvShape> shapes;
  int in = 3, size = input_size, stage_no = 1;
  for (const auto& st : stages) {
    const int width = std::max(1, st.width / width_divisor);
    for (int l = 1; l <= st.layers; ++l) {
      shapes.push_back({"conv" + std::to_string(stage_no) + "_" + std::to_string(l), in, width, 3, size});
      in = width;
    }
    size = std::max(1, size / 2);
    ++stage_no;
  }
  return shapes;
}

std::vector<int> vgg16_reference_budgets() { return {2, 2, 2, 6, 8, 8, 8, 6, 5, 4, 6, 6, 8}; }

namespace {

int pick_weighted(const std::vector<double>& weights, Rng& rng) {
  std::discrete_distribution<int> d(weights.begin(), weights.end());
  return d(rng);
}

Pattern random_mask(int kh, int kw, int size, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(kh * kw));
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<bool> mask(idx.size(), false);
  for (int k = 0; k < size; ++k) mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = true;
  return Pattern(kh, kw, std::move(mask));
}

}  // namespace

LayerWeights synthesize_patterned_layer(const ConvShape& shape, int latent_patterns, const PatternedLayerParams& params,
                                        Rng& rng) {
  if (latent_patterns < 1) throw Error("synthesize_patterned_layer: need at least one latent pattern");
  const int k = shape.kernel;
  const int max_size = std::min<int>(static_cast<int>(params.size_weights.size()), k * k);

  // Distinct latent masks, sizes drawn from size_weights.
  std::set<Pattern> seen;
  std::vector<Pattern> pool;
  const int wanted = std::min(latent_patterns, (1 << std::min(k * k, 20)) - 1);
  while (static_cast<int>(pool.size()) < wanted) {
    std::vector<double> w(params.size_weights.begin(), params.size_weights.begin() + max_size);
    const int size = pick_weighted(w, rng) + 1;
    auto p = random_mask(k, k, size, rng);
    if (seen.insert(p).second) pool.push_back(std::move(p));
  }
  // Zipf-like popularity over the pool.
  std::vector<double> popularity;
  for (std::size_t j = 0; j < pool.size(); ++j) popularity.push_back(1.0 / static_cast<double>(j + 1));

  std::bernoulli_distribution is_zero(params.zero_kernel_ratio);
  std::normal_distribution<float> gauss(0.0F, 1.0F);
  std::bernoulli_distribution sign(0.5);

  std::vector<float> raw(static_cast<std::size_t>(shape.out_channels) * static_cast<std::size_t>(shape.in_channels) *
                         static_cast<std::size_t>(k * k));
  std::size_t at = 0;
  for (int o = 0; o < shape.out_channels; ++o)
    for (int i = 0; i < shape.in_channels; ++i) {
      const Pattern* mask = is_zero(rng) ? nullptr : &pool[static_cast<std::size_t>(pick_weighted(popularity, rng))];
      for (int p = 0; p < k * k; ++p, ++at) {
        if (mask && mask->test(p)) {
          const float m = 0.5F + std::fabs(gauss(rng));
          raw[at] = sign(rng) ? m : -m;
        } else {
          raw[at] = gauss(rng) * static_cast<float>(params.noise_stddev);
        }
      }
    }

  LayerWeights layer;
  layer.name = shape.name;
  layer.out_channels = shape.out_channels;
  layer.in_channels = shape.in_channels;
  layer.kernel_h = k;
  layer.kernel_w = k;
  layer.stride = 1;
  layer.padding = k / 2;
  layer.weights = quantize_symmetric(raw, params.weight_bits);
  return layer;
}

FeatureMap synthesize_feature_map(int channels, int height, int width, double zero_fraction, Rng& rng, int max_value) {
  FeatureMap fm;
  fm.channels = channels;
  fm.height = height;
  fm.width = width;
  fm.data.resize(static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  std::bernoulli_distribution zero(zero_fraction);
  std::uniform_int_distribution<int> value(1, max_value);
  for (auto& v : fm.data) v = zero(rng) ? std::int16_t{0} : static_cast<std::int16_t>(value(rng));
  fm.validate();
  return fm;
}

RandomInstance random_instance(Rng& rng, int max_channels, int max_input) {
  const int kernels[] = {1, 3, 5};
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  RandomInstance inst;
  auto& layer = inst.layer;
  layer.name = "random";
  layer.kernel_h = layer.kernel_w = kernels[uniform(0, 2)];
  layer.out_channels = uniform(1, max_channels);
  layer.in_channels = uniform(1, max_channels);
  layer.stride = uniform(1, 2);
  layer.padding = uniform(0, layer.kernel_h / 2);
  const int min_input = std::max(1, layer.kernel_h - 2 * layer.padding);
  const int h = uniform(min_input, max_input);
  const int w = uniform(min_input, max_input);

  // Irregular sparsity with a share of all-zero kernels.
  const double density = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  const double zero_kernels = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
  std::bernoulli_distribution keep(density), dead(zero_kernels);
  layer.weights.resize(layer.size());
  for (int o = 0; o < layer.out_channels; ++o)
    for (int i = 0; i < layer.in_channels; ++i) {
      const bool all_zero = dead(rng);
      for (auto& v : layer.kernel(o, i)) {
        const int mag = uniform(1, 2000);
        v = static_cast<std::int16_t>(!all_zero && keep(rng) ? (uniform(0, 1) ? mag : -mag) : 0);
      }
    }

  inst.input = synthesize_feature_map(layer.in_channels, h, w, std::uniform_real_distribution<double>(0.0, 0.8)(rng), rng,
                                      255);
  // Blank a rectangle so some windows are entirely zero.
  const int by = uniform(0, h - 1), bx = uniform(0, w - 1);
  const int bh = uniform(1, h - by), bw = uniform(1, w - bx);
  for (int c = 0; c < layer.in_channels; ++c)
    for (int y = by; y < by + bh; ++y)
      for (int x = bx; x < bx + bw; ++x)
        inst.input.data[(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) + static_cast<std::size_t>(y)) *
                            static_cast<std::size_t>(w) +
                        static_cast<std::size_t>(x)] = 0;

  inst.budget = uniform(1, 8);
  inst.metric = uniform(0, 1) ? DistanceMetric::cosine : DistanceMetric::hamming;
  inst.include_zero = uniform(0, 3) != 0;
  return inst;
}

LayerWeights example16_layer() {
  // A: main diagonal, B: middle column ends, C: center.
  const Pattern a = Pattern::parse("100010001", 3, 3);
  const Pattern b = Pattern::parse("010000010", 3, 3);
  const Pattern c = Pattern::parse("000010000", 3, 3);
  const Pattern* order[16] = {&a, &b, &c, &a, nullptr, &b, &a, &c, &b, &a, nullptr, &b, &a, &c, &b, &a};

  LayerWeights layer;
  layer.name = "example16";
  layer.out_channels = 16;
  layer.in_channels = 1;
  layer.kernel_h = layer.kernel_w = 3;
  layer.stride = 1;
  layer.padding = 1;
  layer.weights.assign(144, 0);
  for (int o = 0; o < 16; ++o) {
    if (!order[o]) continue;
    for (int p : order[o]->positions())
      layer.kernel(o, 0)[static_cast<std::size_t>(p)] = static_cast<std::int16_t>((o % 2 ? -1 : 1) * (10 * (o + 1) + p));
  }
  return layer;
}

}  // namespace patmap
