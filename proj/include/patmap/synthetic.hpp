#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "patmap/core.hpp"
#include "patmap/pruner.hpp"

namespace patmap {

using Rng = std::mt19937_64;

struct ConvShape {
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int input_size = 0;  // square input extent seen by this layer
};

/// The 13 convolution layers of VGG16 (3x3, stride 1, pad 1). Channel widths
/// are divided by `width_divisor`; spatial size halves after every pooling stage.
std::vector<ConvShape> vgg16_conv_shapes(int input_size = 32, int width_divisor = 1);

/// Per-layer pattern budgets of a 13-layer pattern-pruned VGG16 (includes the all-zero pattern).
std::vector<int> vgg16_reference_budgets();

/// Statistics of an irregularly pruned layer whose kernels cluster around a few patterns.
struct PatternedLayerParams {
  double zero_kernel_ratio = 0.409;
  /// Relative weights of nonzero-pattern sizes 1, 2, 3, ...
  std::vector<double> size_weights{0.25, 0.45, 0.25, 0.05};
  /// Off-pattern weights are drawn with this standard deviation (pattern weights are >= 0.5).
  double noise_stddev = 0.05;
  int weight_bits = 16;
};

/// Dense float weights built around `latent_patterns` nonzero masks plus the
/// all-zero pattern, quantized to int16. Magnitude pruning afterwards recovers
/// an irregular support dominated by those masks.
LayerWeights synthesize_patterned_layer(const ConvShape& shape, int latent_patterns, const PatternedLayerParams& params,
                                        Rng& rng);

/// Random post-ReLU style activations: each value is zero with probability
/// `zero_fraction`, else uniform in [1, max_value].
FeatureMap synthesize_feature_map(int channels, int height, int width, double zero_fraction, Rng& rng,
                                  int max_value = 127);

/// Random irregular layer for property checks: K in {1,3,5}, I,O <= 32.
struct RandomInstance {
  LayerWeights layer;
  FeatureMap input;
  int budget = 1;
  DistanceMetric metric = DistanceMetric::hamming;
  bool include_zero = true;
};
RandomInstance random_instance(Rng& rng, int max_channels = 32, int max_input = 16);

/// One input channel, sixteen 3x3 kernels on three nonzero patterns
/// (sizes 3, 2, 1 used 6, 5, 3 times) plus two all-zero kernels.
LayerWeights example16_layer();

}  // namespace patmap
