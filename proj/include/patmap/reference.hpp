#pragma once

#include "patmap/core.hpp"

namespace patmap {

/// Direct nested-loop convolution with zero padding; no mapping involved.
OutputMap reference_conv2d(const LayerWeights& layer, const FeatureMap& input);

}  // namespace patmap
