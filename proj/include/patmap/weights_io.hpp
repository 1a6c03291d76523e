#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "patmap/core.hpp"

namespace patmap {

// Manifest format (weights):
//   {"layers":[{"name","out_channels","in_channels","kernel_h","kernel_w",
//               "stride","padding","dtype":"f32"|"i16","offset_bytes"}],
//    "blob":"<path relative to the manifest>"}
// Feature maps use the same convention under a "feature_maps" key with
// "channels","height","width" in place of the layer dimensions.
// Blob values are little-endian, row-major (O, I, Kh, Kw) or (C, H, W).
// f32 values are quantized per tensor with quantize_symmetric().

std::vector<LayerWeights> load_weights(const std::filesystem::path& manifest_path, int weight_bits = 16);

/// Writes every layer as i16 at consecutive offsets into `blob_name` next to the manifest.
void save_weights(const std::filesystem::path& manifest_path, const std::string& blob_name,
                  const std::vector<LayerWeights>& layers);

std::vector<FeatureMap> load_feature_maps(const std::filesystem::path& manifest_path, int bits = 16);

void save_feature_maps(const std::filesystem::path& manifest_path, const std::string& blob_name,
                       const std::vector<FeatureMap>& maps);

}  // namespace patmap
