#include "patmap/reference.hpp"

namespace patmap {

OutputMap reference_conv2d(const LayerWeights& layer, const FeatureMap& input) {
  layer.validate();
  input.validate();
  if (input.channels != layer.in_channels) throw Error("reference_conv2d: channel mismatch");

  OutputMap out;
  out.channels = layer.out_channels;
  out.height = conv_output_extent(input.height, layer.kernel_h, layer.stride, layer.padding);
  out.width = conv_output_extent(input.width, layer.kernel_w, layer.stride, layer.padding);
  out.data.assign(static_cast<std::size_t>(out.channels * out.height * out.width), 0);

  for (int o = 0; o < layer.out_channels; ++o)
    for (int oy = 0; oy < out.height; ++oy)
      for (int ox = 0; ox < out.width; ++ox) {
        std::int64_t acc = 0;
        for (int i = 0; i < layer.in_channels; ++i)
          for (int r = 0; r < layer.kernel_h; ++r)
            for (int c = 0; c < layer.kernel_w; ++c) {
              const int y = oy * layer.stride + r - layer.padding;
              const int x = ox * layer.stride + c - layer.padding;
              if (y < 0 || x < 0 || y >= input.height || x >= input.width) continue;
              acc += static_cast<std::int64_t>(layer.at(o, i, r, c)) * input.at(i, y, x);
            }
        out.at(o, oy, ox) = acc;
      }
  return out;
}

}  // namespace patmap
