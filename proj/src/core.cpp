#include "patmap/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace patmap {

Pattern::Pattern(int kernel_h, int kernel_w, std::vector<bool> mask)
    : kernel_h_(kernel_h), kernel_w_(kernel_w), mask_(std::move(mask)) {
  if (kernel_h <= 0 || kernel_w <= 0) throw Error("pattern: non-positive kernel dimension");
  if (mask_.size() != static_cast<std::size_t>(kernel_h * kernel_w)) throw Error("pattern: mask length mismatch");
  for (std::size_t p = 0; p < mask_.size(); ++p)
    if (mask_[p]) positions_.push_back(static_cast<int>(p));
}

Pattern Pattern::zero(int kernel_h, int kernel_w) {
  return Pattern(kernel_h, kernel_w, std::vector<bool>(static_cast<std::size_t>(kernel_h * kernel_w), false));
}

Pattern Pattern::dense(int kernel_h, int kernel_w) {
  return Pattern(kernel_h, kernel_w, std::vector<bool>(static_cast<std::size_t>(kernel_h * kernel_w), true));
}

Pattern Pattern::from_kernel(std::span<const std::int16_t> kernel, int kernel_h, int kernel_w) {
  std::vector<bool> mask(kernel.size());
  for (std::size_t p = 0; p < kernel.size(); ++p) mask[p] = kernel[p] != 0;
  return Pattern(kernel_h, kernel_w, std::move(mask));
}

Pattern Pattern::parse(const std::string& bits, int kernel_h, int kernel_w) {
  std::vector<bool> mask;
  mask.reserve(bits.size());
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw Error("pattern: bad mask character '" + std::string(1, ch) + "'");
    mask.push_back(ch == '1');
  }
  return Pattern(kernel_h, kernel_w, std::move(mask));
}

std::string Pattern::to_string() const {
  std::string s;
  s.reserve(mask_.size());
  for (bool b : mask_) s.push_back(b ? '1' : '0');
  return s;
}

std::strong_ordering operator<=>(const Pattern& a, const Pattern& b) {
  if (auto c = a.kernel_h_ <=> b.kernel_h_; c != 0) return c;
  if (auto c = a.kernel_w_ <=> b.kernel_w_; c != 0) return c;
  if (std::lexicographical_compare(a.mask_.begin(), a.mask_.end(), b.mask_.begin(), b.mask_.end()))
    return std::strong_ordering::less;
  if (std::lexicographical_compare(b.mask_.begin(), b.mask_.end(), a.mask_.begin(), a.mask_.end()))
    return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

void LayerWeights::validate(int weight_bits) const {
  if (out_channels <= 0 || in_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 || stride <= 0)
    throw Error("layer '" + name + "': non-positive dimension");
  if (padding < 0) throw Error("layer '" + name + "': negative padding");
  if (weights.size() != size())
    throw Error("layer '" + name + "': weights length " + std::to_string(weights.size()) + " != O*I*Kh*Kw = " +
                std::to_string(size()));
  const std::int32_t limit = max_magnitude(weight_bits);
  for (auto w : weights)
    if (std::abs(static_cast<std::int32_t>(w)) > limit)
      throw Error("layer '" + name + "': weight " + std::to_string(w) + " exceeds " + std::to_string(weight_bits) +
                  "-bit range");
}

std::size_t count_nonzero(std::span<const std::int16_t> values) {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](std::int16_t v) { return v != 0; }));
}

double sparsity(const LayerWeights& layer) {
  if (layer.weights.empty()) return 0.0;
  const auto zeros = layer.weights.size() - count_nonzero(layer.weights);
  return static_cast<double>(zeros) / static_cast<double>(layer.weights.size());
}

std::int32_t max_magnitude(int bits) {
  if (bits < 2 || bits > 16) throw Error("weight_bits must be in [2, 16], got " + std::to_string(bits));
  return (std::int32_t{1} << (bits - 1)) - 1;
}

std::vector<std::int16_t> quantize_symmetric(std::span<const float> values, int bits) {
  const double qmax = max_magnitude(bits);
  double max_abs = 0.0;
  for (float v : values) {
    if (!std::isfinite(v)) throw Error("quantize: non-finite value");
    max_abs = std::max(max_abs, std::fabs(static_cast<double>(v)));
  }
  std::vector<std::int16_t> out(values.size(), 0);
  if (max_abs == 0.0) return out;
  const double scale = qmax / max_abs;
  for (std::size_t k = 0; k < values.size(); ++k) {
    double q = std::nearbyint(static_cast<double>(values[k]) * scale);
    q = std::clamp(q, -qmax, qmax);
    out[k] = static_cast<std::int16_t>(q);
  }
  return out;
}

int ceil_log2(std::uint64_t n) {
  if (n == 0) throw Error("ceil_log2 of zero");
  return n == 1 ? 0 : static_cast<int>(std::bit_width(n - 1));
}

void HardwareConfig::validate() const {
  if (ou_rows <= 0 || ou_cols <= 0 || crossbar_rows <= 0 || crossbar_cols <= 0 || bits_per_cell <= 0 ||
      weight_bits <= 0 || cells_per_weight <= 0)
    throw Error("hardware config: all counts must be positive");
  if (ou_rows > crossbar_rows || ou_cols > crossbar_cols)
    throw Error("hardware config: OU larger than crossbar");
  if (e_adc_pj < 0 || e_dac_pj < 0 || e_ou_pj < 0) throw Error("hardware config: negative energy");
  if (index_bits && (*index_bits < 0 || *index_bits > 32)) throw Error("hardware config: index_bits out of range");
}

int HardwareConfig::resolve_index_bits(int out_channels) const {
  if (out_channels <= 0) throw Error("resolve_index_bits: non-positive output channel count");
  const int needed = ceil_log2(static_cast<std::uint64_t>(out_channels));
  if (!index_bits) return needed;
  if (*index_bits < needed)
    throw Error("index_bits " + std::to_string(*index_bits) + " cannot address " + std::to_string(out_channels) +
                " output channels");
  return *index_bits;
}

void FeatureMap::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0) throw Error("feature map '" + name + "': non-positive dimension");
  if (data.size() != static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    throw Error("feature map '" + name + "': data length mismatch");
}

int conv_output_extent(int input, int kernel, int stride, int padding) {
  const int span = input + 2 * padding - kernel;
  if (span < 0) throw Error("convolution: kernel larger than padded input");
  return span / stride + 1;
}

}  // namespace patmap
