#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace patmap {

/// Raised for every contract violation and malformed input in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Support mask of a Kh x Kw kernel, row-major. The all-zero mask is a valid pattern.
class Pattern {
 public:
  Pattern() = default;
  Pattern(int kernel_h, int kernel_w, std::vector<bool> mask);

  static Pattern zero(int kernel_h, int kernel_w);
  static Pattern dense(int kernel_h, int kernel_w);
  static Pattern from_kernel(std::span<const std::int16_t> kernel, int kernel_h, int kernel_w);
  /// Parses the "101010001" style string produced by to_string().
  static Pattern parse(const std::string& bits, int kernel_h, int kernel_w);

  int kernel_h() const { return kernel_h_; }
  int kernel_w() const { return kernel_w_; }
  int area() const { return kernel_h_ * kernel_w_; }
  int size() const { return static_cast<int>(positions_.size()); }
  bool empty() const { return positions_.empty(); }
  bool test(int pos) const { return mask_[static_cast<std::size_t>(pos)]; }
  const std::vector<bool>& mask() const { return mask_; }
  /// Row-major kernel offsets of the set bits; this is also the compression order.
  const std::vector<int>& positions() const { return positions_; }
  std::string to_string() const;

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return a.kernel_h_ == b.kernel_h_ && a.kernel_w_ == b.kernel_w_ && a.mask_ == b.mask_;
  }
  /// Lexicographic on the mask with false < true; shape compared first.
  friend std::strong_ordering operator<=>(const Pattern& a, const Pattern& b);

 private:
  int kernel_h_ = 0;
  int kernel_w_ = 0;
  std::vector<bool> mask_;
  std::vector<int> positions_;
};

/// One convolution layer's weights, O x I x Kh x Kw, signed fixed point.
struct LayerWeights {
  std::string name;
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
  int padding = 0;
  std::vector<std::int16_t> weights;

  int kernel_area() const { return kernel_h * kernel_w; }
  std::size_t kernel_count() const {
    return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels);
  }
  std::size_t size() const { return kernel_count() * static_cast<std::size_t>(kernel_area()); }

  std::size_t offset(int o, int i) const {
    return (static_cast<std::size_t>(o) * static_cast<std::size_t>(in_channels) + static_cast<std::size_t>(i)) *
           static_cast<std::size_t>(kernel_area());
  }
  std::span<const std::int16_t> kernel(int o, int i) const {
    return {weights.data() + offset(o, i), static_cast<std::size_t>(kernel_area())};
  }
  std::span<std::int16_t> kernel(int o, int i) {
    return {weights.data() + offset(o, i), static_cast<std::size_t>(kernel_area())};
  }
  std::int16_t at(int o, int i, int r, int c) const { return weights[offset(o, i) + static_cast<std::size_t>(r * kernel_w + c)]; }

  /// Throws Error if dimensions are non-positive or the tensor length is wrong.
  void validate(int weight_bits = 16) const;
};

std::size_t count_nonzero(std::span<const std::int16_t> values);

/// Fraction of zero weights in the layer.
double sparsity(const LayerWeights& layer);

/// Largest representable magnitude of a symmetric signed value of `bits` width.
std::int32_t max_magnitude(int bits);

/// Symmetric max-abs quantization: the largest |v| maps to 2^(bits-1)-1.
std::vector<std::int16_t> quantize_symmetric(std::span<const float> values, int bits);

struct HardwareConfig {
  int ou_rows = 9;
  int ou_cols = 8;
  int crossbar_rows = 512;
  int crossbar_cols = 512;
  int bits_per_cell = 4;
  int weight_bits = 16;
  int cells_per_weight = 1;
  double e_adc_pj = 1.67;
  double e_dac_pj = 0.0182;
  double e_ou_pj = 4.8;
  /// Unset means auto: ceil(log2(out_channels)).
  std::optional<int> index_bits;

  void validate() const;
  int resolve_index_bits(int out_channels) const;
};

/// ceil(log2(n)) for n >= 1.
int ceil_log2(std::uint64_t n);

/// C x H x W activation map (batch of one).
struct FeatureMap {
  std::string name;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<std::int16_t> data;

  std::int16_t at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                    static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  void validate() const;
};

/// Convolution output, kept in 64-bit accumulators.
struct OutputMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<std::int64_t> data;

  std::int64_t& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                    static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  std::int64_t at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                    static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  friend bool operator==(const OutputMap&, const OutputMap&) = default;
};

/// Output spatial extent of a convolution; throws if the kernel does not fit.
int conv_output_extent(int input, int kernel, int stride, int padding);

}  // namespace patmap
