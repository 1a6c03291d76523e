#pragma once

#include <cstdint>
#include <vector>

#include "patmap/core.hpp"

namespace patmap {

// Serialized per-layer kernel index information, MSB-first bit order.
//
//   header (112 bits): version:8  O:32  I:32  Kh:16  Kw:16  index_bits:8
//   records, in placement order:
//     mask:Kh*Kw  count:16  count x out_channel:index_bits
//
// Records of consecutive input channels are separated by a record whose mask
// is all zero and whose count is 0 (I-1 separators per layer), so the input
// channel of every block is implied by its position. Trailing bits in the
// last byte are zero.

inline constexpr int kIndexStreamVersion = 1;
inline constexpr std::uint64_t kIndexHeaderBits = 112;
inline constexpr int kIndexCountBits = 16;

struct IndexHeader {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int index_bits = 0;
  friend bool operator==(const IndexHeader&, const IndexHeader&) = default;
};

struct IndexRecord {
  Pattern pattern;                // all-zero mask marks a channel separator
  std::vector<int> out_channels;  // kernel order of the block

  bool is_separator() const { return pattern.empty(); }
  friend bool operator==(const IndexRecord&, const IndexRecord&) = default;
};

class BitWriter {
 public:
  void put(std::uint64_t value, int bits);
  std::uint64_t bit_length() const { return bits_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(const std::vector<std::uint8_t>& bytes, std::uint64_t bit_length) : bytes_(bytes), bit_length_(bit_length) {}
  std::uint64_t get(int bits);
  std::uint64_t remaining() const { return bit_length_ - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::uint64_t bit_length_;
  std::uint64_t pos_ = 0;
};

class IndexStream {
 public:
  IndexStream() = default;

  static IndexStream encode(const IndexHeader& header, const std::vector<IndexRecord>& records);
  /// Wraps raw bytes; the bit length is taken as the whole buffer.
  static IndexStream from_bytes(std::vector<std::uint8_t> bytes);

  IndexHeader header() const;
  std::vector<IndexRecord> decode() const;

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::uint64_t bit_length() const { return bit_length_; }

  friend bool operator==(const IndexStream&, const IndexStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_length_ = 0;
};

/// Exact serialized length in bits.
std::uint64_t index_overhead_bits(const IndexStream& stream);
std::uint64_t index_overhead_bytes(const IndexStream& stream);

}  // namespace patmap
