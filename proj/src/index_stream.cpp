#include "patmap/index_stream.hpp"

#include <algorithm>

namespace patmap {

void BitWriter::put(std::uint64_t value, int bits) {
  for (int b = bits - 1; b >= 0; --b) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> b) & 1U) bytes_.back() = static_cast<std::uint8_t>(bytes_.back() | (0x80U >> (bits_ % 8)));
    ++bits_;
  }
}

std::uint64_t BitReader::get(int bits) {
  if (static_cast<std::uint64_t>(bits) > remaining()) throw Error("index stream: truncated record");
  std::uint64_t v = 0;
  for (int b = 0; b < bits; ++b, ++pos_) v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U);
  return v;
}

IndexStream IndexStream::encode(const IndexHeader& h, const std::vector<IndexRecord>& records) {
  if (h.out_channels <= 0 || h.in_channels <= 0 || h.kernel_h <= 0 || h.kernel_w <= 0 || h.kernel_h > 0xffff ||
      h.kernel_w > 0xffff || h.index_bits < 0 || h.index_bits > 32)
    throw Error("index stream: bad header");
  BitWriter w;
  w.put(kIndexStreamVersion, 8);
  w.put(static_cast<std::uint32_t>(h.out_channels), 32);
  w.put(static_cast<std::uint32_t>(h.in_channels), 32);
  w.put(static_cast<std::uint32_t>(h.kernel_h), 16);
  w.put(static_cast<std::uint32_t>(h.kernel_w), 16);
  w.put(static_cast<std::uint32_t>(h.index_bits), 8);
  for (const auto& rec : records) {
    if (rec.pattern.kernel_h() != h.kernel_h || rec.pattern.kernel_w() != h.kernel_w)
      throw Error("index stream: record pattern shape differs from header");
    if (rec.out_channels.size() > 0xffff) throw Error("index stream: kernel count exceeds 16 bits");
    for (bool b : rec.pattern.mask()) w.put(b ? 1 : 0, 1);
    w.put(rec.out_channels.size(), kIndexCountBits);
    for (int o : rec.out_channels) {
      if (o < 0 || o >= h.out_channels) throw Error("index stream: output index out of range");
      w.put(static_cast<std::uint64_t>(o), h.index_bits);
    }
  }
  IndexStream s;
  s.bit_length_ = w.bit_length();
  s.bytes_ = w.take();
  return s;
}

IndexStream IndexStream::from_bytes(std::vector<std::uint8_t> bytes) {
  IndexStream s;
  s.bit_length_ = static_cast<std::uint64_t>(bytes.size()) * 8;
  s.bytes_ = std::move(bytes);
  return s;
}

namespace {

IndexHeader read_header(BitReader& r) {
  if (r.remaining() < kIndexHeaderBits) throw Error("index stream: truncated header");
  if (r.get(8) != kIndexStreamVersion) throw Error("index stream: unsupported version");
  IndexHeader h;
  h.out_channels = static_cast<int>(r.get(32));
  h.in_channels = static_cast<int>(r.get(32));
  h.kernel_h = static_cast<int>(r.get(16));
  h.kernel_w = static_cast<int>(r.get(16));
  h.index_bits = static_cast<int>(r.get(8));
  if (h.out_channels <= 0 || h.in_channels <= 0 || h.kernel_h <= 0 || h.kernel_w <= 0 || h.index_bits > 32)
    throw Error("index stream: bad header");
  if (ceil_log2(static_cast<std::uint64_t>(h.out_channels)) > h.index_bits)
    throw Error("index stream: index_bits too narrow for O");
  return h;
}

}  // namespace

IndexHeader IndexStream::header() const {
  BitReader r(bytes_, bit_length_);
  return read_header(r);
}

std::vector<IndexRecord> IndexStream::decode() const {
  BitReader r(bytes_, bit_length_);
  const IndexHeader h = read_header(r);

  const auto area = static_cast<std::uint64_t>(h.kernel_h) * static_cast<std::uint64_t>(h.kernel_w);
  std::vector<IndexRecord> records;
  while (r.remaining() >= area + kIndexCountBits) {
    std::vector<bool> mask(area);
    for (std::uint64_t p = 0; p < area; ++p) mask[p] = r.get(1) != 0;
    IndexRecord rec{Pattern(h.kernel_h, h.kernel_w, std::move(mask)), {}};
    const auto count = r.get(kIndexCountBits);
    if (rec.is_separator() && count != 0) throw Error("index stream: separator record with nonzero count");
    rec.out_channels.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      const auto o = r.get(h.index_bits);
      if (o >= static_cast<std::uint64_t>(h.out_channels))
        throw Error("index stream: output index " + std::to_string(o) + " >= O = " + std::to_string(h.out_channels));
      rec.out_channels.push_back(static_cast<int>(o));
    }
    records.push_back(std::move(rec));
  }
  // Whatever is left must be byte padding.
  const auto left = r.remaining();
  if (left >= 8) throw Error("index stream: truncated record");
  if (left > 0 && r.get(static_cast<int>(left)) != 0) throw Error("index stream: nonzero padding");
  return records;
}

std::uint64_t index_overhead_bits(const IndexStream& stream) { return stream.bit_length(); }

std::uint64_t index_overhead_bytes(const IndexStream& stream) { return (stream.bit_length() + 7) / 8; }

}  // namespace patmap
