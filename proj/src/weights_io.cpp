#include "patmap/weights_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace patmap {
namespace {

using nlohmann::ordered_json;

ordered_json read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("manifest '" + path.string() + "': " + e.what());
  }
}

std::vector<unsigned char> read_blob(const std::filesystem::path& manifest_path, const ordered_json& manifest) {
  if (!manifest.contains("blob") || !manifest["blob"].is_string())
    throw Error("manifest '" + manifest_path.string() + "': missing \"blob\"");
  const auto blob_path = manifest_path.parent_path() / manifest["blob"].get<std::string>();
  std::ifstream in(blob_path, std::ios::binary);
  if (!in) throw Error("cannot open blob '" + blob_path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
T field(const ordered_json& entry, const char* key) {
  if (!entry.contains(key)) throw Error(std::string("manifest entry missing \"") + key + "\"");
  try {
    return entry[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(std::string("manifest entry has bad \"") + key + "\"");
  }
}

std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

/// Decodes `count` values of `dtype` starting at `offset`, quantizing f32 input.
std::vector<std::int16_t> decode_values(const std::vector<unsigned char>& blob, std::size_t offset, std::size_t count,
                                        const std::string& dtype, int bits, const std::string& what) {
  std::size_t width = 0;
  if (dtype == "i16")
    width = 2;
  else if (dtype == "f32")
    width = 4;
  else
    throw Error(what + ": unsupported dtype '" + dtype + "'");
  if (offset > blob.size() || blob.size() - offset < count * width)
    throw Error(what + ": blob length mismatch (need " + std::to_string(count * width) + " bytes at offset " +
                std::to_string(offset) + ", blob has " + std::to_string(blob.size()) + ")");
  const unsigned char* p = blob.data() + offset;
  if (dtype == "i16") {
    std::vector<std::int16_t> out(count);
    for (std::size_t k = 0; k < count; ++k)
      out[k] = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[2 * k] | (p[2 * k + 1] << 8)));
    return out;
  }
  std::vector<float> raw(count);
  for (std::size_t k = 0; k < count; ++k) raw[k] = std::bit_cast<float>(load_le32(p + 4 * k));
  return quantize_symmetric(raw, bits);
}

void append_le16(std::vector<unsigned char>& out, std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  out.push_back(static_cast<unsigned char>(u & 0xff));
  out.push_back(static_cast<unsigned char>(u >> 8));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void write_blob(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::vector<LayerWeights> load_weights(const std::filesystem::path& manifest_path, int weight_bits) {
  const auto manifest = read_manifest(manifest_path);
  if (!manifest.contains("layers") || !manifest["layers"].is_array())
    throw Error("manifest '" + manifest_path.string() + "': missing \"layers\" array");
  const auto blob = read_blob(manifest_path, manifest);

  std::vector<LayerWeights> layers;
  for (const auto& entry : manifest["layers"]) {
    LayerWeights layer;
    layer.name = field<std::string>(entry, "name");
    layer.out_channels = field<int>(entry, "out_channels");
    layer.in_channels = field<int>(entry, "in_channels");
    layer.kernel_h = field<int>(entry, "kernel_h");
    layer.kernel_w = field<int>(entry, "kernel_w");
    layer.stride = entry.value("stride", 1);
    layer.padding = entry.value("padding", 0);
    if (layer.out_channels <= 0 || layer.in_channels <= 0 || layer.kernel_h <= 0 || layer.kernel_w <= 0 ||
        layer.stride <= 0)
      throw Error("layer '" + layer.name + "': non-positive dimension");
    const auto offset = field<std::size_t>(entry, "offset_bytes");
    layer.weights = decode_values(blob, offset, layer.size(), field<std::string>(entry, "dtype"), weight_bits,
                                  "layer '" + layer.name + "'");
    layer.validate(weight_bits);
    layers.push_back(std::move(layer));
  }
  return layers;
}

void save_weights(const std::filesystem::path& manifest_path, const std::string& blob_name,
                  const std::vector<LayerWeights>& layers) {
  ordered_json manifest;
  manifest["layers"] = ordered_json::array();
  std::vector<unsigned char> blob;
  for (const auto& layer : layers) {
    layer.validate();
    ordered_json entry;
    entry["name"] = layer.name;
    entry["out_channels"] = layer.out_channels;
    entry["in_channels"] = layer.in_channels;
    entry["kernel_h"] = layer.kernel_h;
    entry["kernel_w"] = layer.kernel_w;
    entry["stride"] = layer.stride;
    entry["padding"] = layer.padding;
    entry["dtype"] = "i16";
    entry["offset_bytes"] = blob.size();
    manifest["layers"].push_back(std::move(entry));
    for (auto w : layer.weights) append_le16(blob, w);
  }
  manifest["blob"] = blob_name;
  write_blob(manifest_path.parent_path() / blob_name, blob);
  write_file(manifest_path, manifest.dump(2) + "\n");
}

std::vector<FeatureMap> load_feature_maps(const std::filesystem::path& manifest_path, int bits) {
  const auto manifest = read_manifest(manifest_path);
  if (!manifest.contains("feature_maps") || !manifest["feature_maps"].is_array())
    throw Error("manifest '" + manifest_path.string() + "': missing \"feature_maps\" array");
  const auto blob = read_blob(manifest_path, manifest);

  std::vector<FeatureMap> maps;
  for (const auto& entry : manifest["feature_maps"]) {
    FeatureMap fm;
    fm.name = field<std::string>(entry, "name");
    fm.channels = field<int>(entry, "channels");
    fm.height = field<int>(entry, "height");
    fm.width = field<int>(entry, "width");
    if (fm.channels <= 0 || fm.height <= 0 || fm.width <= 0)
      throw Error("feature map '" + fm.name + "': non-positive dimension");
    const auto count =
        static_cast<std::size_t>(fm.channels) * static_cast<std::size_t>(fm.height) * static_cast<std::size_t>(fm.width);
    fm.data = decode_values(blob, field<std::size_t>(entry, "offset_bytes"), count, field<std::string>(entry, "dtype"),
                            bits, "feature map '" + fm.name + "'");
    maps.push_back(std::move(fm));
  }
  return maps;
}

void save_feature_maps(const std::filesystem::path& manifest_path, const std::string& blob_name,
                       const std::vector<FeatureMap>& maps) {
  ordered_json manifest;
  manifest["feature_maps"] = ordered_json::array();
  std::vector<unsigned char> blob;
  for (const auto& fm : maps) {
    fm.validate();
    ordered_json entry;
    entry["name"] = fm.name;
    entry["channels"] = fm.channels;
    entry["height"] = fm.height;
    entry["width"] = fm.width;
    entry["dtype"] = "i16";
    entry["offset_bytes"] = blob.size();
    manifest["feature_maps"].push_back(std::move(entry));
    for (auto v : fm.data) append_le16(blob, v);
  }
  manifest["blob"] = blob_name;
  write_blob(manifest_path.parent_path() / blob_name, blob);
  write_file(manifest_path, manifest.dump(2) + "\n");
}

}  // namespace patmap
