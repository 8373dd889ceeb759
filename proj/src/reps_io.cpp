#include "cdepth/reps_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "cdepth/errors.hpp"

namespace cdepth {

namespace {

constexpr std::array<std::uint8_t, 4> kLayerMagic = {'C', 'D', 'R', '1'};
constexpr std::array<std::uint8_t, 4> kLabelMagic = {'C', 'D', 'L', '1'};
constexpr std::size_t kLayerHeader = 12;
constexpr std::size_t kLabelHeader = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | in[offset + static_cast<std::size_t>(k)];
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw ShapeMismatch(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

bool has_magic(std::span<const std::uint8_t> bytes, const std::array<std::uint8_t, 4>& magic) {
  return bytes.size() >= 4 && std::equal(magic.begin(), magic.end(), bytes.begin());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

void RepresentationMatrix::validate() const {
  if (data.size() != n * d_model) {
    throw ShapeMismatch("matrix data length " + std::to_string(data.size()) + " != n*d_model (" +
                        std::to_string(n) + "*" + std::to_string(d_model) + ")");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) throw NonFiniteValue(i);
  }
}

std::vector<std::uint8_t> encode_layer(const RepresentationMatrix& matrix) {
  matrix.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kLayerHeader + matrix.data.size() * 4);
  out.insert(out.end(), kLayerMagic.begin(), kLayerMagic.end());
  put_u32(out, checked_u32(matrix.n, "n"));
  put_u32(out, checked_u32(matrix.d_model, "d_model"));
  for (float v : matrix.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

RepresentationMatrix decode_layer(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4) throw TruncatedFile(source, kLayerHeader, bytes.size());
  if (!has_magic(bytes, kLayerMagic)) throw BadMagic(source, "CDR1");
  if (bytes.size() < kLayerHeader) throw TruncatedFile(source, kLayerHeader, bytes.size());

  RepresentationMatrix m;
  m.n = get_u32(bytes, 4);
  m.d_model = get_u32(bytes, 8);
  const std::uint64_t required = std::uint64_t{m.n} * m.d_model * 4;
  const std::size_t payload = bytes.size() - kLayerHeader;
  if (required > payload) throw TruncatedFile(source, required, payload);
  if (required < payload) {
    throw ShapeMismatch(source + ": " + std::to_string(payload - required) + " trailing bytes");
  }

  m.data.resize(m.n * m.d_model);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    m.data[i] = std::bit_cast<float>(get_u32(bytes, kLayerHeader + 4 * i));
    if (!std::isfinite(m.data[i])) throw NonFiniteValue(i, source);
  }
  return m;
}

void write_layer(const RepresentationMatrix& matrix, const std::filesystem::path& path) {
  write_file(path, encode_layer(matrix));
}

RepresentationMatrix read_layer(const std::filesystem::path& path) {
  return decode_layer(read_file(path), path.string());
}

std::vector<std::uint8_t> encode_labels(const LabelVector& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(kLabelHeader + labels.size());
  out.insert(out.end(), kLabelMagic.begin(), kLabelMagic.end());
  put_u32(out, checked_u32(labels.size(), "label count"));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) throw InvalidLabel(i, labels[i]);
    out.push_back(labels[i]);
  }
  return out;
}

LabelVector decode_labels(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4) throw TruncatedFile(source, kLabelHeader, bytes.size());
  if (!has_magic(bytes, kLabelMagic)) throw BadMagic(source, "CDL1");
  if (bytes.size() < kLabelHeader) throw TruncatedFile(source, kLabelHeader, bytes.size());
  const std::size_t n = get_u32(bytes, 4);
  const std::size_t payload = bytes.size() - kLabelHeader;
  if (n > payload) throw TruncatedFile(source, n, payload);
  if (n < payload) {
    throw ShapeMismatch(source + ": " + std::to_string(payload - n) + " trailing bytes");
  }
  LabelVector out;
  out.labels.assign(bytes.begin() + kLabelHeader, bytes.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] > 1) throw InvalidLabel(i, out.labels[i]);
  }
  return out;
}

void write_labels(const LabelVector& labels, const std::filesystem::path& path) {
  write_file(path, encode_labels(labels));
}

LabelVector read_labels(const std::filesystem::path& path) {
  return decode_labels(read_file(path), path.string());
}

std::optional<std::size_t> known_layer_count(std::string_view model_name) {
  static const std::map<std::string, std::size_t> table = {
      {"gemma-2b", 18},  {"gemma-7b", 28},  {"llama-7b", 32},
      {"llama-13b", 40}, {"qwen-0.5b", 24}, {"qwen-1.8b", 24},
      {"qwen-4b", 40},   {"qwen-7b", 32},   {"qwen-14b", 40},
  };
  auto it = table.find(lower(model_name));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j = m.extra.is_object() ? m.extra : nlohmann::json::object();
  j["model_name"] = m.model_name;
  j["dataset_name"] = m.dataset_name;
  j["num_layers"] = m.num_layers;
  j["n"] = m.n;
  j["d_model"] = m.d_model;
  j["extraction_point"] = m.extraction_point;
  j["quantization_bits"] = m.quantization_bits;
  j["meta"] = m.meta;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ManifestError("manifest must be a JSON object");
  RunManifest m;
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw ManifestError(std::string("manifest missing key '") + key + "'");
    return *it;
  };
  auto get_string = [&](const char* key) {
    const auto& v = require(key);
    if (!v.is_string()) throw ManifestError(std::string("manifest key '") + key + "' must be a string");
    return v.get<std::string>();
  };
  auto get_count = [&](const char* key) {
    const auto& v = require(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ManifestError(std::string("manifest key '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
  };

  m.model_name = get_string("model_name");
  m.dataset_name = get_string("dataset_name");
  m.num_layers = get_count("num_layers");
  m.n = get_count("n");
  m.d_model = get_count("d_model");
  m.extraction_point = get_string("extraction_point");
  m.quantization_bits = static_cast<int>(get_count("quantization_bits"));
  const auto& meta = require("meta");
  if (!meta.is_object()) throw ManifestError("manifest key 'meta' must be an object");
  for (const auto& [k, v] : meta.items()) {
    if (!v.is_string()) throw ManifestError("manifest meta value for '" + k + "' must be a string");
    m.meta[k] = v.get<std::string>();
  }

  static const char* known[] = {"model_name", "dataset_name",     "num_layers",        "n",
                                "d_model",    "extraction_point", "quantization_bits", "meta"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) m.extra[k] = v;
  }
  return m;
}

void validate_manifest(const RunManifest& m) {
  if (m.num_layers < 1) throw ManifestError("num_layers must be >= 1");
  if (m.quantization_bits != 8 && m.quantization_bits != 16 && m.quantization_bits != 32) {
    throw ManifestError("quantization_bits must be one of 8, 16, 32 (got " +
                        std::to_string(m.quantization_bits) + ")");
  }
  if (auto expected = known_layer_count(m.model_name); expected && *expected != m.num_layers) {
    throw ManifestError("model '" + m.model_name + "' has " + std::to_string(*expected) +
                        " layers but manifest declares " + std::to_string(m.num_layers));
  }
}

std::string layer_file_name(std::size_t layer) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "layer_%03zu.cdr", layer);
  return buf;
}

void write_run(const Run& run, const std::filesystem::path& dir) {
  validate_manifest(run.manifest);
  if (run.layers.size() != run.manifest.num_layers) {
    throw ShapeMismatch("run has " + std::to_string(run.layers.size()) +
                        " layers but manifest declares " + std::to_string(run.manifest.num_layers));
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  for (std::size_t i = 0; i < run.layers.size(); ++i) {
    write_layer(run.layers[i], dir / layer_file_name(i));
  }
  write_labels(run.labels, dir / "labels.cdl");

  const std::string text = manifest_to_json(run.manifest).dump(2) + "\n";
  write_file(dir / "manifest.json",
             {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

Run load_run(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const auto raw = read_file(manifest_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ManifestError(manifest_path.string() + ": " + e.what());
  }

  Run run;
  run.manifest = manifest_from_json(j);
  validate_manifest(run.manifest);
  const auto& m = run.manifest;

  // Presence is checked for every index before any payload is read, so the
  // reported gap is always the lowest missing one.
  for (std::size_t i = 0; i < m.num_layers; ++i) {
    if (!std::filesystem::exists(dir / layer_file_name(i))) throw MissingLayer(i);
  }

  run.layers.reserve(m.num_layers);
  for (std::size_t i = 0; i < m.num_layers; ++i) {
    auto layer = read_layer(dir / layer_file_name(i));
    if (layer.n != m.n || layer.d_model != m.d_model) {
      throw ShapeMismatch("layer " + std::to_string(i) + ": expected " + std::to_string(m.n) + "x" +
                          std::to_string(m.d_model) + ", found " + std::to_string(layer.n) + "x" +
                          std::to_string(layer.d_model));
    }
    layer.layer_index = i;
    run.layers.push_back(std::move(layer));
  }

  run.labels = read_labels(dir / "labels.cdl");
  if (run.labels.size() != m.n) {
    throw ShapeMismatch("labels: expected " + std::to_string(m.n) + " entries, found " +
                        std::to_string(run.labels.size()));
  }
  return run;
}

}  // namespace cdepth
