#pragma once

// Activation dump formats.
//
// CDR1 (one layer):  "CDR1" | u32 n | u32 d_model | n*d_model binary32, row-major
// CDL1 (labels):     "CDL1" | u32 n | n bytes, each 0x00 or 0x01
// All integers and floats little-endian; no padding, no trailing bytes.
//
// A run directory holds manifest.json, labels.cdl and layer_000.cdr ..
// layer_{d-1}.cdr. Layer indices are zero-based: the "1st layer" of a model
// is layer_000.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cdepth {

struct RepresentationMatrix {
  std::size_t layer_index = 0;
  std::size_t n = 0;
  std::size_t d_model = 0;
  std::vector<float> data;  // row-major, n * d_model

  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * d_model, d_model};
  }
  float at(std::size_t i, std::size_t j) const { return data[i * d_model + j]; }

  // Throws ShapeMismatch or NonFiniteValue.
  void validate() const;
};

struct LabelVector {
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::uint8_t operator[](std::size_t i) const { return labels[i]; }
};

struct RunManifest {
  std::string model_name;
  std::string dataset_name;
  std::size_t num_layers = 0;
  std::size_t n = 0;
  std::size_t d_model = 0;
  std::string extraction_point;
  int quantization_bits = 32;
  std::map<std::string, std::string> meta;
  // Keys not listed above; kept so a read/write cycle does not drop them.
  nlohmann::json extra = nlohmann::json::object();
};

struct Run {
  RunManifest manifest;
  std::vector<RepresentationMatrix> layers;
  LabelVector labels;
};

void write_layer(const RepresentationMatrix& matrix, const std::filesystem::path& path);
RepresentationMatrix read_layer(const std::filesystem::path& path);

void write_labels(const LabelVector& labels, const std::filesystem::path& path);
LabelVector read_labels(const std::filesystem::path& path);

// Byte-level codecs behind the file functions.
std::vector<std::uint8_t> encode_layer(const RepresentationMatrix& matrix);
RepresentationMatrix decode_layer(std::span<const std::uint8_t> bytes,
                                  const std::string& source = "<memory>");
std::vector<std::uint8_t> encode_labels(const LabelVector& labels);
LabelVector decode_labels(std::span<const std::uint8_t> bytes,
                          const std::string& source = "<memory>");

/// Layer counts of the reference models (case-insensitive name match).
std::optional<std::size_t> known_layer_count(std::string_view model_name);

nlohmann::json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);
// Throws ManifestError.
void validate_manifest(const RunManifest& manifest);

std::string layer_file_name(std::size_t layer);

/// Writes a complete run directory (creating it if needed).
void write_run(const Run& run, const std::filesystem::path& dir);
/// Loads and validates a run directory. Throws MissingLayer, ShapeMismatch,
/// ManifestError, or any single-file error.
Run load_run(const std::filesystem::path& dir);

}  // namespace cdepth
