#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "cdepth/errors.hpp"
#include "cdepth/reps_io.hpp"
#include "cdepth/rng.hpp"
#include "cdepth/synth.hpp"
#include "goldens.hpp"
#include "oracles.hpp"

using namespace cdepth;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RepresentationMatrix matrix(std::size_t n, std::size_t d, std::vector<float> v) {
  RepresentationMatrix m;
  m.n = n;
  m.d_model = d;
  m.data = std::move(v);
  return m;
}

cdepth::Run tiny_run(std::size_t layers) {
  cdepth::Run run;
  run.manifest.model_name = "tiny";
  run.manifest.dataset_name = "toy";
  run.manifest.num_layers = layers;
  run.manifest.n = 4;
  run.manifest.d_model = 2;
  run.manifest.extraction_point = "post_attention_layernorm";
  for (std::size_t i = 0; i < layers; ++i) {
    auto m = matrix(4, 2, {0.f, 1.f, 2.f, 3.f, 4.f, 5.f, 6.f, static_cast<float>(i)});
    m.layer_index = i;
    run.layers.push_back(m);
  }
  run.labels.labels = {0, 1, 0, 1};
  return run;
}

}  // namespace

TEST(Cdr, GoldenBytesSmallest) {
  const auto bytes = encode_layer(matrix(1, 1, {0.0f}));
  EXPECT_EQ(bytes, golden::kCdrSmallest);
}

TEST(Cdr, LittleEndianFloatPayload) {
  // 1.0f is 0x3F800000; -2.5f is 0xC0200000.
  const auto bytes = encode_layer(matrix(1, 2, {1.0f, -2.5f}));
  ASSERT_EQ(bytes.size(), 20u);
  const std::vector<std::uint8_t> tail(bytes.begin() + 12, bytes.end());
  EXPECT_EQ(tail, (std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x20, 0xC0}));
}

TEST(Cdr, FileSizeTwoByThree) {
  const auto dir = oracle::fresh_temp_dir("cdr");
  write_layer(matrix(2, 3, {1, 2, 3, 4, 5, 6}), dir / "l.cdr");
  EXPECT_EQ(fs::file_size(dir / "l.cdr"), 36u);
  EXPECT_EQ(slurp(dir / "l.cdr"), encode_layer(matrix(2, 3, {1, 2, 3, 4, 5, 6})));
  const auto back = read_layer(dir / "l.cdr");
  EXPECT_EQ(back.n, 2u);
  EXPECT_EQ(back.d_model, 3u);
  fs::remove_all(dir);
}

TEST(Cdr, RoundTripBitExact) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(7);
    const std::size_t d = 1 + rng.uniform_below(5);
    std::vector<float> v(n * d);
    for (auto& x : v) {
      // Arbitrary finite bit patterns, including subnormals and negative zero.
      std::uint32_t bits;
      do {
        bits = static_cast<std::uint32_t>(rng.next());
      } while ((bits & 0x7F800000u) == 0x7F800000u);
      std::memcpy(&x, &bits, sizeof x);
    }
    const auto m = matrix(n, d, v);
    const auto back = decode_layer(encode_layer(m));
    ASSERT_EQ(back.n, n);
    ASSERT_EQ(back.d_model, d);
    EXPECT_EQ(std::memcmp(back.data.data(), v.data(), v.size() * sizeof(float)), 0);
  }
}

TEST(Cdr, BadMagic) {
  auto bytes = encode_layer(matrix(1, 1, {0.0f}));
  bytes[3] = '2';
  EXPECT_THROW(decode_layer(bytes), BadMagic);
}

TEST(Cdr, TruncatedPayload) {
  std::vector<std::uint8_t> bytes = {'C', 'D', 'R', '1', 10, 0, 0, 0, 10, 0, 0, 0};
  bytes.resize(12 + 100, 0);
  try {
    decode_layer(bytes);
    FAIL() << "expected TruncatedFile";
  } catch (const TruncatedFile& e) {
    EXPECT_EQ(e.required(), 400u);
    EXPECT_EQ(e.found(), 100u);
  }
}

TEST(Cdr, ShortHeader) {
  const std::vector<std::uint8_t> bytes = {'C', 'D', 'R', '1', 1, 0};
  EXPECT_THROW(decode_layer(bytes), ValidationError);
}

TEST(Cdr, TrailingBytesRejected) {
  auto bytes = encode_layer(matrix(1, 1, {0.0f}));
  bytes.push_back(0);
  EXPECT_THROW(decode_layer(bytes), ShapeMismatch);
}

TEST(Cdr, NonFiniteReportsFirstIndex) {
  auto bytes = encode_layer(matrix(1, 3, {0.f, 0.f, 0.f}));
  // Index 1 becomes +inf, index 2 NaN.
  const std::uint8_t inf[4] = {0x00, 0x00, 0x80, 0x7F};
  const std::uint8_t nan[4] = {0x00, 0x00, 0xC0, 0x7F};
  std::memcpy(bytes.data() + 16, inf, 4);
  std::memcpy(bytes.data() + 20, nan, 4);
  try {
    decode_layer(bytes);
    FAIL() << "expected NonFiniteValue";
  } catch (const NonFiniteValue& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Cdr, RefusesToWriteNonFinite) {
  const auto dir = oracle::fresh_temp_dir("cdrnan");
  EXPECT_THROW(write_layer(matrix(1, 2, {0.f, std::numeric_limits<float>::quiet_NaN()}), dir / "x.cdr"),
               NonFiniteValue);
  fs::remove_all(dir);
}

TEST(Cdr, MissingFileIsIoError) {
  EXPECT_THROW(read_layer("/nonexistent/dir/layer_000.cdr"), IoError);
}

TEST(Cdl, GoldenBytes) {
  const auto bytes = encode_labels(LabelVector{{1, 0, 1}});
  EXPECT_EQ(bytes, golden::kCdl101);
}

TEST(Cdl, RoundTripFile) {
  const auto dir = oracle::fresh_temp_dir("cdl");
  const LabelVector y{{1, 0, 0, 1, 1, 0}};
  write_labels(y, dir / "labels.cdl");
  EXPECT_EQ(fs::file_size(dir / "labels.cdl"), 14u);
  EXPECT_EQ(read_labels(dir / "labels.cdl").labels, y.labels);
  fs::remove_all(dir);
}

TEST(Cdl, InvalidLabelByte) {
  const std::vector<std::uint8_t> bytes = {'C', 'D', 'L', '1', 2, 0, 0, 0, 0x01, 0x02};
  try {
    decode_labels(bytes);
    FAIL() << "expected InvalidLabel";
  } catch (const InvalidLabel& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(Cdl, BadMagic) {
  const std::vector<std::uint8_t> bytes = {'C', 'D', 'R', '1', 0, 0, 0, 0};
  EXPECT_THROW(decode_labels(bytes), BadMagic);
}

TEST(Manifest, KnownLayerCounts) {
  EXPECT_EQ(known_layer_count("Gemma-2B"), 18u);
  EXPECT_EQ(known_layer_count("gemma-7b"), 28u);
  EXPECT_EQ(known_layer_count("LLaMA-7B"), 32u);
  EXPECT_EQ(known_layer_count("LLaMA-13B"), 40u);
  EXPECT_EQ(known_layer_count("Qwen-0.5B"), 24u);
  EXPECT_EQ(known_layer_count("QWEN-1.8B"), 24u);
  EXPECT_EQ(known_layer_count("Qwen-4B"), 40u);
  EXPECT_EQ(known_layer_count("Qwen-7B"), 32u);
  EXPECT_EQ(known_layer_count("Qwen-14B"), 40u);
  EXPECT_FALSE(known_layer_count("gpt2").has_value());
}

TEST(Manifest, LayerCountMustMatchKnownModel) {
  RunManifest m;
  m.model_name = "Gemma-2B";
  m.dataset_name = "Cities";
  m.num_layers = 17;
  m.n = 10;
  m.d_model = 4;
  EXPECT_THROW(validate_manifest(m), ManifestError);
  m.num_layers = 18;
  EXPECT_NO_THROW(validate_manifest(m));
}

TEST(Manifest, QuantizationBits) {
  RunManifest m;
  m.model_name = "x";
  m.num_layers = 2;
  m.n = 2;
  m.d_model = 1;
  m.quantization_bits = 4;
  EXPECT_THROW(validate_manifest(m), ManifestError);
}

TEST(Manifest, UnknownKeysSurviveRoundTrip) {
  cdepth::Run run = tiny_run(2);
  run.manifest.meta["created"] = "today";
  auto j = manifest_to_json(run.manifest);
  j["future_field"] = {1, 2, 3};
  const auto m = manifest_from_json(j);
  EXPECT_EQ(m.meta.at("created"), "today");
  EXPECT_EQ(manifest_to_json(m), j);
}

TEST(Manifest, MissingKeyRejected) {
  auto j = manifest_to_json(tiny_run(2).manifest);
  j.erase("d_model");
  EXPECT_THROW(manifest_from_json(j), ManifestError);
}

TEST(Run, LayerFileNames) {
  EXPECT_EQ(layer_file_name(0), "layer_000.cdr");
  EXPECT_EQ(layer_file_name(17), "layer_017.cdr");
}

TEST(Run, WriteThenLoad) {
  const auto dir = oracle::fresh_temp_dir("run");
  const cdepth::Run run = tiny_run(3);
  write_run(run, dir);
  const cdepth::Run back = load_run(dir);
  ASSERT_EQ(back.layers.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.layers[i].layer_index, i);
    EXPECT_EQ(back.layers[i].data, run.layers[i].data);
  }
  EXPECT_EQ(back.labels.labels, run.labels.labels);
  EXPECT_EQ(back.manifest.model_name, "tiny");
  fs::remove_all(dir);
}

TEST(Run, SynthRunLoads) {
  const auto dir = oracle::fresh_temp_dir("synthrun");
  EmergenceProfile p;
  p.d = 3;
  p.n = 20;
  p.d_model = 4;
  p.mu = {0.0, 1.0, 2.0};
  generate(p, dir);
  const cdepth::Run run = load_run(dir);
  ASSERT_EQ(run.layers.size(), 3u);
  for (const auto& l : run.layers) {
    EXPECT_EQ(l.n, 20u);
    EXPECT_EQ(l.d_model, 4u);
  }
  fs::remove_all(dir);
}

TEST(Run, MissingLayerReported) {
  const auto dir = oracle::fresh_temp_dir("missing");
  write_run(tiny_run(3), dir);
  fs::remove(dir / "layer_001.cdr");
  try {
    load_run(dir);
    FAIL() << "expected MissingLayer";
  } catch (const MissingLayer& e) {
    EXPECT_EQ(e.layer(), 1u);
  }
  fs::remove_all(dir);
}

TEST(Run, ShapeDisagreementRejected) {
  const auto dir = oracle::fresh_temp_dir("shape");
  write_run(tiny_run(3), dir);
  write_layer(matrix(4, 3, std::vector<float>(12, 0.f)), dir / "layer_002.cdr");
  EXPECT_THROW(load_run(dir), ShapeMismatch);
  fs::remove_all(dir);
}

TEST(Run, LabelCountMustMatch) {
  const auto dir = oracle::fresh_temp_dir("labels");
  write_run(tiny_run(2), dir);
  write_labels(LabelVector{{0, 1, 0}}, dir / "labels.cdl");
  EXPECT_THROW(load_run(dir), ValidationError);
  fs::remove_all(dir);
}

TEST(Run, MissingManifestIsIoError) {
  const auto dir = oracle::fresh_temp_dir("nomanifest");
  EXPECT_THROW(load_run(dir), IoError);
  fs::remove_all(dir);
}
