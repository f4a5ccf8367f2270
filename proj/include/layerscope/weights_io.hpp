#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "layerscope/generator.hpp"

namespace layerscope {

// .lgw container layout:
//   "LGW1" | u32 little-endian header length | UTF-8 JSON header | tensor data
// The header carries {"spec", "metadata", "tensors": [{name, shape, offset,
// dtype: "f32"}]}; offsets are relative to the first byte after the header and
// tensors are packed little-endian float32, row-major.
//
// Weight tensors: dense.weight [dense_width, input_width], dense.bias,
// conv{k}.weight [in, out, kernel], conv{k}.bias for k = 1..n. The dense
// output is reshaped time-major: flat index t * dense_channels + c.

nlohmann::json spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const nlohmann::json& j);
std::string spec_hash(const GeneratorSpec& spec);

struct RawTensor {
  std::vector<Index> shape;
  std::vector<float> values;
};

/// Generic container contents, in table order.
struct LgwContainer {
  nlohmann::json header;  // without the "tensors" table
  std::vector<std::pair<std::string, RawTensor>> tensors;

  const RawTensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
};

std::string encode_container(const LgwContainer& c);
LgwContainer decode_container(std::string_view bytes);

void save_weights(const GeneratorSpec& spec, const WeightBundle& weights, const std::filesystem::path& path);
std::pair<GeneratorSpec, WeightBundle> load_weights(const std::filesystem::path& path);

/// Per-layer reference activations produced by an external framework for a
/// fixed latent. Tensor names: latent.code, latent.z, dense.pre, dense.post,
/// conv{k}.pre, conv{k}.post, waveform.
struct GoldenFixture {
  GeneratorSpec spec;
  LatentVector latent;
  ForwardTrace trace;
  std::string source;
};

void save_fixture(const GoldenFixture& fixture, const std::filesystem::path& path);
GoldenFixture load_fixture(const std::filesystem::path& path);

struct LayerDeviation {
  std::string name;
  double relative_error = 0.0;  // ||ours - ref|| / max(||ref||, tiny)
};

/// Runs `forward` on the fixture latent and reports the deviation per stage.
std::vector<LayerDeviation> compare_to_fixture(const GeneratorSpec& spec, const WeightBundle& weights,
                                               const GoldenFixture& fixture);

}  // namespace layerscope
