#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerscope/rng.hpp"
#include "layerscope/tensor.hpp"

namespace layerscope {

enum class Activation { Relu, Tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct LayerSpec {
  Index in_channels = 0;
  Index out_channels = 0;
  Index kernel = 25;
  Index stride = 4;
  Activation activation = Activation::Relu;

  bool operator==(const LayerSpec&) const = default;
};

/// Architecture of a WaveGAN-style generator: a dense projection of the
/// (code, z) input reshaped to dense_channels x dense_samples, followed by a
/// chain of transpose convolutions.
struct GeneratorSpec {
  Index latent_dim = 100;
  Index code_dim = 0;
  Index dense_channels = 1024;
  Index dense_samples = 16;
  std::vector<LayerSpec> layers;

  Index input_width() const { return code_dim + latent_dim; }
  Index dense_width() const { return dense_channels * dense_samples; }
  /// Channel count and sample count at layer k (0 = dense stage, 1..n = conv layers).
  Index channels_at(std::size_t k) const;
  Index samples_at(std::size_t k) const;
  Index output_samples() const { return samples_at(layers.size()); }

  /// Throws Validation if the channel/length chain is inconsistent.
  void validate() const;

  bool operator==(const GeneratorSpec&) const = default;
};

/// Five transpose convolutions 1024x16 -> 512x64 -> ... -> 1x16384.
GeneratorSpec wavegan_spec();
/// Same chain with a 2-wide categorical code and 98 z variables.
GeneratorSpec ciwgan_spec();
/// Ten transpose convolutions of stride 2, channels halving from 1024.
GeneratorSpec deep_spec();
/// Named preset: "wavegan5", "ciwgan5" or "deep10".
GeneratorSpec preset_spec(const std::string& name);

struct ModelMetadata {
  std::string model_name;
  std::int64_t trained_steps = 0;
  std::string spec_hash;
};

struct ConvWeights {
  Kernel<double> kernel;
  Series<double> bias;
};

/// Generator parameters. Values are held in double but always originate
/// from (or are rounded to) 32-bit floats so they serialize losslessly.
struct WeightBundle {
  Eigen::MatrixXd dense_weight;  // dense_width x input_width
  Series<double> dense_bias;     // dense_width
  std::vector<ConvWeights> layers;
  ModelMetadata metadata;

  /// Throws ShapeMismatch / NonFinite if inconsistent with `spec`.
  void check_against(const GeneratorSpec& spec) const;
};

WeightBundle zero_weights(const GeneratorSpec& spec);
/// Uniform(-scale/sqrt(fan_in), scale/sqrt(fan_in)) initialization, rounded to float.
WeightBundle random_weights(const GeneratorSpec& spec, std::uint64_t seed, double scale = 1.0);

/// Generator input. The network sees [code, z] concatenated, code first.
struct LatentVector {
  Series<double> code;
  Series<double> z;

  Series<double> concat() const;
};

struct ForwardTrace {
  TensorTS dense_pre;
  TensorTS dense_post;
  std::vector<TensorTS> pre;   // per conv layer, before activation
  std::vector<TensorTS> post;  // per conv layer, after activation
  Series<double> waveform;     // final layer, flattened

  /// Post-activation block at layer k (0 = dense stage, 1..n = conv layers).
  const TensorTS& layer(std::size_t k) const { return k == 0 ? dense_post : post.at(k - 1); }
};

ForwardTrace forward(const GeneratorSpec& spec, const WeightBundle& weights, const LatentVector& latent);

/// Draws z ~ U(-1, 1) from `rng`, then applies `overrides` (z index -> value,
/// any real). When `code` is absent and the spec has a code, a one-hot
/// category is drawn from `rng`.
LatentVector sample_latent(Rng& rng, const GeneratorSpec& spec, const std::map<Index, double>& overrides = {},
                           const std::optional<Series<double>>& code = std::nullopt);

}  // namespace layerscope
