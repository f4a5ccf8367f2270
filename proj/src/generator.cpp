#include "layerscope/generator.hpp"

#include <cmath>

namespace layerscope {

const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  fail(ErrorCode::Validation, "unknown activation '" + name + "'");
}

Index GeneratorSpec::channels_at(std::size_t k) const {
  if (k == 0) return dense_channels;
  return layers.at(k - 1).out_channels;
}

Index GeneratorSpec::samples_at(std::size_t k) const {
  Index n = dense_samples;
  for (std::size_t i = 0; i < k; ++i) n *= layers.at(i).stride;
  return n;
}

void GeneratorSpec::validate() const {
  require(latent_dim >= 0 && code_dim >= 0 && input_width() > 0, ErrorCode::Validation,
          "generator spec: input width must be positive");
  require(dense_channels > 0 && dense_samples > 0, ErrorCode::Validation, "generator spec: empty dense stage");
  require(!layers.empty(), ErrorCode::Validation, "generator spec: no layers");
  Index channels = dense_channels;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = "generator spec: layer " + std::to_string(i + 1);
    require(l.in_channels == channels, ErrorCode::Validation, where + " in_channels breaks the chain");
    require(l.out_channels > 0, ErrorCode::Validation, where + " has no output channels");
    require(l.stride > 0 && l.kernel >= l.stride, ErrorCode::Validation, where + " needs kernel >= stride > 0");
    const bool last = i + 1 == layers.size();
    require(last == (l.activation == Activation::Tanh), ErrorCode::Validation,
            where + ": only the final layer uses tanh");
    channels = l.out_channels;
  }
  require(channels == 1, ErrorCode::Validation, "generator spec: final layer must have one channel");
}

namespace {

GeneratorSpec halving_chain(Index latent_dim, Index code_dim, int n_layers, Index stride) {
  GeneratorSpec spec;
  spec.latent_dim = latent_dim;
  spec.code_dim = code_dim;
  spec.dense_channels = 1024;
  spec.dense_samples = 16;
  Index channels = spec.dense_channels;
  for (int i = 0; i < n_layers; ++i) {
    const bool last = i + 1 == n_layers;
    const Index out = last ? 1 : channels / 2;
    spec.layers.push_back({channels, out, 25, stride, last ? Activation::Tanh : Activation::Relu});
    channels = out;
  }
  return spec;
}

}  // namespace

GeneratorSpec wavegan_spec() { return halving_chain(100, 0, 5, 4); }
GeneratorSpec ciwgan_spec() { return halving_chain(98, 2, 5, 4); }
GeneratorSpec deep_spec() { return halving_chain(100, 0, 10, 2); }

GeneratorSpec preset_spec(const std::string& name) {
  if (name == "wavegan5") return wavegan_spec();
  if (name == "ciwgan5") return ciwgan_spec();
  if (name == "deep10") return deep_spec();
  fail(ErrorCode::Validation, "unknown preset '" + name + "' (expected wavegan5, ciwgan5 or deep10)");
}

void WeightBundle::check_against(const GeneratorSpec& spec) const {
  auto shape = [](Index a, Index b) { return std::to_string(a) + "x" + std::to_string(b); };
  require(dense_weight.rows() == spec.dense_width() && dense_weight.cols() == spec.input_width(),
          ErrorCode::ShapeMismatch,
          "dense weight is " + shape(dense_weight.rows(), dense_weight.cols()) + ", spec wants " +
              shape(spec.dense_width(), spec.input_width()));
  require(dense_bias.size() == spec.dense_width(), ErrorCode::ShapeMismatch, "dense bias length");
  require(layers.size() == spec.layers.size(), ErrorCode::ShapeMismatch,
          "bundle has " + std::to_string(layers.size()) + " conv layers, spec has " +
              std::to_string(spec.layers.size()));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& w = layers[i];
    const auto& l = spec.layers[i];
    require(w.kernel.in_channels() == l.in_channels && w.kernel.out_channels() == l.out_channels &&
                w.kernel.width() == l.kernel && w.bias.size() == l.out_channels,
            ErrorCode::ShapeMismatch, "conv layer " + std::to_string(i + 1) + " shape");
    require(w.kernel.all_finite() && w.bias.allFinite(), ErrorCode::NonFinite,
            "conv layer " + std::to_string(i + 1));
  }
  require(dense_weight.allFinite() && dense_bias.allFinite(), ErrorCode::NonFinite, "dense stage");
}

WeightBundle zero_weights(const GeneratorSpec& spec) {
  spec.validate();
  WeightBundle w;
  w.dense_weight = Eigen::MatrixXd::Zero(spec.dense_width(), spec.input_width());
  w.dense_bias = Series<double>::Zero(spec.dense_width());
  for (const auto& l : spec.layers)
    w.layers.push_back({Kernel<double>(l.in_channels, l.out_channels, l.kernel), Series<double>::Zero(l.out_channels)});
  w.metadata.model_name = "zero";
  return w;
}

WeightBundle random_weights(const GeneratorSpec& spec, std::uint64_t seed, double scale) {
  WeightBundle w = zero_weights(spec);
  w.metadata.model_name = "random";
  Rng rng(seed);
  auto draw = [&](double bound) { return static_cast<double>(static_cast<float>(rng.uniform(-bound, bound))); };

  const double dense_bound = scale / std::sqrt(static_cast<double>(spec.input_width()));
  for (Index c = 0; c < w.dense_weight.cols(); ++c)
    for (Index r = 0; r < w.dense_weight.rows(); ++r) w.dense_weight(r, c) = draw(dense_bound);
  for (Index r = 0; r < w.dense_bias.size(); ++r) w.dense_bias[r] = draw(dense_bound);

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    // Each output sample sees about kernel/stride taps per input channel.
    const double fan_in = static_cast<double>(l.in_channels * l.kernel) / static_cast<double>(l.stride);
    const double bound = scale / std::sqrt(fan_in);
    auto& k = w.layers[i].kernel;
    for (Index t = 0; t < l.kernel; ++t)
      for (Index o = 0; o < l.out_channels; ++o)
        for (Index c = 0; c < l.in_channels; ++c) k(c, o, t) = draw(bound);
    for (Index o = 0; o < l.out_channels; ++o) w.layers[i].bias[o] = draw(bound);
  }
  return w;
}

Series<double> LatentVector::concat() const {
  Series<double> x(code.size() + z.size());
  x << code, z;
  return x;
}

ForwardTrace forward(const GeneratorSpec& spec, const WeightBundle& weights, const LatentVector& latent) {
  require(latent.code.size() == spec.code_dim && latent.z.size() == spec.latent_dim, ErrorCode::Validation,
          "latent width " + std::to_string(latent.code.size()) + "+" + std::to_string(latent.z.size()) +
              " does not match spec " + std::to_string(spec.code_dim) + "+" + std::to_string(spec.latent_dim));
  require(latent.code.allFinite() && latent.z.allFinite(), ErrorCode::Validation, "latent has non-finite entries");
  weights.check_against(spec);

  ForwardTrace trace;
  const Series<double> projected = dense(latent.concat(), weights.dense_weight, weights.dense_bias);

  // Flat index j = t * channels + c, i.e. a time-major [samples, channels] reshape.
  trace.dense_pre = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                        projected.data(), spec.dense_samples, spec.dense_channels)
                        .transpose();
  trace.dense_post = relu(trace.dense_pre);

  const TensorTS* current = &trace.dense_post;
  trace.pre.reserve(spec.layers.size());
  trace.post.reserve(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    trace.pre.push_back(transpose_conv1d(*current, weights.layers[i].kernel, weights.layers[i].bias, l.stride));
    if (l.activation == Activation::Relu)
      trace.post.push_back(relu(trace.pre.back()));
    else
      trace.post.push_back(tanh_act(trace.pre.back()));
    current = &trace.post.back();
  }
  trace.waveform = Eigen::Map<const Series<double>>(current->data(), current->size());
  return trace;
}

LatentVector sample_latent(Rng& rng, const GeneratorSpec& spec, const std::map<Index, double>& overrides,
                           const std::optional<Series<double>>& code) {
  for (const auto& [index, value] : overrides) {
    require(index >= 0 && index < spec.latent_dim, ErrorCode::Validation,
            "override index " + std::to_string(index) + " outside z of width " + std::to_string(spec.latent_dim));
    require(std::isfinite(value), ErrorCode::Validation, "override value must be finite");
  }

  LatentVector latent;
  latent.z.resize(spec.latent_dim);
  for (Index i = 0; i < spec.latent_dim; ++i) {
    double v;
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (v == -1.0);
    latent.z[i] = v;
  }
  for (const auto& [index, value] : overrides) latent.z[index] = value;

  if (code) {
    require(code->size() == spec.code_dim, ErrorCode::Validation,
            "code has width " + std::to_string(code->size()) + ", spec wants " + std::to_string(spec.code_dim));
    latent.code = *code;
  } else {
    latent.code = Series<double>::Zero(spec.code_dim);
    if (spec.code_dim > 0) latent.code[static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.code_dim)))] = 1.0;
  }
  return latent;
}

}  // namespace layerscope
