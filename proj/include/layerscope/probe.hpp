#pragma once

#include <optional>

#include "layerscope/generator.hpp"

namespace layerscope {

inline constexpr Index kOutputSamples = 16384;
inline constexpr double kSampleRate = 16000.0;

/// Mean over feature maps of one layer: the layer's interpretable time series.
struct LayerProbe {
  std::size_t layer_index = 0;  // 0 = dense stage, 1..n = conv layers
  Series<double> series;
  std::optional<Series<double>> upsampled;
  /// Overlay multiplier for plotting only; never applied to analysis data.
  double scale_hint = 1.0;
};

/// series[t] = (1 / channels) * sum_c layer(c, t).
LayerProbe average_feature_maps(const TensorTS& layer, std::size_t layer_index = 0);

/// Probes for every conv layer of a trace (post-activation unless `pre_activation`).
std::vector<LayerProbe> probe_trace(const ForwardTrace& trace, bool pre_activation = false);

/// Sets scale_hint so the probe's peak matches the waveform's peak magnitude.
void fit_scale_hint(LayerProbe& probe, const Series<double>& waveform);

/// Clips values above 1 and linearly upsamples to 16384 samples (1.024 s at 16 kHz).
Series<double> probe_to_waveform(const LayerProbe& probe, Index target_len = kOutputSamples);

/// samples/2 for layer `layer_index` (1-based conv index; 0 = dense stage),
/// treating each layer as spanning roughly one second.
double layer_nyquist(const GeneratorSpec& spec, std::size_t layer_index);

}  // namespace layerscope
