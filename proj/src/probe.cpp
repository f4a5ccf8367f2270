#include "layerscope/probe.hpp"

namespace layerscope {

LayerProbe average_feature_maps(const TensorTS& layer, std::size_t layer_index) {
  require(layer.rows() >= 1 && layer.cols() >= 1, ErrorCode::Validation, "average_feature_maps: empty layer");
  LayerProbe p;
  p.layer_index = layer_index;
  p.series = layer.colwise().sum().transpose() / static_cast<double>(layer.rows());
  return p;
}

std::vector<LayerProbe> probe_trace(const ForwardTrace& trace, bool pre_activation) {
  const auto& blocks = pre_activation ? trace.pre : trace.post;
  std::vector<LayerProbe> probes;
  probes.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    probes.push_back(average_feature_maps(blocks[i], i + 1));
    fit_scale_hint(probes.back(), trace.waveform);
  }
  return probes;
}

void fit_scale_hint(LayerProbe& probe, const Series<double>& waveform) {
  const double peak = probe.series.size() ? probe.series.cwiseAbs().maxCoeff() : 0.0;
  const double target = waveform.size() ? waveform.cwiseAbs().maxCoeff() : 0.0;
  probe.scale_hint = (peak > 0.0 && target > 0.0) ? target / peak : 1.0;
}

Series<double> probe_to_waveform(const LayerProbe& probe, Index target_len) {
  require(probe.series.size() >= 1, ErrorCode::Validation, "probe_to_waveform: empty series");
  const Series<double> clipped = probe.series.cwiseMin(1.0);
  if (clipped.size() == 1) return Series<double>::Constant(target_len, clipped[0]);
  return linear_resample(clipped, target_len);
}

double layer_nyquist(const GeneratorSpec& spec, std::size_t layer_index) {
  require(layer_index <= spec.layers.size(), ErrorCode::Validation,
          "layer " + std::to_string(layer_index) + " does not exist");
  return static_cast<double>(spec.samples_at(layer_index)) / 2.0;
}

}  // namespace layerscope
