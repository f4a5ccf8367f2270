#include "layerscope/sweep.hpp"

#include <cmath>

#include "layerscope/parallel.hpp"

namespace layerscope {

SweepTarget SweepTarget::parse(const std::string& text) {
  require(text.size() >= 2 && (text[0] == 'z' || text[0] == 'c'), ErrorCode::Validation,
          "sweep target must look like z11 or c2, got '" + text + "'");
  Index n = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    require(text[i] >= '0' && text[i] <= '9', ErrorCode::Validation, "bad sweep target '" + text + "'");
    n = n * 10 + (text[i] - '0');
  }
  if (text[0] == 'z') return {Kind::Z, n};
  require(n >= 1, ErrorCode::Validation, "code targets are numbered from c1");
  return {Kind::Code, n - 1};
}

std::string SweepTarget::name() const {
  return kind == Kind::Z ? "z" + std::to_string(index) : "c" + std::to_string(index + 1);
}

Index SweepSpec::step_count() const {
  require(std::isfinite(start) && std::isfinite(end) && std::isfinite(step), ErrorCode::Validation,
          "sweep range must be finite");
  require(step > 0.0, ErrorCode::Validation, "sweep step must be positive");
  const double q = std::abs(end - start) / step;
  const double whole = std::round(q);
  require(std::abs(q - whole) <= 1e-9 * std::max(1.0, q), ErrorCode::Validation,
          "sweep range is not a whole number of steps");
  return static_cast<Index>(whole) + 1;
}

double SweepSpec::value_at(Index k) const {
  const double dir = end >= start ? 1.0 : -1.0;
  return start + dir * static_cast<double>(k) * step;
}

LatentVector SweepSpec::latent_at(Index k) const {
  LatentVector l = base_latent;
  auto& v = target.kind == SweepTarget::Kind::Z ? l.z : l.code;
  v[target.index] = value_at(k);
  return l;
}

SweepResult run_sweep(const SweepSpec& spec, const GeneratorSpec& gen, const WeightBundle& weights,
                      const SweepOptions& options) {
  const Index n = spec.step_count();
  const Index width = spec.target.kind == SweepTarget::Kind::Z ? gen.latent_dim : gen.code_dim;
  require(spec.target.index >= 0 && spec.target.index < width, ErrorCode::Validation,
          "sweep target " + spec.target.name() + " is outside the latent");
  require(spec.base_latent.z.size() == gen.latent_dim && spec.base_latent.code.size() == gen.code_dim,
          ErrorCode::Validation, "base latent does not match the generator");

  SweepResult result;
  result.spec = spec;
  result.steps.resize(static_cast<std::size_t>(n));
  parallel_for(result.steps.size(), [&](std::size_t k) {
    SweepStep& s = result.steps[k];
    s.value = spec.value_at(static_cast<Index>(k));
    s.latent = spec.latent_at(static_cast<Index>(k));
    ForwardTrace trace = forward(gen, weights, s.latent);
    s.probes = probe_trace(trace, options.pre_activation);
    s.waveform = trace.waveform;
    if (options.keep_traces) s.trace = std::move(trace);
  });
  return result;
}

Series<double> sweep_energy_profile(const SweepResult& result, std::size_t layer_index,
                                    std::optional<SampleWindow> window) {
  Series<double> profile(static_cast<Index>(result.steps.size()));
  for (std::size_t k = 0; k < result.steps.size(); ++k) {
    const auto& probes = result.steps[k].probes;
    require(layer_index >= 1 && layer_index <= probes.size(), ErrorCode::Validation,
            "layer " + std::to_string(layer_index) + " not probed");
    const auto& series = probes[layer_index - 1].series;
    const SampleWindow w = window.value_or(SampleWindow{0, series.size()});
    require(w.begin >= 0 && w.begin < w.end && w.end <= series.size(), ErrorCode::Validation,
            "window [" + std::to_string(w.begin) + ", " + std::to_string(w.end) + ") outside layer of length " +
                std::to_string(series.size()));
    profile[static_cast<Index>(k)] = series.segment(w.begin, w.end - w.begin).mean();
  }
  return profile;
}

}  // namespace layerscope
