#pragma once

#include <optional>
#include <string>
#include <vector>

#include "layerscope/probe.hpp"

namespace layerscope {

struct SweepTarget {
  enum class Kind { Z, Code };
  Kind kind = Kind::Z;
  Index index = 0;  // 0-based position inside z or inside the code

  /// "z11" is z[11]; "c1", "c2" name code entries 1-based, so "c2" is code[1].
  static SweepTarget parse(const std::string& text);
  std::string name() const;
};

struct SweepSpec {
  SweepTarget target;
  double start = 0.0;
  double end = 0.0;
  double step = 1.0;
  LatentVector base_latent;

  /// floor(|end - start| / step) + 1; the range must be a whole number of steps.
  Index step_count() const;
  /// start + k * step, moving toward `end`. Never accumulated.
  double value_at(Index k) const;
  LatentVector latent_at(Index k) const;
};

struct SweepStep {
  double value = 0.0;
  LatentVector latent;
  Series<double> waveform;
  std::vector<LayerProbe> probes;  // one per conv layer, index 1..n
  std::optional<ForwardTrace> trace;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepStep> steps;
};

struct SweepOptions {
  bool keep_traces = false;
  bool pre_activation = false;
};

SweepResult run_sweep(const SweepSpec& spec, const GeneratorSpec& gen, const WeightBundle& weights,
                      const SweepOptions& options = {});

/// Half-open sample window [begin, end).
struct SampleWindow {
  Index begin = 0;
  Index end = 0;
};

/// Mean probe value inside `window` for each step. The full layer is used when
/// no window is given.
Series<double> sweep_energy_profile(const SweepResult& result, std::size_t layer_index,
                                    std::optional<SampleWindow> window = std::nullopt);

}  // namespace layerscope
