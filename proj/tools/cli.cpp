#include "layerscope/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

#include "layerscope/acoustics.hpp"
#include "layerscope/analysis.hpp"
#include "layerscope/csv.hpp"
#include "layerscope/fsio.hpp"
#include "layerscope/manifest.hpp"
#include "layerscope/parallel.hpp"
#include "layerscope/plot.hpp"
#include "layerscope/probe.hpp"
#include "layerscope/stats.hpp"
#include "layerscope/sweep.hpp"
#include "layerscope/wav.hpp"
#include "layerscope/weights_io.hpp"

namespace layerscope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string weights;
  std::uint64_t seed = 0;
  std::string out;
};

struct Loaded {
  GeneratorSpec spec;
  WeightBundle weights;
  std::string hash;
};

Loaded load_model(const std::string& path) {
  require(!path.empty(), ErrorCode::Validation, "--weights is required");
  auto [spec, weights] = load_weights(path);
  return {std::move(spec), std::move(weights), sha256_file(path)};
}

std::string pad(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, v);
  return buf;
}

// "z11=-15" -> {11, -15}
std::pair<Index, double> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  require(eq != std::string::npos && text.size() > 1 && text[0] == 'z', ErrorCode::Validation,
          "expected zN=value, got '" + text + "'");
  try {
    std::size_t used = 0;
    const long index = std::stol(text.substr(1, eq - 1), &used);
    require(used == eq - 1 && index >= 0, ErrorCode::Validation, "bad latent index in '" + text + "'");
    const std::string value_text = text.substr(eq + 1);
    const double value = std::stod(value_text, &used);
    require(used == value_text.size(), ErrorCode::Validation, "bad value in '" + text + "'");
    return {static_cast<Index>(index), value};
  } catch (const std::logic_error&) {
    fail(ErrorCode::Validation, "cannot parse '" + text + "'");
  }
}

std::map<Index, double> parse_overrides(const std::vector<std::string>& items) {
  std::map<Index, double> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const auto comma = item.find(',', start);
      const std::string part = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!part.empty()) out.insert_or_assign(parse_assignment(part).first, parse_assignment(part).second);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

std::optional<Series<double>> parse_code(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      values.push_back(std::stod(part));
    } catch (const std::logic_error&) {
      fail(ErrorCode::Validation, "bad code value '" + part + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return Eigen::Map<Series<double>>(values.data(), static_cast<Index>(values.size()));
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorCode::Validation, "expected a:b, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    fail(ErrorCode::Validation, "cannot parse range '" + text + "'");
  }
}

Table probe_table(const LayerProbe& p) {
  Table t;
  t.columns = {"layer", "t", "value"};
  t.data.resize(p.series.size(), 3);
  for (Index i = 0; i < p.series.size(); ++i) {
    t.data(i, 0) = static_cast<double>(p.layer_index);
    t.data(i, 1) = static_cast<double>(i);
    t.data(i, 2) = p.series[i];
  }
  return t;
}

Table latent_table(const std::vector<LatentVector>& latents) {
  Table t;
  const Index code = latents.front().code.size(), z = latents.front().z.size();
  for (Index i = 0; i < code; ++i) t.columns.push_back("c" + std::to_string(i + 1));
  for (Index i = 0; i < z; ++i) t.columns.push_back("z" + std::to_string(i));
  t.data.resize(static_cast<Index>(latents.size()), code + z);
  for (std::size_t r = 0; r < latents.size(); ++r) t.data.row(static_cast<Index>(r)) = latents[r].concat().transpose();
  return t;
}

// Column named `name`, else the last column.
Series<double> column_or_last(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  const Index c = it != t.columns.end() ? static_cast<Index>(it - t.columns.begin()) : t.data.cols() - 1;
  require(c >= 0, ErrorCode::Validation, "table has no columns");
  return t.data.col(c);
}

json regression_json(const RegressionFit& fit) {
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"t", fit.t_stat},  {"p", fit.p_value},
          {"r2", fit.r2},       {"adj_r2", fit.adj_r2},       {"n", fit.n}};
}

// Holds the bookkeeping shared by every command.
class Run {
 public:
  Run(std::string command, const Common& common, const std::vector<std::string>& args)
      : dir_(common.out) {
    require(!common.out.empty(), ErrorCode::Validation, "--out is required");
    fs::create_directories(dir_);
    manifest_.tool_version = LAYERSCOPE_VERSION;
    manifest_.seed = common.seed;
    manifest_.command = std::move(command);
    manifest_.parameters = {{"argv", args}};
    manifest_.started = utc_timestamp();
  }

  const fs::path& dir() const { return dir_; }
  RunManifest& manifest() { return manifest_; }

  void record(const fs::path& relative) { manifest_.add_artifact(dir_, relative); }

  void finish(std::ostream& out) {
    std::sort(manifest_.artifacts.begin(), manifest_.artifacts.end(),
              [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
    manifest_.finished = utc_timestamp();
    write_manifest(manifest_, dir_);
    out << "wrote " << manifest_.artifacts.size() << " artifacts to " << dir_.string() << "\n";
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

void add_common(CLI::App* app, Common& c, bool needs_weights, bool needs_seed) {
  if (needs_weights) app->add_option("--weights", c.weights, "Generator weights (.lgw)")->required();
  if (needs_seed) app->add_option("--seed", c.seed, "Root seed");
  app->add_option("--out", c.out, "Run directory")->required();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Numerical:
    case ErrorCode::Io:
      return kExitInternal;
    default:
      return kExitValidation;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layer-wise probing of waveform generators", "layerscope"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LAYERSCOPE_VERSION);

  Common common;
  std::function<void()> action;

  // init-weights -----------------------------------------------------------
  std::string preset = "wavegan5", spec_file;
  double init_scale = 1.0;
  bool zero = false;
  auto* init = app.add_subcommand("init-weights", "Write a random or zero .lgw weight file");
  add_common(init, common, false, true);
  init->add_option("--preset", preset, "wavegan5 | ciwgan5 | deep10");
  init->add_option("--spec", spec_file, "Generator spec as JSON (overrides --preset)");
  init->add_option("--scale", init_scale, "Initialization scale");
  init->add_flag("--zero", zero, "All-zero weights");
  init->callback([&] {
    action = [&] {
      Run r("init-weights", common, args);
      const GeneratorSpec spec =
          spec_file.empty() ? preset_spec(preset) : spec_from_json(json::parse(read_file(spec_file)));
      WeightBundle w = zero ? zero_weights(spec) : random_weights(spec, common.seed, init_scale);
      save_weights(spec, w, r.dir() / "weights.lgw");
      r.record("weights.lgw");
      r.manifest().weights_hash = r.manifest().artifacts.back().sha256;
      r.finish(out);
    };
  });

  // generate ----------------------------------------------------------------
  std::vector<std::string> sets;
  std::string code_text, encoding_text = "float";
  std::size_t count = 1;
  auto* gen = app.add_subcommand("generate", "Generate waveforms");
  add_common(gen, common, true, true);
  gen->add_option("--count", count, "Number of outputs")->check(CLI::PositiveNumber);
  gen->add_option("--set", sets, "Latent overrides, e.g. z11=-15");
  gen->add_option("--code", code_text, "Code values, e.g. 1,0");
  gen->add_option("--encoding", encoding_text, "float | pcm16");
  gen->callback([&] {
    action = [&] {
      const Loaded m = load_model(common.weights);
      Run r("generate", common, args);
      r.manifest().weights_hash = m.hash;
      const auto overrides = parse_overrides(sets);
      const auto code = parse_code(code_text);
      const auto encoding = wav_encoding_from_string(encoding_text);
      std::vector<LatentVector> latents(count);
      for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(common.seed, i));
        latents[i] = sample_latent(rng, m.spec, overrides, code);
      }
      parallel_for(count, [&](std::size_t i) {
        const ForwardTrace trace = forward(m.spec, m.weights, latents[i]);
        write_wav(trace.waveform, r.dir() / ("output_" + pad(i, 4) + ".wav"), encoding);
      });
      for (std::size_t i = 0; i < count; ++i) r.record("output_" + pad(i, 4) + ".wav");
      write_csv(latent_table(latents), r.dir() / "latents.csv");
      r.record("latents.csv");
      r.finish(out);
    };
  });

  // probe -------------------------------------------------------------------
  bool pre_activation = false;
  auto* probe = app.add_subcommand("probe", "Average feature maps of every layer for one latent");
  add_common(probe, common, true, true);
  probe->add_option("--set", sets, "Latent overrides, e.g. z11=-15");
  probe->add_option("--code", code_text, "Code values");
  probe->add_option("--encoding", encoding_text, "float | pcm16");
  probe->add_flag("--pre-activation", pre_activation, "Probe before the activation (exploratory)");
  probe->callback([&] {
    action = [&] {
      const Loaded m = load_model(common.weights);
      Run r("probe", common, args);
      r.manifest().weights_hash = m.hash;
      const auto encoding = wav_encoding_from_string(encoding_text);
      Rng rng(derive_seed(common.seed, 0));
      const LatentVector latent = sample_latent(rng, m.spec, parse_overrides(sets), parse_code(code_text));
      const ForwardTrace trace = forward(m.spec, m.weights, latent);
      const auto probes = probe_trace(trace, pre_activation);

      write_wav(trace.waveform, r.dir() / "output.wav", encoding);
      r.record("output.wav");
      write_csv(latent_table({latent}), r.dir() / "latent.csv");
      r.record("latent.csv");
      std::vector<PlotSeries> overlay;
      for (const auto& p : probes) {
        const std::string stem = "layer_" + std::to_string(p.layer_index);
        write_csv(probe_table(p), r.dir() / (stem + ".csv"));
        write_wav(probe_to_waveform(p), r.dir() / (stem + ".wav"), encoding);
        r.record(stem + ".csv");
        r.record(stem + ".wav");
        if (p.layer_index + 2 >= m.spec.layers.size())
          overlay.push_back({"conv" + std::to_string(p.layer_index),
                             p.series.size() > 1 ? linear_resample(p.series, trace.waveform.size()) : p.series,
                             p.layer_index == m.spec.layers.size() ? 1.0 : p.scale_hint});
      }
      emit_plot(overlay, r.dir() / "overlay", "averaged feature maps");
      r.record("overlay.csv");
      r.record("overlay.svg");
      r.finish(out);
    };
  });

  // sweep -------------------------------------------------------------------
  std::string target_text = "z11", window_text;
  double from = -15.0, to = 5.0, step = 2.0;
  auto* sweep = app.add_subcommand("sweep", "Interpolate one latent variable and probe every step");
  add_common(sweep, common, true, true);
  sweep->add_option("--target", target_text, "z<index> (0-based) or c<index> (1-based)");
  sweep->add_option("--from", from, "Start value");
  sweep->add_option("--to", to, "End value");
  sweep->add_option("--step", step, "Step size (> 0)");
  sweep->add_option("--set", sets, "Base latent overrides");
  sweep->add_option("--code", code_text, "Base code values");
  sweep->add_option("--window", window_text, "Energy window begin:end in layer samples");
  sweep->add_option("--encoding", encoding_text, "float | pcm16");
  sweep->callback([&] {
    action = [&] {
      const Loaded m = load_model(common.weights);
      Run r("sweep", common, args);
      r.manifest().weights_hash = m.hash;
      const auto encoding = wav_encoding_from_string(encoding_text);
      SweepSpec s;
      s.target = SweepTarget::parse(target_text);
      s.start = from;
      s.end = to;
      s.step = step;
      Rng rng(derive_seed(common.seed, 0));
      s.base_latent = sample_latent(rng, m.spec, parse_overrides(sets), parse_code(code_text));
      const SweepResult result = run_sweep(s, m.spec, m.weights);

      Table values;
      values.columns = {"step", "value"};
      values.data.resize(static_cast<Index>(result.steps.size()), 2);
      std::vector<std::string> step_files;
      parallel_for(result.steps.size(), [&](std::size_t k) {
        const auto& st = result.steps[k];
        const fs::path sub = "step_" + pad(k, 3);
        write_wav(st.waveform, r.dir() / sub / "output.wav", encoding);
        for (const auto& p : st.probes)
          write_csv(probe_table(p), r.dir() / sub / ("layer_" + std::to_string(p.layer_index) + ".csv"));
      });
      for (std::size_t k = 0; k < result.steps.size(); ++k) {
        values.data(static_cast<Index>(k), 0) = static_cast<double>(k);
        values.data(static_cast<Index>(k), 1) = result.steps[k].value;
        const fs::path sub = "step_" + pad(k, 3);
        r.record(sub / "output.wav");
        for (const auto& p : result.steps[k].probes) r.record(sub / ("layer_" + std::to_string(p.layer_index) + ".csv"));
      }
      write_csv(values, r.dir() / "sweep.csv");
      r.record("sweep.csv");

      Table energy;
      energy.columns = {"step", "value"};
      const std::size_t n_layers = m.spec.layers.size();
      for (std::size_t l = 1; l <= n_layers; ++l) energy.columns.push_back("layer_" + std::to_string(l));
      energy.data.resize(static_cast<Index>(result.steps.size()), static_cast<Index>(n_layers) + 2);
      energy.data.leftCols(2) = values.data;
      std::optional<SampleWindow> window;
      if (!window_text.empty()) {
        const auto [b, e] = parse_range(window_text);
        window = SampleWindow{static_cast<Index>(b), static_cast<Index>(e)};
      }
      for (std::size_t l = 1; l <= n_layers; ++l) {
        // A window given in one layer's samples only applies where it fits.
        std::optional<SampleWindow> w = window;
        if (w && w->end > m.spec.samples_at(l)) w.reset();
        energy.data.col(static_cast<Index>(l) + 1) = sweep_energy_profile(result, l, w);

        std::vector<PlotSeries> series;
        for (const auto& st : result.steps)
          series.push_back({s.target.name() + "=" + format_number(st.value), st.probes[l - 1].series, 1.0});
        const std::string stem = "layer_" + std::to_string(l) + "_sweep";
        emit_plot(series, r.dir() / stem, "layer " + std::to_string(l) + ", " + s.target.name() + " sweep");
        r.record(stem + ".csv");
        r.record(stem + ".svg");
      }
      write_csv(energy, r.dir() / "energy.csv");
      r.record("energy.csv");
      r.finish(out);
    };
  });

  // acoustics ---------------------------------------------------------------
  std::string input, pitch_preset;
  double f0_floor = kWaveganPitch.floor_hz, f0_ceiling = kWaveganPitch.ceiling_hz, min_pitch = 100.0;
  double max_formant = 5000.0;
  int lpc_order = 10;
  std::string interval_text;
  Index bins = 10;
  std::string tier_a, tier_b, label;
  auto* acoustics = app.add_subcommand("acoustics", "Acoustic measurements");
  acoustics->require_subcommand(1);

  auto* f0 = acoustics->add_subcommand("f0", "Pitch track");
  add_common(f0, common, false, false);
  f0->add_option("--input", input, "Input WAV")->required();
  f0->add_option("--floor", f0_floor, "Lowest F0 in Hz");
  f0->add_option("--ceiling", f0_ceiling, "Highest F0 in Hz");
  f0->add_option("--preset", pitch_preset, "wavegan (60-300) | reduplication (75-450) | low (5-150)");
  f0->add_option("--interval", interval_text, "Also sample start:end (s) in normalized time");
  f0->add_option("--bins", bins, "Normalized-time bins");
  f0->callback([&] {
    action = [&] {
      Run r("acoustics f0", common, args);
      if (pitch_preset == "wavegan") std::tie(f0_floor, f0_ceiling) = std::pair{kWaveganPitch.floor_hz, kWaveganPitch.ceiling_hz};
      else if (pitch_preset == "reduplication") std::tie(f0_floor, f0_ceiling) = std::pair{kReduplicationPitch.floor_hz, kReduplicationPitch.ceiling_hz};
      else if (pitch_preset == "low") std::tie(f0_floor, f0_ceiling) = std::pair{kLowLayerPitch.floor_hz, kLowLayerPitch.ceiling_hz};
      else require(pitch_preset.empty(), ErrorCode::Validation, "unknown pitch preset '" + pitch_preset + "'");
      const WavData wav = read_wav(input);
      const PitchTrack track = track_f0(wav.samples, wav.sample_rate, f0_floor, f0_ceiling);
      write_csv(track_table(track.times, track.f0), r.dir() / "f0.csv");
      r.record("f0.csv");
      if (!interval_text.empty()) {
        const auto [a, b] = parse_range(interval_text);
        const Series<double> v = normalized_time_sample(track.times, track.f0, {a, b, ""}, bins);
        Series<double> idx = Series<double>::LinSpaced(bins, 0.0, static_cast<double>(bins - 1));
        Table t = track_table(idx, v);
        t.columns[0] = "bin";
        write_csv(t, r.dir() / "f0_normalized.csv");
        r.record("f0_normalized.csv");
      }
      r.finish(out);
    };
  });

  auto* intensity = acoustics->add_subcommand("intensity", "Intensity track");
  add_common(intensity, common, false, false);
  intensity->add_option("--input", input, "Input WAV")->required();
  intensity->add_option("--min-pitch", min_pitch, "Minimum pitch in Hz (sets the window)");
  intensity->callback([&] {
    action = [&] {
      Run r("acoustics intensity", common, args);
      const WavData wav = read_wav(input);
      const IntensityTrack track = track_intensity(wav.samples, wav.sample_rate, min_pitch);
      write_csv(track_table(track.times, track.db), r.dir() / "intensity.csv");
      r.record("intensity.csv");
      r.finish(out);
    };
  });

  auto* formants = acoustics->add_subcommand("formants", "F1/F2 track");
  add_common(formants, common, false, false);
  formants->add_option("--input", input, "Input WAV")->required();
  formants->add_option("--max-formant", max_formant, "Formant ceiling in Hz");
  formants->add_option("--order", lpc_order, "LPC order");
  formants->callback([&] {
    action = [&] {
      Run r("acoustics formants", common, args);
      const WavData wav = read_wav(input);
      FormantOptions opt;
      opt.max_formant = max_formant;
      opt.lpc_order = lpc_order;
      const FormantTrack track = track_formants(wav.samples, wav.sample_rate, opt);
      Table t;
      t.columns = {"time", "f1", "f2", "b1", "b2"};
      t.data.resize(track.times.size(), 5);
      t.data << track.times, track.f1, track.f2, track.b1, track.b2;
      write_csv(t, r.dir() / "formants.csv");
      r.record("formants.csv");
      r.finish(out);
    };
  });

  auto* duration = acoustics->add_subcommand("duration", "Pair interval durations across two tiers");
  add_common(duration, common, false, false);
  duration->add_option("--tier-a", tier_a, "Annotation tier (e.g. an intermediate layer)")->required();
  duration->add_option("--tier-b", tier_b, "Annotation tier (e.g. the final output)")->required();
  duration->add_option("--label", label, "Interval label to pair")->required();
  duration->callback([&] {
    action = [&] {
      Run r("acoustics duration", common, args);
      const auto pairs = measure_durations(read_tier(tier_a, "a"), read_tier(tier_b, "b"), label);
      Table t;
      t.columns = {"a", "b"};
      t.data.resize(static_cast<Index>(pairs.size()), 2);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        t.data(static_cast<Index>(i), 0) = pairs[i].first;
        t.data(static_cast<Index>(i), 1) = pairs[i].second;
      }
      write_csv(t, r.dir() / "durations.csv");
      r.record("durations.csv");
      if (pairs.size() >= 3) {
        // Regress the second tier's durations on the first's.
        const json j = regression_json(linear_regression(t.data.col(0), t.data.col(1)));
        write_file_atomic(r.dir() / "regression.json", j.dump(2) + "\n");
        r.record("regression.json");
      }
      r.finish(out);
    };
  });

  // correlate ---------------------------------------------------------------
  std::vector<std::string> xs, ys;
  std::string column = "value";
  Index corr_bins = 0;
  auto* correlate = app.add_subcommand("correlate", "Pearson r and OLS over concatenated track pairs");
  add_common(correlate, common, false, false);
  correlate->add_option("--x", xs, "Track CSVs for x (repeat, paired with --y)")->required();
  correlate->add_option("--y", ys, "Track CSVs for y")->required();
  correlate->add_option("--column", column, "Value column name");
  correlate->add_option("--bins", corr_bins, "Resample each pair to N normalized-time bins over --interval");
  correlate->add_option("--interval", interval_text, "start:end in seconds for --bins");
  correlate->callback([&] {
    action = [&] {
      Run r("correlate", common, args);
      require(xs.size() == ys.size(), ErrorCode::Validation, "--x and --y must be given the same number of times");
      std::vector<double> cx, cy;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const Table tx = read_csv(xs[i]), ty = read_csv(ys[i]);
        Series<double> vx = column_or_last(tx, column), vy = column_or_last(ty, column);
        if (corr_bins > 0) {
          require(!interval_text.empty(), ErrorCode::Validation, "--bins needs --interval");
          const auto [a, b] = parse_range(interval_text);
          vx = normalized_time_sample(tx.data.col(tx.column("time")), vx, {a, b, ""}, corr_bins);
          vy = normalized_time_sample(ty.data.col(ty.column("time")), vy, {a, b, ""}, corr_bins);
        }
        require(vx.size() == vy.size(), ErrorCode::Validation,
                "pair " + std::to_string(i + 1) + " has unequal lengths; use --bins");
        for (Index k = 0; k < vx.size(); ++k)
          if (std::isfinite(vx[k]) && std::isfinite(vy[k])) {
            cx.push_back(vx[k]);
            cy.push_back(vy[k]);
          }
      }
      const Series<double> x = Eigen::Map<Series<double>>(cx.data(), static_cast<Index>(cx.size()));
      const Series<double> y = Eigen::Map<Series<double>>(cy.data(), static_cast<Index>(cy.size()));
      const json j = {{"r", pearson(x, y)}, {"n", x.size()}, {"regression", regression_json(linear_regression(x, y))}};
      write_file_atomic(r.dir() / "correlation.json", j.dump(2) + "\n");
      r.record("correlation.json");
      out << "r = " << j["r"].get<double>() << " over " << x.size() << " points\n";
      r.finish(out);
    };
  });

  // rank-latents ------------------------------------------------------------
  std::string latents_file, presence_file;
  auto* rank = app.add_subcommand("rank-latents", "Rank latent variables by how well they predict a property");
  add_common(rank, common, false, false);
  rank->add_option("--latents", latents_file, "Latent matrix CSV (z columns are used when present)")->required();
  rank->add_option("--presence", presence_file, "0/1 CSV, column 'presence' or the last column")->required();
  rank->callback([&] {
    action = [&] {
      Run r("rank-latents", common, args);
      const Table lt = read_csv(latents_file);
      std::vector<Index> cols;
      std::vector<Index> ids;
      for (std::size_t c = 0; c < lt.columns.size(); ++c)
        if (lt.columns[c].size() > 1 && lt.columns[c][0] == 'z') {
          cols.push_back(static_cast<Index>(c));
          ids.push_back(std::stol(lt.columns[c].substr(1)));
        }
      if (cols.empty())
        for (std::size_t c = 0; c < lt.columns.size(); ++c) {
          cols.push_back(static_cast<Index>(c));
          ids.push_back(static_cast<Index>(c));
        }
      Eigen::MatrixXd latents(lt.data.rows(), static_cast<Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) latents.col(static_cast<Index>(c)) = lt.data.col(cols[c]);
      const Series<double> presence = column_or_last(read_csv(presence_file), "presence");
      const LatentRanking ranking = rank_latents(latents, presence);

      Table t;
      t.columns = {"rank", "index", "coefficient", "score"};
      t.data.resize(static_cast<Index>(ranking.ranks.size()), 4);
      for (std::size_t i = 0; i < ranking.ranks.size(); ++i) {
        const auto& e = ranking.ranks[i];
        t.data.row(static_cast<Index>(i)) << static_cast<double>(i + 1),
            static_cast<double>(ids[static_cast<std::size_t>(e.index)]), e.coefficient, e.score;
      }
      write_csv(t, r.dir() / "ranking.csv");
      r.record("ranking.csv");
      const json summary = {
          {"method", ranking.method == LatentRanking::Method::LogisticIrls ? "logistic-irls" : "point-biserial"},
          {"converged", ranking.converged},
          {"iterations", ranking.iterations},
          {"top", ids[static_cast<std::size_t>(ranking.ranks.front().index)]}};
      write_file_atomic(r.dir() / "ranking.json", summary.dump(2) + "\n");
      r.record("ranking.json");
      out << "top variable: z" << summary["top"].get<Index>() << "\n";
      r.finish(out);
    };
  });

  // profiles ----------------------------------------------------------------
  std::vector<std::string> conditions;
  Index n_per = 500;
  std::size_t layer = 4;
  auto* profiles = app.add_subcommand("profiles", "Per-feature-map activation profiles under latent conditions");
  add_common(profiles, common, true, true);
  profiles->add_option("--condition", conditions, "Overrides per condition, e.g. z11=-15 (repeat)")->required();
  profiles->add_option("--n", n_per, "Outputs per condition");
  profiles->add_option("--layer", layer, "Conv layer (1-based)");
  profiles->add_option("--code", code_text, "Code values for every output");
  profiles->callback([&] {
    action = [&] {
      const Loaded m = load_model(common.weights);
      Run r("profiles", common, args);
      r.manifest().weights_hash = m.hash;
      std::vector<ProfileCondition> conds;
      for (const auto& c : conditions) conds.push_back({c, parse_overrides({c}), parse_code(code_text)});
      const auto result = build_profiles(m.spec, m.weights, n_per, conds, layer, common.seed);
      json index = json::array();
      for (std::size_t i = 0; i < result.size(); ++i) {
        Table t;
        for (Index s = 0; s < result[i].means.cols(); ++s) t.columns.push_back("t" + std::to_string(s));
        t.data = result[i].means;
        const std::string name = "profile_" + std::to_string(i) + ".csv";
        write_csv(t, r.dir() / name);
        r.record(name);
        index.push_back({{"file", name}, {"label", result[i].label}, {"layer", result[i].layer_index},
                         {"n_outputs", result[i].n_outputs_averaged}});
      }
      write_file_atomic(r.dir() / "profiles.json", index.dump(2) + "\n");
      r.record("profiles.json");
      r.finish(out);
    };
  });

  // cluster -----------------------------------------------------------------
  std::vector<std::string> profile_files;
  double gamma = kDefaultGamma;
  int k = 2;
  auto* cluster = app.add_subcommand("cluster", "Spectral clustering of feature-map profiles");
  add_common(cluster, common, false, true);
  cluster->add_option("--profiles", profile_files, "Profile CSVs; rows are maps, files are joined along time")
      ->required();
  cluster->add_option("--gamma", gamma, "RBF kernel coefficient");
  cluster->add_option("--k", k, "Number of clusters");
  cluster->callback([&] {
    action = [&] {
      Run r("cluster", common, args);
      Eigen::MatrixXd joined;
      for (const auto& f : profile_files) {
        const Table t = read_csv(f);
        if (joined.size() == 0) {
          joined = t.data;
          continue;
        }
        require(t.data.rows() == joined.rows(), ErrorCode::Validation, f + " has a different number of maps");
        Eigen::MatrixXd next(joined.rows(), joined.cols() + t.data.cols());
        next << joined, t.data;
        joined = std::move(next);
      }
      const ClusterResult c = spectral_cluster(joined, gamma, k, common.seed);
      Table t;
      t.columns = {"map_index", "cluster"};
      t.data.resize(static_cast<Index>(c.assignments.size()), 2);
      for (std::size_t i = 0; i < c.assignments.size(); ++i)
        t.data.row(static_cast<Index>(i)) << static_cast<double>(i), static_cast<double>(c.assignments[i]);
      write_csv(t, r.dir() / "clusters.csv");
      r.record("clusters.csv");
      Table e;
      for (int j = 0; j < c.k; ++j) e.columns.push_back("e" + std::to_string(j));
      e.data = c.embedding;
      write_csv(e, r.dir() / "embedding.csv");
      r.record("embedding.csv");
      r.finish(out);
    };
  });

  // export-wav --------------------------------------------------------------
  Index length = kOutputSamples;
  bool no_clip = false;
  auto* export_wav = app.add_subcommand("export-wav", "Render a probe or series CSV as 16 kHz audio");
  add_common(export_wav, common, false, false);
  export_wav->add_option("--input", input, "Series CSV")->required();
  export_wav->add_option("--column", column, "Value column name");
  export_wav->add_option("--length", length, "Output samples");
  export_wav->add_option("--encoding", encoding_text, "float | pcm16");
  export_wav->add_flag("--no-clip", no_clip, "Resample without clipping values above 1");
  export_wav->callback([&] {
    action = [&] {
      Run r("export-wav", common, args);
      LayerProbe p;
      p.series = column_or_last(read_csv(input), column);
      const Series<double> audio =
          no_clip ? (p.series.size() > 1 ? linear_resample(p.series, length) : p.series) : probe_to_waveform(p, length);
      const std::string name = fs::path(input).stem().string() + ".wav";
      write_wav(audio, r.dir() / name, wav_encoding_from_string(encoding_text));
      r.record(name);
      r.finish(out);
    };
  });

  // plot --------------------------------------------------------------------
  std::vector<std::string> inputs;
  std::vector<double> scales;
  std::string title;
  auto* plot = app.add_subcommand("plot", "Overlay series as CSV + SVG");
  add_common(plot, common, false, false);
  plot->add_option("--input", inputs, "Series CSV, optionally file.csv:column (repeat)")->required();
  plot->add_option("--scale", scales, "Overlay multiplier per input");
  plot->add_option("--title", title, "Plot title");
  plot->callback([&] {
    action = [&] {
      Run r("plot", common, args);
      require(scales.empty() || scales.size() == inputs.size(), ErrorCode::Validation,
              "give --scale once per --input or not at all");
      std::vector<PlotSeries> series;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::string file = inputs[i], col = column;
        if (const auto colon = file.rfind(':'); colon != std::string::npos && !fs::exists(file)) {
          col = file.substr(colon + 1);
          file = file.substr(0, colon);
        }
        series.push_back({fs::path(file).stem().string(), column_or_last(read_csv(file), col),
                          scales.empty() ? 1.0 : scales[i]});
      }
      emit_plot(series, r.dir() / "plot", title);
      r.record("plot.csv");
      r.record("plot.svg");
      r.finish(out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << LAYERSCOPE_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace layerscope::cli
