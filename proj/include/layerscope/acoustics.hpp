#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "layerscope/tensor.hpp"

namespace layerscope {

/// F0 search band presets.
struct PitchRange {
  double floor_hz;
  double ceiling_hz;
};
inline constexpr PitchRange kWaveganPitch{60.0, 300.0};
inline constexpr PitchRange kReduplicationPitch{75.0, 450.0};
inline constexpr PitchRange kLowLayerPitch{5.0, 150.0};

/// Frame-level F0. Unvoiced frames hold NaN.
struct PitchTrack {
  Series<double> times;
  Series<double> f0;
  PitchRange range{};

  bool voiced(Index i) const { return !std::isnan(f0[i]); }
};

struct PitchOptions {
  double hop_s = 0.010;
  double frame_s = 0.040;  // widened to two periods of the floor when needed
  double voicing_threshold = 0.45;
  bool remove_dc = true;
};

/// Normalized-autocorrelation pitch tracker with parabolic peak refinement.
PitchTrack track_f0(const Series<double>& signal, double rate, double floor_hz, double ceiling_hz,
                    const PitchOptions& options = {});

inline constexpr double kIntensityFloorDb = -120.0;

/// Hann-weighted mean-square energy in dB relative to amplitude 1.0.
struct IntensityTrack {
  Series<double> times;
  Series<double> db;
  double min_pitch = 100.0;
};

IntensityTrack track_intensity(const Series<double>& signal, double rate, double min_pitch = 100.0,
                               double hop_s = 0.010);

/// F1/F2 per analysis frame; frames without two valid resonances hold NaN.
struct FormantTrack {
  Series<double> times;
  Series<double> f1;
  Series<double> f2;
  Series<double> b1;
  Series<double> b2;
  std::vector<Index> unstable_frames;  // LPC failed; reported as NaN

  Index valid_frames() const;
};

struct FormantOptions {
  double max_formant = 5000.0;
  int lpc_order = 10;
  double frame_s = 0.025;
  double hop_s = 0.010;
  double preemphasis_from_hz = 50.0;
  double max_bandwidth = 400.0;
  bool remove_dc = true;
};

FormantTrack track_formants(const Series<double>& signal, double rate, const FormantOptions& options = {});

/// Band-limited (windowed-sinc) resampling between arbitrary rates.
Series<double> resample(const Series<double>& signal, double from_rate, double to_rate);

/// Autocorrelation-method LPC: returns a[0..order] with a[0] = 1, or nothing
/// when the recursion meets a non-positive prediction error.
std::optional<Series<double>> levinson_durbin(const Series<double>& autocorr, int order);

struct Interval {
  double start = 0.0;
  double end = 0.0;
  std::string label;

  double duration() const { return end - start; }
};

/// Labeled, ordered, non-overlapping intervals inside [0, 1.024] s.
struct AnnotationTier {
  std::vector<Interval> intervals;
  std::string source_layer;

  void validate(double max_time = 1.024) const;
};

/// One interval per line: start<TAB>end<TAB>label.
AnnotationTier read_tier(const std::filesystem::path& path, std::string source_layer = {});
void write_tier(const AnnotationTier& tier, const std::filesystem::path& path);

/// Samples a frame track at n_bins bin centres over `interval`. NaN frames are
/// bridged by interpolating between the nearest valid frames; a bin whose
/// frames are all NaN is reported as NaN.
Series<double> normalized_time_sample(const Series<double>& times, const Series<double>& values,
                                      const Interval& interval, Index n_bins);

/// Durations of matching-label intervals in both tiers, paired in order.
std::vector<std::pair<double, double>> measure_durations(const AnnotationTier& a, const AnnotationTier& b,
                                                         const std::string& label);

}  // namespace layerscope
