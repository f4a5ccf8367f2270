#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "layerscope/acoustics.hpp"

namespace layerscope {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Normalized autocorrelation of `x` at integer lag `lag`, over the overlap.
double normalized_autocorr(const Series<double>& x, Index lag) {
  const Index n = x.size() - lag;
  if (n <= 0) return 0.0;
  const auto head = x.head(n);
  const auto tail = x.segment(lag, n);
  const double denom = std::sqrt(head.squaredNorm() * tail.squaredNorm());
  return denom > 0.0 ? head.dot(tail) / denom : 0.0;
}

}  // namespace

PitchTrack track_f0(const Series<double>& signal, double rate, double floor_hz, double ceiling_hz,
                    const PitchOptions& options) {
  require(floor_hz > 0.0 && ceiling_hz > floor_hz, ErrorCode::Validation, "track_f0: need 0 < floor < ceiling");
  require(rate >= 2.0 * ceiling_hz, ErrorCode::Validation, "track_f0: sample rate below twice the ceiling");

  // Low-ceiling bands (e.g. 5-150 Hz for coarse layers) are analysed at a
  // reduced rate; lags up to a full floor period are otherwise too costly.
  Series<double> x = signal;
  double fs = rate;
  const double max_rate = 64.0 * ceiling_hz;
  if (fs > max_rate) {
    x = resample(signal, rate, max_rate);
    fs = max_rate;
  }

  const Index frame = static_cast<Index>(std::lround(std::max(options.frame_s, 2.0 / floor_hz) * fs));
  const Index hop = std::max<Index>(1, static_cast<Index>(std::lround(options.hop_s * fs)));
  require(x.size() >= frame + hop, ErrorCode::Validation, "track_f0: signal shorter than two frames");

  const double lag_min = fs / ceiling_hz;
  const double lag_max = fs / floor_hz;
  const Index lo = std::max<Index>(2, static_cast<Index>(std::floor(lag_min)));
  const Index hi = std::min<Index>(frame - 2, static_cast<Index>(std::ceil(lag_max)));

  const Index n_frames = (x.size() - frame) / hop + 1;
  PitchTrack track;
  track.range = {floor_hz, ceiling_hz};
  track.times.resize(n_frames);
  track.f0 = Series<double>::Constant(n_frames, kNaN);

  Series<double> r(hi + 2);
  for (Index f = 0; f < n_frames; ++f) {
    const Index start = f * hop;
    track.times[f] = (static_cast<double>(start) + 0.5 * static_cast<double>(frame)) / fs;

    Series<double> seg = x.segment(start, frame);
    const double raw_energy = seg.squaredNorm();
    if (options.remove_dc) seg.array() -= seg.mean();
    const double energy = seg.squaredNorm();
    if (!(energy > 0.0) || energy <= 1e-12 * raw_energy) continue;

    for (Index lag = lo - 1; lag <= hi + 1; ++lag) r[lag] = normalized_autocorr(seg, lag);

    // Strongest local maximum in the band, then prefer the shortest lag whose
    // peak is nearly as strong, so period multiples do not win on rounding.
    double best = -1.0;
    for (Index lag = lo; lag <= hi; ++lag)
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) best = std::max(best, r[lag]);
    if (best < options.voicing_threshold) continue;
    Index pick = -1;
    for (Index lag = lo; lag <= hi && pick < 0; ++lag)
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= 0.95 * best) pick = lag;

    const double a = r[pick - 1], b = r[pick], c = r[pick + 1];
    const double curvature = a - 2.0 * b + c;
    const double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    const double f0 = fs / (static_cast<double>(pick) + shift);
    track.f0[f] = std::clamp(f0, floor_hz, ceiling_hz);
  }
  return track;
}

IntensityTrack track_intensity(const Series<double>& signal, double rate, double min_pitch, double hop_s) {
  require(min_pitch > 0.0, ErrorCode::Validation, "track_intensity: min_pitch must be positive");
  require(rate > 0.0 && hop_s > 0.0, ErrorCode::Validation, "track_intensity: bad rate or hop");
  const Index window = static_cast<Index>(std::lround(3.2 / min_pitch * rate));
  require(window >= 2 && window <= signal.size(), ErrorCode::Validation,
          "track_intensity: window of " + std::to_string(window) + " samples exceeds the signal");
  const Index hop = std::max<Index>(1, static_cast<Index>(std::lround(hop_s * rate)));

  Series<double> w(window);
  for (Index i = 0; i < window; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(window));
  const double wsum = w.sum();

  const Index n_frames = (signal.size() - window) / hop + 1;
  IntensityTrack track;
  track.min_pitch = min_pitch;
  track.times.resize(n_frames);
  track.db.resize(n_frames);
  for (Index f = 0; f < n_frames; ++f) {
    const Index start = f * hop;
    track.times[f] = (static_cast<double>(start) + 0.5 * static_cast<double>(window)) / rate;
    const double ms = w.dot(signal.segment(start, window).array().square().matrix()) / wsum;
    const double db = ms > 0.0 ? 10.0 * std::log10(ms) : kIntensityFloorDb;
    track.db[f] = std::max(db, kIntensityFloorDb);
  }
  return track;
}

Series<double> normalized_time_sample(const Series<double>& times, const Series<double>& values,
                                      const Interval& interval, Index n_bins) {
  require(n_bins >= 1, ErrorCode::Validation, "normalized_time_sample: n_bins must be positive");
  require(times.size() == values.size() && times.size() > 0, ErrorCode::Validation,
          "normalized_time_sample: empty or ragged track");
  require(interval.end > interval.start, ErrorCode::Validation, "normalized_time_sample: empty interval");
  require(interval.start <= times[times.size() - 1] && interval.end >= times[0], ErrorCode::Validation,
          "normalized_time_sample: interval does not overlap the track");

  std::vector<Index> valid;
  for (Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values[i])) valid.push_back(i);

  const double width = (interval.end - interval.start) / static_cast<double>(n_bins);
  Series<double> out = Series<double>::Constant(n_bins, kNaN);
  if (valid.empty()) return out;

  for (Index b = 0; b < n_bins; ++b) {
    const double lo = interval.start + static_cast<double>(b) * width;
    const double hi = lo + width;
    const double centre = lo + 0.5 * width;

    bool any_frame = false, any_valid = false;
    for (Index i = 0; i < times.size(); ++i)
      if (times[i] >= lo && times[i] <= hi) {
        any_frame = true;
        any_valid = any_valid || std::isfinite(values[i]);
      }
    if (any_frame && !any_valid) continue;

    // First valid frame at or after the centre.
    const auto right = std::lower_bound(valid.begin(), valid.end(), centre,
                                        [&](Index i, double t) { return times[i] < t; });
    if (right == valid.begin()) {
      out[b] = values[valid.front()];
    } else if (right == valid.end()) {
      out[b] = values[valid.back()];
    } else {
      const Index i1 = *right, i0 = *(right - 1);
      const double t0 = times[i0], t1 = times[i1];
      out[b] = t1 > t0 ? values[i0] + (centre - t0) / (t1 - t0) * (values[i1] - values[i0]) : values[i1];
    }
  }
  return out;
}

std::vector<std::pair<double, double>> measure_durations(const AnnotationTier& a, const AnnotationTier& b,
                                                         const std::string& label) {
  auto pick = [&](const AnnotationTier& t) {
    std::vector<double> d;
    for (const auto& iv : t.intervals)
      if (iv.label == label) d.push_back(iv.duration());
    return d;
  };
  const auto da = pick(a);
  const auto db = pick(b);
  require(da.size() == db.size(), ErrorCode::Validation,
          "label '" + label + "' occurs " + std::to_string(da.size()) + " times in one tier and " +
              std::to_string(db.size()) + " in the other");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(da.size());
  for (std::size_t i = 0; i < da.size(); ++i) pairs.emplace_back(da[i], db[i]);
  return pairs;
}

}  // namespace layerscope
