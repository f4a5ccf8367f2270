#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "layerscope/acoustics.hpp"

namespace layerscope {

namespace {

constexpr double kPi = std::numbers::pi;

double windowed_sinc(double x, double cutoff, double half_width) {
  if (std::abs(x) >= half_width) return 0.0;
  const double arg = 2.0 * cutoff * x;
  const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
  const double hann = 0.5 * (1.0 + std::cos(kPi * x / half_width));
  return 2.0 * cutoff * sinc * hann;
}

// Roots of z^p + a[1] z^(p-1) + ... + a[p] as companion-matrix eigenvalues.
Eigen::VectorXcd polynomial_roots(const Series<double>& a) {
  const Index p = a.size() - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  companion.row(0) = -a.tail(p).transpose();
  if (p > 1) companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  require(solver.info() == Eigen::Success, ErrorCode::Numerical, "polynomial root finding did not converge");
  return solver.eigenvalues();
}

}  // namespace

Series<double> resample(const Series<double>& signal, double from_rate, double to_rate) {
  require(from_rate > 0.0 && to_rate > 0.0, ErrorCode::Validation, "resample: rates must be positive");
  if (from_rate == to_rate) return signal;
  const double step = from_rate / to_rate;  // input samples per output sample
  const double cutoff = 0.475 * std::min(1.0, to_rate / from_rate);  // cycles per input sample
  const double half_width = 8.0 / cutoff;
  const Index n_out = static_cast<Index>(std::floor(static_cast<double>(signal.size()) / step));

  Series<double> out(n_out);
  for (Index m = 0; m < n_out; ++m) {
    const double t = static_cast<double>(m) * step;
    const Index first = std::max<Index>(0, static_cast<Index>(std::ceil(t - half_width)));
    const Index last = std::min<Index>(signal.size() - 1, static_cast<Index>(std::floor(t + half_width)));
    double acc = 0.0;
    for (Index n = first; n <= last; ++n) acc += signal[n] * windowed_sinc(t - static_cast<double>(n), cutoff, half_width);
    out[m] = acc;
  }
  return out;
}

std::optional<Series<double>> levinson_durbin(const Series<double>& r, int order) {
  require(order >= 1 && r.size() > order, ErrorCode::Validation, "levinson_durbin: need order+1 autocorrelation lags");
  Series<double> a = Series<double>::Zero(order + 1);
  a[0] = 1.0;
  double error = r[0];
  if (!(error > 0.0)) return std::nullopt;
  Series<double> prev;
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / error;
    if (!(std::abs(k) < 1.0)) return std::nullopt;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    error *= 1.0 - k * k;
    if (!(error > 0.0)) return std::nullopt;
  }
  return a;
}

Index FormantTrack::valid_frames() const {
  Index n = 0;
  for (Index i = 0; i < f1.size(); ++i)
    if (std::isfinite(f1[i]) && std::isfinite(f2[i])) ++n;
  return n;
}

FormantTrack track_formants(const Series<double>& signal, double rate, const FormantOptions& options) {
  const double fs = 2.0 * options.max_formant;
  require(options.max_formant > 0.0 && options.lpc_order >= 2, ErrorCode::Validation,
          "track_formants: bad ceiling or LPC order");
  require(rate >= fs, ErrorCode::Validation, "track_formants: sample rate below twice the formant ceiling");
  const Series<double> x = resample(signal, rate, fs);

  const Index frame = static_cast<Index>(std::lround(options.frame_s * fs));
  const Index hop = std::max<Index>(1, static_cast<Index>(std::lround(options.hop_s * fs)));
  const int order = options.lpc_order;
  require(frame > order, ErrorCode::Validation, "track_formants: frame shorter than LPC order");

  const Index n_frames = x.size() >= frame ? (x.size() - frame) / hop + 1 : 0;
  FormantTrack track;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  track.times.resize(n_frames);
  track.f1 = track.f2 = track.b1 = track.b2 = Series<double>::Constant(n_frames, nan);

  const double alpha = std::exp(-2.0 * kPi * options.preemphasis_from_hz / fs);
  Series<double> window(frame);
  for (Index i = 0; i < frame; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(frame - 1));

  for (Index f = 0; f < n_frames; ++f) {
    const Index start = f * hop;
    track.times[f] = (static_cast<double>(start) + 0.5 * static_cast<double>(frame)) / fs;

    Series<double> seg = x.segment(start, frame);
    const double raw_energy = seg.squaredNorm();
    if (options.remove_dc) seg.array() -= seg.mean();
    for (Index i = frame - 1; i >= 1; --i) seg[i] -= alpha * seg[i - 1];
    seg = seg.cwiseProduct(window);

    Series<double> r(order + 1);
    for (int lag = 0; lag <= order; ++lag) r[lag] = seg.head(frame - lag).dot(seg.tail(frame - lag));
    if (!(r[0] > 1e-12 * raw_energy) || r[0] == 0.0) continue;  // silent frame

    const auto a = levinson_durbin(r, order);
    if (!a) {
      track.unstable_frames.push_back(f);
      continue;
    }

    std::vector<std::pair<double, double>> candidates;  // (frequency, bandwidth)
    for (const auto& root : polynomial_roots(*a)) {
      if (root.imag() <= 0.0) continue;
      const double freq = std::arg(root) * fs / (2.0 * kPi);
      const double bw = -std::log(std::abs(root)) * fs / kPi;
      if (freq > 50.0 && freq < 0.5 * fs - 50.0 && bw > 0.0 && bw < options.max_bandwidth)
        candidates.emplace_back(freq, bw);
    }
    if (candidates.size() < 2) continue;
    std::sort(candidates.begin(), candidates.end());
    track.f1[f] = candidates[0].first;
    track.b1[f] = candidates[0].second;
    track.f2[f] = candidates[1].first;
    track.b2[f] = candidates[1].second;
  }
  return track;
}

}  // namespace layerscope
