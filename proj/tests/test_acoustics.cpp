#include <doctest.h>

#include <limits>

#include "fixtures.hpp"
#include "layerscope/acoustics.hpp"
#include "layerscope/fsio.hpp"
#include "oracles.hpp"

using namespace layerscope;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Index voiced_count(const PitchTrack& t) {
  Index n = 0;
  for (Index i = 0; i < t.f0.size(); ++i) n += t.voiced(i);
  return n;
}

}  // namespace

TEST_CASE("pitch of a pure sine") {
  for (double f : {60.0, 100.0, 220.0, 300.0}) {
    const PitchTrack t = track_f0(oracle::sine(f, 16000, 1.0), 16000, 60, 300);
    REQUIRE(t.f0.size() > 50);
    Index close = 0;
    for (Index i = 0; i < t.f0.size(); ++i)
      if (t.voiced(i) && std::abs(t.f0[i] - f) <= 2.0) ++close;
    INFO("f = " << f);
    CHECK(close >= static_cast<Index>(0.95 * static_cast<double>(t.f0.size())));
  }
}

TEST_CASE("pitch frame times are spaced by the hop") {
  const PitchTrack t = track_f0(oracle::sine(100, 16000, 1.0), 16000, 60, 300);
  for (Index i = 1; i < t.times.size(); ++i) CHECK(t.times[i] - t.times[i - 1] == doctest::Approx(0.010));
  CHECK(t.range.floor_hz == 60.0);
}

TEST_CASE("white noise is mostly unvoiced") {
  Rng rng(3);
  const PitchTrack t = track_f0(oracle::white_noise(rng, 16000), 16000, 60, 300);
  CHECK(static_cast<double>(voiced_count(t)) <= 0.1 * static_cast<double>(t.f0.size()));
}

TEST_CASE("silence is unvoiced and short input is rejected") {
  const PitchTrack t = track_f0(Series<double>::Zero(16000), 16000, 60, 300);
  CHECK(voiced_count(t) == 0);
  CHECK_THROWS_AS(track_f0(Series<double>::Zero(100), 16000, 60, 300), Error);
  CHECK_THROWS_AS(track_f0(Series<double>::Zero(100), 16000, 300, 60), Error);
}

TEST_CASE("pitch is amplitude invariant") {
  const Series<double> s = oracle::sine(150, 16000, 0.5);
  const PitchTrack a = track_f0(s, 16000, 75, 450);
  const PitchTrack b = track_f0(Series<double>(0.01 * s), 16000, 75, 450);
  REQUIRE(a.f0.size() == b.f0.size());
  for (Index i = 0; i < a.f0.size(); ++i) {
    CHECK(a.voiced(i) == b.voiced(i));
    if (a.voiced(i)) CHECK(std::abs(a.f0[i] - b.f0[i]) < 1e-6);
  }
}

TEST_CASE("low-layer range tracks a slow oscillation") {
  // 1024 samples spanning about a second, as for a layer-3 probe.
  const Series<double> s = oracle::sine(20, 1024, 1.0);
  const PitchTrack t = track_f0(s, 1024, kLowLayerPitch.floor_hz, kLowLayerPitch.ceiling_hz);
  Index close = 0;
  for (Index i = 0; i < t.f0.size(); ++i)
    if (t.voiced(i) && std::abs(t.f0[i] - 20.0) <= 0.4) ++close;
  CHECK(static_cast<double>(close) >= 0.9 * static_cast<double>(t.f0.size()));
}

TEST_CASE("intensity of sines") {
  const IntensityTrack full = track_intensity(oracle::sine(1000, 16000, 1.0), 16000);
  const IntensityTrack half = track_intensity(oracle::sine(1000, 16000, 1.0, 0.5), 16000);
  REQUIRE(full.db.size() > 10);
  REQUIRE(full.db.size() == half.db.size());
  for (Index i = 0; i < full.db.size(); ++i) {
    CHECK(std::abs(full.db[i] - (-3.0103)) < 0.1);
    CHECK(std::abs(half.db[i] - full.db[i] - (-6.0206)) < 0.05);
  }
}

TEST_CASE("intensity of silence sits at the floor") {
  const IntensityTrack t = track_intensity(Series<double>::Zero(16000), 16000);
  REQUIRE(t.db.size() > 0);
  CHECK((t.db.array() == kIntensityFloorDb).all());
}

TEST_CASE("Levinson-Durbin recovers an AR(2) process") {
  // r[k] of x[n] = 1.2 x[n-1] - 0.5 x[n-2] + e from the Yule-Walker relations.
  const double a1 = 1.2, a2 = -0.5;
  Series<double> r(6);
  r[0] = 1.0;
  r[1] = a1 / (1.0 - a2);
  for (Index k = 2; k < 6; ++k) r[k] = a1 * r[k - 1] + a2 * r[k - 2];
  const auto a = levinson_durbin(r, 2);
  REQUIRE(a.has_value());
  CHECK((*a)[0] == 1.0);
  CHECK(std::abs((*a)[1] + a1) < 1e-12);
  CHECK(std::abs((*a)[2] + a2) < 1e-12);

  CHECK_FALSE(levinson_durbin(Series<double>::Zero(6), 4).has_value());
}

TEST_CASE("formants of a two-resonator vowel") {
  const Series<double> v = oracle::resonator_vowel({{700, 80}, {1200, 80}}, 120, 16000, 0.5);
  const FormantTrack t = track_formants(v, 16000);
  REQUIRE(t.f1.size() > 20);
  Index good = 0;
  for (Index i = 0; i < t.f1.size(); ++i)
    if (std::abs(t.f1[i] - 700) <= 70 && std::abs(t.f2[i] - 1200) <= 120) ++good;
  CHECK(static_cast<double>(good) >= 0.9 * static_cast<double>(t.f1.size()));
}

TEST_CASE("formants of degenerate signals") {
  const FormantTrack sine = track_formants(oracle::sine(440, 16000, 0.5), 16000);
  CHECK(sine.valid_frames() == 0);

  const FormantTrack silence = track_formants(Series<double>::Zero(8000), 16000);
  CHECK(silence.valid_frames() == 0);
  CHECK(silence.f1.size() > 0);
}

TEST_CASE("resample keeps a low tone and its length ratio") {
  const Series<double> s = oracle::sine(300, 16000, 0.5);
  const Series<double> down = resample(s, 16000, 10000);
  CHECK(down.size() == 5000);
  const Series<double> ref = oracle::sine(300, 10000, 0.5);
  // Ignore the filter edges.
  CHECK((down.segment(200, 4600) - ref.segment(200, 4600)).cwiseAbs().maxCoeff() < 1e-2);
  CHECK(resample(s, 16000, 16000) == s);
}

TEST_CASE("normalized time sampling") {
  const Series<double> times = Series<double>::LinSpaced(101, 0.0, 1.0);
  const Series<double> flat = Series<double>::Constant(101, 110.0);
  const Series<double> a = normalized_time_sample(times, flat, {0.2, 0.6, "x"}, 40);
  CHECK(a.size() == 40);
  for (Index b = 0; b < 40; ++b) CHECK(a[b] == doctest::Approx(110.0));

  const Series<double> ramp = (100.0 + 100.0 * times.array()).matrix();
  const Series<double> r = normalized_time_sample(times, ramp, {0.0, 1.0, ""}, 4);
  const double expected[] = {112.5, 137.5, 162.5, 187.5};
  for (Index b = 0; b < 4; ++b) CHECK(std::abs(r[b] - expected[b]) < 1e-9);

  // An isolated NaN frame is bridged by its neighbours.
  Series<double> holes = ramp;
  holes[50] = kNaN;
  const Series<double> bridged = normalized_time_sample(times, holes, {0.0, 1.0, ""}, 100);
  for (Index b = 0; b < 100; ++b) CHECK(std::isfinite(bridged[b]));

  // A bin whose frames are all NaN stays NaN.
  Series<double> gap = ramp;
  gap.segment(40, 21).setConstant(kNaN);
  const Series<double> g = normalized_time_sample(times, gap, {0.0, 1.0, ""}, 10);
  CHECK(std::isfinite(g[0]));
  CHECK(std::isnan(g[4]));
  CHECK(std::isnan(g[5]));
  CHECK(std::isfinite(g[6]));

  CHECK_THROWS_AS(normalized_time_sample(times, flat, {0.5, 0.5, ""}, 4), Error);
  CHECK_THROWS_AS(normalized_time_sample(times, flat, {2.0, 3.0, ""}, 4), Error);
  CHECK_THROWS_AS(normalized_time_sample(times, flat, {0.0, 1.0, ""}, 0), Error);
}

TEST_CASE("tiers: validation, file round trip, durations") {
  AnnotationTier a;
  a.intervals = {{0.0, 0.1, "s"}, {0.1, 0.25, "a"}, {0.3, 0.5, "s"}};
  CHECK_NOTHROW(a.validate());

  const auto dir = fixtures::scratch("tiers");
  write_tier(a, dir / "a.tsv");
  const AnnotationTier back = read_tier(dir / "a.tsv", "layer3");
  REQUIRE(back.intervals.size() == 3);
  CHECK(back.source_layer == "layer3");
  CHECK(back.intervals[1].label == "a");
  CHECK(back.intervals[2].end == doctest::Approx(0.5));

  AnnotationTier b;
  b.intervals = {{0.0, 0.2, "s"}, {0.5, 0.6, "s"}};
  const auto d = measure_durations(a, b, "s");
  REQUIRE(d.size() == 2);
  CHECK(d[0].first == doctest::Approx(0.1));
  CHECK(d[0].second == doctest::Approx(0.2));
  CHECK(d[1].first == doctest::Approx(0.2));
  CHECK_THROWS_AS(measure_durations(a, b, "a"), Error);

  AnnotationTier bad;
  bad.intervals = {{0.0, 0.3, "x"}, {0.2, 0.4, "y"}};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.intervals = {{0.5, 0.4, "x"}};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.intervals = {{0.9, 1.1, "x"}};
  CHECK_THROWS_AS(bad.validate(), Error);

  write_file_atomic(dir / "broken.tsv", "0.1 0.2 x\n");
  CHECK_THROWS_AS(read_tier(dir / "broken.tsv"), Error);
}
