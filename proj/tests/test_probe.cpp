#include <doctest.h>

#include "layerscope/probe.hpp"
#include "oracles.hpp"

using namespace layerscope;

TEST_CASE("a single feature map is its own average") {
  Rng rng(1);
  const TensorTS layer = oracle::random_block(rng, 1, 64);
  CHECK(average_feature_maps(layer).series == layer.row(0).transpose());
}

TEST_CASE("zero layer averages to zero") {
  const LayerProbe p = average_feature_maps(TensorTS::Zero(512, 64), 1);
  CHECK(p.layer_index == 1);
  CHECK(p.series.size() == 64);
  CHECK(p.series.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("averaging matches the naive mean and stays within min/max") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Index c = 1 + static_cast<Index>(rng.below(64)), t = 1 + static_cast<Index>(rng.below(128));
    const TensorTS layer = oracle::random_block(rng, c, t, 0.0, 5.0);
    const Series<double> s = average_feature_maps(layer).series;
    const Series<double> ref = oracle::column_means(layer);
    CHECK((s - ref).cwiseAbs().maxCoeff() < 1e-12);
    for (Index j = 0; j < t; ++j) {
      CHECK(s[j] >= layer.col(j).minCoeff() - 1e-12);
      CHECK(s[j] <= layer.col(j).maxCoeff() + 1e-12);
    }
    const double alpha = rng.uniform(0.1, 10.0);
    const Series<double> scaled = average_feature_maps(TensorTS(alpha * layer)).series;
    CHECK((scaled - alpha * s).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("averaging an empty layer is an error") {
  CHECK_THROWS_AS(average_feature_maps(TensorTS(0, 4)), Error);
}

TEST_CASE("probe_to_waveform clips above 1 and upsamples to 16384") {
  LayerProbe p;
  p.series = Series<double>::Constant(64, 0.5);
  p.series.segment(10, 3).setConstant(1.7);
  const Series<double> w = probe_to_waveform(p);
  CHECK(w.size() == 16384);
  CHECK(w.maxCoeff() == 1.0);

  // Negative values are left alone.
  p.series.segment(20, 3).setConstant(-3.0);
  CHECK(probe_to_waveform(p).minCoeff() == -3.0);
}

TEST_CASE("probe_to_waveform keeps endpoints and interpolates a ramp") {
  LayerProbe p;
  p.series = Series<double>::LinSpaced(256, 0.0, 0.9);
  const Series<double> w = probe_to_waveform(p);
  CHECK(w[0] == p.series[0]);
  CHECK(std::abs(w[16383] - p.series[255]) < 1e-12);
  const Series<double> ramp = Series<double>::LinSpaced(16384, 0.0, 0.9);
  CHECK((w - ramp).cwiseAbs().maxCoeff() < 1e-9);

  p.series = Series<double>::Constant(1, 0.25);
  CHECK((probe_to_waveform(p).array() == 0.25).all());
}

TEST_CASE("probe_trace yields one probe per conv layer") {
  const GeneratorSpec spec = wavegan_spec();
  const WeightBundle w = random_weights(spec, 3);
  Rng rng(4);
  const ForwardTrace trace = forward(spec, w, sample_latent(rng, spec));
  const auto probes = probe_trace(trace);
  REQUIRE(probes.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(probes[i].layer_index == i + 1);
    CHECK(probes[i].series.size() == spec.samples_at(i + 1));
    CHECK((probes[i].series - oracle::column_means(trace.post[i])).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(probes[i].scale_hint > 0.0);
  }
  // The single-map last layer is the waveform itself.
  CHECK(probes[4].series == trace.waveform);

  const auto pre = probe_trace(trace, true);
  CHECK((pre[0].series - oracle::column_means(trace.pre[0])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scale hint does not touch the series") {
  LayerProbe p;
  p.series = Series<double>::Constant(8, 4.0);
  const Series<double> before = p.series;
  Series<double> wave = Series<double>::Zero(16);
  wave[3] = -0.5;
  fit_scale_hint(p, wave);
  CHECK(p.scale_hint == doctest::Approx(0.125));
  CHECK(p.series == before);

  fit_scale_hint(p, Series<double>::Zero(16));
  CHECK(p.scale_hint == 1.0);
}

TEST_CASE("layer Nyquist is half the sample count") {
  const GeneratorSpec spec = wavegan_spec();
  CHECK(layer_nyquist(spec, 2) == 128.0);
  CHECK(layer_nyquist(spec, 4) == 2048.0);
  CHECK(layer_nyquist(spec, 5) == 8192.0);
  CHECK_THROWS_AS(layer_nyquist(spec, 6), Error);
}
