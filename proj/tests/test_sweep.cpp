#include <doctest.h>

#include "fixtures.hpp"
#include "layerscope/sweep.hpp"

using namespace layerscope;

namespace {

/// Every dense unit is relu(2 - z[11] / 10); each conv layer copies channel c to
/// channel c through a centred delta, so layer k holds that value at every
/// stride^k-th sample.
WeightBundle single_path_weights(const GeneratorSpec& spec) {
  WeightBundle w = zero_weights(spec);
  w.dense_weight.col(spec.code_dim + 11).setConstant(-0.1);
  w.dense_bias.setConstant(2.0);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const Index centre = transpose_pad_left(l.kernel, l.stride);
    for (Index c = 0; c < std::min(l.in_channels, l.out_channels); ++c) w.layers[i].kernel(c, c, centre) = 1.0;
  }
  return w;
}

SweepSpec z11_sweep(const GeneratorSpec& spec, double from, double to, double step) {
  Rng rng(7);
  SweepSpec s;
  s.target = SweepTarget::parse("z11");
  s.start = from;
  s.end = to;
  s.step = step;
  s.base_latent = sample_latent(rng, spec);
  return s;
}

}  // namespace

TEST_CASE("target parsing") {
  const SweepTarget z = SweepTarget::parse("z11");
  CHECK(z.kind == SweepTarget::Kind::Z);
  CHECK(z.index == 11);
  CHECK(z.name() == "z11");
  const SweepTarget c = SweepTarget::parse("c2");
  CHECK(c.kind == SweepTarget::Kind::Code);
  CHECK(c.index == 1);
  CHECK(c.name() == "c2");
  for (const char* bad : {"", "z", "x3", "c0", "z1a"}) CHECK_THROWS_AS(SweepTarget::parse(bad), Error);
}

TEST_CASE("step counts") {
  SweepSpec s;
  s.start = -15;
  s.end = 5;
  s.step = 2;
  CHECK(s.step_count() == 11);
  CHECK(s.value_at(0) == -15.0);
  CHECK(s.value_at(10) == 5.0);

  s.start = 0;
  s.end = 2;
  s.step = 0.25;
  CHECK(s.step_count() == 9);

  s.start = s.end = 3.0;
  CHECK(s.step_count() == 1);

  s.start = 5;
  s.end = -15;
  s.step = 2;
  CHECK(s.step_count() == 11);
  CHECK(s.value_at(1) == 3.0);

  // 0.1 steps are not exact in binary but still count as whole.
  s.start = 0;
  s.end = 1;
  s.step = 0.1;
  CHECK(s.step_count() == 11);

  s.step = 0.3;
  CHECK_THROWS_AS(s.step_count(), Error);
  s.step = 0.0;
  CHECK_THROWS_AS(s.step_count(), Error);
  s.step = -1.0;
  CHECK_THROWS_AS(s.step_count(), Error);
}

TEST_CASE("only the swept dimension changes") {
  const GeneratorSpec spec = fixtures::tiny_spec(2);
  const SweepSpec s = z11_sweep(spec, 0, 0, 1);
  CHECK_THROWS_AS(run_sweep(s, spec, zero_weights(spec)), Error);  // tiny spec has no z11

  const GeneratorSpec big = ciwgan_spec();
  SweepSpec sw = z11_sweep(big, -15, 5, 2);
  for (Index k = 0; k < sw.step_count(); ++k) {
    const LatentVector l = sw.latent_at(k);
    CHECK(l.code == sw.base_latent.code);
    for (Index i = 0; i < l.z.size(); ++i)
      if (i != 11) CHECK(l.z[i] == sw.base_latent.z[i]);
    CHECK(l.z[11] == -15.0 + 2.0 * static_cast<double>(k));
  }

  sw.target = SweepTarget::parse("c2");
  sw.start = 0;
  sw.end = 2;
  sw.step = 0.25;
  const LatentVector l = sw.latent_at(8);
  CHECK(l.code[1] == 2.0);
  CHECK(l.code[0] == sw.base_latent.code[0]);
  CHECK(l.z == sw.base_latent.z);
}

TEST_CASE("single-path model gives the analytic energy profile") {
  GeneratorSpec spec = fixtures::tiny_spec();
  spec.latent_dim = 12;
  const WeightBundle w = single_path_weights(spec);
  const SweepResult r = run_sweep(z11_sweep(spec, -15, 5, 2), spec, w);
  REQUIRE(r.steps.size() == 11);
  for (std::size_t layer = 1; layer <= spec.layers.size(); ++layer) {
    const Series<double> profile = sweep_energy_profile(r, layer);
    const double density = 1.0 / static_cast<double>(Index{1} << layer);  // stride 2 per layer
    for (Index k = 0; k < 11; ++k) {
      const double v = -15.0 + 2.0 * static_cast<double>(k);
      const double expected = layer == spec.layers.size() ? density * std::tanh(2.0 - 0.1 * v) : density * (2.0 - 0.1 * v);
      CHECK(std::abs(profile[k] - expected) < 1e-12);
      if (k > 0) CHECK(profile[k] < profile[k - 1]);
    }
  }
}

TEST_CASE("zero model gives a zero profile") {
  GeneratorSpec spec = fixtures::tiny_spec();
  spec.latent_dim = 12;
  const SweepResult r = run_sweep(z11_sweep(spec, -15, 5, 2), spec, zero_weights(spec));
  for (std::size_t layer = 1; layer <= 2; ++layer) CHECK(sweep_energy_profile(r, layer).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sweeps are bit-identical on rerun and keep traces on request") {
  GeneratorSpec spec = fixtures::tiny_spec();
  spec.latent_dim = 12;
  const WeightBundle w = random_weights(spec, 5);
  const SweepSpec s = z11_sweep(spec, -4, 4, 1);
  const SweepResult a = run_sweep(s, spec, w, {.keep_traces = true});
  const SweepResult b = run_sweep(s, spec, w);
  REQUIRE(a.steps.size() == 9);
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].waveform == b.steps[k].waveform);
    CHECK(a.steps[k].probes[0].series == b.steps[k].probes[0].series);
    CHECK(a.steps[k].trace.has_value());
    CHECK_FALSE(b.steps[k].trace.has_value());
  }
}

TEST_CASE("energy window") {
  GeneratorSpec spec = fixtures::tiny_spec();
  spec.latent_dim = 12;
  const SweepResult r = run_sweep(z11_sweep(spec, 0, 1, 1), spec, single_path_weights(spec));
  // Layer 1 has 8 samples with the signal at even positions.
  const Series<double> even = sweep_energy_profile(r, 1, SampleWindow{0, 1});
  CHECK(even[0] == 2.0);
  CHECK(sweep_energy_profile(r, 1, SampleWindow{1, 2})[0] == 0.0);
  CHECK_THROWS_AS(sweep_energy_profile(r, 1, SampleWindow{4, 9}), Error);
  CHECK_THROWS_AS(sweep_energy_profile(r, 1, SampleWindow{3, 3}), Error);
  CHECK_THROWS_AS(sweep_energy_profile(r, 3), Error);
}
