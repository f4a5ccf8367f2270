#include <doctest.h>

#include <cstring>
#include <limits>

#include "fixtures.hpp"
#include "layerscope/fsio.hpp"
#include "layerscope/weights_io.hpp"

using namespace layerscope;

namespace {

ErrorCode load_error(const std::filesystem::path& p) {
  try {
    load_weights(p);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("load unexpectedly succeeded");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("save/load round trip is bit-identical") {
  const auto dir = fixtures::scratch("weights_roundtrip");
  const GeneratorSpec spec = fixtures::tiny_spec(2);
  WeightBundle w = random_weights(spec, 17);
  w.metadata.model_name = "tiny";
  w.metadata.trained_steps = 1234;
  save_weights(spec, w, dir / "a.lgw");

  const auto [spec2, w2] = load_weights(dir / "a.lgw");
  CHECK(spec2 == spec);
  CHECK(w2.dense_weight == w.dense_weight);
  CHECK(w2.dense_bias == w.dense_bias);
  REQUIRE(w2.layers.size() == w.layers.size());
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    for (Index k = 0; k < w.layers[i].kernel.width(); ++k) CHECK(w2.layers[i].kernel.tap(k) == w.layers[i].kernel.tap(k));
    CHECK(w2.layers[i].bias == w.layers[i].bias);
  }
  CHECK(w2.metadata.model_name == "tiny");
  CHECK(w2.metadata.trained_steps == 1234);
  CHECK(w2.metadata.spec_hash == spec_hash(spec));

  save_weights(spec2, w2, dir / "b.lgw");
  CHECK(read_file(dir / "a.lgw") == read_file(dir / "b.lgw"));
}

TEST_CASE("5-layer file reports a chain ending in 1x16384") {
  const auto dir = fixtures::scratch("weights_wavegan");
  const GeneratorSpec spec = wavegan_spec();
  save_weights(spec, zero_weights(spec), dir / "w.lgw");
  const auto [loaded, w] = load_weights(dir / "w.lgw");
  CHECK(loaded.layers.back().out_channels == 1);
  CHECK(loaded.output_samples() == 16384);
}

TEST_CASE("load errors carry distinct codes") {
  const auto dir = fixtures::scratch("weights_errors");
  const GeneratorSpec spec = fixtures::tiny_spec();
  save_weights(spec, random_weights(spec, 3), dir / "good.lgw");
  const std::string good = read_file(dir / "good.lgw");

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_file_atomic(dir / "magic.lgw", bad_magic);
  CHECK(load_error(dir / "magic.lgw") == ErrorCode::BadMagic);

  write_file_atomic(dir / "short.lgw", good.substr(0, good.size() - 7));
  CHECK(load_error(dir / "short.lgw") == ErrorCode::Truncated);
  write_file_atomic(dir / "tiny.lgw", good.substr(0, 6));
  CHECK(load_error(dir / "tiny.lgw") == ErrorCode::Truncated);

  // Corrupt the last float of the data section into a NaN.
  std::string nan_file = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan_file.data() + nan_file.size() - 4, &nan, 4);
  write_file_atomic(dir / "nan.lgw", nan_file);
  CHECK(load_error(dir / "nan.lgw") == ErrorCode::NonFinite);

  // A container whose tensor shape disagrees with its own spec.
  LgwContainer c = decode_container(good);
  c.tensors[0].second.shape = {c.tensors[0].second.shape[1], c.tensors[0].second.shape[0]};
  write_file_atomic(dir / "shape.lgw", encode_container(c));
  CHECK(load_error(dir / "shape.lgw") == ErrorCode::ShapeMismatch);

  std::string garbled = good;
  garbled[9] = '#';
  write_file_atomic(dir / "header.lgw", garbled);
  CHECK(load_error(dir / "header.lgw") == ErrorCode::MalformedHeader);

  CHECK(load_error(dir / "missing.lgw") == ErrorCode::Io);
}

TEST_CASE("container layout: magic, little-endian header length, JSON, packed f32") {
  LgwContainer c;
  c.header["spec"] = {{"x", 1}};
  c.tensors.push_back({"a", RawTensor{{2}, {1.5f, -2.0f}}});
  const std::string bytes = encode_container(c);
  CHECK(bytes.substr(0, 4) == "LGW1");
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 4);
  CHECK(bytes.size() == 8 + len + 8);
  const auto header = nlohmann::json::parse(bytes.substr(8, len));
  CHECK(header["tensors"][0]["dtype"] == "f32");
  CHECK(header["tensors"][0]["offset"] == 0);
  float second = 0;
  std::memcpy(&second, bytes.data() + 8 + len + 4, 4);
  CHECK(second == -2.0f);
}

TEST_CASE("golden fixture round trip and comparison") {
  const auto dir = fixtures::scratch("fixture");
  const GeneratorSpec spec = fixtures::tiny_spec(2);
  const WeightBundle w = random_weights(spec, 23);
  Rng rng(5);
  GoldenFixture f;
  f.spec = spec;
  f.latent = sample_latent(rng, spec);
  // Fixtures come from 32-bit frameworks; round the latent the same way.
  f.latent.z = f.latent.z.cast<float>().cast<double>();
  f.latent.code = f.latent.code.cast<float>().cast<double>();
  f.trace = forward(spec, w, f.latent);
  f.source = "self";
  save_fixture(f, dir / "f.lgwfix");

  const GoldenFixture g = load_fixture(dir / "f.lgwfix");
  CHECK(g.source == "self");
  CHECK(g.latent.z == f.latent.z);
  REQUIRE(g.trace.post.size() == 2);
  for (const auto& d : compare_to_fixture(spec, w, g)) {
    INFO(d.name);
    CHECK(d.relative_error < 1e-4);
  }

  // Zero weights: every stored intermediate is zero and still matches.
  const WeightBundle zero = zero_weights(spec);
  f.trace = forward(spec, zero, f.latent);
  save_fixture(f, dir / "zero.lgwfix");
  const GoldenFixture z = load_fixture(dir / "zero.lgwfix");
  for (const auto& block : z.trace.post) CHECK(block.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& d : compare_to_fixture(spec, zero, z)) CHECK(d.relative_error == 0.0);

  // A perturbed fixture is flagged.
  f.trace = forward(spec, w, f.latent);
  f.trace.post[0](0, 0) += 1.0;
  save_fixture(f, dir / "bad.lgwfix");
  bool flagged = false;
  for (const auto& d : compare_to_fixture(spec, w, load_fixture(dir / "bad.lgwfix")))
    flagged = flagged || (d.name == "conv1.post" && d.relative_error > 1e-4);
  CHECK(flagged);
}

TEST_CASE("spec JSON round trip") {
  for (const auto& spec : {wavegan_spec(), ciwgan_spec(), deep_spec(), fixtures::tiny_spec(1)})
    CHECK(spec_from_json(spec_to_json(spec)) == spec);
  CHECK(spec_hash(wavegan_spec()) != spec_hash(deep_spec()));
}
