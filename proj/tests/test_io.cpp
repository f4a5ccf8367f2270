#include <doctest.h>

#include <cstring>
#include <limits>

#include "fixtures.hpp"
#include "layerscope/csv.hpp"
#include "layerscope/fsio.hpp"
#include "layerscope/manifest.hpp"
#include "layerscope/plot.hpp"
#include "layerscope/wav.hpp"
#include "oracles.hpp"

using namespace layerscope;

TEST_CASE("float WAV round trip is exact for float-representable samples") {
  Rng rng(1);
  const Series<double> s = oracle::random_series(rng, 16384).cast<float>().cast<double>();
  const std::string bytes = encode_wav(s, 16000, WavEncoding::Float32);
  CHECK(bytes.substr(0, 4) == "RIFF");
  CHECK(bytes.substr(8, 4) == "WAVE");
  const WavData d = decode_wav(bytes);
  CHECK(d.encoding == WavEncoding::Float32);
  CHECK(d.sample_rate == 16000.0);
  CHECK(d.samples == s);
}

TEST_CASE("PCM16 WAV round trip within one step") {
  Rng rng(2);
  Series<double> s = oracle::random_series(rng, 1000);
  s[0] = 1.0;
  s[1] = -1.0;
  const WavData d = decode_wav(encode_wav(s, 8000, WavEncoding::Pcm16));
  CHECK(d.encoding == WavEncoding::Pcm16);
  CHECK(d.sample_rate == 8000.0);
  CHECK((d.samples - s).cwiseAbs().maxCoeff() <= 1.0 / 32768.0);

  Series<double> loud(2);
  loud << 3.0, -3.0;
  const WavData c = decode_wav(encode_wav(loud, 16000, WavEncoding::Pcm16));
  CHECK(c.samples[0] == 1.0);
  CHECK(c.samples[1] == -1.0);
}

TEST_CASE("WAV errors") {
  CHECK_THROWS_AS(encode_wav(Series<double>(0), 16000, WavEncoding::Float32), Error);
  Series<double> nan(1);
  nan[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(encode_wav(nan, 16000, WavEncoding::Float32), Error);
  CHECK_THROWS_AS(decode_wav("RIFF"), Error);
  std::string bytes = encode_wav(Series<double>::Zero(10), 16000, WavEncoding::Pcm16);
  bytes.replace(8, 4, "AVI ");
  CHECK_THROWS_AS(decode_wav(bytes), Error);
  CHECK_THROWS_AS(wav_encoding_from_string("mp3"), Error);
  CHECK(wav_encoding_from_string("pcm16") == WavEncoding::Pcm16);
}

TEST_CASE("WAV files on disk") {
  const auto dir = fixtures::scratch("wav");
  const Series<double> s = oracle::sine(440, 16000, 0.1).cast<float>().cast<double>();
  write_wav(s, dir / "a.wav");
  CHECK(read_wav(dir / "a.wav").samples == s);
}

TEST_CASE("CSV round trip is bit-exact") {
  Rng rng(3);
  Table t;
  t.columns = {"a", "b", "c"};
  t.data = oracle::random_block(rng, 50, 3, -1e6, 1e6);
  t.data(0, 0) = std::numeric_limits<double>::quiet_NaN();
  t.data(1, 1) = 1e-300;
  t.data(2, 2) = -0.0;
  const Table back = decode_csv(encode_csv(t));
  CHECK(back.columns == t.columns);
  REQUIRE(back.data.rows() == 50);
  CHECK(std::isnan(back.data(0, 0)));
  for (Index i = 1; i < 50; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(back.data(i, j) == t.data(i, j));
  CHECK(back.column("c") == 2);
  CHECK_THROWS_AS(back.column("zz"), Error);

  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK_THROWS_AS(decode_csv("a,b\n1\n"), Error);
  CHECK_THROWS_AS(decode_csv("a\nhello\n"), Error);

  const Table tt = track_table(Series<double>::LinSpaced(3, 0, 1), Series<double>::Ones(3), "f0");
  CHECK(tt.columns == std::vector<std::string>{"time", "f0"});
}

TEST_CASE("plot table and SVG") {
  std::vector<PlotSeries> s = {{"long", Series<double>::LinSpaced(9, 0, 1), 1.0},
                               {"short", Series<double>::LinSpaced(3, 0, 2), 0.5}};
  const Table t = plot_table(s);
  CHECK(t.columns.size() == 3);
  REQUIRE(t.data.rows() == 9);
  // Resampled, unscaled.
  CHECK(t.data(4, 2) == doctest::Approx(1.0));
  CHECK(t.data(8, 2) == doctest::Approx(2.0));

  const std::string svg = render_svg(s, "title");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("short") != std::string::npos);

  const auto dir = fixtures::scratch("plot");
  emit_plot(s, dir / "p", "t");
  CHECK(std::filesystem::exists(dir / "p.csv"));
  CHECK(std::filesystem::exists(dir / "p.svg"));
}

TEST_CASE("manifest records and verifies artifacts") {
  const auto dir = fixtures::scratch("manifest");
  write_file_atomic(dir / "b.txt", "bee");
  std::filesystem::create_directories(dir / "sub");
  write_file_atomic(dir / "sub" / "a.txt", "ay");

  RunManifest m;
  m.tool_version = "x";
  m.seed = 7;
  m.command = "probe";
  m.parameters["layer"] = 3;
  m.add_artifact(dir, "b.txt");
  m.add_artifact(dir, "sub/a.txt");
  write_manifest(m, dir);

  const RunManifest back = read_manifest(dir);
  CHECK(back.seed == 7);
  CHECK(back.parameters["layer"] == 3);
  REQUIRE(back.artifacts.size() == 2);
  CHECK(back.artifacts[0].path == "b.txt");
  CHECK(back.artifacts[0].sha256 == sha256_hex("bee"));
  CHECK(verify_manifest(dir).empty());

  write_file_atomic(dir / "b.txt", "changed");
  std::filesystem::remove(dir / "sub" / "a.txt");
  CHECK(verify_manifest(dir).size() == 2);
}

TEST_CASE("sha256 and atomic writes") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = fixtures::scratch("atomic");
  write_file_atomic(dir / "f", "one");
  write_file_atomic(dir / "f", "two");
  CHECK(read_file(dir / "f") == "two");
  std::size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) entries += e.is_regular_file();
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file(dir / "nope"), Error);
}
