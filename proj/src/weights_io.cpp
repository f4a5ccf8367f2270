#include "layerscope/weights_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "layerscope/fsio.hpp"

namespace layerscope {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'L', 'G', 'W', '1'};

static_assert(std::endian::native == std::endian::little, "lgw I/O assumes a little-endian host");

Index element_count(const std::vector<Index>& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<Index>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

RawTensor raw_from(std::vector<Index> shape) {
  RawTensor t;
  t.values.resize(static_cast<std::size_t>(element_count(shape)));
  t.shape = std::move(shape);
  return t;
}

void expect_shape(const LgwContainer& c, const std::string& name, const std::vector<Index>& shape) {
  require(c.contains(name), ErrorCode::ShapeMismatch, "missing tensor " + name);
  const auto& t = c.at(name);
  require(t.shape == shape, ErrorCode::ShapeMismatch,
          name + " has shape " + shape_string(t.shape) + ", spec wants " + shape_string(shape));
}

RawTensor block_to_raw(const TensorTS& m) {
  RawTensor t = raw_from({m.rows(), m.cols()});
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) t.values[static_cast<std::size_t>(r * m.cols() + c)] = static_cast<float>(m(r, c));
  return t;
}

TensorTS raw_to_block(const RawTensor& t) {
  require(t.shape.size() == 2, ErrorCode::ShapeMismatch, "expected a rank-2 tensor");
  TensorTS m(t.shape[0], t.shape[1]);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = t.values[static_cast<std::size_t>(i)];
  return m;
}

RawTensor vector_to_raw(const Series<double>& v) {
  RawTensor t = raw_from({v.size()});
  for (Index i = 0; i < v.size(); ++i) t.values[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return t;
}

Series<double> raw_to_vector(const RawTensor& t) {
  Series<double> v(static_cast<Index>(t.values.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = t.values[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

json spec_to_json(const GeneratorSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers)
    layers.push_back({{"in_channels", l.in_channels},
                      {"out_channels", l.out_channels},
                      {"kernel", l.kernel},
                      {"stride", l.stride},
                      {"activation", to_string(l.activation)}});
  return {{"latent_dim", spec.latent_dim},
          {"code_dim", spec.code_dim},
          {"dense_out", {{"channels", spec.dense_channels}, {"samples", spec.dense_samples}}},
          {"layers", layers}};
}

GeneratorSpec spec_from_json(const json& j) {
  try {
    GeneratorSpec spec;
    spec.latent_dim = j.at("latent_dim").get<Index>();
    spec.code_dim = j.value("code_dim", Index{0});
    spec.dense_channels = j.at("dense_out").at("channels").get<Index>();
    spec.dense_samples = j.at("dense_out").at("samples").get<Index>();
    for (const auto& l : j.at("layers"))
      spec.layers.push_back({l.at("in_channels").get<Index>(), l.at("out_channels").get<Index>(),
                             l.value("kernel", Index{25}), l.value("stride", Index{4}),
                             activation_from_string(l.at("activation").get<std::string>())});
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, std::string("generator spec: ") + e.what());
  }
}

std::string spec_hash(const GeneratorSpec& spec) { return sha256_hex(spec_to_json(spec).dump()); }

const RawTensor& LgwContainer::at(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  fail(ErrorCode::ShapeMismatch, "missing tensor " + name);
}

bool LgwContainer::contains(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

std::string encode_container(const LgwContainer& c) {
  json header = c.header;
  json table = json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : c.tensors) {
    require(static_cast<Index>(t.values.size()) == element_count(t.shape), ErrorCode::ShapeMismatch,
            name + ": value count does not match shape");
    table.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}, {"dtype", "f32"}});
    offset += t.values.size() * sizeof(float);
  }
  header["tensors"] = table;
  const std::string text = header.dump();

  std::string out;
  out.reserve(8 + text.size() + offset);
  out.append(kMagic, 4);
  const auto len = static_cast<std::uint32_t>(text.size());
  char len_bytes[4];
  std::memcpy(len_bytes, &len, 4);
  out.append(len_bytes, 4);
  out += text;
  for (const auto& [name, t] : c.tensors)
    out.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(float));
  return out;
}

LgwContainer decode_container(std::string_view bytes) {
  require(bytes.size() >= 4, ErrorCode::Truncated, "file shorter than the magic");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::BadMagic, "not an LGW1 file");
  require(bytes.size() >= 8, ErrorCode::Truncated, "missing header length");
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 4);
  require(bytes.size() >= 8 + static_cast<std::size_t>(len), ErrorCode::Truncated, "header runs past end of file");

  json header;
  try {
    header = json::parse(bytes.substr(8, len));
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, e.what());
  }
  require(header.is_object() && header.contains("tensors") && header["tensors"].is_array(),
          ErrorCode::MalformedHeader, "header lacks a tensor table");

  const std::string_view data = bytes.substr(8 + len);
  LgwContainer c;
  try {
    for (const auto& entry : header["tensors"]) {
      const auto name = entry.at("name").get<std::string>();
      require(entry.at("dtype").get<std::string>() == "f32", ErrorCode::MalformedHeader,
              name + ": only f32 tensors are supported");
      RawTensor t = raw_from(entry.at("shape").get<std::vector<Index>>());
      const auto offset = entry.at("offset").get<std::size_t>();
      const std::size_t nbytes = t.values.size() * sizeof(float);
      require(offset <= data.size() && nbytes <= data.size() - offset, ErrorCode::Truncated,
              name + " extends past end of file");
      std::memcpy(t.values.data(), data.data() + offset, nbytes);
      for (float v : t.values) require(std::isfinite(v), ErrorCode::NonFinite, name);
      c.tensors.emplace_back(name, std::move(t));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, e.what());
  }
  header.erase("tensors");
  c.header = std::move(header);
  return c;
}

void save_weights(const GeneratorSpec& spec, const WeightBundle& weights, const std::filesystem::path& path) {
  spec.validate();
  weights.check_against(spec);

  LgwContainer c;
  c.header["spec"] = spec_to_json(spec);
  c.header["metadata"] = {{"model_name", weights.metadata.model_name},
                          {"trained_steps", weights.metadata.trained_steps},
                          {"spec_hash", spec_hash(spec)}};

  RawTensor dw = raw_from({weights.dense_weight.rows(), weights.dense_weight.cols()});
  for (Index r = 0; r < weights.dense_weight.rows(); ++r)
    for (Index col = 0; col < weights.dense_weight.cols(); ++col)
      dw.values[static_cast<std::size_t>(r * weights.dense_weight.cols() + col)] =
          static_cast<float>(weights.dense_weight(r, col));
  c.tensors.emplace_back("dense.weight", std::move(dw));
  c.tensors.emplace_back("dense.bias", vector_to_raw(weights.dense_bias));

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& k = weights.layers[i].kernel;
    RawTensor kw = raw_from({k.in_channels(), k.out_channels(), k.width()});
    std::size_t at = 0;
    for (Index ic = 0; ic < k.in_channels(); ++ic)
      for (Index oc = 0; oc < k.out_channels(); ++oc)
        for (Index t = 0; t < k.width(); ++t) kw.values[at++] = static_cast<float>(k(ic, oc, t));
    const std::string prefix = "conv" + std::to_string(i + 1);
    c.tensors.emplace_back(prefix + ".weight", std::move(kw));
    c.tensors.emplace_back(prefix + ".bias", vector_to_raw(weights.layers[i].bias));
  }
  write_file_atomic(path, encode_container(c));
}

std::pair<GeneratorSpec, WeightBundle> load_weights(const std::filesystem::path& path) {
  const LgwContainer c = decode_container(read_file(path));
  require(c.header.contains("spec"), ErrorCode::MalformedHeader, "missing spec");
  const GeneratorSpec spec = spec_from_json(c.header["spec"]);

  WeightBundle w;
  if (c.header.contains("metadata")) {
    const auto& m = c.header["metadata"];
    w.metadata.model_name = m.value("model_name", std::string{});
    w.metadata.trained_steps = m.value("trained_steps", std::int64_t{0});
    w.metadata.spec_hash = m.value("spec_hash", std::string{});
    require(w.metadata.spec_hash.empty() || w.metadata.spec_hash == spec_hash(spec), ErrorCode::ShapeMismatch,
            "spec hash in metadata does not match the declared spec");
  }

  expect_shape(c, "dense.weight", {spec.dense_width(), spec.input_width()});
  expect_shape(c, "dense.bias", {spec.dense_width()});
  const auto& dw = c.at("dense.weight");
  w.dense_weight.resize(spec.dense_width(), spec.input_width());
  for (Index r = 0; r < w.dense_weight.rows(); ++r)
    for (Index col = 0; col < w.dense_weight.cols(); ++col)
      w.dense_weight(r, col) = dw.values[static_cast<std::size_t>(r * w.dense_weight.cols() + col)];
  w.dense_bias = raw_to_vector(c.at("dense.bias"));

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const std::string prefix = "conv" + std::to_string(i + 1);
    expect_shape(c, prefix + ".weight", {l.in_channels, l.out_channels, l.kernel});
    expect_shape(c, prefix + ".bias", {l.out_channels});
    const auto& raw = c.at(prefix + ".weight");
    Kernel<double> k(l.in_channels, l.out_channels, l.kernel);
    std::size_t at = 0;
    for (Index ic = 0; ic < l.in_channels; ++ic)
      for (Index oc = 0; oc < l.out_channels; ++oc)
        for (Index t = 0; t < l.kernel; ++t) k(ic, oc, t) = raw.values[at++];
    w.layers.push_back({std::move(k), raw_to_vector(c.at(prefix + ".bias"))});
  }
  w.check_against(spec);
  return {spec, std::move(w)};
}

void save_fixture(const GoldenFixture& f, const std::filesystem::path& path) {
  LgwContainer c;
  c.header["spec"] = spec_to_json(f.spec);
  c.header["fixture"] = {{"source", f.source}};
  c.tensors.emplace_back("latent.code", vector_to_raw(f.latent.code));
  c.tensors.emplace_back("latent.z", vector_to_raw(f.latent.z));
  c.tensors.emplace_back("dense.pre", block_to_raw(f.trace.dense_pre));
  c.tensors.emplace_back("dense.post", block_to_raw(f.trace.dense_post));
  for (std::size_t i = 0; i < f.trace.pre.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i + 1);
    c.tensors.emplace_back(prefix + ".pre", block_to_raw(f.trace.pre[i]));
    c.tensors.emplace_back(prefix + ".post", block_to_raw(f.trace.post[i]));
  }
  c.tensors.emplace_back("waveform", vector_to_raw(f.trace.waveform));
  write_file_atomic(path, encode_container(c));
}

GoldenFixture load_fixture(const std::filesystem::path& path) {
  const LgwContainer c = decode_container(read_file(path));
  require(c.header.contains("spec"), ErrorCode::MalformedHeader, "fixture lacks a spec");
  GoldenFixture f;
  f.spec = spec_from_json(c.header["spec"]);
  if (c.header.contains("fixture")) f.source = c.header["fixture"].value("source", std::string{});

  expect_shape(c, "latent.code", {f.spec.code_dim});
  expect_shape(c, "latent.z", {f.spec.latent_dim});
  f.latent.code = raw_to_vector(c.at("latent.code"));
  f.latent.z = raw_to_vector(c.at("latent.z"));

  expect_shape(c, "dense.pre", {f.spec.dense_channels, f.spec.dense_samples});
  expect_shape(c, "dense.post", {f.spec.dense_channels, f.spec.dense_samples});
  f.trace.dense_pre = raw_to_block(c.at("dense.pre"));
  f.trace.dense_post = raw_to_block(c.at("dense.post"));
  for (std::size_t i = 0; i < f.spec.layers.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i + 1);
    const std::vector<Index> shape{f.spec.channels_at(i + 1), f.spec.samples_at(i + 1)};
    expect_shape(c, prefix + ".pre", shape);
    expect_shape(c, prefix + ".post", shape);
    f.trace.pre.push_back(raw_to_block(c.at(prefix + ".pre")));
    f.trace.post.push_back(raw_to_block(c.at(prefix + ".post")));
  }
  expect_shape(c, "waveform", {f.spec.output_samples()});
  f.trace.waveform = raw_to_vector(c.at("waveform"));
  return f;
}

std::vector<LayerDeviation> compare_to_fixture(const GeneratorSpec& spec, const WeightBundle& weights,
                                               const GoldenFixture& fixture) {
  require(spec == fixture.spec, ErrorCode::ShapeMismatch, "fixture was produced for a different spec");
  const ForwardTrace ours = forward(spec, weights, fixture.latent);

  auto rel = [](const auto& a, const auto& b) {
    const double denom = std::max(b.norm(), 1e-30);
    return (a - b).norm() / denom;
  };
  std::vector<LayerDeviation> out;
  out.push_back({"dense.pre", rel(ours.dense_pre, fixture.trace.dense_pre)});
  out.push_back({"dense.post", rel(ours.dense_post, fixture.trace.dense_post)});
  for (std::size_t i = 0; i < ours.pre.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i + 1);
    out.push_back({prefix + ".pre", rel(ours.pre[i], fixture.trace.pre[i])});
    out.push_back({prefix + ".post", rel(ours.post[i], fixture.trace.post[i])});
  }
  out.push_back({"waveform", rel(ours.waveform, fixture.trace.waveform)});
  return out;
}

}  // namespace layerscope
