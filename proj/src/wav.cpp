#include "layerscope/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "layerscope/fsio.hpp"

namespace layerscope {

namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t at) {
  T value;
  std::memcpy(&value, bytes.data() + at, sizeof(T));
  return value;
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

WavEncoding wav_encoding_from_string(const std::string& name) {
  if (name == "float" || name == "float32") return WavEncoding::Float32;
  if (name == "pcm16") return WavEncoding::Pcm16;
  fail(ErrorCode::Validation, "unknown WAV encoding '" + name + "' (expected float or pcm16)");
}

std::string encode_wav(const Series<double>& signal, double sample_rate, WavEncoding encoding) {
  require(signal.size() > 0, ErrorCode::Validation, "write_wav: empty signal");
  require(signal.allFinite(), ErrorCode::Validation, "write_wav: non-finite samples");
  require(sample_rate > 0.0 && sample_rate == std::floor(sample_rate), ErrorCode::Validation,
          "write_wav: sample rate must be a positive integer");

  const bool is_float = encoding == WavEncoding::Float32;
  const std::uint16_t bytes_per_sample = is_float ? 4 : 2;
  const auto rate = static_cast<std::uint32_t>(sample_rate);
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * bytes_per_sample);
  // Non-PCM formats carry an 18-byte fmt chunk and a fact chunk.
  const std::uint32_t fmt_size = is_float ? 18 : 16;
  const std::uint32_t fact_size = is_float ? 12 : 0;

  std::string out;
  out.reserve(12 + 8 + fmt_size + fact_size + 8 + data_bytes);
  out += "RIFF";
  put<std::uint32_t>(out, 4 + 8 + fmt_size + fact_size + 8 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put<std::uint32_t>(out, fmt_size);
  put<std::uint16_t>(out, is_float ? kFormatFloat : kFormatPcm);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * bytes_per_sample);
  put<std::uint16_t>(out, bytes_per_sample);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
  if (is_float) {
    put<std::uint16_t>(out, 0);
    out += "fact";
    put<std::uint32_t>(out, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(signal.size()));
  }
  out += "data";
  put<std::uint32_t>(out, data_bytes);
  for (Index i = 0; i < signal.size(); ++i) {
    if (is_float) {
      put<float>(out, static_cast<float>(signal[i]));
    } else {
      const double clamped = std::clamp(signal[i], -1.0, 1.0);
      put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clamped * 32767.0)));
    }
  }
  return out;
}

WavData decode_wav(std::string_view bytes) {
  require(bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WAVE", ErrorCode::Validation,
          "read_wav: not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(at, 4);
    const auto size = get<std::uint32_t>(bytes, at + 4);
    const std::size_t body = at + 8;
    require(size <= bytes.size() - body, ErrorCode::Validation,
            "read_wav: chunk '" + std::string(id) + "' runs past end of file");
    if (id == "fmt ") {
      require(size >= 16, ErrorCode::Validation, "read_wav: short fmt chunk");
      format = get<std::uint16_t>(bytes, body);
      channels = get<std::uint16_t>(bytes, body + 2);
      rate = get<std::uint32_t>(bytes, body + 4);
      bits = get<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible && size >= 40) format = get<std::uint16_t>(bytes, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      require(have_fmt, ErrorCode::Validation, "read_wav: data chunk before fmt chunk");
      require(channels == 1, ErrorCode::Validation, "read_wav: only mono files are supported");
      WavData wav;
      wav.sample_rate = rate;
      if (format == kFormatFloat && bits == 32) {
        wav.encoding = WavEncoding::Float32;
        wav.samples.resize(static_cast<Index>(size / 4));
        for (Index i = 0; i < wav.samples.size(); ++i)
          wav.samples[i] = get<float>(bytes, body + static_cast<std::size_t>(i) * 4);
      } else if (format == kFormatPcm && bits == 16) {
        wav.encoding = WavEncoding::Pcm16;
        wav.samples.resize(static_cast<Index>(size / 2));
        for (Index i = 0; i < wav.samples.size(); ++i)
          wav.samples[i] = get<std::int16_t>(bytes, body + static_cast<std::size_t>(i) * 2) / 32767.0;
      } else {
        fail(ErrorCode::Validation, "read_wav: unsupported encoding (format " + std::to_string(format) + ", " +
                                        std::to_string(bits) + " bits)");
      }
      return wav;
    }
    at = body + size + (size & 1);
  }
  fail(ErrorCode::Validation, "read_wav: no data chunk");
}

void write_wav(const Series<double>& signal, const std::filesystem::path& path, WavEncoding encoding,
               double sample_rate) {
  write_file_atomic(path, encode_wav(signal, sample_rate, encoding));
}

WavData read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

}  // namespace layerscope
