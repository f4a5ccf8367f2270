#pragma once

#include <filesystem>

#include "layerscope/tensor.hpp"

namespace layerscope {

enum class WavEncoding { Float32, Pcm16 };

WavEncoding wav_encoding_from_string(const std::string& name);

struct WavData {
  double sample_rate = 16000.0;
  WavEncoding encoding = WavEncoding::Float32;
  Series<double> samples;
};

/// Mono RIFF/WAVE. Float32 stores each sample cast to float; PCM16 clamps to
/// [-1, 1] and rounds to the nearest of 32767 steps.
std::string encode_wav(const Series<double>& signal, double sample_rate, WavEncoding encoding);
WavData decode_wav(std::string_view bytes);

void write_wav(const Series<double>& signal, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::Float32, double sample_rate = 16000.0);
WavData read_wav(const std::filesystem::path& path);

}  // namespace layerscope
