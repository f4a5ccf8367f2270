#pragma once

#include <filesystem>
#include <string>

#include "layerscope/generator.hpp"

namespace fixtures {

/// Small generator for fast tests: 6 z -> 4x4 -> 3x8 -> 1x16.
inline layerscope::GeneratorSpec tiny_spec(layerscope::Index code_dim = 0) {
  using layerscope::Activation;
  layerscope::GeneratorSpec s;
  s.latent_dim = 6;
  s.code_dim = code_dim;
  s.dense_channels = 4;
  s.dense_samples = 4;
  s.layers = {{4, 3, 5, 2, Activation::Relu}, {3, 1, 5, 2, Activation::Tanh}};
  return s;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("layerscope_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
