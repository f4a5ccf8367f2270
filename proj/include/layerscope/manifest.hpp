#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace layerscope {

struct Artifact {
  std::string path;  // relative to the run directory
  std::string sha256;
};

/// Record of one CLI run: enough to re-run it and to check its outputs.
struct RunManifest {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string weights_hash;
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::string started;
  std::string finished;
  std::vector<Artifact> artifacts;

  /// Hashes `file` (under `run_dir`) and appends it to the artifact list.
  void add_artifact(const std::filesystem::path& run_dir, const std::filesystem::path& file);

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::string utc_timestamp();

void write_manifest(const RunManifest& manifest, const std::filesystem::path& run_dir);
RunManifest read_manifest(const std::filesystem::path& run_dir);

/// Paths whose current hash differs from the manifest (missing files included).
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

}  // namespace layerscope
