#include "layerscope/manifest.hpp"

#include <chrono>
#include <ctime>

#include "layerscope/error.hpp"
#include "layerscope/fsio.hpp"

namespace layerscope {

namespace fs = std::filesystem;
using nlohmann::json;

void RunManifest::add_artifact(const fs::path& run_dir, const fs::path& file) {
  const fs::path full = file.is_absolute() ? file : run_dir / file;
  artifacts.push_back({fs::relative(full, run_dir).generic_string(), sha256_file(full)});
}

json RunManifest::to_json() const {
  json arts = json::array();
  for (const auto& a : artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}});
  return {{"tool", "layerscope"},
          {"tool_version", tool_version},
          {"seed", seed},
          {"weights_hash", weights_hash},
          {"command", command},
          {"parameters", parameters},
          {"started", started},
          {"finished", finished},
          {"artifacts", arts}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.weights_hash = j.value("weights_hash", std::string{});
    m.command = j.at("command").get<std::string>();
    m.parameters = j.value("parameters", json::object());
    m.started = j.value("started", std::string{});
    m.finished = j.value("finished", std::string{});
    for (const auto& a : j.at("artifacts"))
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, std::string("manifest: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& manifest, const fs::path& run_dir) {
  write_file_atomic(run_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& run_dir) {
  try {
    return RunManifest::from_json(json::parse(read_file(run_dir / "manifest.json")));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedHeader, std::string("manifest: ") + e.what());
  }
}

std::vector<std::string> verify_manifest(const fs::path& run_dir) {
  std::vector<std::string> bad;
  for (const auto& a : read_manifest(run_dir).artifacts) {
    const fs::path p = run_dir / a.path;
    if (!fs::exists(p) || sha256_file(p) != a.sha256) bad.push_back(a.path);
  }
  return bad;
}

}  // namespace layerscope
