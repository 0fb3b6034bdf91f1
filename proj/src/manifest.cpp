#include "skillrel/manifest.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "skillrel/error.hpp"

namespace skillrel {

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
#if defined(_WIN32)
  gmtime_s(&tm, &now);
#else
  gmtime_r(&now, &tm);
#endif
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["subcommand"] = m.subcommand;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  return j.dump(2);
}

void save_manifest(const RunManifest& m, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir + ": " + ec.message());
  const fs::path path = fs::path(dir) / "manifest.json";
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << manifest_json(m) << "\n";
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace skillrel
