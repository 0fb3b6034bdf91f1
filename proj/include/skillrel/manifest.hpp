#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace skillrel {

// Record of one CLI run, written as manifest.json next to the outputs.
// Config values are stored as strings in resolved (post-precedence) form, so
// replaying the manifest reproduces deterministic stages byte for byte.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string started_utc;
  std::string finished_utc;
};

// Current wall-clock time as an ISO-8601 UTC string (second resolution).
std::string utc_timestamp();

std::string manifest_json(const RunManifest& m);

// Writes <dir>/manifest.json, creating the directory if needed. Exactly one
// manifest per output directory; rerunning a command replaces it.
void save_manifest(const RunManifest& m, const std::string& dir);

}  // namespace skillrel
