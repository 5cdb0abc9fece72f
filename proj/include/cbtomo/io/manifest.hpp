#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace cbtomo::io {

std::string sha256_file(const std::string& path);

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool_version;
  std::string kind;
  std::string config_yaml;  // verbatim input text
  std::string config_canonical;
  std::uint64_t seed = 0;
  std::string rng;
  unsigned threads = 0;
  double wall_seconds = 0.0;
  std::string started_utc;
  std::vector<OutputFile> outputs;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;

  nlohmann::ordered_json to_json() const;
};

// Hashes `names` inside `directory` into manifest.outputs and writes
// manifest.json there.
void write_manifest(RunManifest& manifest, const std::string& directory,
                    const std::vector<std::string>& names);

}  // namespace cbtomo::io
