#pragma once

#include <optional>
#include <string>

#include "cbtomo/io/config.hpp"
#include "cbtomo/io/manifest.hpp"

namespace cbtomo::io {

struct RunOptions {
  std::string output_dir;  // overrides config.output when non-empty
  unsigned threads = 0;    // 0 keeps the process default
};

// Runs the pipeline for config.kind, writes CSVs, config.yaml and manifest.json
// into the output directory and returns the manifest. `config_text` is echoed
// verbatim; pass serialize_config(config) when there is no source file.
RunManifest run_experiment(const ExperimentConfig& config, const std::string& config_text,
                           const RunOptions& options = {});

std::string tool_version();

}  // namespace cbtomo::io
