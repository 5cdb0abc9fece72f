#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cbtomo/io/config.hpp"
#include "cbtomo/io/presets.hpp"
#include "cbtomo/io/run.hpp"

namespace {

struct Overrides {
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> tolerances;
  std::string out;
};

int execute(const std::string& text, const Overrides& o) {
  using namespace cbtomo::io;
  ExperimentConfig config = parse_config(text);
  bool changed = false;
  if (o.seed) {
    config.seed = *o.seed;
    changed = true;
  }
  for (const auto& t : o.tolerances) {
    apply_tolerance_override(config, t);
    changed = true;
  }
  // With overrides the echoed config is the effective one, not the file.
  const std::string echo = changed ? serialize_config(config) : text;
  RunOptions options;
  options.output_dir = o.out;
  options.threads = o.threads;
  const RunManifest manifest = run_experiment(config, echo, options);
  std::cout << manifest.kind << ": wrote " << manifest.outputs.size() << " files in "
            << manifest.wall_seconds << " s\n";
  if (!manifest.summary.empty()) {
    // Long lists stay in manifest.json.
    auto brief = manifest.summary;
    for (auto& [key, value] : brief.items()) {
      if (value.is_array() && value.size() > 8) {
        value = std::to_string(value.size()) + " entries, see manifest.json";
      }
    }
    std::cout << brief.dump(2) << '\n';
  }
  for (const auto& w : manifest.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Charge-basis tomography simulator"};
  app.set_version_flag("--version", cbtomo::io::tool_version());
  app.require_subcommand(1);

  Overrides o;
  app.add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--tolerance", o.tolerances, "Tolerance override key=value (repeatable)");

  auto* run = app.add_subcommand("run", "Run an experiment config file");
  std::string path;
  run->add_option("config", path, "YAML config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", o.out, "Output directory (overrides the config)");

  auto* preset = app.add_subcommand("preset", "Run a built-in preset");
  std::string name;
  preset->add_option("name", name, "Preset name")->required();
  preset->add_option("--out", o.out, "Output directory (default: the preset name)");

  auto* list = app.add_subcommand("list-presets", "List built-in presets");
  auto* show = app.add_subcommand("show-preset", "Print a preset's YAML");
  std::string show_name;
  show->add_option("name", show_name, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) {
    o.seed = seed;
  }

  try {
    if (*list) {
      for (const auto& p : cbtomo::io::presets()) {
        std::cout << p.name << '\n';
      }
      return 0;
    }
    if (*show) {
      std::cout << cbtomo::io::find_preset(show_name).yaml;
      return 0;
    }
    if (*preset) {
      const auto& p = cbtomo::io::find_preset(name);
      if (o.out.empty()) {
        o.out = p.name;
      }
      return execute(p.yaml, o);
    }
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    return execute(text.str(), o);
  } catch (const cbtomo::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
