#pragma once

#include <string>
#include <vector>

namespace cbtomo::io {

struct Preset {
  std::string name;
  std::string yaml;
};

// Built-in configurations, sorted by name.
const std::vector<Preset>& presets();
// Throws std::out_of_range for an unknown name.
const Preset& find_preset(const std::string& name);

}  // namespace cbtomo::io
