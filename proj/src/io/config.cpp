#include "cbtomo/io/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cbtomo::io {

namespace {

const std::map<std::string, ExperimentKind> kKinds = {
    {"spectrum", ExperimentKind::spectrum},       {"ramsey", ExperimentKind::ramsey},
    {"ej-scan", ExperimentKind::ej_scan},         {"reconstruct", ExperimentKind::reconstruct},
    {"validate", ExperimentKind::validate},       {"circuit-sweep", ExperimentKind::circuit_sweep},
};

const char* const kCircuitFields[] = {"ejp", "ejt", "alpha_l", "alpha_r", "flux", "ng", "cjp",
                                      "cjt", "ct",  "cg",  "ccp",     "cct",     "cr",   "lr"};

double* circuit_field(CircuitSection& c, const std::string& name) {
  if (name == "ejp") return &c.ejp;
  if (name == "ejt") return &c.ejt;
  if (name == "alpha_l") return &c.alpha_l;
  if (name == "alpha_r") return &c.alpha_r;
  if (name == "flux") return &c.flux;
  if (name == "ng") return &c.ng;
  if (name == "cjp") return &c.cjp;
  if (name == "cjt") return &c.cjt;
  if (name == "ct") return &c.ct;
  if (name == "cg") return &c.cg;
  if (name == "ccp") return &c.ccp;
  if (name == "cct") return &c.cct;
  if (name == "cr") return &c.cr;
  if (name == "lr") return &c.lr;
  return nullptr;
}

double* tolerance_field(ToleranceSection& t, const std::string& name) {
  if (name == "rank") return &t.rank;
  if (name == "visibility_floor") return &t.visibility_floor;
  if (name == "fit") return &t.fit;
  if (name == "max_condition") return &t.max_condition;
  if (name == "degeneracy_ghz") return &t.degeneracy_ghz;
  if (name == "lanczos") return &t.lanczos;
  return nullptr;
}

// Reads a mapping and insists that every key is consumed.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(path_, "expected a mapping");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) {
      return;
    }
    const YAML::Node value = node_[key];
    if (!value) {
      return;
    }
    try {
      out = value.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(key_path(key), "wrong type");
    }
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) {
      return YAML::Node();
    }
    return node_[key];
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    if (!node_ || node_.IsNull()) {
      return;
    }
    for (const auto& item : node_) {
      const auto key = item.first.as<std::string>();
      if (!seen_.count(key)) {
        throw ConfigError(key_path(key), "unknown key");
      }
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> read_values(Section& parent, const std::string& path) {
  std::vector<double> values;
  YAML::Node list = parent.child("values");
  YAML::Node range = parent.child("range");
  if (list && range) {
    throw ConfigError(path, "give either values or range, not both");
  }
  if (list) {
    try {
      values = list.as<std::vector<double>>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path + ".values", "expected a list of numbers");
    }
  } else if (range) {
    Section r(range, path + ".range");
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    r.get("start", start);
    r.get("stop", stop);
    r.get("count", count);
    r.finish();
    if (count < 1) {
      throw ConfigError(path + ".range.count", "must be positive");
    }
    for (int i = 0; i < count; ++i) {
      values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
    }
  } else {
    throw ConfigError(path, "missing values or range");
  }
  return values;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) {
    throw ConfigError(key, message);
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [name, k] : kKinds) {
    if (k == kind) {
      return name;
    }
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& text) {
  const auto it = kKinds.find(text);
  if (it == kKinds.end()) {
    throw ConfigError("kind", "unknown experiment kind '" + text + "'");
  }
  return it->second;
}

void set_circuit_field(CircuitSection& circuit, const std::string& name, double value) {
  double* field = circuit_field(circuit, name);
  if (!field) {
    throw ConfigError("circuit." + name, "unknown circuit field");
  }
  *field = value;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
  }
  if (!root.IsMap()) {
    throw ConfigError("<document>", "expected a mapping at top level");
  }
  ExperimentConfig c;
  Section top(root, "");
  std::string kind;
  top.get("kind", kind);
  if (kind.empty()) {
    throw ConfigError("kind", "missing");
  }
  c.kind = parse_kind(kind);
  top.get("seed", c.seed);
  top.get("output", c.output);

  Section target(top.child("target"), "target");
  target.get("ec", c.target.ec);
  target.get("ej", c.target.ej);
  target.get("ej2_ratio", c.target.ej2_ratio);
  target.get("ng", c.target.ng);
  target.finish();

  Section basis(top.child("basis"), "basis");
  basis.get("representation", c.basis.representation);
  basis.get("internal", c.basis.internal);
  basis.finish();

  Section spectrum(top.child("spectrum"), "spectrum");
  spectrum.get("ej_values", c.spectrum.ej_values);
  spectrum.get("levels", c.spectrum.levels);
  spectrum.finish();

  Section probe(top.child("probe"), "probe");
  probe.get("delta_p_ghz", c.probe.delta_p_ghz);
  probe.get("g_ghz", c.probe.g_ghz);
  probe.finish();

  Section readout(top.child("readout"), "readout");
  readout.get("ej", c.readout.ej);
  readout.get("ej_values", c.readout.ej_values);
  readout.get("padding", c.readout.padding);
  readout.finish();

  Section grid(top.child("grid"), "grid");
  grid.get("duration_ns", c.grid.duration_ns);
  grid.get("samples", c.grid.samples);
  grid.finish();

  Section noise(top.child("noise"), "noise");
  noise.get("std", c.noise.std);
  noise.finish();

  Section configs(top.child("configs"), "configs");
  configs.get("ej_min", c.configs.ej_min);
  configs.get("ej_max", c.configs.ej_max);
  configs.get("count", c.configs.count);
  configs.get("readout_cutoff", c.configs.readout_cutoff);
  configs.finish();

  Section rec(top.child("reconstruction"), "reconstruction");
  rec.get("solver", c.reconstruction.solver);
  rec.get("maps", c.reconstruction.maps);
  rec.get("allow_rank_deficient", c.reconstruction.allow_rank_deficient);
  rec.get("noise_weighting", c.reconstruction.noise_weighting);
  rec.get("max_iterations", c.reconstruction.max_iterations);
  rec.finish();

  Section fit(top.child("fit"), "fit");
  fit.get("ej2_ratio", c.fit.ej2_ratio);
  fit.finish();

  Section validation(top.child("validation"), "validation");
  validation.get("counts", c.validation.counts);
  validation.get("fit_ej2_ratios", c.validation.fit_ej2_ratios);
  validation.finish();

  Section circuit(top.child("circuit"), "circuit");
  for (const char* name : kCircuitFields) {
    circuit.get(name, *circuit_field(c.circuit, name));
  }
  circuit.finish();

  Section solver(top.child("solver"), "solver");
  solver.get("cutoff", c.solver.cutoff);
  solver.get("levels", c.solver.levels);
  solver.get("convergence_check", c.solver.convergence_check);
  solver.get("flux_on_left", c.solver.flux_on_left);
  solver.finish();

  const YAML::Node sweeps = top.child("sweeps");
  if (sweeps && !sweeps.IsNull()) {
    require(sweeps.IsSequence(), "sweeps", "expected a list");
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
      const std::string path = "sweeps[" + std::to_string(i) + "]";
      Section s(sweeps[i], path);
      SweepSection sweep;
      s.get("name", sweep.name);
      s.get("parameter", sweep.parameter);
      sweep.values = read_values(s, path);
      const YAML::Node set = s.child("set");
      if (set && !set.IsNull()) {
        require(set.IsMap(), path + ".set", "expected a mapping");
        for (const auto& item : set) {
          const auto key = item.first.as<std::string>();
          CircuitSection probe_fields;
          require(circuit_field(probe_fields, key) != nullptr, path + ".set." + key,
                  "unknown circuit field");
          try {
            sweep.set.emplace_back(key, item.second.as<double>());
          } catch (const YAML::Exception&) {
            throw ConfigError(path + ".set." + key, "wrong type");
          }
        }
      }
      s.finish();
      c.sweeps.push_back(std::move(sweep));
    }
  }

  Section tol(top.child("tolerances"), "tolerances");
  tol.get("rank", c.tolerances.rank);
  tol.get("visibility_floor", c.tolerances.visibility_floor);
  tol.get("fit", c.tolerances.fit);
  tol.get("max_condition", c.tolerances.max_condition);
  tol.get("degeneracy_ghz", c.tolerances.degeneracy_ghz);
  tol.get("lanczos", c.tolerances.lanczos);
  tol.finish();

  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, "cannot open config file");
  }
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void ExperimentConfig::validate() const {
  require(target.ec > 0.0, "target.ec", "must be positive");
  require(target.ej >= 0.0, "target.ej", "must be non-negative");
  require(target.ej2_ratio >= 0.0, "target.ej2_ratio", "must be non-negative");
  require(std::isfinite(target.ng), "target.ng", "must be finite");
  require(basis.representation >= 0, "basis.representation", "must be non-negative");
  require(basis.internal == 0 || basis.internal >= basis.representation, "basis.internal",
          "must be at least the representation cutoff");
  require(noise.std >= 0.0, "noise.std", "must be non-negative");
  require(readout.padding >= 0, "readout.padding", "must be non-negative");
  require(grid.duration_ns >= 0.0, "grid.duration_ns", "must be non-negative");
  require(grid.samples >= 0, "grid.samples", "must be non-negative");
  require(tolerances.rank > 0.0 && tolerances.rank < 1.0, "tolerances.rank", "must be in (0, 1)");
  require(tolerances.visibility_floor >= 0.0, "tolerances.visibility_floor", "must be non-negative");
  require(tolerances.fit > 0.0, "tolerances.fit", "must be positive");
  require(tolerances.max_condition > 1.0, "tolerances.max_condition", "must exceed 1");
  require(tolerances.lanczos > 0.0, "tolerances.lanczos", "must be positive");

  switch (kind) {
    case ExperimentKind::spectrum:
      require(!spectrum.ej_values.empty(), "spectrum.ej_values", "must not be empty");
      for (double ej : spectrum.ej_values) {
        require(ej > 0.0, "spectrum.ej_values", "entries must be positive");
      }
      require(spectrum.levels >= 1, "spectrum.levels", "must be at least 1");
      break;
    case ExperimentKind::ramsey:
    case ExperimentKind::ej_scan:
      require(probe.g_ghz != 0.0, "probe.g_ghz", "must be non-zero");
      require(probe.delta_p_ghz > 0.0, "probe.delta_p_ghz", "must be positive");
      require(readout.ej >= 0.0, "readout.ej", "must be non-negative");
      if (kind == ExperimentKind::ej_scan) {
        require(!readout.ej_values.empty(), "readout.ej_values", "must not be empty");
        for (double ej : readout.ej_values) {
          require(ej >= 0.0, "readout.ej_values", "entries must be non-negative");
        }
      }
      break;
    case ExperimentKind::reconstruct:
    case ExperimentKind::validate:
      require(basis.representation >= 1, "basis.representation", "must be at least 1");
      require(configs.ej_min > 0.0 && configs.ej_max >= configs.ej_min, "configs.ej_min",
              "need 0 < ej_min <= ej_max");
      require(configs.count >= 1, "configs.count", "must be positive");
      require(configs.readout_cutoff >= 0, "configs.readout_cutoff", "must be non-negative");
      require(target.ej > 0.0, "target.ej", "must be positive");
      require(reconstruction.solver == "linear" || reconstruction.solver == "cholesky",
              "reconstruction.solver", "must be linear or cholesky");
      require(reconstruction.maps == "numeric" || reconstruction.maps == "analytic",
              "reconstruction.maps", "must be numeric or analytic");
      require(reconstruction.max_iterations >= 1, "reconstruction.max_iterations", "must be positive");
      require(fit.ej2_ratio >= 0.0, "fit.ej2_ratio", "must be non-negative");
      if (kind == ExperimentKind::validate) {
        require(!validation.counts.empty(), "validation.counts", "must not be empty");
        for (int n : validation.counts) {
          require(n >= 1, "validation.counts", "entries must be positive");
        }
        require(!validation.fit_ej2_ratios.empty(), "validation.fit_ej2_ratios", "must not be empty");
      }
      break;
    case ExperimentKind::circuit_sweep: {
      require(!sweeps.empty(), "sweeps", "at least one sweep is required");
      require(solver.cutoff >= 1, "solver.cutoff", "must be at least 1");
      require(solver.levels >= 2, "solver.levels", "must be at least 2");
      std::set<std::string> names;
      for (std::size_t i = 0; i < sweeps.size(); ++i) {
        const std::string path = "sweeps[" + std::to_string(i) + "]";
        const auto& s = sweeps[i];
        require(!s.name.empty(), path + ".name", "missing");
        require(s.name.find_first_of("/\\ ") == std::string::npos, path + ".name",
                "must not contain separators or spaces");
        require(names.insert(s.name).second, path + ".name", "duplicate sweep name");
        require(s.parameter == "ng" || s.parameter == "ccp" || s.parameter == "alpha" ||
                    s.parameter == "delta_alpha",
                path + ".parameter", "must be one of ng, ccp, alpha, delta_alpha");
        require(!s.values.empty(), path + ".values", "must not be empty");
      }
      break;
    }
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.kind);
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;

  out << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ec" << YAML::Value << c.target.ec;
  out << YAML::Key << "ej" << YAML::Value << c.target.ej;
  out << YAML::Key << "ej2_ratio" << YAML::Value << c.target.ej2_ratio;
  out << YAML::Key << "ng" << YAML::Value << c.target.ng;
  out << YAML::EndMap;

  out << YAML::Key << "basis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "representation" << YAML::Value << c.basis.representation;
  out << YAML::Key << "internal" << YAML::Value << c.basis.internal;
  out << YAML::EndMap;

  out << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ej_values" << YAML::Value << YAML::Flow << c.spectrum.ej_values;
  out << YAML::Key << "levels" << YAML::Value << c.spectrum.levels;
  out << YAML::EndMap;

  out << YAML::Key << "probe" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "delta_p_ghz" << YAML::Value << c.probe.delta_p_ghz;
  out << YAML::Key << "g_ghz" << YAML::Value << c.probe.g_ghz;
  out << YAML::EndMap;

  out << YAML::Key << "readout" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ej" << YAML::Value << c.readout.ej;
  out << YAML::Key << "ej_values" << YAML::Value << YAML::Flow << c.readout.ej_values;
  out << YAML::Key << "padding" << YAML::Value << c.readout.padding;
  out << YAML::EndMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "duration_ns" << YAML::Value << c.grid.duration_ns;
  out << YAML::Key << "samples" << YAML::Value << c.grid.samples;
  out << YAML::EndMap;

  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "std" << YAML::Value << c.noise.std;
  out << YAML::EndMap;

  out << YAML::Key << "configs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ej_min" << YAML::Value << c.configs.ej_min;
  out << YAML::Key << "ej_max" << YAML::Value << c.configs.ej_max;
  out << YAML::Key << "count" << YAML::Value << c.configs.count;
  out << YAML::Key << "readout_cutoff" << YAML::Value << c.configs.readout_cutoff;
  out << YAML::EndMap;

  out << YAML::Key << "reconstruction" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "solver" << YAML::Value << c.reconstruction.solver;
  out << YAML::Key << "maps" << YAML::Value << c.reconstruction.maps;
  out << YAML::Key << "allow_rank_deficient" << YAML::Value << c.reconstruction.allow_rank_deficient;
  out << YAML::Key << "noise_weighting" << YAML::Value << c.reconstruction.noise_weighting;
  out << YAML::Key << "max_iterations" << YAML::Value << c.reconstruction.max_iterations;
  out << YAML::EndMap;

  out << YAML::Key << "fit" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ej2_ratio" << YAML::Value << c.fit.ej2_ratio;
  out << YAML::EndMap;

  out << YAML::Key << "validation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "counts" << YAML::Value << YAML::Flow << c.validation.counts;
  out << YAML::Key << "fit_ej2_ratios" << YAML::Value << YAML::Flow << c.validation.fit_ej2_ratios;
  out << YAML::EndMap;

  CircuitSection circuit = c.circuit;
  out << YAML::Key << "circuit" << YAML::Value << YAML::BeginMap;
  for (const char* name : kCircuitFields) {
    out << YAML::Key << name << YAML::Value << *circuit_field(circuit, name);
  }
  out << YAML::EndMap;

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "cutoff" << YAML::Value << c.solver.cutoff;
  out << YAML::Key << "levels" << YAML::Value << c.solver.levels;
  out << YAML::Key << "convergence_check" << YAML::Value << c.solver.convergence_check;
  out << YAML::Key << "flux_on_left" << YAML::Value << c.solver.flux_on_left;
  out << YAML::EndMap;

  out << YAML::Key << "sweeps" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : c.sweeps) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "parameter" << YAML::Value << s.parameter;
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << s.values;
    out << YAML::Key << "set" << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [key, value] : s.set) {
      out << YAML::Key << key << YAML::Value << value;
    }
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  ToleranceSection tol = c.tolerances;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  for (const char* name : {"rank", "visibility_floor", "fit", "max_condition", "degeneracy_ghz", "lanczos"}) {
    out << YAML::Key << name << YAML::Value << *tolerance_field(tol, name);
  }
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void apply_tolerance_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--tolerance", "expected key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  double* field = tolerance_field(config.tolerances, key);
  if (!field) {
    throw ConfigError("tolerances." + key, "unknown tolerance");
  }
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument("trailing characters");
    }
    *field = value;
  } catch (const std::exception&) {
    throw ConfigError("tolerances." + key, "not a number: '" + text + "'");
  }
  config.validate();
}

}  // namespace cbtomo::io
