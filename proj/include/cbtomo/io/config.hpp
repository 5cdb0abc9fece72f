#pragma once

// Experiment configuration: a YAML document with one mapping per section.
// Unknown keys anywhere are rejected. Energies in the tomography kinds
// (spectrum, reconstruct, validate) are in units of EC; the Ramsey kinds use GHz
// and ns; the circuit kind uses GHz, fF and nH.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbtomo::io {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key + ": " + message), key(key) {}
  std::string key;
};

enum class ExperimentKind { spectrum, ramsey, ej_scan, reconstruct, validate, circuit_sweep };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& text);

struct TargetSection {
  double ec = 1.0;
  double ej = 50.0;
  double ej2_ratio = 0.0;  // EJ2 / EJ
  double ng = 0.0;
  bool operator==(const TargetSection&) const = default;
};

struct BasisSection {
  int representation = 7;  // 0 selects ceil(3 beta) + 2 from the target
  int internal = 0;        // 0 selects 2 * representation + 5
  bool operator==(const BasisSection&) const = default;
};

struct SpectrumSection {
  std::vector<double> ej_values{50.0, 10.0};
  int levels = 4;
  bool operator==(const SpectrumSection&) const = default;
};

struct ProbeSection {
  double delta_p_ghz = 3.0;
  double g_ghz = 0.1;
  bool operator==(const ProbeSection&) const = default;
};

struct ReadoutSection {
  double ej = 0.0;                 // residual EJ during readout (ramsey)
  std::vector<double> ej_values;   // residual EJ values (ej-scan)
  int padding = 5;
  bool operator==(const ReadoutSection&) const = default;
};

struct GridSection {
  double duration_ns = 0.0;  // 0 selects 20 pi / g
  int samples = 0;           // 0 selects the default sampling
  bool operator==(const GridSection&) const = default;
};

struct NoiseSection {
  double std = 0.0;
  bool operator==(const NoiseSection&) const = default;
};

struct ConfigsSection {
  double ej_min = 10.0;
  double ej_max = 50.0;
  int count = 21;
  int readout_cutoff = 0;  // 0 uses the representation cutoff
  bool operator==(const ConfigsSection&) const = default;
};

// EJ0 (the prepared configuration) is target.ej.
struct ReconstructionSection {
  std::string solver = "linear";
  std::string maps = "numeric";
  bool allow_rank_deficient = false;
  bool noise_weighting = true;
  int max_iterations = 1000;
  bool operator==(const ReconstructionSection&) const = default;
};

struct FitSection {
  double ej2_ratio = 0.0;
  bool operator==(const FitSection&) const = default;
};

struct ValidationSection {
  std::vector<int> counts;
  std::vector<double> fit_ej2_ratios{0.0};
  bool operator==(const ValidationSection&) const = default;
};

struct CircuitSection {
  double ejp = 121.0;
  double ejt = 5.0;
  double alpha_l = 0.4;
  double alpha_r = 0.4;
  double flux = 0.5;
  double ng = 0.0;
  double cjp = 8.0;
  double cjt = 4.0;
  double ct = 40.0;
  double cg = 0.0;
  double ccp = 5.0;
  double cct = 5.0;
  double cr = 100.0;
  double lr = 10.0;
  bool operator==(const CircuitSection&) const = default;
};

struct SolverSection {
  int cutoff = 7;
  int levels = 4;
  bool convergence_check = false;
  bool flux_on_left = false;
  bool operator==(const SolverSection&) const = default;
};

struct SweepSection {
  std::string name;
  std::string parameter;  // ng, ccp, alpha, delta_alpha
  std::vector<double> values;
  // Circuit fields overridden for this sweep only, in file order.
  std::vector<std::pair<std::string, double>> set;
  bool operator==(const SweepSection&) const = default;
};

struct ToleranceSection {
  double rank = 1e-9;              // truncated-SVD cutoff of the linear solve
  double visibility_floor = 1e-4;  // smallest admitted measured population
  double fit = 1e-5;               // cholesky stop on per-equation misfit
  double max_condition = 1e8;      // harmonic regression
  double degeneracy_ghz = -1.0;    // circuit doublet; negative = 1e-6 EJp
  double lanczos = 1e-10;
  bool operator==(const ToleranceSection&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::spectrum;
  std::uint64_t seed = 0;
  std::string output = "";  // output directory; empty means ./<kind>
  TargetSection target;
  BasisSection basis;
  SpectrumSection spectrum;
  ProbeSection probe;
  ReadoutSection readout;
  GridSection grid;
  NoiseSection noise;
  ConfigsSection configs;
  ReconstructionSection reconstruction;
  FitSection fit;
  ValidationSection validation;
  CircuitSection circuit;
  SolverSection solver;
  std::vector<SweepSection> sweeps;
  ToleranceSection tolerances;

  bool operator==(const ExperimentConfig&) const = default;

  // Range and consistency checks; throws ConfigError naming the key.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// `key=value` with key one of the tolerance fields.
void apply_tolerance_override(ExperimentConfig& config, const std::string& assignment);

// Circuit field by name, for sweep `set` entries.
void set_circuit_field(CircuitSection& circuit, const std::string& name, double value);

}  // namespace cbtomo::io
