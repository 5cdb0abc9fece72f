#include "cbtomo/io/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cbtomo/charge_model.hpp"
#include "cbtomo/circuit.hpp"
#include "cbtomo/io/csv.hpp"
#include "cbtomo/parallel.hpp"
#include "cbtomo/ramsey.hpp"
#include "cbtomo/rng.hpp"
#include "cbtomo/tomography.hpp"
#include "cbtomo/units.hpp"

#ifndef CBTOMO_VERSION
#define CBTOMO_VERSION "0.0.0"
#endif

namespace cbtomo::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string tool_version() { return CBTOMO_VERSION; }

namespace {

struct Context {
  const ExperimentConfig& config;
  fs::path dir;
  RunManifest& manifest;
  std::vector<std::string> files;

  CsvWriter csv(const std::string& name, std::vector<std::string> header) {
    files.push_back(name);
    return CsvWriter((dir / name).string(), std::move(header));
  }
};

ModelFamily family(const TargetSection& t, double ej2_ratio) { return {t.ec, t.ng, ej2_ratio}; }

TargetModel target_model(const TargetSection& t) { return family(t, t.ej2_ratio).at(t.ej); }

int representation_cutoff(const ExperimentConfig& c) {
  return c.basis.representation > 0 ? c.basis.representation : default_cutoff(target_model(c.target));
}

int internal_cutoff_for(const ExperimentConfig& c) {
  return c.basis.internal > 0 ? c.basis.internal : internal_cutoff(representation_cutoff(c));
}

long long as_ll(int v) { return static_cast<long long>(v); }

void write_matrix(Context& ctx, const std::string& name, const CMatrix& rho, const ChargeBasis& basis) {
  auto out = ctx.csv(name, {"j", "k", "re", "im"});
  for (Eigen::Index a = 0; a < rho.rows(); ++a) {
    for (Eigen::Index b = 0; b < rho.cols(); ++b) {
      out.row({as_ll(basis.charge(a)), as_ll(basis.charge(b)), rho(a, b).real(), rho(a, b).imag()});
    }
  }
  out.close();
}

// ---------------------------------------------------------------- spectrum

void run_spectrum(Context& ctx) {
  const auto& c = ctx.config;
  const ChargeBasis rep(representation_cutoff(c));
  const ChargeBasis internal(internal_cutoff_for(c));
  auto states = ctx.csv("ground_state.csv",
                        {"ej", "n", "re", "im", "probability", "analytic_probability"});
  auto levels = ctx.csv("levels.csv", {"ej", "level", "energy", "transition"});
  ordered_json summary = ordered_json::array();
  for (double ej : c.spectrum.ej_values) {
    const TargetModel model = family(c.target, c.target.ej2_ratio).at(ej);
    const EigenSystem system = solve_target(model, internal);
    const ChargeWavefunction gs = system.state(0).in_basis(rep);
    std::vector<double> analytic(static_cast<std::size_t>(rep.dim()), std::nan(""));
    double overlap = std::nan("");
    if (model.ej >= model.ec) {
      const ChargeWavefunction a = analytic_state(0, model, rep);
      overlap = std::abs(a.coefficients().dot(gs.coefficients()));
      analytic = charge_probabilities(a);
    }
    const auto p = charge_probabilities(gs);
    for (Eigen::Index i = 0; i < rep.dim(); ++i) {
      const complex v = gs.coefficients()[i];
      states.row({ej, as_ll(rep.charge(i)), v.real(), v.imag(), p[static_cast<std::size_t>(i)],
                  analytic[static_cast<std::size_t>(i)]});
    }
    const int count = std::min<int>(c.spectrum.levels, static_cast<int>(internal.dim()));
    for (int q = 0; q < count; ++q) {
      levels.row({ej, as_ll(q), system.eigenvalues[q], system.eigenvalues[q] - system.eigenvalues[0]});
    }
    ordered_json entry;
    entry["ej"] = ej;
    entry["analytic_overlap"] = overlap;
    entry["plasma_frequency"] = plasma_frequency(model);
    if (count > 1) {
      entry["first_transition"] = system.eigenvalues[1] - system.eigenvalues[0];
    }
    summary.push_back(entry);
  }
  states.close();
  levels.close();
  ctx.manifest.summary["ground_states"] = summary;
}

// ---------------------------------------------------------------- ramsey

ProbeSpec probe_angular(const ProbeSection& p) {
  return {units::ghz_to_angular(p.delta_p_ghz), units::ghz_to_angular(p.g_ghz)};
}

TimeGrid time_grid(const ExperimentConfig& c, const ProbeSpec& probe, const ChargeBasis& basis) {
  TimeGrid grid = TimeGrid::default_for(probe, basis);
  if (c.grid.duration_ns > 0.0) {
    grid.duration = c.grid.duration_ns;
  }
  if (c.grid.samples > 0) {
    grid.samples = static_cast<std::size_t>(c.grid.samples);
  }
  return grid;
}

ChargeWavefunction prepared_state(const ExperimentConfig& c) {
  const ChargeBasis rep(representation_cutoff(c));
  return ground_state(target_model(c.target), ChargeBasis(internal_cutoff_for(c))).in_basis(rep);
}

void run_ramsey(Context& ctx) {
  const auto& c = ctx.config;
  const ProbeSpec probe = probe_angular(c.probe);
  const ChargeWavefunction prepared = prepared_state(c);
  const ChargeBasis& rep = prepared.basis();
  const TargetModel readout = family(c.target, c.target.ej2_ratio).at(c.readout.ej);
  const TimeGrid grid = time_grid(c, probe, rep);
  SimulationOptions sim;
  sim.padding = c.readout.padding;
  sim.noise = {c.noise.std, c.seed, 0};
  const RamseyRecord record = simulate_protocol(prepared, readout, probe, grid, sim);
  ExtractionOptions extraction;
  extraction.max_condition = c.tolerances.max_condition;
  const SpectralPeaks peaks = extract_probabilities(record, rep, extraction);
  const auto p = charge_probabilities(prepared);

  auto signal = ctx.csv("signal.csv", {"time_ns", "sigma_x", "analytic_sigma_x"});
  double max_deviation = 0.0;
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const double a = analytic_sigma_x(p, rep, probe, record.times[i]);
    max_deviation = std::max(max_deviation, std::abs(a - record.sigma_x[i]));
    signal.row({record.times[i], record.sigma_x[i], a});
  }
  signal.close();

  auto table = ctx.csv("peaks.csv", {"n", "frequency_ghz", "amplitude", "raw_amplitude", "probability"});
  double max_error = 0.0;
  for (const auto& peak : peaks.peaks) {
    const double truth = p[static_cast<std::size_t>(rep.index(peak.n))];
    max_error = std::max(max_error, std::abs(peak.amplitude - truth));
    table.row({as_ll(peak.n), units::angular_to_ghz(peak.omega), peak.amplitude, peak.raw_amplitude, truth});
  }
  table.close();

  auto spectrum = ctx.csv("periodogram.csv", {"frequency_ghz", "amplitude"});
  for (std::size_t i = 0; i < peaks.periodogram.omega.size(); ++i) {
    spectrum.row({units::angular_to_ghz(peaks.periodogram.omega[i]), peaks.periodogram.amplitude[i]});
  }
  spectrum.close();

  auto& s = ctx.manifest.summary;
  s["samples"] = grid.samples;
  s["duration_ns"] = grid.duration;
  s["condition"] = peaks.condition;
  s["max_amplitude_error"] = max_error;
  s["max_deviation_from_closed_form"] = max_deviation;
}

void run_ej_scan(Context& ctx) {
  const auto& c = ctx.config;
  const ProbeSpec probe = probe_angular(c.probe);
  const ChargeWavefunction prepared = prepared_state(c);
  const ChargeBasis& rep = prepared.basis();
  const TimeGrid grid = time_grid(c, probe, rep);
  SimulationOptions sim;
  sim.padding = c.readout.padding;
  sim.noise = {c.noise.std, c.seed, 0};
  ExtractionOptions extraction;
  extraction.max_condition = c.tolerances.max_condition;
  const auto rows = residual_ej_scan(prepared, family(c.target, c.target.ej2_ratio).at(0.0), probe,
                                     c.readout.ej_values, grid, sim, extraction);

  auto scan = ctx.csv("scan.csv", {"readout_ej_ghz", "ej_over_ec", "n", "frequency_ghz", "amplitude",
                                   "raw_amplitude"});
  auto spectra = ctx.csv("periodogram.csv", {"readout_ej_ghz", "frequency_ghz", "amplitude"});
  ordered_json central = ordered_json::array();
  for (const auto& row : rows) {
    for (const auto& peak : row.peaks.peaks) {
      scan.row({row.residual_ej, row.residual_ej / c.target.ec, as_ll(peak.n),
                units::angular_to_ghz(peak.omega), peak.amplitude, peak.raw_amplitude});
    }
    const auto& pg = row.peaks.periodogram;
    for (std::size_t i = 0; i < pg.omega.size(); ++i) {
      spectra.row({row.residual_ej, units::angular_to_ghz(pg.omega[i]), pg.amplitude[i]});
    }
    central.push_back({{"ej_over_ec", row.residual_ej / c.target.ec}, {"a0", row.peaks.amplitude(0)}});
  }
  scan.close();
  spectra.close();
  ctx.manifest.summary["samples"] = grid.samples;
  ctx.manifest.summary["central_peak"] = central;
}

// ---------------------------------------------------------------- tomography

ReconstructionSettings reconstruction_settings(const ExperimentConfig& c, double fit_ej2_ratio) {
  ReconstructionSettings s;
  s.ej0 = c.target.ej;
  s.fit = family(c.target, fit_ej2_ratio);
  s.rep_cutoff = representation_cutoff(c);
  s.internal_cutoff = internal_cutoff_for(c);
  s.readout_cutoff = c.configs.readout_cutoff;
  s.visibility_floor = c.tolerances.visibility_floor;
  s.mode = c.reconstruction.solver == "cholesky" ? SolverMode::cholesky : SolverMode::linear;
  s.maps = c.reconstruction.maps == "analytic" ? MapKind::analytic : MapKind::numeric;
  s.allow_rank_deficient = c.reconstruction.allow_rank_deficient;
  s.noise_weighting = c.reconstruction.noise_weighting;
  s.max_iterations = c.reconstruction.max_iterations;
  s.fit_tolerance = c.tolerances.fit;
  s.rank_tolerance = c.tolerances.rank;
  return s;
}

void run_reconstruct(Context& ctx) {
  const auto& c = ctx.config;
  const ReconstructionSettings settings = reconstruction_settings(c, c.fit.ej2_ratio);
  const ModelFamily truth = family(c.target, c.target.ej2_ratio);
  const auto ejs = linspace(c.configs.ej_min, c.configs.ej_max, c.configs.count);
  const auto measured = simulate_measurements(truth, ejs, settings.effective_readout_cutoff(),
                                              settings.internal_cutoff, {c.noise.std, c.seed, 0});
  const auto maps = build_maps(settings, ejs);
  const ReconstructionResult result = solve_reconstruction(measured, maps, settings);
  const ChargeBasis rep(settings.rep_cutoff);
  const DensityMatrix expected = DensityMatrix::pure(
      ground_state(truth.at(settings.ej0), ChargeBasis(settings.internal_cutoff)).in_basis(rep));

  write_matrix(ctx, "rho_true.csv", expected.rho, rep);
  write_matrix(ctx, "rho_rec.csv", result.rho.rho, rep);
  auto diff = ctx.csv("absdiff.csv", {"j", "k", "absdiff"});
  const CMatrix delta = result.rho.rho - expected.rho;
  for (Eigen::Index a = 0; a < delta.rows(); ++a) {
    for (Eigen::Index b = 0; b < delta.cols(); ++b) {
      diff.row({as_ll(rep.charge(a)), as_ll(rep.charge(b)), std::abs(delta(a, b))});
    }
  }
  diff.close();

  auto table = ctx.csv("measurements.csv", {"ej", "n", "measured", "predicted", "admitted"});
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const auto& m = measured[i];
    const int reach = std::min(m.readout_cutoff, maps[i].visible_cutoff);
    for (int n = -m.readout_cutoff; n <= m.readout_cutoff; ++n) {
      const bool visible = std::abs(n) <= reach;
      const double predicted = visible ? maps[i].predict(n, result.rho.rho) : std::nan("");
      const bool admitted = visible && m.at(n) >= settings.visibility_floor;
      table.row({m.ej, as_ll(n), m.at(n), predicted, as_ll(admitted ? 1 : 0)});
    }
  }
  table.close();

  auto& s = ctx.manifest.summary;
  s["max_abs_diff"] = delta.cwiseAbs().maxCoeff();
  s["hs_distance"] = hilbert_schmidt_distance(result.rho.rho, expected.rho);
  s["residual"] = result.residual;
  s["equations"] = result.equations;
  s["parameters"] = result.parameters;
  s["rank"] = result.rank;
  s["truncated_directions"] = result.truncated_directions;
  s["condition"] = result.condition;
  s["iterations"] = result.iterations;
  s["unconstrained"] = result.unconstrained;
  s["physical"] = result.rho.is_physical();
  for (const auto& m : maps) {
    for (const auto& w : m.warnings) {
      ctx.manifest.warnings.push_back(w);
    }
  }
}

void run_validate(Context& ctx) {
  const auto& c = ctx.config;
  const ModelFamily truth = family(c.target, c.target.ej2_ratio);
  ValidationSettings validation;
  validation.ej_min = c.configs.ej_min;
  validation.ej_max = c.configs.ej_max;
  validation.counts = c.validation.counts;
  validation.noise = {c.noise.std, c.seed, 0};
  auto table = ctx.csv("validation.csv", {"fit_ej2_ratio", "count", "hs_distance", "diagonal_distance",
                                          "equations", "rank"});
  for (std::size_t f = 0; f < c.validation.fit_ej2_ratios.size(); ++f) {
    const double ratio = c.validation.fit_ej2_ratios[f];
    ValidationSettings v = validation;
    v.noise.stream = 100000 * f;
    const auto rows = validate_model(truth, reconstruction_settings(c, ratio), v);
    for (const auto& r : rows) {
      table.row({ratio, as_ll(r.count), r.hs_distance, r.diagonal_distance, as_ll(r.equations),
                 as_ll(r.rank)});
    }
  }
  table.close();
}

// ---------------------------------------------------------------- circuit

CircuitSpec circuit_spec(const CircuitSection& s) {
  CircuitSpec spec;
  spec.ejp = s.ejp;
  spec.ejt = s.ejt;
  spec.alpha_l = s.alpha_l;
  spec.alpha_r = s.alpha_r;
  spec.flux = s.flux;
  spec.ng = s.ng;
  spec.cjp = s.cjp;
  spec.cjt = s.cjt;
  spec.ct = s.ct;
  spec.cg = s.cg;
  spec.ccp = s.ccp;
  spec.cct = s.cct;
  spec.cr = s.cr;
  spec.lr = s.lr;
  spec.validate();
  return spec;
}

void run_circuit_sweep(Context& ctx) {
  const auto& c = ctx.config;
  const CircuitSpec base = circuit_spec(c.circuit);
  ProbeSolverOptions options;
  options.cutoff = c.solver.cutoff;
  options.levels = c.solver.levels;
  options.convergence_check = c.solver.convergence_check;
  options.flux_on_left = c.solver.flux_on_left;
  options.lanczos.tolerance = c.tolerances.lanczos;

  auto constants = ctx.csv("constants.csv", {"quantity", "value"});
  constants.row({std::string("resonator_capacitance_ff"), resonator_capacitance(base)});
  constants.row({std::string("resonator_impedance_ohm"), resonator_impedance(base)});
  constants.row({std::string("resonator_frequency_ghz"), resonator_frequency_ghz(base)});
  if (base.symmetric_alpha()) {
    const DerivedCapacitances d = derived_capacitances(base);
    constants.row({std::string("c0_squared_ff2"), d.c0_squared});
    constants.row({std::string("cp0_ff"), d.cp0});
    constants.row({std::string("cp1_ff"), d.cp1});
    constants.row({std::string("ccp_renormalized_ff"), d.ccp_t});
    constants.row({std::string("cr_renormalized_ff"), d.cr_t});
    constants.row({std::string("ct_renormalized_ff"), d.ct_t});
    constants.row({std::string("transmon_ec_ghz"), d.ect_ghz});
  }
  constants.close();

  ordered_json summary = ordered_json::array();
  for (const auto& s : c.sweeps) {
    CircuitSection section = c.circuit;
    for (const auto& [key, value] : s.set) {
      set_circuit_field(section, key, value);
    }
    const CircuitSpec spec = circuit_spec(section);
    const SweepParameter parameter = parse_sweep_parameter(s.parameter);
    const auto rows = sweep(spec, parameter, s.values, options, c.tolerances.degeneracy_ghz);
    auto out = ctx.csv(s.name + ".csv", {s.parameter, "delta_p_GHz", "g_par_pc_MHz", "g_perp_pc_MHz",
                                         "g_par_pt_MHz", "g_perp_pt_MHz", "g_perp_ct_MHz", "g_tp_MHz",
                                         "degenerate"});
    const double mhz = 1e3;
    int degenerate = 0;
    for (const auto& r : rows) {
      const auto& g = r.couplings;
      degenerate += r.degenerate ? 1 : 0;
      out.row({r.value, g.delta_p, g.g_par_pc * mhz, std::abs(g.g_perp_pc) * mhz, g.g_par_pt * mhz,
               std::abs(g.g_perp_pt) * mhz, g.g_perp_ct * mhz, g.g_tp * mhz, as_ll(r.degenerate ? 1 : 0)});
      for (const auto& w : g.warnings) {
        ctx.manifest.warnings.push_back(s.name + ": " + w);
      }
    }
    out.close();
    summary.push_back({{"name", s.name}, {"points", rows.size()}, {"degenerate_points", degenerate}});
  }
  ctx.manifest.summary["sweeps"] = summary;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config, const std::string& config_text,
                           const RunOptions& options) {
  config.validate();
  if (options.threads > 0) {
    set_default_threads(options.threads);
  }
  const fs::path dir = !options.output_dir.empty() ? fs::path(options.output_dir)
                       : !config.output.empty()    ? fs::path(config.output)
                                                   : fs::path(to_string(config.kind));
  fs::create_directories(dir);

  RunManifest manifest;
  manifest.tool_version = tool_version();
  manifest.kind = to_string(config.kind);
  manifest.config_yaml = config_text;
  manifest.config_canonical = serialize_config(config);
  manifest.seed = config.seed;
  manifest.rng = CounterRng::name;
  manifest.threads = default_threads();
  manifest.started_utc = utc_now();

  {
    std::ofstream echo(dir / "config.yaml", std::ios::binary);
    echo << config_text;
    if (!echo) {
      throw std::runtime_error("cannot write " + (dir / "config.yaml").string());
    }
  }

  Context ctx{config, dir, manifest, {"config.yaml"}};
  const auto start = std::chrono::steady_clock::now();
  switch (config.kind) {
    case ExperimentKind::spectrum:
      run_spectrum(ctx);
      break;
    case ExperimentKind::ramsey:
      run_ramsey(ctx);
      break;
    case ExperimentKind::ej_scan:
      run_ej_scan(ctx);
      break;
    case ExperimentKind::reconstruct:
      run_reconstruct(ctx);
      break;
    case ExperimentKind::validate:
      run_validate(ctx);
      break;
    case ExperimentKind::circuit_sweep:
      run_circuit_sweep(ctx);
      break;
  }
  manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(manifest, dir.string(), ctx.files);
  return manifest;
}

}  // namespace cbtomo::io
