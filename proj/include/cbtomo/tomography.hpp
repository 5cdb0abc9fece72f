#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbtomo/charge_model.hpp"
#include "cbtomo/ramsey.hpp"

namespace cbtomo {

struct DensityMatrix {
  ChargeBasis basis;
  CMatrix rho;

  static DensityMatrix pure(const ChargeWavefunction& psi);
  // Throws if rho is not Hermitian, trace-1 or PSD within the given bounds.
  void check(double hermitian_tol = 1e-12, double trace_tol = 1e-12, double psd_tol = 1e-10) const;
  bool is_physical(double hermitian_tol = 1e-12, double trace_tol = 1e-12,
                   double psd_tol = 1e-10) const;
};

// A transmon family sharing EC and ng, with EJ2 = ej2_ratio * EJ.
struct ModelFamily {
  double ec = 1.0;
  double ng = 0.0;
  double ej2_ratio = 0.0;

  TargetModel at(double ej) const { return {ec, ej, ej2_ratio * ej, ng}; }
};

struct AdiabaticTransform {
  double ej_start = 0.0;
  double ej_end = 0.0;
  std::vector<double> phases;
  ChargeBasis basis;
  CMatrix matrix;
};

struct TransformOptions {
  // Dynamical phase per tracked level; missing entries are zero.
  std::vector<double> phases;
  // Number of tracked levels; 0 means every level of the basis.
  Eigen::Index levels = 0;
};

// T = sum_q exp(-i theta_q) |psi_q(end)><psi_q(start)| on `basis`.
AdiabaticTransform adiabatic_transform(const TargetModel& start, const TargetModel& end,
                                       const ChargeBasis& basis, const TransformOptions& options = {});

// Slices M^n for |n| <= visible_cutoff; slice(n)(k, j) = <n|T|j> <k|T^dag|n> with
// j, k over the representation block |j|, |k| <= rep_cutoff.
struct MeasurementMap {
  double ej = 0.0;
  int rep_cutoff = 0;
  int visible_cutoff = 0;
  std::vector<CMatrix> slices;
  std::vector<std::string> warnings;

  const CMatrix& slice(int n) const;
  // Re sum_jk M^n_kj rho_jk.
  double predict(int n, const CMatrix& rho) const;
};

MeasurementMap measurement_map_numeric(const AdiabaticTransform& transform, int rep_cutoff,
                                       int visible_cutoff);

struct AnalyticMapOptions {
  // Levels summed in the Hermite-Gaussian expansion; 0 selects every level whose
  // harmonic energy (p + 1/2) sqrt(8 EC EJ) stays below the smaller EJ.
  int levels = 0;
  std::vector<double> phases;
};

int harmonic_level_count(double ec, double ej);

MeasurementMap measurement_map_analytic(const TargetModel& start, const TargetModel& end,
                                        const ChargeBasis& internal, int rep_cutoff,
                                        int visible_cutoff, const AnalyticMapOptions& options = {});

struct PlannedConfig {
  double ej = 0.0;
  int visible_cutoff = 0;
};

struct ConfigurationPlan {
  std::vector<PlannedConfig> configs;
  int required = 0;
  int recommended = 0;
};

// Visibility cutoff round((EJ/EC)^(1/4)).
int visibility_cutoff(double ej, double ec);

// count = 0 uses the recommended count. Throws if the requirement exceeds cap.
ConfigurationPlan plan_configurations(double ej0, double ec, double ej_min, double ej_max, int rep_cutoff,
                                      int count = 0, int cap = 1000);

struct MeasuredConfig {
  double ej = 0.0;
  int readout_cutoff = 0;
  std::vector<double> diagonals;  // n = -readout_cutoff..readout_cutoff
  double noise_std = 0.0;

  double at(int n) const { return diagonals.at(static_cast<std::size_t>(n + readout_cutoff)); }
};

// Ground-state charge populations of `truth` at each EJ, for |n| <= readout_cutoff,
// with optional Gaussian noise clipped to [0, 1].
std::vector<MeasuredConfig> simulate_measurements(const ModelFamily& truth, const std::vector<double>& ejs,
                                                  int readout_cutoff, int internal_cutoff,
                                                  const NoiseSpec& noise = {});

enum class SolverMode { linear, cholesky };
enum class MapKind { numeric, analytic };

struct ReconstructionSettings {
  double ej0 = 50.0;
  ModelFamily fit;
  int rep_cutoff = 7;
  int internal_cutoff = 19;
  // Charge states recorded per configuration; 0 means rep_cutoff.
  int readout_cutoff = 0;
  double visibility_floor = 1e-4;
  SolverMode mode = SolverMode::linear;
  MapKind maps = MapKind::numeric;
  // Return the minimum-norm solution instead of throwing when there are fewer
  // equations than identifiable parameters.
  bool allow_rank_deficient = false;
  // Weight equations by 1/sigma^2 when the measurements carry a noise level.
  bool noise_weighting = true;
  int max_iterations = 1000;
  // Cholesky mode also stops once every prediction is within this of its
  // measured value (unweighted).
  double fit_tolerance = 1e-5;

  int effective_readout_cutoff() const { return readout_cutoff > 0 ? readout_cutoff : rep_cutoff; }
  // Singular values below rank_tolerance * s_max are dropped (truncated SVD).
  double rank_tolerance = 1e-9;
};

struct ReconstructionResult {
  DensityMatrix rho;
  CMatrix rho_raw;  // before the physicality projection
  double residual = 0.0;
  std::vector<double> config_residuals;
  int equations = 0;
  int parameters = 0;
  int rank = 0;
  int truncated_directions = 0;  // parameters - rank
  double condition = 0.0;        // full spectrum, before truncation
  std::vector<std::string> unconstrained;
  int iterations = 0;
};

std::vector<MeasurementMap> build_maps(const ReconstructionSettings& settings,
                                       const std::vector<double>& ejs, unsigned threads = 0);

ReconstructionResult solve_reconstruction(const std::vector<MeasuredConfig>& measured,
                                          const std::vector<MeasurementMap>& maps,
                                          const ReconstructionSettings& settings);

DensityMatrix project_physical(const CMatrix& rho_raw, const ChargeBasis& basis);

double hilbert_schmidt_distance(const CMatrix& a, const CMatrix& b);
double diagonal_distance(const CMatrix& a, const CMatrix& b);

struct ValidationRow {
  int count = 0;
  double hs_distance = 0.0;
  double diagonal_distance = 0.0;
  int equations = 0;
  int rank = 0;
};

struct ValidationSettings {
  double ej_min = 10.0;
  double ej_max = 50.0;
  std::vector<int> counts;
  NoiseSpec noise;
};

// Reconstruct with `settings.fit` from measurements of `truth` for each count and
// compare against the fit model's own ground state at ej0.
std::vector<ValidationRow> validate_model(const ModelFamily& truth, const ReconstructionSettings& settings,
                                          const ValidationSettings& validation, unsigned threads = 0);

// Uniform grid of `count` points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace cbtomo
