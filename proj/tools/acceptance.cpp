// Acceptance runner: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is the number of failed criteria, not counting those listed with
// --expected-failures (which are still reported as FAIL).

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbtomo/charge_model.hpp"
#include "cbtomo/circuit.hpp"
#include "cbtomo/io/config.hpp"
#include "cbtomo/io/presets.hpp"
#include "cbtomo/io/run.hpp"
#include "cbtomo/parallel.hpp"
#include "cbtomo/ramsey.hpp"
#include "cbtomo/rng.hpp"
#include "cbtomo/tomography.hpp"
#include "cbtomo/units.hpp"

using namespace cbtomo;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr double kReconstructionLimit = 1e-4;
constexpr double kReconstructionTarget = 1e-5;
constexpr double kReconstructionSeconds = 60.0;
// Criterion 2
constexpr double kClosedFormLimit = 1e-9;
constexpr double kClosedFormSeconds = 5.0;
// Criterion 3
constexpr double kExtractionLimit = 1e-3;
// Criterion 4
constexpr double kResidualRelative = 0.01;
constexpr double kResidualSmallEj = 0.1;  // EJ/EC
constexpr double kResidualAmplitudeFloor = 1e-3;
// Criterion 5
constexpr double kCompletenessLimit = 1e-10;
constexpr double kForwardLimit = 1e-8;
// Criterion 6
constexpr double kDiscriminationFactor = 10.0;
constexpr double kMismatchedHsAt21 = 1.3516647051584663;  // frozen oracle value
constexpr double kMismatchedHsRelative = 1e-6;
// Criterion 7
constexpr double kOverlapLimit = 0.999;
constexpr double kAnalyticMapLimit = 5e-2;
// Criterion 8
constexpr double kPerpRatio = 1e-6;
constexpr double kConvergenceRelative = 1e-3;
constexpr double kIdentityRelative = 1e-12;
constexpr double kSpikeFactor = 2.0;  // edge over centre |g_perp|
constexpr double kSweepSeconds = 600.0;
// Criterion 9
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kIdempotenceTol = 1e-12;

std::set<int> failed;

// Criterion 8 keeps its fig8 output so criterion 10 needs only one more run.
fs::path fig8_first_run() { return fs::temp_directory_path() / "cbtomo_acceptance_fig8"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s  %s: %s\n", id, ok ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!ok) {
    failed.insert(id);
  }
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buffer[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

void guarded(int id, const char* title, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

// The reconstruction problem shared by criteria 1, 5 and 9.
struct Fig4b {
  ReconstructionSettings settings;
  std::vector<double> ejs = linspace(10.0, 50.0, 21);
  ModelFamily truth{1.0, 0.0, 0.0};
};

DensityMatrix true_state(const Fig4b& p) {
  return DensityMatrix::pure(ground_state(p.truth.at(p.settings.ej0), ChargeBasis(p.settings.internal_cutoff))
                                 .in_basis(ChargeBasis(p.settings.rep_cutoff)));
}

// Ramsey set-up shared with the fig6 preset, rad/ns.
struct RamseySetup {
  TargetModel prepared_model{0.3, 15.0, 0.0, 0.0};
  ProbeSpec probe{units::ghz_to_angular(3.0), units::ghz_to_angular(0.1)};
  ChargeBasis basis{7};
  ChargeWavefunction prepared = ground_state(prepared_model, ChargeBasis(19)).in_basis(ChargeBasis(7));
  TimeGrid grid = TimeGrid::default_for(probe, basis);
};

void criterion1() {
  guarded(1, "ground-state reconstruction", [] {
    set_default_threads(1);
    const auto t0 = std::chrono::steady_clock::now();
    Fig4b p;
    const auto measured = simulate_measurements(p.truth, p.ejs, p.settings.rep_cutoff, p.settings.internal_cutoff);
    const auto maps = build_maps(p.settings, p.ejs);
    const auto result = solve_reconstruction(measured, maps, p.settings);
    const double elapsed = seconds_since(t0);
    const double diff = (result.rho.rho - true_state(p).rho).cwiseAbs().maxCoeff();
    report(1, "ground-state reconstruction", diff <= kReconstructionLimit && elapsed < kReconstructionSeconds,
           fmt("max|drho| = %.3e (limit %.0e, target %.0e %s), %.2f s single-threaded", diff,
               kReconstructionLimit, kReconstructionTarget, diff <= kReconstructionTarget ? "met" : "missed",
               elapsed));
    set_default_threads(0);
  });
}

void criterion2() {
  guarded(2, "closed-form Ramsey equivalence", [] {
    const auto t0 = std::chrono::steady_clock::now();
    RamseySetup r;
    const TargetModel readout{0.3, 0.0, 0.0, 0.0};
    const RamseyRecord record = simulate_protocol(r.prepared, readout, r.probe, r.grid);
    const auto p = charge_probabilities(r.prepared);
    double worst = 0.0;
    for (std::size_t i = 0; i < record.times.size(); ++i) {
      worst = std::max(worst, std::abs(record.sigma_x[i] - analytic_sigma_x(p, r.basis, r.probe, record.times[i])));
    }
    const double elapsed = seconds_since(t0);
    report(2, "closed-form Ramsey equivalence",
           worst <= kClosedFormLimit && elapsed < kClosedFormSeconds && record.times.size() == 2048,
           fmt("max deviation %.3e over %zu points (limit %.0e), %.3f s", worst, record.times.size(),
               kClosedFormLimit, elapsed));
  });
}

void criterion3() {
  guarded(3, "probability extraction round trip", [] {
    RamseySetup r;
    const auto p = charge_probabilities(r.prepared);
    // Synthetic closed-form signal and the simulated quench of the same state.
    RamseyRecord synthetic;
    synthetic.probe = r.probe;
    synthetic.times = r.grid.times();
    for (double t : synthetic.times) {
      synthetic.sigma_x.push_back(analytic_sigma_x(p, r.basis, r.probe, t));
    }
    const RamseyRecord quenched = simulate_protocol(r.prepared, TargetModel{0.3, 0.0, 0.0, 0.0}, r.probe, r.grid);
    double worst = 0.0;
    bool exact_frequencies = true;
    for (const RamseyRecord* record : std::initializer_list<const RamseyRecord*>{&synthetic, &quenched}) {
      const SpectralPeaks peaks = extract_probabilities(*record, r.basis);
      for (const auto& peak : peaks.peaks) {
        worst = std::max(worst, std::abs(peak.amplitude - p[static_cast<std::size_t>(r.basis.index(peak.n))]));
        exact_frequencies = exact_frequencies && peak.omega == peak_frequency(r.probe, peak.n);
      }
    }
    report(3, "probability extraction round trip", worst <= kExtractionLimit && exact_frequencies,
           fmt("max |p_rec - |c_n|^2| = %.3e (limit %.0e), peak frequencies exact: %s", worst, kExtractionLimit,
               exact_frequencies ? "yes" : "no"));
  });
}

void criterion4() {
  guarded(4, "residual-EJ robustness", [] {
    RamseySetup r;
    const double ec = r.prepared_model.ec;
    const std::vector<double> ratios{0.0, 0.05, kResidualSmallEj, 0.5, 1.0, 2.0};
    std::vector<double> ejs;
    for (double x : ratios) {
      ejs.push_back(x * ec);
    }
    const auto rows = residual_ej_scan(r.prepared, TargetModel{ec, 0.0, 0.0, 0.0}, r.probe, ejs, r.grid);
    double worst_relative = 0.0;
    for (std::size_t i = 1; i <= 2; ++i) {
      for (const auto& peak : rows[0].peaks.peaks) {
        if (peak.amplitude < kResidualAmplitudeFloor) {
          continue;
        }
        worst_relative = std::max(worst_relative,
                                  std::abs(rows[i].peaks.amplitude(peak.n) - peak.amplitude) / peak.amplitude);
      }
    }
    std::vector<double> a0;
    for (std::size_t i : {0u, 3u, 4u, 5u}) {
      a0.push_back(rows[i].peaks.amplitude(0));
    }
    bool non_increasing = true;
    for (std::size_t i = 1; i < a0.size(); ++i) {
      non_increasing = non_increasing && a0[i] <= a0[i - 1];
    }
    report(4, "residual-EJ robustness", worst_relative <= kResidualRelative && non_increasing,
           fmt("worst relative change at EJ/EC<=%.1f = %.3e (limit %.0e); A0 at EJ/EC 0,0.5,1,2 = "
               "%.4f %.4f %.4f %.4f (non-increasing: %s)",
               kResidualSmallEj, worst_relative, kResidualRelative, a0[0], a0[1], a0[2], a0[3],
               non_increasing ? "yes" : "no"));
  });
}

void criterion5() {
  guarded(5, "map completeness and forward consistency", [] {
    Fig4b p;
    const int full = p.settings.internal_cutoff;
    const ChargeBasis internal(full);
    const CMatrix rho = DensityMatrix::pure(ground_state(p.truth.at(p.settings.ej0), internal)).rho;
    double completeness = 0.0;
    double forward = 0.0;
    for (double ej : p.ejs) {
      const auto transform = adiabatic_transform(p.truth.at(p.settings.ej0), p.truth.at(ej), internal);
      const MeasurementMap map = measurement_map_numeric(transform, full, full);
      CMatrix sum = CMatrix::Zero(internal.dim(), internal.dim());
      for (int n = -full; n <= full; ++n) {
        sum += map.slice(n);
      }
      completeness = std::max(completeness, (sum - CMatrix::Identity(internal.dim(), internal.dim())).cwiseAbs().maxCoeff());
      const auto measured = charge_probabilities(ground_state(p.truth.at(ej), internal));
      for (int n = -full; n <= full; ++n) {
        forward = std::max(forward, std::abs(map.predict(n, rho) - measured[static_cast<std::size_t>(internal.index(n))]));
      }
    }
    report(5, "map completeness and forward consistency",
           completeness <= kCompletenessLimit && forward <= kForwardLimit,
           fmt("max|sum_n M^n - I| = %.3e (limit %.0e), forward misfit %.3e (limit %.0e), 21 configurations",
               completeness, kCompletenessLimit, forward, kForwardLimit));
  });
}

void criterion6() {
  guarded(6, "model discrimination", [] {
    ReconstructionSettings settings;
    settings.allow_rank_deficient = true;
    ValidationSettings v;
    for (int n = 5; n <= 21; n += 2) {
      v.counts.push_back(n);
    }
    const ModelFamily truth{1.0, 0.0, 0.0};
    const auto matched = validate_model(truth, settings, v);
    settings.fit.ej2_ratio = 0.05;
    const auto mismatched = validate_model(truth, settings, v);
    // Least-squares slope of HS distance against count.
    const double mean_x = std::accumulate(v.counts.begin(), v.counts.end(), 0.0) / v.counts.size();
    double mean_y = 0.0;
    for (const auto& r : mismatched) {
      mean_y += r.hs_distance / mismatched.size();
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& r : mismatched) {
      sxy += (r.count - mean_x) * (r.hs_distance - mean_y);
      sxx += (r.count - mean_x) * (r.count - mean_x);
    }
    const double slope = sxy / sxx;
    const double first = mismatched.front().hs_distance;
    const double last = mismatched.back().hs_distance;
    const double factor = last / matched.back().hs_distance;
    const bool pinned = std::abs(last - kMismatchedHsAt21) <= kMismatchedHsRelative * kMismatchedHsAt21;
    report(6, "model discrimination",
           last >= first && slope >= 0.0 && factor >= kDiscriminationFactor && pinned,
           fmt("mismatched HS 5->21: %.4f -> %.4f (slope %.3e), matched HS(21) = %.3e, factor %.3e "
               "(limit %.0f), frozen HS(21) reproduced: %s",
               first, last, slope, matched.back().hs_distance, factor, kDiscriminationFactor,
               pinned ? "yes" : "no"));
  });
}

void criterion7() {
  guarded(7, "analytic-approximation fidelity", [] {
    const ChargeBasis internal(19);
    const ChargeBasis rep(7);
    double worst_overlap = 1.0;
    for (double ej : {10.0, 50.0}) {
      const TargetModel m{1.0, ej, 0.0, 0.0};
      const double overlap =
          std::abs(analytic_state(0, m, rep).coefficients().dot(ground_state(m, internal).in_basis(rep).coefficients()));
      worst_overlap = std::min(worst_overlap, overlap);
    }
    const TargetModel start{1.0, 50.0, 0.0, 0.0};
    const TargetModel end{1.0, 10.0, 0.0, 0.0};
    const int levels = harmonic_level_count(1.0, 10.0);
    const MeasurementMap analytic = measurement_map_analytic(start, end, internal, 7, 7);
    TransformOptions options;
    options.levels = levels;
    const MeasurementMap numeric = measurement_map_numeric(adiabatic_transform(start, end, internal, options), 7, 7);
    const MeasurementMap numeric_all = measurement_map_numeric(adiabatic_transform(start, end, internal), 7, 7);
    // Dominant block: visible charges of the EJ = 10 configuration, |j|, |k| <= 5.
    const int visible = visibility_cutoff(10.0, 1.0);
    double worst = 0.0;
    double worst_all = 0.0;
    for (int n = -visible; n <= visible; ++n) {
      for (int j = -5; j <= 5; ++j) {
        for (int k = -5; k <= 5; ++k) {
          const complex a = analytic.slice(n)(k + 7, j + 7);
          worst = std::max(worst, std::abs(a - numeric.slice(n)(k + 7, j + 7)));
          worst_all = std::max(worst_all, std::abs(a - numeric_all.slice(n)(k + 7, j + 7)));
        }
      }
    }
    report(7, "analytic-approximation fidelity", worst_overlap >= kOverlapLimit && worst <= kAnalyticMapLimit,
           fmt("min GS overlap %.6f (limit %.3f); map difference on |n|<=%d, |j|,|k|<=5 with %d harmonic "
               "level(s): %.4f (limit %.0e); against the all-level numeric map: %.4f",
               worst_overlap, kOverlapLimit, visible, levels, worst, kAnalyticMapLimit, worst_all));
  });
}

void criterion8() {
  guarded(8, "circuit engine", [] {
    const CircuitSpec base;  // default parameter set
    std::vector<double> grid = linspace(-0.5, 0.5, 21);
    const auto rows = sweep(base, SweepParameter::ng, grid);
    double max_par = 0.0;
    double max_perp = 0.0;
    for (const auto& r : rows) {
      if (!r.degenerate) {
        max_par = std::max(max_par, std::abs(r.couplings.g_par_pc));
        max_perp = std::max(max_perp, std::abs(r.couplings.g_perp_pc));
      }
    }
    const bool a = max_perp <= kPerpRatio * max_par;

    const auto& at_zero = rows[10];
    double gap_max = 0.0;
    double gap_min = INFINITY;
    std::size_t arg_max = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].couplings.delta_p > gap_max) {
        gap_max = rows[i].couplings.delta_p;
        arg_max = i;
      }
      gap_min = std::min(gap_min, rows[i].couplings.delta_p);
    }
    const double edge_gap = std::max(rows.front().couplings.delta_p, rows.back().couplings.delta_p);
    const bool b = std::abs(at_zero.couplings.g_par_pc) <= kPerpRatio * max_par && arg_max == 10 &&
                   edge_gap <= gap_min * (1.0 + 1e-9) + 1e-9;

    CircuitSpec quarter = base;
    quarter.ng = 0.25;
    const CouplingSet g7 = coupling_strengths(quarter);
    const double identity = std::sqrt(4.0 * units::electron_charge * units::electron_charge * g7.impedance_ohm /
                                      units::hbar);
    const bool c = std::abs(g7.g_par_pt - identity * g7.g_par_pc) <= kIdentityRelative * std::abs(g7.g_par_pt) &&
                   std::abs(g7.g_perp_pt - identity * g7.g_perp_pc) <= kIdentityRelative * std::abs(g7.g_par_pt);

    ProbeSolverOptions nine;
    nine.cutoff = 9;
    const CouplingSet g9 = coupling_strengths(quarter, nine);
    const double gap_shift = std::abs(g9.delta_p - g7.delta_p) / std::abs(g9.delta_p);
    const double par_shift = std::abs(g9.g_par_pc - g7.g_par_pc) / std::abs(g9.g_par_pc);
    const bool d = gap_shift < kConvergenceRelative && par_shift < kConvergenceRelative;

    const auto t0 = std::chrono::steady_clock::now();
    const auto& preset = io::find_preset("fig8");
    const io::ExperimentConfig config = io::parse_config(preset.yaml);
    const fs::path dir = fig8_first_run();
    const io::RunManifest manifest = io::run_experiment(config, preset.yaml, {dir.string(), 0});
    const double elapsed = seconds_since(t0);
    bool spike = true;
    double weakest_spike = INFINITY;
    for (const auto& s : config.sweeps) {
      std::ifstream in(dir / (s.name + ".csv"));
      std::string line;
      std::getline(in, line);
      std::vector<std::pair<double, double>> perp;
      while (std::getline(in, line)) {
        std::stringstream cells(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(cells, cell, ',')) {
          v.push_back(std::stod(cell));
        }
        perp.emplace_back(v[0], v[3]);
      }
      double at_edges = std::min(perp.front().second, perp.back().second);
      double at_centre = 0.0;
      double inner_max = 0.0;
      for (const auto& [ng, value] : perp) {
        if (std::abs(ng) < 1e-12) {
          at_centre = value;
        }
        if (std::abs(std::abs(ng) - 0.5) > 1e-12) {
          inner_max = std::max(inner_max, value);
        }
      }
      spike = spike && at_edges > inner_max && at_edges >= kSpikeFactor * at_centre;
      weakest_spike = std::min(weakest_spike, at_edges / at_centre);
    }
    const bool e = spike && elapsed < kSweepSeconds;

    report(8, "circuit engine", a && b && c && d && e,
           fmt("(a) max|g_perp|/max|g_par| = %.2e %s; (b) g_par(0) = %.2e MHz, gap max at ng=0, min at ng=+-1/2 %s; "
               "(c) pt/pc identity %s; (d) Np 7->9 shifts gap %.2e, g_par %.2e %s; (e) edge/centre g_perp >= %.1f "
               "over %zu sweeps in %.1f s %s",
               max_perp / max_par, a ? "ok" : "bad", at_zero.couplings.g_par_pc * 1e3, b ? "ok" : "bad",
               c ? "ok" : "bad", gap_shift, par_shift, d ? "ok" : "bad", weakest_spike, config.sweeps.size(),
               elapsed, e ? "ok" : "bad"));
    (void)manifest;
  });
}

void criterion9() {
  guarded(9, "physicality suite", [] {
    Fig4b p;
    const auto measured = simulate_measurements(p.truth, p.ejs, p.settings.rep_cutoff, p.settings.internal_cutoff);
    const auto noisy = simulate_measurements(p.truth, p.ejs, p.settings.rep_cutoff, p.settings.internal_cutoff,
                                             NoiseSpec{1e-3, 17, 0});
    int checked = 0;
    bool all_physical = true;
    auto check = [&](const ReconstructionSettings& s, const std::vector<MeasuredConfig>& m) {
      const auto maps = build_maps(s, p.ejs);
      const auto r = solve_reconstruction(m, maps, s);
      all_physical = all_physical && r.rho.is_physical(kHermitianTol, kTraceTol, kPsdTol);
      ++checked;
    };
    ReconstructionSettings s = p.settings;
    check(s, measured);
    check(s, noisy);
    s.mode = SolverMode::cholesky;
    check(s, measured);
    s = p.settings;
    s.maps = MapKind::analytic;
    check(s, measured);

    // Idempotence on random physical states of mixed rank.
    double worst = 0.0;
    CounterRng rng(2024, 9);
    for (int trial = 0; trial < 50; ++trial) {
      const int d = 15;
      const int rank = 1 + trial % d;
      CMatrix a(d, rank);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < rank; ++j) {
          a(i, j) = complex(rng.normal(), rng.normal());
        }
      }
      CMatrix rho = a * a.adjoint();
      rho /= rho.trace().real();
      const DensityMatrix once = project_physical(rho, ChargeBasis(7));
      const DensityMatrix twice = project_physical(once.rho, ChargeBasis(7));
      worst = std::max(worst, (twice.rho - once.rho).cwiseAbs().maxCoeff());
      worst = std::max(worst, (once.rho - rho).cwiseAbs().maxCoeff());
    }
    report(9, "physicality suite", all_physical && worst <= kIdempotenceTol,
           fmt("%d reconstructions physical (herm %.0e, trace %.0e, psd %.0e): %s; idempotence deviation %.2e "
               "(limit %.0e)",
               checked, kHermitianTol, kTraceTol, kPsdTol, all_physical ? "yes" : "no", worst, kIdempotenceTol));
  });
}

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion10() {
  guarded(10, "determinism", [] {
    const fs::path root = fs::temp_directory_path() / "cbtomo_acceptance_determinism";
    fs::remove_all(root);
    struct Case {
      std::string name;
      std::string yaml;
      unsigned threads_a;
      unsigned threads_b;
    };
    std::vector<Case> cases;
    for (const auto& preset : io::presets()) {
      cases.push_back({preset.name, preset.yaml, 0, 0});
    }
    // Noise paths and schedule independence, on cheap variants.
    cases.push_back({"ramsey-noisy",
                     "kind: ramsey\nseed: 99\ntarget: {ec: 0.3, ej: 15.0}\nprobe: {delta_p_ghz: 3.0, g_ghz: 0.1}\n"
                     "readout: {ej: 0.03}\nnoise: {std: 0.01}\n",
                     1, 4});
    cases.push_back({"validate-noisy",
                     "kind: validate\nseed: 5\ntarget: {ec: 1.0, ej: 50.0}\nnoise: {std: 1e-4}\n"
                     "reconstruction: {allow_rank_deficient: true}\n"
                     "validation: {counts: [5, 13, 21], fit_ej2_ratios: [0.0]}\n",
                     1, 4});
    cases.push_back({"circuit-small",
                     "kind: circuit-sweep\nsolver: {cutoff: 5}\n"
                     "sweeps:\n  - {name: ng, parameter: ng, values: [-0.5, -0.25, 0.0, 0.3]}\n"
                     "  - {name: da, parameter: delta_alpha, values: [0.0, 0.01], set: {ng: 0.4}}\n",
                     1, 3});
    int compared = 0;
    std::string mismatch;
    for (const auto& c : cases) {
      const io::ExperimentConfig config = io::parse_config(c.yaml);
      fs::path a = root / (c.name + "-a");
      const fs::path b = root / (c.name + "-b");
      io::RunManifest ma;
      if (c.name == "fig8" && fs::exists(fig8_first_run() / "manifest.json")) {
        a = fig8_first_run();
        ma = io::run_experiment(config, c.yaml, {b.string(), c.threads_b});
      } else {
        ma = io::run_experiment(config, c.yaml, {a.string(), c.threads_a});
        io::run_experiment(config, c.yaml, {b.string(), c.threads_b});
      }
      for (const auto& out : ma.outputs) {
        if (out.name.size() < 4 || out.name.substr(out.name.size() - 4) != ".csv") {
          continue;
        }
        ++compared;
        if (file_bytes(a / out.name) != file_bytes(b / out.name)) {
          mismatch += " " + c.name + "/" + out.name;
        }
      }
    }
    set_default_threads(0);
    fs::remove_all(root);
    fs::remove_all(fig8_first_run());
    report(10, "determinism", mismatch.empty() && compared > 0,
           fmt("%d CSV pairs compared across %zu runs%s", compared, cases.size(),
               mismatch.empty() ? ", all byte-identical" : (", differing:" + mismatch).c_str()));
  });
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--expected-failures" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) {
        expected.insert(std::stoi(item));
      }
    } else {
      std::fprintf(stderr, "usage: %s [--expected-failures 4,7]\n", argv[0]);
      return 64;
    }
  }
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  int unexpected = 0;
  for (int id : failed) {
    if (!expected.contains(id)) {
      ++unexpected;
    }
  }
  for (int id : expected) {
    if (!failed.contains(id)) {
      std::printf("criterion %d now passes; drop it from --expected-failures\n", id);
    }
  }
  std::printf("%zu of 10 criteria failed, %d unexpectedly\n", failed.size(), unexpected);
  return unexpected;
}
