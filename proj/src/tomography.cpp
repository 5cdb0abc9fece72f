#include "cbtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "cbtomo/errors.hpp"
#include "cbtomo/parallel.hpp"
#include "cbtomo/rng.hpp"

namespace cbtomo {

namespace {

constexpr double kHarmonicRegime = 5.0;

complex phase_factor(const std::vector<double>& phases, Eigen::Index q) {
  const auto i = static_cast<std::size_t>(q);
  return i < phases.size() ? std::polar(1.0, -phases[i]) : complex(1.0, 0.0);
}

// Follows the tracked levels from start to end in small EJ steps and throws if
// the dominant overlap of a level ever points at a different, non-degenerate level.
void check_level_ordering(const TargetModel& start, const TargetModel& end, const ChargeBasis& basis,
                          Eigen::Index levels) {
  const double span = std::abs(end.ej - start.ej) + std::abs(end.ej2 - start.ej2);
  const double scale = std::max({start.ej, end.ej, start.ec});
  const int steps = std::max(1, static_cast<int>(std::ceil(span / (0.02 * scale))));
  EigenSystem prev = solve_target(start, basis);
  for (int s = 1; s <= steps; ++s) {
    const double f = static_cast<double>(s) / steps;
    TargetModel mid = start;
    mid.ej = start.ej + f * (end.ej - start.ej);
    mid.ej2 = start.ej2 + f * (end.ej2 - start.ej2);
    EigenSystem next = solve_target(mid, basis);
    const CMatrix overlap = next.eigenvectors.adjoint() * prev.eigenvectors;
    // Same resolution at which the eigensolver merges levels into one cluster.
    const double tie = EigenOptions{}.cluster_tolerance * std::max(1.0, next.eigenvalues.cwiseAbs().maxCoeff());
    for (Eigen::Index q = 0; q < levels; ++q) {
      Eigen::Index p = 0;
      overlap.col(q).cwiseAbs().maxCoeff(&p);
      if (p != q && std::abs(next.eigenvalues[p] - next.eigenvalues[q]) > tie &&
          std::abs(overlap(p, q)) > 0.5) {
        throw LevelCrossingError(static_cast<int>(q), static_cast<int>(p));
      }
    }
    prev = std::move(next);
  }
}

MeasurementMap slice_transform(const CMatrix& t, const ChargeBasis& internal, int rep_cutoff,
                               int visible_cutoff, double ej) {
  if (rep_cutoff < 0 || rep_cutoff > internal.cutoff()) {
    throw std::invalid_argument("measurement map: representation cutoff exceeds internal truncation");
  }
  if (visible_cutoff < 0 || visible_cutoff > internal.cutoff()) {
    throw std::invalid_argument("measurement map: visibility cutoff exceeds internal truncation");
  }
  MeasurementMap map;
  map.ej = ej;
  map.rep_cutoff = rep_cutoff;
  map.visible_cutoff = visible_cutoff;
  const Eigen::Index d = 2 * rep_cutoff + 1;
  const Eigen::Index first = internal.index(-rep_cutoff);
  for (int n = -visible_cutoff; n <= visible_cutoff; ++n) {
    const CVector row = t.row(internal.index(n)).segment(first, d).transpose();
    map.slices.push_back(row.conjugate() * row.transpose());
  }
  return map;
}

std::string charge_label(int j, int k) {
  return "(" + std::to_string(j) + "," + std::to_string(k) + ")";
}

// Real parametrization of a Hermitian matrix: diagonal entries, then for each
// j < k the real and imaginary part of rho(j, k).
struct HermitianParameters {
  Eigen::Index dim;
  Eigen::Index count() const { return dim * dim; }

  // Coefficient of parameter p in Re Tr(M rho).
  double coefficient(const CMatrix& m, Eigen::Index p) const {
    if (p < dim) {
      return m(p, p).real();
    }
    const auto [j, k, imag] = off_diagonal(p);
    return imag ? 2.0 * m(j, k).imag() : 2.0 * m(j, k).real();
  }

  std::tuple<Eigen::Index, Eigen::Index, bool> off_diagonal(Eigen::Index p) const {
    Eigen::Index r = p - dim;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Eigen::Index row = 2 * (dim - 1 - j);
      if (r < row) {
        return {j, j + 1 + r / 2, r % 2 == 1};
      }
      r -= row;
    }
    throw std::out_of_range("parameter index");
  }

  void add(CMatrix& rho, Eigen::Index p, double value) const {
    if (p < dim) {
      rho(p, p) += value;
      return;
    }
    const auto [j, k, imag] = off_diagonal(p);
    const complex z = imag ? complex(0.0, value) : complex(value, 0.0);
    rho(j, k) += z;
    rho(k, j) += std::conj(z);
  }

  std::string name(Eigen::Index p, int cutoff) const {
    if (p < dim) {
      return "rho" + charge_label(static_cast<int>(p) - cutoff, static_cast<int>(p) - cutoff);
    }
    const auto [j, k, imag] = off_diagonal(p);
    return std::string(imag ? "Im" : "Re") + " rho" +
           charge_label(static_cast<int>(j) - cutoff, static_cast<int>(k) - cutoff);
  }
};

struct Equation {
  const CMatrix* m;
  double rhs;
  double weight;
  std::size_t config;
};

std::vector<Equation> collect_equations(const std::vector<MeasuredConfig>& measured,
                                        const std::vector<MeasurementMap>& maps,
                                        const ReconstructionSettings& settings) {
  if (measured.size() != maps.size()) {
    throw std::invalid_argument("solve_reconstruction: one map per measured configuration required");
  }
  std::vector<Equation> eqs;
  for (std::size_t c = 0; c < measured.size(); ++c) {
    const auto& cfg = measured[c];
    const auto& map = maps[c];
    if (map.rep_cutoff != settings.rep_cutoff) {
      throw std::invalid_argument("solve_reconstruction: map cutoff does not match settings");
    }
    double total = 0.0;
    for (double p : cfg.diagonals) {
      if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("solve_reconstruction: measured diagonal outside [0, 1]");
      }
      total += p;
    }
    if (total > 1.0 + 1e-6 + 5.0 * cfg.noise_std * std::sqrt(double(cfg.diagonals.size()))) {
      throw std::invalid_argument("solve_reconstruction: measured diagonals sum above 1");
    }
    const double weight =
        settings.noise_weighting && cfg.noise_std > 0.0 ? 1.0 / cfg.noise_std : 1.0;
    const int reach = std::min(cfg.readout_cutoff, map.visible_cutoff);
    for (int n = -reach; n <= reach; ++n) {
      const double p = cfg.at(n);
      if (p < settings.visibility_floor) {
        continue;
      }
      eqs.push_back({&map.slice(n), p, weight, c});
    }
  }
  return eqs;
}

double objective(const std::vector<Equation>& eqs, const CMatrix& rho, std::vector<double>* per_config,
                 std::size_t configs) {
  if (per_config) {
    per_config->assign(configs, 0.0);
  }
  double total = 0.0;
  for (const auto& e : eqs) {
    const double pred = (e.m->cwiseProduct(rho.transpose())).sum().real();
    const double r = e.weight * (pred - e.rhs);
    total += r * r;
    if (per_config) {
      (*per_config)[e.config] += r * r;
    }
  }
  return total;
}

// Iteration stops once the state moves less than this (Frobenius norm) per step.
constexpr double kCholeskyStepTolerance = 1e-9;
// Relative objective decrease below which an accepted step counts as converged.
constexpr double kCostTolerance = 1e-8;

CMatrix solve_cholesky(const std::vector<Equation>& eqs, const CMatrix& start,
                       const ReconstructionSettings& settings, int* iterations) {
  const int max_iterations = settings.max_iterations;
  const double rank_tolerance = settings.rank_tolerance;
  const Eigen::Index d = start.rows();
  const Eigen::Index np = d * d;
  const Eigen::Index ne = static_cast<Eigen::Index>(eqs.size());

  Eigen::LLT<CMatrix> llt(start + 1e-10 * CMatrix::Identity(d, d));
  CMatrix lower = llt.matrixL();

  // Parameter layout: real diagonal, then (re, im) of each strictly lower entry.
  std::vector<std::tuple<Eigen::Index, Eigen::Index, complex>> params;
  for (Eigen::Index a = 0; a < d; ++a) {
    params.emplace_back(a, a, complex(1.0, 0.0));
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < a; ++b) {
      params.emplace_back(a, b, complex(1.0, 0.0));
      params.emplace_back(a, b, complex(0.0, 1.0));
    }
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    lower(a, a) = std::abs(lower(a, a));
  }

  auto state = [&](const CMatrix& l) {
    const CMatrix a = l * l.adjoint();
    return CMatrix(a / a.trace().real());
  };
  auto residuals = [&](const CMatrix& l) {
    const CMatrix rho = state(l);
    Eigen::VectorXd r(ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
      const auto& eq = eqs[static_cast<std::size_t>(e)];
      r[e] = eq.weight * ((eq.m->cwiseProduct(rho.transpose())).sum().real() - eq.rhs);
    }
    return r;
  };
  auto jacobian = [&](const CMatrix& l) {
    const CMatrix a = l * l.adjoint();
    const double t = a.trace().real();
    Eigen::MatrixXd jac(ne, np);
    for (Eigen::Index e = 0; e < ne; ++e) {
      const auto& eq = eqs[static_cast<std::size_t>(e)];
      const CMatrix& m = *eq.m;
      const double pred = (m.cwiseProduct(a.transpose())).sum().real() / t;
      const CMatrix lm = l.adjoint() * m;
      const CMatrix ml = m * l;
      for (Eigen::Index p = 0; p < np; ++p) {
        const auto& [r, c, dir] = params[static_cast<std::size_t>(p)];
        const double dtrace = (dir * lm(c, r) + std::conj(dir) * ml(r, c)).real();
        const double dt = 2.0 * (std::conj(dir) * l(r, c)).real();
        jac(e, p) = eq.weight * (dtrace / t - pred * dt / t);
      }
    }
    return jac;
  };
  auto step = [&](const CMatrix& l, const Eigen::VectorXd& delta) {
    CMatrix out = l;
    for (Eigen::Index p = 0; p < np; ++p) {
      const auto& [r, c, dir] = params[static_cast<std::size_t>(p)];
      out(r, c) += delta[p] * dir;
    }
    return out;
  };

  auto fitted = [&](const Eigen::VectorXd& r) {
    for (Eigen::Index e = 0; e < ne; ++e) {
      if (std::abs(r[e]) > settings.fit_tolerance * eqs[static_cast<std::size_t>(e)].weight) {
        return false;
      }
    }
    return true;
  };

  // Levenberg-Marquardt damping of the Gauss-Newton step (Nielsen update).
  Eigen::VectorXd res = residuals(lower);
  double cost = res.squaredNorm();
  double lambda = -1.0;
  double growth = 2.0;
  Eigen::MatrixXd jac = jacobian(lower);
  for (int it = 1; it <= max_iterations; ++it) {
    *iterations = it;
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * res;
    if (fitted(res)) {
      return state(lower);
    }
    if (lambda < 0.0) {
      lambda = 1e-3 * normal.diagonal().maxCoeff();
    }
    const double floor = rank_tolerance * normal.diagonal().maxCoeff();
    const Eigen::VectorXd damping = normal.diagonal().cwiseMax(floor);
    Eigen::MatrixXd system = normal;
    system.diagonal() += lambda * damping;
    const Eigen::VectorXd delta = system.ldlt().solve(-gradient);
    const CMatrix trial = step(lower, delta);
    const Eigen::VectorXd trial_res = residuals(trial);
    const double trial_cost = trial_res.squaredNorm();
    const double predicted = delta.dot(lambda * damping.cwiseProduct(delta) - gradient);
    const double gain = predicted > 0.0 ? (cost - trial_cost) / predicted : -1.0;
    if (gain > 0.0) {
      const double moved = (state(trial) - state(lower)).norm();
      const double prev = cost;
      lower = trial;
      res = trial_res;
      cost = trial_cost;
      jac = jacobian(lower);
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      growth = 2.0;
      if (prev - cost <= kCostTolerance * prev || moved < kCholeskyStepTolerance) {
        return state(lower);
      }
    } else {
      lambda *= growth;
      growth *= 2.0;
      if (!std::isfinite(lambda) || lambda > 1e30) {
        return state(lower);
      }
    }
  }
  throw ConvergenceError("Gauss-Newton did not converge in " + std::to_string(max_iterations) +
                             " iterations",
                         state(lower), max_iterations);
}

}  // namespace

DensityMatrix DensityMatrix::pure(const ChargeWavefunction& psi) {
  const CVector& c = psi.coefficients();
  return {psi.basis(), c * c.adjoint()};
}

void DensityMatrix::check(double hermitian_tol, double trace_tol, double psd_tol) const {
  if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
    throw std::invalid_argument("DensityMatrix: shape does not match basis");
  }
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > hermitian_tol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (" + std::to_string(herm) + ")");
  }
  const double trace = std::abs(rho.trace() - 1.0);
  if (trace > trace_tol) {
    throw std::invalid_argument("DensityMatrix: trace differs from 1 by " + std::to_string(trace));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -psd_tol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(solver.eigenvalues().minCoeff()));
  }
}

bool DensityMatrix::is_physical(double hermitian_tol, double trace_tol, double psd_tol) const {
  try {
    check(hermitian_tol, trace_tol, psd_tol);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

AdiabaticTransform adiabatic_transform(const TargetModel& start, const TargetModel& end,
                                       const ChargeBasis& basis, const TransformOptions& options) {
  if (start.ec != end.ec || start.ng != end.ng) {
    throw std::invalid_argument("adiabatic_transform: EC and ng must match between configurations");
  }
  const Eigen::Index levels = options.levels > 0 ? std::min(options.levels, basis.dim()) : basis.dim();
  check_level_ordering(start, end, basis, levels);
  const EigenSystem s = solve_target(start, basis);
  const EigenSystem e = solve_target(end, basis);

  AdiabaticTransform out;
  out.ej_start = start.ej;
  out.ej_end = end.ej;
  out.phases = options.phases;
  out.basis = basis;
  out.matrix = CMatrix::Zero(basis.dim(), basis.dim());
  for (Eigen::Index q = 0; q < levels; ++q) {
    out.matrix.noalias() += phase_factor(options.phases, q) * e.eigenvectors.col(q) *
                            s.eigenvectors.col(q).adjoint();
  }
  return out;
}

const CMatrix& MeasurementMap::slice(int n) const {
  if (n < -visible_cutoff || n > visible_cutoff) {
    throw std::out_of_range("MeasurementMap: charge " + std::to_string(n) + " not visible");
  }
  return slices[static_cast<std::size_t>(n + visible_cutoff)];
}

double MeasurementMap::predict(int n, const CMatrix& rho) const {
  return (slice(n).cwiseProduct(rho.transpose())).sum().real();
}

MeasurementMap measurement_map_numeric(const AdiabaticTransform& transform, int rep_cutoff,
                                       int visible_cutoff) {
  return slice_transform(transform.matrix, transform.basis, rep_cutoff, visible_cutoff,
                         transform.ej_end);
}

int harmonic_level_count(double ec, double ej) {
  if (!(ec > 0.0) || !(ej > 0.0)) {
    return 1;
  }
  const double spacing = std::sqrt(8.0 * ec * ej);
  int levels = 0;
  while ((levels + 0.5) * spacing <= ej) {
    ++levels;
  }
  return std::max(1, levels);
}

MeasurementMap measurement_map_analytic(const TargetModel& start, const TargetModel& end,
                                        const ChargeBasis& internal, int rep_cutoff, int visible_cutoff,
                                        const AnalyticMapOptions& options) {
  if (start.ec != end.ec || start.ng != end.ng) {
    throw std::invalid_argument("measurement_map_analytic: EC and ng must match");
  }
  std::vector<std::string> warnings;
  for (const auto* m : {&start, &end}) {
    if (m->ej < kHarmonicRegime * m->ec) {
      std::ostringstream msg;
      msg << "EJ/EC = " << m->ej / m->ec << " is outside the harmonic regime (EJ/EC >= "
          << kHarmonicRegime << ")";
      warnings.push_back(msg.str());
    }
  }
  const int levels =
      options.levels > 0 ? options.levels : harmonic_level_count(start.ec, std::min(start.ej, end.ej));
  CMatrix t = CMatrix::Zero(internal.dim(), internal.dim());
  for (int p = 0; p < levels; ++p) {
    const CVector a = analytic_state(p, end, internal).coefficients();
    const CVector b = analytic_state(p, start, internal).coefficients();
    const CMatrix term = phase_factor(options.phases, p) * a * b.adjoint();
    for (Eigen::Index i = 0; i < term.size(); ++i) {
      if (std::abs(term(i)) >= 1e-14) {
        t(i) += term(i);
      }
    }
  }
  MeasurementMap map = slice_transform(t, internal, rep_cutoff, visible_cutoff, end.ej);
  map.warnings = std::move(warnings);
  return map;
}

int visibility_cutoff(double ej, double ec) {
  return static_cast<int>(std::lround(std::pow(ej / ec, 0.25)));
}

ConfigurationPlan plan_configurations(double ej0, double ec, double ej_min, double ej_max, int rep_cutoff,
                                      int count, int cap) {
  if (!(ec > 0.0) || !(ej_min > 0.0) || ej_min > ej_max || ej_max > ej0) {
    throw std::invalid_argument("plan_configurations: need 0 < ej_min <= ej_max <= ej0");
  }
  ConfigurationPlan plan;
  const int visible_min = visibility_cutoff(ej_min, ec);
  const double unknowns = std::pow(2.0 * rep_cutoff + 1.0, 2);
  plan.required = static_cast<int>(std::ceil(unknowns / (2.0 * visible_min + 1.0) - 1e-9));
  plan.recommended = static_cast<int>(std::ceil(1.5 * plan.required - 1e-9));
  if (plan.required > cap) {
    throw std::invalid_argument("plan_configurations: " + std::to_string(plan.required) +
                                " configurations required, cap is " + std::to_string(cap));
  }
  const int n = count > 0 ? count : plan.recommended;
  for (double ej : linspace(ej_min, ej_max, n)) {
    plan.configs.push_back({ej, visibility_cutoff(ej, ec)});
  }
  return plan;
}

std::vector<MeasuredConfig> simulate_measurements(const ModelFamily& truth, const std::vector<double>& ejs,
                                                  int readout_cutoff, int internal_cutoff,
                                                  const NoiseSpec& noise) {
  if (readout_cutoff > internal_cutoff) {
    throw std::invalid_argument("simulate_measurements: readout cutoff exceeds internal truncation");
  }
  const ChargeBasis basis(internal_cutoff);
  std::vector<MeasuredConfig> out;
  for (std::size_t i = 0; i < ejs.size(); ++i) {
    const ChargeWavefunction gs = ground_state(truth.at(ejs[i]), basis);
    MeasuredConfig cfg;
    cfg.ej = ejs[i];
    cfg.readout_cutoff = readout_cutoff;
    cfg.noise_std = noise.std;
    CounterRng rng(noise.seed, noise.stream + i);
    for (int n = -readout_cutoff; n <= readout_cutoff; ++n) {
      double p = std::norm(gs.at(n));
      if (noise.std > 0.0) {
        p = std::clamp(p + noise.std * rng.normal(), 0.0, 1.0);
      }
      cfg.diagonals.push_back(p);
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

std::vector<MeasurementMap> build_maps(const ReconstructionSettings& settings,
                                       const std::vector<double>& ejs, unsigned threads) {
  const ChargeBasis internal(settings.internal_cutoff);
  const TargetModel start = settings.fit.at(settings.ej0);
  const int visible = settings.effective_readout_cutoff();
  std::vector<MeasurementMap> maps(ejs.size());
  parallel_for(
      ejs.size(),
      [&](std::size_t i) {
        const TargetModel end = settings.fit.at(ejs[i]);
        if (settings.maps == MapKind::numeric) {
          maps[i] = measurement_map_numeric(adiabatic_transform(start, end, internal),
                                            settings.rep_cutoff, visible);
        } else {
          maps[i] = measurement_map_analytic(start, end, internal, settings.rep_cutoff, visible);
        }
      },
      threads);
  return maps;
}

ReconstructionResult solve_reconstruction(const std::vector<MeasuredConfig>& measured,
                                          const std::vector<MeasurementMap>& maps,
                                          const ReconstructionSettings& settings) {
  const std::vector<Equation> eqs = collect_equations(measured, maps, settings);
  const ChargeBasis basis(settings.rep_cutoff);
  const HermitianParameters params{basis.dim()};
  const Eigen::Index d = basis.dim();
  const Eigen::Index ne = static_cast<Eigen::Index>(eqs.size());
  const Eigen::Index np = params.count();

  Eigen::MatrixXd full(ne, np);
  Eigen::VectorXd rhs(ne);
  for (Eigen::Index e = 0; e < ne; ++e) {
    const auto& eq = eqs[static_cast<std::size_t>(e)];
    for (Eigen::Index p = 0; p < np; ++p) {
      full(e, p) = eq.weight * params.coefficient(*eq.m, p);
    }
    rhs[e] = eq.weight * eq.rhs;
  }

  // Trace constraint: the last diagonal entry is 1 minus the others.
  const Eigen::Index last = d - 1;
  const Eigen::VectorXd last_col = full.col(last);
  rhs -= last_col;
  std::vector<Eigen::Index> free;
  for (Eigen::Index p = 0; p < np; ++p) {
    if (p == last) {
      continue;
    }
    if (p < d) {
      full.col(p) -= last_col;
    }
    free.push_back(p);
  }
  double max_norm = 0.0;
  for (auto p : free) {
    max_norm = std::max(max_norm, full.col(p).norm());
  }
  ReconstructionResult result;
  std::vector<Eigen::Index> kept;
  for (auto p : free) {
    if (full.col(p).norm() > 1e-12 * max_norm) {
      kept.push_back(p);
    } else {
      result.unconstrained.push_back(params.name(p, settings.rep_cutoff));
    }
  }
  Eigen::MatrixXd design(ne, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    design.col(static_cast<Eigen::Index>(c)) = full.col(kept[c]);
  }

  result.equations = static_cast<int>(ne);
  result.parameters = static_cast<int>(kept.size());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = sv.size() > 0 ? settings.rank_tolerance * sv[0] : 0.0;
  result.rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    result.rank += sv[i] > cut ? 1 : 0;
  }
  result.condition =
      sv.size() > 0 && sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  result.truncated_directions = result.parameters - result.rank;
  if (ne < design.cols() && !settings.allow_rank_deficient) {
    throw UnderdeterminedError(result.equations, result.parameters, result.rank);
  }
  svd.setThreshold(settings.rank_tolerance);
  const Eigen::VectorXd x = svd.solve(rhs);

  CMatrix rho = CMatrix::Zero(d, d);
  double off_trace = 0.0;
  for (std::size_t c = 0; c < kept.size(); ++c) {
    params.add(rho, kept[c], x[static_cast<Eigen::Index>(c)]);
    if (kept[c] < d) {
      off_trace += x[static_cast<Eigen::Index>(c)];
    }
  }
  rho(last, last) = 1.0 - off_trace;

  if (settings.mode == SolverMode::cholesky) {
    const DensityMatrix start = project_physical(rho, basis);
    rho = solve_cholesky(eqs, start.rho, settings, &result.iterations);
  }
  result.rho_raw = rho;
  result.rho = project_physical(rho, basis);
  result.residual = objective(eqs, rho, &result.config_residuals, measured.size());
  return result;
}

DensityMatrix project_physical(const CMatrix& rho_raw, const ChargeBasis& basis) {
  if (rho_raw.rows() != basis.dim() || rho_raw.cols() != basis.dim()) {
    throw std::invalid_argument("project_physical: shape does not match basis");
  }
  const double scale = std::max(1.0, rho_raw.cwiseAbs().maxCoeff());
  if ((rho_raw - rho_raw.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("project_physical: input is not Hermitian");
  }
  const CMatrix herm = 0.5 * (rho_raw + rho_raw.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  Eigen::VectorXd w = solver.eigenvalues().cwiseMax(0.0);
  const double total = w.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("project_physical: no positive eigenvalues");
  }
  w /= total;
  const CMatrix& v = solver.eigenvectors();
  CMatrix out = v * w.cast<complex>().asDiagonal() * v.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  // Remove the rounding left in the trace.
  out.diagonal().array() += (1.0 - out.trace().real()) / static_cast<double>(out.rows());
  return {basis, out};
}

double hilbert_schmidt_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hilbert_schmidt_distance: shape mismatch");
  }
  return (a - b).cwiseAbs2().sum();
}

double diagonal_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("diagonal_distance: shape mismatch");
  }
  return (a.diagonal() - b.diagonal()).real().sum() / static_cast<double>(a.rows());
}

std::vector<ValidationRow> validate_model(const ModelFamily& truth, const ReconstructionSettings& settings,
                                          const ValidationSettings& validation, unsigned threads) {
  if (truth.ec != settings.fit.ec) {
    throw std::invalid_argument("validate_model: models must share EC");
  }
  const ChargeBasis internal(settings.internal_cutoff);
  const ChargeBasis rep(settings.rep_cutoff);
  const DensityMatrix expected =
      DensityMatrix::pure(ground_state(settings.fit.at(settings.ej0), internal).in_basis(rep));
  std::vector<ValidationRow> rows(validation.counts.size());
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        const int count = validation.counts[i];
        const auto ejs = linspace(validation.ej_min, validation.ej_max, count);
        NoiseSpec noise = validation.noise;
        noise.stream += 1000 * i;
        const auto measured = simulate_measurements(truth, ejs, settings.effective_readout_cutoff(),
                                                    settings.internal_cutoff, noise);
        const auto maps = build_maps(settings, ejs, 1);
        const ReconstructionResult r = solve_reconstruction(measured, maps, settings);
        rows[i] = {count, hilbert_schmidt_distance(r.rho.rho, expected.rho),
                   diagonal_distance(r.rho.rho, expected.rho), r.equations, r.rank};
      },
      threads);
  return rows;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) {
    throw std::invalid_argument("linspace: count must be positive");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

}  // namespace cbtomo
