#include "cbtomo/ramsey.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "cbtomo/errors.hpp"
#include "cbtomo/parallel.hpp"
#include "cbtomo/rng.hpp"

namespace cbtomo {

namespace {

std::mutex fftw_planner_mutex;

double max_peak_frequency(const ProbeSpec& probe, const ChargeBasis& basis) {
  double best = 0.0;
  for (int n = -basis.cutoff(); n <= basis.cutoff(); ++n) {
    best = std::max(best, std::abs(peak_frequency(probe, n)));
  }
  return best;
}

void check_nyquist(const ProbeSpec& probe, const ChargeBasis& basis, const TimeGrid& grid) {
  if (grid.samples < 2 || !(grid.duration > 0.0)) {
    throw std::invalid_argument("time grid needs a positive duration and at least 2 samples");
  }
  const double nyquist = std::numbers::pi / grid.step();
  for (int n = -basis.cutoff(); n <= basis.cutoff(); ++n) {
    const double omega = std::abs(peak_frequency(probe, n));
    if (omega >= nyquist) {
      throw NyquistError(omega, nyquist);
    }
  }
}

CMatrix block_hamiltonian(const TargetModel& model, const ProbeSpec& probe,
                          const ChargeBasis& basis, double sign) {
  CMatrix h = build_target_hamiltonian(model, basis);
  for (Eigen::Index i = 0; i < basis.dim(); ++i) {
    h(i, i) += sign * (probe.g * basis.charge(i) + 0.5 * probe.delta_p);
  }
  return h;
}

}  // namespace

void ProbeSpec::validate() const {
  if (!(delta_p > 0.0)) {
    throw std::invalid_argument("ProbeSpec: delta_p must be positive");
  }
  if (g == 0.0 || !std::isfinite(g)) {
    throw std::invalid_argument("ProbeSpec: g must be nonzero");
  }
}

double peak_frequency(const ProbeSpec& probe, int n) { return probe.delta_p + 2.0 * probe.g * n; }

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    t[i] = time(i);
  }
  return t;
}

TimeGrid TimeGrid::default_for(const ProbeSpec& probe, const ChargeBasis& basis) {
  probe.validate();
  TimeGrid grid;
  grid.duration = 20.0 * std::numbers::pi / std::abs(probe.g);
  const double f_max = max_peak_frequency(probe, basis) / (2.0 * std::numbers::pi);
  const auto needed = static_cast<std::size_t>(std::ceil(4.0 * f_max * grid.duration));
  grid.samples = std::max<std::size_t>(2048, needed);
  return grid;
}

CMatrix build_coupled_hamiltonian(const TargetModel& model, const ProbeSpec& probe,
                                  const ChargeBasis& basis) {
  const CMatrix ht = build_target_hamiltonian(model, basis);
  const Eigen::Index d = basis.dim();
  CMatrix h = CMatrix::Zero(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      h(2 * i, 2 * j) = ht(i, j);
      h(2 * i + 1, 2 * j + 1) = ht(i, j);
    }
    const double shift = probe.g * basis.charge(i) + 0.5 * probe.delta_p;
    h(2 * i, 2 * i) += shift;
    h(2 * i + 1, 2 * i + 1) -= shift;
  }
  return h;
}

double analytic_sigma_x(const std::vector<double>& probabilities, const ChargeBasis& basis,
                        const ProbeSpec& probe, double t) {
  if (static_cast<Eigen::Index>(probabilities.size()) != basis.dim()) {
    throw std::invalid_argument("analytic_sigma_x: probability count does not match basis");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < basis.dim(); ++i) {
    s += probabilities[static_cast<std::size_t>(i)] *
         std::cos(peak_frequency(probe, basis.charge(i)) * t);
  }
  return s;
}

CoupledPropagator::CoupledPropagator(const TargetModel& readout, const ProbeSpec& probe,
                                     const ChargeBasis& basis)
    : basis_(basis) {
  Eigen::SelfAdjointEigenSolver<CMatrix> up(block_hamiltonian(readout, probe, basis, +1.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> down(block_hamiltonian(readout, probe, basis, -1.0));
  up_values_ = up.eigenvalues();
  up_vectors_ = up.eigenvectors();
  down_values_ = down.eigenvalues();
  down_vectors_ = down.eigenvectors();
}

CVector CoupledPropagator::initial_state(const ChargeWavefunction& prepared) const {
  const CVector c = prepared.in_basis(basis_).coefficients();
  CVector psi(2 * basis_.dim());
  for (Eigen::Index i = 0; i < basis_.dim(); ++i) {
    psi[2 * i] = c[i] / std::numbers::sqrt2;
    psi[2 * i + 1] = c[i] / std::numbers::sqrt2;
  }
  return psi;
}

CVector CoupledPropagator::evolve(const CVector& state, double t) const {
  const Eigen::Index d = basis_.dim();
  CVector up(d);
  CVector down(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    up[i] = state[2 * i];
    down[i] = state[2 * i + 1];
  }
  CVector a = up_vectors_.adjoint() * up;
  CVector b = down_vectors_.adjoint() * down;
  for (Eigen::Index q = 0; q < d; ++q) {
    a[q] *= std::polar(1.0, -up_values_[q] * t);
    b[q] *= std::polar(1.0, -down_values_[q] * t);
  }
  up = up_vectors_ * a;
  down = down_vectors_ * b;
  CVector out(2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out[2 * i] = up[i];
    out[2 * i + 1] = down[i];
  }
  return out;
}

double CoupledPropagator::sigma_x(const CVector& state) const {
  complex overlap{};
  for (Eigen::Index i = 0; i < basis_.dim(); ++i) {
    overlap += std::conj(state[2 * i]) * state[2 * i + 1];
  }
  return 2.0 * overlap.real();
}

double CoupledPropagator::energy(const CVector& state) const {
  const Eigen::Index d = basis_.dim();
  CVector up(d);
  CVector down(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    up[i] = state[2 * i];
    down[i] = state[2 * i + 1];
  }
  const CVector a = up_vectors_.adjoint() * up;
  const CVector b = down_vectors_.adjoint() * down;
  return a.cwiseAbs2().dot(up_values_) + b.cwiseAbs2().dot(down_values_);
}

std::vector<double> CoupledPropagator::sigma_x_series(const ChargeWavefunction& prepared,
                                                      const TimeGrid& grid) const {
  const CVector c = prepared.in_basis(basis_).coefficients();
  const CVector a = up_vectors_.adjoint() * c;
  const CVector b = down_vectors_.adjoint() * c;
  const CMatrix overlap = up_vectors_.adjoint() * down_vectors_;
  const Eigen::Index d = basis_.dim();
  std::vector<double> out(grid.samples);
  CVector x(d);
  CVector y(d);
  for (std::size_t k = 0; k < grid.samples; ++k) {
    const double t = grid.time(k);
    for (Eigen::Index q = 0; q < d; ++q) {
      x[q] = a[q] * std::polar(1.0, -up_values_[q] * t);
      y[q] = b[q] * std::polar(1.0, -down_values_[q] * t);
    }
    out[k] = std::real(x.dot(overlap * y));
  }
  return out;
}

RamseyRecord simulate_protocol(const ChargeWavefunction& prepared, const TargetModel& readout,
                               const ProbeSpec& probe, const TimeGrid& grid,
                               const SimulationOptions& options) {
  probe.validate();
  readout.validate();
  check_nyquist(probe, prepared.basis(), grid);
  if (options.padding < 0) {
    throw std::invalid_argument("simulate_protocol: padding must be non-negative");
  }
  const ChargeBasis evolution(prepared.basis().cutoff() + options.padding);
  const CoupledPropagator propagator(readout, probe, evolution);

  RamseyRecord record;
  record.times = grid.times();
  record.sigma_x = propagator.sigma_x_series(prepared, grid);
  record.residual_ej = readout.ej;
  record.probe = probe;
  if (options.noise.std > 0.0) {
    CounterRng rng(options.noise.seed, options.noise.stream);
    for (double& s : record.sigma_x) {
      s = std::clamp(s + options.noise.std * rng.normal(), -1.0, 1.0);
    }
  }
  return record;
}

double SpectralPeaks::amplitude(int n) const {
  for (const auto& p : peaks) {
    if (p.n == n) {
      return p.amplitude;
    }
  }
  throw std::out_of_range("SpectralPeaks: no peak for charge " + std::to_string(n));
}

SpectralPeaks extract_probabilities(const RamseyRecord& record, const ChargeBasis& basis,
                                    const ExtractionOptions& options) {
  const std::size_t m = record.times.size();
  if (m != record.sigma_x.size() || m < 2) {
    throw std::invalid_argument("extract_probabilities: malformed record");
  }
  const double step = record.times[1] - record.times[0];
  const double duration = step * static_cast<double>(m);
  if (duration * std::abs(record.probe.g) < 10.0 * std::numbers::pi * (1.0 - 1e-12)) {
    throw std::invalid_argument(
        "extract_probabilities: record too short to resolve peaks spaced by 2g");
  }

  const Eigen::Index k = basis.dim();
  Eigen::MatrixXd design(static_cast<Eigen::Index>(m), k);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < m; ++r) {
    rhs[static_cast<Eigen::Index>(r)] = record.sigma_x[r];
    for (Eigen::Index c = 0; c < k; ++c) {
      design(static_cast<Eigen::Index>(r), c) =
          std::cos(peak_frequency(record.probe, basis.charge(c)) * record.times[r]);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  if (!(condition <= options.max_condition)) {
    throw ConditioningError(condition);
  }
  const Eigen::VectorXd coef = svd.solve(rhs);

  SpectralPeaks out;
  out.condition = condition;
  for (Eigen::Index c = 0; c < k; ++c) {
    SpectralPeak p;
    p.n = basis.charge(c);
    p.omega = peak_frequency(record.probe, p.n);
    p.raw_amplitude = coef[c];
    p.amplitude = std::clamp(coef[c], 0.0, 1.0);
    out.peaks.push_back(p);
  }
  if (options.with_periodogram) {
    out.periodogram = periodogram(record.sigma_x, step);
  }
  return out;
}

Periodogram periodogram(const std::vector<double>& samples, double step) {
  const std::size_t m = samples.size();
  if (m < 2 || !(step > 0.0)) {
    throw std::invalid_argument("periodogram: need at least 2 samples and a positive step");
  }
  const std::size_t nfft = 4 * m;
  double* in = fftw_alloc_real(nfft);
  fftw_complex* spec = fftw_alloc_complex(nfft / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, spec, FFTW_ESTIMATE);
  }
  double window_sum = 0.0;
  for (std::size_t i = 0; i < nfft; ++i) {
    if (i < m) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(m - 1));
      window_sum += w;
      in[i] = samples[i] * w;
    } else {
      in[i] = 0.0;
    }
  }
  fftw_execute(plan);

  Periodogram out;
  out.omega.resize(nfft / 2 + 1);
  out.amplitude.resize(nfft / 2 + 1);
  const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(nfft) * step);
  for (std::size_t i = 0; i <= nfft / 2; ++i) {
    out.omega[i] = d_omega * static_cast<double>(i);
    out.amplitude[i] = 2.0 * std::hypot(spec[i][0], spec[i][1]) / window_sum;
  }
  {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(spec);
  return out;
}

std::vector<ScanRow> residual_ej_scan(const ChargeWavefunction& prepared, const TargetModel& readout,
                                      const ProbeSpec& probe, const std::vector<double>& ej_values,
                                      const TimeGrid& grid, const SimulationOptions& options,
                                      const ExtractionOptions& extraction, unsigned threads) {
  std::vector<ScanRow> rows(ej_values.size());
  parallel_for(
      ej_values.size(),
      [&](std::size_t i) {
        SimulationOptions local = options;
        local.noise.stream = options.noise.stream + i;
        const RamseyRecord record =
            simulate_protocol(prepared, readout.with_ej(ej_values[i]), probe, grid, local);
        rows[i].residual_ej = ej_values[i];
        rows[i].peaks = extract_probabilities(record, prepared.basis(), extraction);
      },
      threads);
  return rows;
}

}  // namespace cbtomo
