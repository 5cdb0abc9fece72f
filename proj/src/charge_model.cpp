#include "cbtomo/charge_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cbtomo {

namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kHermitianTolerance = 1e-12;
// Coefficients within this relative distance of the largest are treated as ties
// for the phase convention; parity partners differ only by rounding.
constexpr double kPhaseTieTolerance = 1e-8;

Eigen::Index phase_anchor(const CVector& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= peak * (1.0 - kPhaseTieTolerance)) {
      return i;
    }
  }
  return 0;
}

}  // namespace

void TargetModel::validate() const {
  if (!(ec > 0.0)) {
    throw std::invalid_argument("TargetModel: EC must be positive");
  }
  if (ej < 0.0 || ej2 < 0.0) {
    throw std::invalid_argument("TargetModel: EJ and EJ2 must be non-negative");
  }
  if (!std::isfinite(ng)) {
    throw std::invalid_argument("TargetModel: ng must be finite");
  }
}

TargetModel TargetModel::with_ej(double value) const {
  TargetModel copy = *this;
  copy.ej = value;
  return copy;
}

ChargeBasis::ChargeBasis(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 0) {
    throw std::invalid_argument("ChargeBasis: cutoff must be non-negative");
  }
}

Eigen::Index ChargeBasis::index(int n) const {
  if (!contains(n)) {
    throw std::out_of_range("ChargeBasis: charge " + std::to_string(n) + " outside cutoff " +
                            std::to_string(cutoff_));
  }
  return n + cutoff_;
}

double oscillator_width(const TargetModel& model) {
  return std::pow(model.ej / (8.0 * model.ec), 0.25);
}

int default_cutoff(const TargetModel& model) {
  model.validate();
  return static_cast<int>(std::ceil(3.0 * oscillator_width(model))) + 2;
}

int internal_cutoff(int representation_cutoff) { return 2 * representation_cutoff + 5; }

ChargeWavefunction::ChargeWavefunction(ChargeBasis basis, CVector coefficients)
    : basis_(basis), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != basis_.dim()) {
    throw std::invalid_argument("ChargeWavefunction: coefficient count does not match basis");
  }
  if (std::abs(coefficients_.squaredNorm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("ChargeWavefunction: coefficients are not normalized");
  }
}

ChargeWavefunction ChargeWavefunction::normalized(ChargeBasis basis, CVector coefficients) {
  const double norm = coefficients.norm();
  if (!(norm > 0.0)) {
    throw std::invalid_argument("ChargeWavefunction: zero vector cannot be normalized");
  }
  coefficients /= norm;
  return ChargeWavefunction(basis, std::move(coefficients));
}

ChargeWavefunction ChargeWavefunction::charge_state(ChargeBasis basis, int n) {
  CVector c = CVector::Zero(basis.dim());
  c[basis.index(n)] = 1.0;
  return ChargeWavefunction(basis, std::move(c));
}

complex ChargeWavefunction::at(int n) const {
  return basis_.contains(n) ? coefficients_[basis_.index(n)] : complex{};
}

ChargeWavefunction ChargeWavefunction::in_basis(ChargeBasis target) const {
  CVector c = CVector::Zero(target.dim());
  const int shared = std::min(target.cutoff(), basis_.cutoff());
  for (int n = -shared; n <= shared; ++n) {
    c[target.index(n)] = coefficients_[basis_.index(n)];
  }
  return normalized(target, std::move(c));
}

ChargeWavefunction EigenSystem::state(Eigen::Index level) const {
  return ChargeWavefunction::normalized(basis, eigenvectors.col(level));
}

CMatrix build_target_hamiltonian(const TargetModel& model, const ChargeBasis& basis) {
  model.validate();
  if (basis.cutoff() < 1) {
    throw std::invalid_argument("build_target_hamiltonian: cutoff must be at least 1");
  }
  const Eigen::Index d = basis.dim();
  CMatrix h = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double q = basis.charge(i) - model.ng;
    h(i, i) = 4.0 * model.ec * q * q;
    if (i + 1 < d) {
      h(i, i + 1) = h(i + 1, i) = -0.5 * model.ej;
    }
    if (i + 2 < d) {
      h(i, i + 2) = h(i + 2, i) = -0.5 * model.ej2;
    }
  }
  return h;
}

void fix_phase(Eigen::Ref<CVector> v) {
  const complex anchor = v[phase_anchor(v)];
  if (std::abs(anchor) > 0.0) {
    v *= std::conj(anchor) / std::abs(anchor);
  }
}

int reflection_center(const TargetModel& model) {
  return static_cast<int>(std::lround(2.0 * model.ng));
}

EigenSystem eigensystem(const CMatrix& hamiltonian, const ChargeBasis& basis,
                        Eigen::Index count, const EigenOptions& options) {
  if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() != basis.dim()) {
    throw std::invalid_argument("eigensystem: matrix shape does not match basis");
  }
  if (count < 1 || count > hamiltonian.rows()) {
    throw std::invalid_argument("eigensystem: requested level count out of range");
  }
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  const double asymmetry = (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff();
  if (asymmetry > kHermitianTolerance * scale) {
    throw std::invalid_argument("eigensystem: matrix is not Hermitian (deviation " +
                                std::to_string(asymmetry) + ")");
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensystem: diagonalization failed");
  }
  CMatrix vectors = solver.eigenvectors();
  Eigen::VectorXd values = solver.eigenvalues();
  const Eigen::Index d = hamiltonian.rows();

  if (options.reflection) {
    const int r = *options.reflection;
    CMatrix reflect = CMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const int partner = r - basis.charge(i);
      if (basis.contains(partner)) {
        reflect(basis.index(partner), i) = 1.0;
      }
    }
    const double cluster = options.cluster_tolerance * scale;
    for (Eigen::Index first = 0; first < d;) {
      Eigen::Index last = first;
      while (last + 1 < d && values[last + 1] - values[last] <= cluster) {
        ++last;
      }
      const Eigen::Index size = last - first + 1;
      if (size > 1) {
        const CMatrix block = vectors.middleCols(first, size);
        const CMatrix restricted = block.adjoint() * reflect * block;
        Eigen::SelfAdjointEigenSolver<CMatrix> rotate(0.5 * (restricted + restricted.adjoint()));
        vectors.middleCols(first, size) = block * rotate.eigenvectors();
        for (Eigen::Index q = first; q <= last; ++q) {
          values[q] = std::real(vectors.col(q).dot(hamiltonian * vectors.col(q)));
        }
      }
      first = last + 1;
    }
  }

  std::vector<Eigen::Index> anchors(static_cast<std::size_t>(d));
  for (Eigen::Index q = 0; q < d; ++q) {
    fix_phase(vectors.col(q));
    anchors[static_cast<std::size_t>(q)] = phase_anchor(vectors.col(q));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const double degenerate = 1e-12 * scale;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(values[a] - values[b]) > degenerate) {
      return values[a] < values[b];
    }
    return anchors[static_cast<std::size_t>(a)] < anchors[static_cast<std::size_t>(b)];
  });

  EigenSystem result{basis, Eigen::VectorXd(count), CMatrix(d, count)};
  for (Eigen::Index q = 0; q < count; ++q) {
    const auto src = order[static_cast<std::size_t>(q)];
    result.eigenvalues[q] = values[src];
    result.eigenvectors.col(q) = vectors.col(src);
  }
  return result;
}

EigenSystem eigensystem(const CMatrix& hamiltonian, const ChargeBasis& basis) {
  return eigensystem(hamiltonian, basis, hamiltonian.rows());
}

EigenSystem solve_target(const TargetModel& model, const ChargeBasis& basis) {
  EigenOptions options;
  options.reflection = reflection_center(model);
  return eigensystem(build_target_hamiltonian(model, basis), basis, basis.dim(), options);
}

ChargeWavefunction ground_state(const TargetModel& model, const ChargeBasis& basis) {
  EigenOptions options;
  options.reflection = reflection_center(model);
  return eigensystem(build_target_hamiltonian(model, basis), basis, 1, options).state(0);
}

std::vector<double> charge_probabilities(const ChargeWavefunction& psi) {
  const CVector& c = psi.coefficients();
  std::vector<double> p(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    p[static_cast<std::size_t>(i)] = std::norm(c[i]);
  }
  return p;
}

double hermite(int k, double x) {
  if (k < 0) {
    throw std::invalid_argument("hermite: order must be non-negative");
  }
  double prev = 1.0;
  if (k == 0) {
    return prev;
  }
  double curr = 2.0 * x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * curr - 2.0 * j * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

ChargeWavefunction analytic_state(int level, const TargetModel& model, const ChargeBasis& basis) {
  if (level < 0) {
    throw std::invalid_argument("analytic_state: level must be non-negative");
  }
  model.validate();
  if (model.ej < model.ec) {
    throw std::invalid_argument("analytic_state: harmonic approximation needs EJ/EC >= 1");
  }
  const double beta = oscillator_width(model);
  // Normalized oscillator recurrence avoids the factorial growth of H_k.
  CVector c(basis.dim());
  for (Eigen::Index i = 0; i < basis.dim(); ++i) {
    const double x = (basis.charge(i) - model.ng) / beta;
    double prev = 0.0;
    double curr = std::exp(-0.5 * x * x);
    for (int j = 0; j < level; ++j) {
      const double next = std::sqrt(2.0 / (j + 1)) * x * curr - std::sqrt(double(j) / (j + 1)) * prev;
      prev = curr;
      curr = next;
    }
    c[i] = curr;
  }
  static constexpr complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  c *= kPhases[level % 4];
  return ChargeWavefunction::normalized(basis, std::move(c));
}

complex analytic_coefficient(int level, const TargetModel& model, int n, const ChargeBasis& basis) {
  return analytic_state(level, model, basis).at(n);
}

double plasma_frequency(const TargetModel& model) {
  if (!(model.ej > 0.0)) {
    throw std::invalid_argument("plasma_frequency: EJ must be positive");
  }
  return std::sqrt(8.0 * model.ec * model.ej) - 0.5 * model.ec;
}

}  // namespace cbtomo
