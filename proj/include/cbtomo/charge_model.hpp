#pragma once

// Single-degree-of-freedom junction Hamiltonians in the truncated charge basis.
//
// Energies are in an arbitrary consistent unit; the charging energy EC sets the
// scale. The Hamiltonian is
//
//   H = 4 EC (n - ng)^2 - EJ cos(phi) - EJ2 cos(2 phi)
//
// with cos(phi) = (n+ + n-)/2 shifting the charge by one Cooper pair.

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cbtomo {

using complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct TargetModel {
  double ec = 1.0;
  double ej = 0.0;
  double ej2 = 0.0;
  double ng = 0.0;

  void validate() const;
  TargetModel with_ej(double value) const;
};

// Relative-charge states n = -cutoff..cutoff.
class ChargeBasis {
 public:
  ChargeBasis() = default;
  explicit ChargeBasis(int cutoff);

  int cutoff() const { return cutoff_; }
  Eigen::Index dim() const { return 2 * cutoff_ + 1; }
  Eigen::Index index(int n) const;
  int charge(Eigen::Index index) const { return static_cast<int>(index) - cutoff_; }
  bool contains(int n) const { return n >= -cutoff_ && n <= cutoff_; }

  friend bool operator==(const ChargeBasis&, const ChargeBasis&) = default;

 private:
  int cutoff_ = 0;
};

// Representation cutoff for a ground state: ceil(3 beta) + 2, beta = (EJ/8EC)^(1/4).
int default_cutoff(const TargetModel& model);
// Cutoff used for eigensystems that feed transforms and maps.
int internal_cutoff(int representation_cutoff);

class ChargeWavefunction {
 public:
  // Throws if the coefficients are not normalized to 1e-12.
  ChargeWavefunction(ChargeBasis basis, CVector coefficients);
  static ChargeWavefunction normalized(ChargeBasis basis, CVector coefficients);
  static ChargeWavefunction charge_state(ChargeBasis basis, int n);

  const ChargeBasis& basis() const { return basis_; }
  const CVector& coefficients() const { return coefficients_; }
  complex at(int n) const;

  // Zero-pads (larger cutoff) or truncates and renormalizes (smaller cutoff).
  ChargeWavefunction in_basis(ChargeBasis target) const;

 private:
  ChargeBasis basis_;
  CVector coefficients_;
};

struct EigenSystem {
  ChargeBasis basis;
  Eigen::VectorXd eigenvalues;  // ascending
  CMatrix eigenvectors;         // column q is level q

  ChargeWavefunction state(Eigen::Index level) const;
};

CMatrix build_target_hamiltonian(const TargetModel& model, const ChargeBasis& basis);

struct EigenOptions {
  // Levels closer than cluster_tolerance * max|H| are treated as one degenerate
  // cluster. With a reflection center r set, each cluster is rotated onto
  // eigenstates of the charge reflection n -> r - n, which fixes otherwise
  // arbitrary mixing of parity partners.
  double cluster_tolerance = 1e-8;
  std::optional<int> reflection;
};

// Lowest `count` eigenpairs of a Hermitian matrix. Each eigenvector is rotated so
// that its largest-magnitude coefficient (first one on near-ties) is real positive.
// Exactly degenerate levels are ordered by the index of that coefficient.
EigenSystem eigensystem(const CMatrix& hamiltonian, const ChargeBasis& basis,
                        Eigen::Index count, const EigenOptions& options = {});
EigenSystem eigensystem(const CMatrix& hamiltonian, const ChargeBasis& basis);

// Reflection center round(2 ng) of the target Hamiltonian.
int reflection_center(const TargetModel& model);

// Eigensystem of the target Hamiltonian, clusters resolved by reflection_center.
EigenSystem solve_target(const TargetModel& model, const ChargeBasis& basis);
ChargeWavefunction ground_state(const TargetModel& model, const ChargeBasis& basis);

std::vector<double> charge_probabilities(const ChargeWavefunction& psi);

// Fixes the global phase of a vector in place (largest coefficient real positive).
void fix_phase(Eigen::Ref<CVector> v);

// Harmonic-oscillator width beta = (EJ / 8 EC)^(1/4).
double oscillator_width(const TargetModel& model);

// Physicists' Hermite polynomial H_k(x).
double hermite(int k, double x);

// Hermite-Gaussian approximation of level k, i^k exp(-x^2/2) H_k(x) with
// x = (n - ng)/beta, renormalized to unit norm over `basis`. The i^k factor is
// kept, so the phase differs from the eigensystem convention for k > 0.
ChargeWavefunction analytic_state(int level, const TargetModel& model, const ChargeBasis& basis);
complex analytic_coefficient(int level, const TargetModel& model, int n, const ChargeBasis& basis);

// sqrt(8 EC EJ) - EC/2.
double plasma_frequency(const TargetModel& model);

}  // namespace cbtomo
