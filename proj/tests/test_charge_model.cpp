#include <cmath>

#include "cbtomo/charge_model.hpp"
#include "cbtomo/lanczos.hpp"
#include "cbtomo/rng.hpp"
#include "doctest.h"

using namespace cbtomo;

TEST_CASE("hamiltonian is hermitian and tridiagonal with charging diagonal") {
  const TargetModel m{1.3, 7.0, 0.8, 0.21};
  const ChargeBasis b(6);
  const CMatrix h = build_target_hamiltonian(m, b);
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  for (int n = -6; n <= 6; ++n) {
    const auto i = b.index(n);
    CHECK(h(i, i).real() == doctest::Approx(4.0 * 1.3 * (n - 0.21) * (n - 0.21)));
    if (n < 6) {
      CHECK(h(i, i + 1).real() == doctest::Approx(-3.5));
    }
    if (n < 5) {
      CHECK(h(i, i + 2).real() == doctest::Approx(-0.4));
    }
    for (int k = n + 3; k <= 6; ++k) {
      CHECK(std::abs(h(i, b.index(k))) == 0.0);
    }
  }
}

TEST_CASE("zero coupling gives charge eigenstates") {
  const TargetModel m{1.0, 0.0, 0.0, 0.3};
  const EigenSystem s = solve_target(m, ChargeBasis(5));
  const auto p = charge_probabilities(s.state(0));
  CHECK(p[5] == doctest::Approx(1.0));
  CHECK(s.eigenvalues[0] == doctest::Approx(4.0 * 0.09));
  CHECK(s.eigenvalues[1] == doctest::Approx(4.0 * 0.49));
}

TEST_CASE("spectrum is one-periodic in offset charge") {
  const ChargeBasis b(15);
  for (double ng : {0.0, 0.17, 0.5}) {
    const auto e0 = solve_target({1.0, 3.0, 0.2, ng}, b).eigenvalues.head(4);
    const auto e1 = solve_target({1.0, 3.0, 0.2, ng + 1.0}, b).eigenvalues.head(4);
    CHECK((e0 - e1).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("ground state at zero offset is charge-parity symmetric") {
  const ChargeBasis b(10);
  const ChargeWavefunction gs = ground_state({1.0, 20.0, 0.0, 0.0}, b);
  for (int n = 1; n <= 10; ++n) {
    CHECK(std::abs(gs.at(n) - gs.at(-n)) < 1e-12);
  }
  // Phase convention: largest coefficient real and positive.
  CHECK(gs.at(0).real() > 0.0);
  CHECK(std::abs(gs.at(0).imag()) < 1e-15);
}

TEST_CASE("charge populations ignore global phase") {
  const ChargeBasis b(7);
  const ChargeWavefunction gs = ground_state({1.0, 10.0, 0.0, 0.1}, b);
  const ChargeWavefunction turned(b, gs.coefficients() * std::polar(1.0, 1.234));
  const auto p = charge_probabilities(gs);
  const auto q = charge_probabilities(turned);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-14));
  }
}

TEST_CASE("wavefunctions must be normalized") {
  CVector v = CVector::Zero(3);
  v[0] = 2.0;
  CHECK_THROWS(ChargeWavefunction(ChargeBasis(1), v));
  CHECK(ChargeWavefunction::normalized(ChargeBasis(1), v).at(-1) == complex(1.0, 0.0));
  CHECK_THROWS(TargetModel{-1.0, 1.0, 0.0, 0.0}.validate());
}

TEST_CASE("truncation pads and renormalizes") {
  const ChargeWavefunction gs = ground_state({1.0, 50.0, 0.0, 0.0}, ChargeBasis(19));
  const ChargeWavefunction small = gs.in_basis(ChargeBasis(3));
  CHECK(small.coefficients().norm() == doctest::Approx(1.0));
  const ChargeWavefunction big = small.in_basis(ChargeBasis(8));
  CHECK(big.at(8) == complex(0.0, 0.0));
  CHECK((big.in_basis(ChargeBasis(3)).coefficients() - small.coefficients()).norm() < 1e-15);
}

TEST_CASE("hermite polynomials, physicists' convention") {
  for (double x : {-1.3, 0.0, 0.4, 2.5}) {
    CHECK(hermite(0, x) == 1.0);
    CHECK(hermite(1, x) == doctest::Approx(2.0 * x));
    CHECK(hermite(3, x) == doctest::Approx(8.0 * x * x * x - 12.0 * x));
    CHECK(hermite(4, x) == doctest::Approx(16.0 * std::pow(x, 4) - 48.0 * x * x + 12.0));
  }
}

TEST_CASE("gaussian ground state approximation, frozen overlaps") {
  const ChargeBasis internal(19);
  const ChargeBasis rep(7);
  auto overlap = [&](double ej) {
    const TargetModel m{1.0, ej, 0.0, 0.0};
    return std::abs(analytic_state(0, m, rep).coefficients().dot(ground_state(m, internal).in_basis(rep).coefficients()));
  };
  CHECK(overlap(50.0) == doctest::Approx(0.99980).epsilon(1e-5));
  CHECK(overlap(10.0) == doctest::Approx(0.99855).epsilon(1e-5));
  CHECK(plasma_frequency({1.0, 50.0, 0.0, 0.0}) == doctest::Approx(19.5));
  CHECK(oscillator_width({1.0, 50.0, 0.0, 0.0}) == doctest::Approx(std::pow(50.0 / 8.0, 0.25)));
}

TEST_CASE("lanczos agrees with dense diagonalization") {
  const int dim = 400;
  CounterRng rng(11, 0);
  SparseCMatrix h(dim, dim);
  std::vector<Eigen::Triplet<complex>> entries;
  for (int i = 0; i < dim; ++i) {
    entries.emplace_back(i, i, complex(0.05 * i + rng.uniform(), 0.0));
    if (i + 1 < dim) {
      const complex off(rng.normal(), rng.normal());
      entries.emplace_back(i, i + 1, off);
      entries.emplace_back(i + 1, i, std::conj(off));
    }
  }
  h.setFromTriplets(entries.begin(), entries.end());
  LanczosOptions options;
  options.dense_threshold = 10;
  const LanczosResult sparse = lowest_eigenpairs(h, 4, options);
  CHECK_FALSE(sparse.dense);
  const Eigen::SelfAdjointEigenSolver<CMatrix> dense{CMatrix(h)};
  for (int q = 0; q < 4; ++q) {
    CHECK(sparse.eigenvalues[q] == doctest::Approx(dense.eigenvalues()[q]).epsilon(1e-10));
    CHECK(sparse.residuals[q] <= 1e-10 * sparse.norm_estimate * 10);
  }
}
