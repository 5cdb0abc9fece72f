#include <cmath>

#include "cbtomo/errors.hpp"
#include "cbtomo/rng.hpp"
#include "cbtomo/tomography.hpp"
#include "doctest.h"

using namespace cbtomo;

namespace {

CMatrix random_state(CounterRng& rng, int dim, int rank) {
  CMatrix a(dim, rank);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) {
      a(i, j) = complex(rng.normal(), rng.normal());
    }
  }
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("pure states are physical") {
  const DensityMatrix rho = DensityMatrix::pure(ground_state({1.0, 30.0, 0.0, 0.2}, ChargeBasis(7)));
  CHECK(rho.is_physical());
  CHECK_NOTHROW(rho.check());
  CHECK(rho.rho.trace().real() == doctest::Approx(1.0));
}

TEST_CASE("physicality projection clips negative eigenvalues and is idempotent") {
  CounterRng rng(3, 0);
  const ChargeBasis b(3);
  CMatrix raw = random_state(rng, 7, 7);
  raw(0, 0) -= 0.4;
  CMatrix skew = raw;
  skew(1, 2) += complex(0.0, 0.05);
  CHECK_THROWS(project_physical(skew, b));
  CHECK_FALSE(DensityMatrix{b, raw}.is_physical());
  const DensityMatrix once = project_physical(raw, b);
  CHECK(once.is_physical());
  const DensityMatrix twice = project_physical(once.rho, b);
  CHECK((twice.rho - once.rho).cwiseAbs().maxCoeff() < 1e-14);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix rho = random_state(rng, 7, 1 + trial % 7);
    CHECK((project_physical(rho, b).rho - rho).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("hilbert-schmidt distance is the squared frobenius norm") {
  CMatrix a = CMatrix::Zero(2, 2);
  CMatrix b = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  b(0, 1) = complex(0.0, 0.5);
  CHECK(hilbert_schmidt_distance(a, b) == doctest::Approx(2.25));
  // Signed mean of the diagonal differences: zero between trace-1 matrices.
  CHECK(diagonal_distance(a, b) == 0.0);
  b(1, 1) = 0.5;
  CHECK(diagonal_distance(a, b) == doctest::Approx(0.25));
}

TEST_CASE("adiabatic transform is unitary and maps ground state to ground state") {
  const ChargeBasis b(19);
  const TargetModel start{1.0, 50.0, 0.0, 0.0};
  const TargetModel end{1.0, 20.0, 0.0, 0.0};
  const AdiabaticTransform t = adiabatic_transform(start, end, b);
  const auto dim = b.dim();
  CHECK((t.matrix.adjoint() * t.matrix - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);
  const CVector mapped = t.matrix * ground_state(start, b).coefficients();
  CHECK(std::abs(mapped.dot(ground_state(end, b).coefficients())) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("map slices sum to identity at full truncation") {
  const ChargeBasis b(19);
  const auto t = adiabatic_transform({1.0, 50.0, 0.0, 0.0}, {1.0, 12.0, 0.0, 0.0}, b);
  const MeasurementMap map = measurement_map_numeric(t, 19, 19);
  CMatrix sum = CMatrix::Zero(b.dim(), b.dim());
  for (int n = -19; n <= 19; ++n) {
    const CMatrix& s = map.slice(n);
    CHECK((s - s.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    sum += s;
  }
  CHECK((sum - CMatrix::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("visibility cutoff and configuration plan") {
  CHECK(visibility_cutoff(50.0, 1.0) == 3);
  CHECK(visibility_cutoff(10.0, 1.0) == 2);
  CHECK(visibility_cutoff(1.0, 1.0) == 1);
  const ConfigurationPlan plan = plan_configurations(50.0, 1.0, 10.0, 50.0, 7, 21);
  CHECK(plan.configs.size() == 21);
  CHECK(plan.configs.front().ej == doctest::Approx(10.0));
  CHECK(plan.configs.back().ej == doctest::Approx(50.0));
  CHECK(plan.required > 0);
  CHECK(plan.recommended >= plan.required);
}

TEST_CASE("harmonic level count") {
  CHECK(harmonic_level_count(1.0, 10.0) == 1);
  CHECK(harmonic_level_count(1.0, 50.0) >= harmonic_level_count(1.0, 10.0));
}

TEST_CASE("noiseless reconstruction, frozen values") {
  ReconstructionSettings s;
  const ModelFamily truth{1.0, 0.0, 0.0};
  const auto ejs = linspace(10.0, 50.0, 21);
  const auto measured = simulate_measurements(truth, ejs, s.rep_cutoff, s.internal_cutoff);
  const auto maps = build_maps(s, ejs);
  const auto r = solve_reconstruction(measured, maps, s);
  const CMatrix expected =
      DensityMatrix::pure(ground_state(truth.at(50.0), ChargeBasis(19)).in_basis(ChargeBasis(7))).rho;
  CHECK(r.equations == 169);
  CHECK(r.parameters == 119);
  CHECK(r.rank == 113);
  CHECK(r.truncated_directions == 6);
  CHECK((r.rho.rho - expected).cwiseAbs().maxCoeff() < 3e-6);
  CHECK(r.rho.is_physical());

  SUBCASE("the fitted-cholesky solver lands on the same state") {
    ReconstructionSettings c = s;
    c.mode = SolverMode::cholesky;
    const auto rc = solve_reconstruction(measured, maps, c);
    CHECK(hilbert_schmidt_distance(rc.rho.rho, r.rho.rho) < 1e-12);
    CHECK(rc.rho.is_physical());
  }
}

TEST_CASE("too few configurations is an error unless allowed") {
  ReconstructionSettings s;
  const ModelFamily truth{1.0, 0.0, 0.0};
  const auto ejs = linspace(10.0, 50.0, 5);
  const auto measured = simulate_measurements(truth, ejs, s.rep_cutoff, s.internal_cutoff);
  const auto maps = build_maps(s, ejs);
  CHECK_THROWS_AS(solve_reconstruction(measured, maps, s), UnderdeterminedError);
  s.allow_rank_deficient = true;
  const auto r = solve_reconstruction(measured, maps, s);
  CHECK(r.rho.is_physical());
  CHECK(r.rank < r.parameters);
}

TEST_CASE("simulated measurements are populations clipped to the unit interval") {
  const auto m = simulate_measurements({1.0, 0.0, 0.0}, {20.0}, 7, 19, NoiseSpec{0.05, 1, 0});
  REQUIRE(m.size() == 1);
  for (double v : m[0].diagonals) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(m[0].noise_std == 0.05);
}

TEST_CASE("linspace endpoints") {
  const auto v = linspace(10.0, 50.0, 5);
  CHECK(v == std::vector<double>{10.0, 20.0, 30.0, 40.0, 50.0});
}
