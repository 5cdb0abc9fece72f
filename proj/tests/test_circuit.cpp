#include <cmath>

#include "cbtomo/circuit.hpp"
#include "cbtomo/units.hpp"
#include "doctest.h"

using namespace cbtomo;

TEST_CASE("capacitance matrix is symmetric positive definite") {
  CircuitSpec spec;
  spec.alpha_r = 0.43;
  const Matrix5d c = capacitance_matrix(spec);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix5d>(c).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("closed-form inverse matches the numeric inverse") {
  const CircuitSpec spec;
  const Matrix5d numeric = capacitance_matrix(spec).inverse();
  const Matrix5d closed = closed_form_inverse(spec);
  CHECK((numeric - closed).cwiseAbs().maxCoeff() <= 1e-12 * numeric.cwiseAbs().maxCoeff());
}

TEST_CASE("resonator constants") {
  const CircuitSpec spec;
  const DerivedCapacitances d = derived_capacitances(spec);
  CHECK(resonator_impedance(spec) == doctest::Approx(d.impedance_ohm).epsilon(1e-12));
  const double omega = 1.0 / std::sqrt(spec.lr * units::nanohenry * resonator_capacitance(spec) * units::femtofarad);
  CHECK(resonator_frequency_ghz(spec) == doctest::Approx(omega / units::two_pi / units::gigahertz).epsilon(1e-12));
}

TEST_CASE("charging unit constant") {
  CHECK(units::charging_ghz_per_inverse_ff == doctest::Approx(38.740).epsilon(1e-4));
}

TEST_CASE("probe hamiltonian is hermitian") {
  CircuitSpec spec;
  spec.ng = 0.3;
  spec.alpha_r = 0.41;
  const SparseCMatrix h = build_probe_hamiltonian(spec, 3);
  const SparseCMatrix adj = h.adjoint();
  CHECK((h - adj).norm() < 1e-12);
  CHECK(probe_index(3, -3, -3, -3) == 0);
}

TEST_CASE("couplings at quarter offset, frozen diagonalization values") {
  CircuitSpec spec;
  spec.ng = 0.25;
  const CouplingSet c = coupling_strengths(spec);
  CHECK(c.delta_p == doctest::Approx(1.7321847076).epsilon(1e-9));
  CHECK(c.g_par_pc * 1e3 == doctest::Approx(-168.492107).epsilon(1e-8));
  CHECK(std::abs(c.g_perp_pc) < 1e-6 * std::abs(c.g_par_pc));
  const double ratio = std::sqrt(4.0 * units::electron_charge * units::electron_charge * c.impedance_ohm / units::hbar);
  CHECK(c.g_par_pt == doctest::Approx(ratio * c.g_par_pc).epsilon(1e-14));
  CHECK(c.g_tp == doctest::Approx(c.g_par_pt + 2.0 * c.g_perp_ct * c.g_par_pc / c.resonator_ghz).epsilon(1e-14));
}

TEST_CASE("gap is periodic and even in offset charge") {
  // Evenness is exact in a symmetric charge window; periodicity only up to truncation.
  ProbeSolverOptions o;
  o.cutoff = 7;
  CircuitSpec a;
  a.ng = 0.2;
  CircuitSpec b = a;
  b.ng = -0.8;
  CircuitSpec c = a;
  c.ng = -0.2;
  const double gap = coupling_strengths(a, o).delta_p;
  CHECK(coupling_strengths(b, o).delta_p == doctest::Approx(gap).epsilon(1e-5));
  CHECK(coupling_strengths(c, o).delta_p == doctest::Approx(gap).epsilon(1e-9));
}

TEST_CASE("sweep parameters") {
  CHECK(parse_sweep_parameter("delta_alpha") == SweepParameter::delta_alpha);
  CHECK(to_string(SweepParameter::ccp) == "ccp");
  CHECK_THROWS(parse_sweep_parameter("beta"));
  const CircuitSpec s = with_parameter(CircuitSpec{}, SweepParameter::delta_alpha, 0.01);
  CHECK(s.alpha_r == doctest::Approx(0.41));
  CHECK(s.alpha_l == 0.4);
}
