#pragma once

// Four-junction flux-qubit probe coupled to a resonator and a transmon target.
// Energies are E/h in GHz, capacitances in fF, inductance in nH. Node order:
// 1, 2 probe outer islands, 3 probe central island, 4 resonator, 5 transmon.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbtomo/lanczos.hpp"

namespace cbtomo {

struct CircuitSpec {
  double ejp = 121.0;  // probe junction, GHz
  double ejt = 5.0;    // target junction, GHz
  double alpha_l = 0.4;
  double alpha_r = 0.4;
  double flux = 0.5;  // f_p, flux quanta
  double ng = 0.0;    // offset charge of node 3, Cooper pairs
  double cjp = 8.0;
  double cjt = 4.0;
  double ct = 40.0;
  double cg = 0.0;  // gate capacitance, enters only through ng
  double ccp = 5.0;
  double cct = 5.0;
  double cr = 100.0;
  double lr = 10.0;

  void validate() const;
  bool symmetric_alpha() const { return alpha_l == alpha_r; }
};

using Matrix5d = Eigen::Matrix<double, 5, 5>;

Matrix5d capacitance_matrix(const CircuitSpec& spec);

struct DerivedCapacitances {
  double c0_squared = 0.0;
  double cp0 = 0.0;
  double cp1 = 0.0;
  double ccp_t = 0.0;
  double cr_t = 0.0;  // renormalized resonator capacitance
  double ct_t = 0.0;  // renormalized transmon capacitance
  double ect_ghz = 0.0;
  double resonator_ghz = 0.0;  // omega_r / 2 pi
  double impedance_ohm = 0.0;
};

// Closed-form constants; requires alpha_l == alpha_r.
DerivedCapacitances derived_capacitances(const CircuitSpec& spec);
// Inverse capacitance matrix assembled from the closed forms (1/fF).
Matrix5d closed_form_inverse(const CircuitSpec& spec);

// Resonator impedance and frequency from the numeric inverse; valid for any alpha.
double resonator_capacitance(const CircuitSpec& spec);
double resonator_impedance(const CircuitSpec& spec);
double resonator_frequency_ghz(const CircuitSpec& spec);

struct ProbeSolverOptions {
  int cutoff = 7;  // per-node charge cutoff
  Eigen::Index levels = 4;
  Eigen::Index max_dimension = 200000;
  // Put the external flux on the left alpha junction instead of the right one.
  bool flux_on_left = false;
  // Also solve at cutoff + 2 and warn if the gap moves by more than 0.5%.
  bool convergence_check = false;
  LanczosOptions lanczos;
};

// Index of (n1, n2, n3) in the (2N+1)^3 product basis, n1 slowest.
Eigen::Index probe_index(int cutoff, int n1, int n2, int n3);

SparseCMatrix build_probe_hamiltonian(const CircuitSpec& spec, int cutoff, bool flux_on_left = false);

struct FluxQubitSubspace {
  int cutoff = 0;
  Eigen::VectorXd energies;  // GHz, ascending
  CMatrix states;            // columns over the product basis
  double delta_p = 0.0;
  std::vector<std::string> warnings;
};

FluxQubitSubspace flux_qubit_eigensystem(const CircuitSpec& spec, const ProbeSolverOptions& options = {});

struct CouplingSet {
  double delta_p = 0.0;    // GHz
  double g_par_pc = 0.0;   // GHz
  complex g_perp_pc;       // GHz
  double g_par_pt = 0.0;   // GHz
  complex g_perp_pt;       // GHz
  double g_perp_ct = 0.0;  // GHz
  double g_par_pt_direct = 0.0;  // 2e <-|H_pt|+>, diagnostic only
  double impedance_ohm = 0.0;
  double resonator_ghz = 0.0;
  double g_tp = 0.0;  // GHz
  std::vector<std::string> warnings;
};

// Throws DegenerateDoubletError when the gap is below degeneracy_ghz (negative
// selects 1e-6 * EJp).
CouplingSet coupling_strengths(const CircuitSpec& spec, const ProbeSolverOptions& options = {},
                               double degeneracy_ghz = -1.0);
CouplingSet couplings_from_subspace(const CircuitSpec& spec, const FluxQubitSubspace& subspace,
                                    double degeneracy_ghz = -1.0);

enum class SweepParameter { ng, ccp, alpha, delta_alpha };

SweepParameter parse_sweep_parameter(const std::string& name);
std::string to_string(SweepParameter p);
CircuitSpec with_parameter(CircuitSpec spec, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  CouplingSet couplings;
  bool degenerate = false;  // couplings undefined; gap still reported
};

std::vector<SweepRow> sweep(const CircuitSpec& base, SweepParameter parameter, const std::vector<double>& grid,
                            const ProbeSolverOptions& options = {}, double degeneracy_ghz = -1.0,
                            unsigned threads = 0);

}  // namespace cbtomo
