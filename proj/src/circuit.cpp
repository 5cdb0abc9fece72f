#include "cbtomo/circuit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cbtomo/errors.hpp"
#include "cbtomo/parallel.hpp"
#include "cbtomo/units.hpp"

namespace cbtomo {

namespace {

double degeneracy_threshold(const CircuitSpec& spec, double requested) {
  return requested >= 0.0 ? requested : 1e-6 * spec.ejp;
}

// Inverse capacitance matrix in 1/F.
Matrix5d inverse_si(const CircuitSpec& spec) {
  return capacitance_matrix(spec).inverse() / units::femtofarad;
}

}  // namespace

void CircuitSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw std::invalid_argument(std::string("CircuitSpec: ") + name + " must be positive");
    }
  };
  positive(ejp, "ejp");
  positive(cjp, "cjp");
  positive(cjt, "cjt");
  positive(ct, "ct");
  positive(cct, "cct");
  positive(cr, "cr");
  positive(lr, "lr");
  positive(alpha_l, "alpha_l");
  positive(alpha_r, "alpha_r");
  if (ejt < 0.0 || cg < 0.0 || ccp < 0.0) {
    throw std::invalid_argument("CircuitSpec: ejt, cg and ccp must be non-negative");
  }
  if (!(flux >= 0.0 && flux < 1.0)) {
    throw std::invalid_argument("CircuitSpec: flux must lie in [0, 1)");
  }
  if (!std::isfinite(ng)) {
    throw std::invalid_argument("CircuitSpec: ng must be finite");
  }
}

Matrix5d capacitance_matrix(const CircuitSpec& spec) {
  spec.validate();
  const double aL = spec.alpha_l;
  const double aR = spec.alpha_r;
  const double ct_sum = spec.cjt + spec.ct;
  Matrix5d c = Matrix5d::Zero();
  c(0, 0) = (1.0 + aL) * spec.cjp;
  c(1, 1) = (1.0 + aR) * spec.cjp;
  c(0, 2) = c(2, 0) = -aL * spec.cjp;
  c(1, 2) = c(2, 1) = -aR * spec.cjp;
  c(2, 2) = (aL + aR) * spec.cjp + spec.ccp;
  c(2, 3) = c(3, 2) = -spec.ccp;
  c(3, 3) = spec.cr + spec.ccp + spec.cct;
  c(3, 4) = c(4, 3) = -spec.cct;
  c(4, 4) = spec.cct + ct_sum;
  Eigen::LLT<Matrix5d> llt(c);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("capacitance matrix is not positive definite");
  }
  return c;
}

DerivedCapacitances derived_capacitances(const CircuitSpec& spec) {
  spec.validate();
  if (!spec.symmetric_alpha()) {
    throw std::invalid_argument("derived_capacitances: closed forms need alpha_l == alpha_r");
  }
  const double a = spec.alpha_l;
  const double cjp = spec.cjp, ccp = spec.ccp, cct = spec.cct, cr = spec.cr;
  const double cts = spec.cjt + spec.ct;
  DerivedCapacitances d;
  d.c0_squared = 2.0 * (cts * (cr + cct + ccp) + cct * (cr + ccp)) * a +
                 (ccp / cjp) * (cts * (cr + cct) + cr * cct) * (1.0 + a);
  if (d.c0_squared == 0.0) {
    throw std::invalid_argument("derived_capacitances: C0^2 vanishes");
  }
  d.cp0 = (cts * (cr + ccp + cct) + cct * (cr + ccp)) / cjp;
  d.cp1 = (ccp / (cjp * cjp)) * ((cct + cr) * cts + cct * cr);
  d.ccp_t = ccp * (cct + cts) / cjp;
  d.cr_t = cjp * d.c0_squared / ((cts + cct) * (2.0 * cjp * a + ccp * (1.0 + a)));
  d.ct_t = cjp * d.c0_squared / (2.0 * cjp * (cr + ccp + cct) * a + ccp * (cct + cr) * (1.0 + a));
  d.ect_ghz = 0.5 * units::charging_ghz_per_inverse_ff / d.ct_t;
  const double cr_si = d.cr_t * units::femtofarad;
  const double lr_si = spec.lr * units::nanohenry;
  d.impedance_ohm = std::sqrt(lr_si / cr_si);
  d.resonator_ghz = 1.0 / std::sqrt(lr_si * cr_si) / units::two_pi / units::gigahertz;
  return d;
}

Matrix5d closed_form_inverse(const CircuitSpec& spec) {
  const DerivedCapacitances d = derived_capacitances(spec);
  const double a = spec.alpha_l;
  const double c02 = d.c0_squared;
  Matrix5d k = Matrix5d::Zero();
  k(0, 0) = k(1, 1) = (d.cp0 * (2.0 + a) * a + d.cp1 * (1.0 + a)) / ((1.0 + a) * c02);
  k(0, 1) = k(1, 0) = d.cp0 * a * a / ((1.0 + a) * c02);
  k(0, 2) = k(2, 0) = k(1, 2) = k(2, 1) = d.cp0 * a / c02;
  k(2, 2) = d.cp0 * (1.0 + a) / c02;
  k(3, 3) = 1.0 / d.cr_t;
  k(4, 4) = 1.0 / d.ct_t;
  k(0, 3) = k(3, 0) = k(1, 3) = k(3, 1) = d.ccp_t * a / c02;
  k(2, 3) = k(3, 2) = d.ccp_t * (1.0 + a) / c02;
  const double pt = spec.ccp * spec.cct / (spec.cjp * c02);
  k(0, 4) = k(4, 0) = k(1, 4) = k(4, 1) = pt * a;
  k(2, 4) = k(4, 2) = pt * (1.0 + a);
  k(3, 4) = k(4, 3) = spec.cct * (2.0 * a + spec.ccp * (1.0 + a) / spec.cjp) / c02;
  return k;
}

double resonator_capacitance(const CircuitSpec& spec) {
  return 1.0 / capacitance_matrix(spec).inverse()(3, 3);
}

double resonator_impedance(const CircuitSpec& spec) {
  return std::sqrt(spec.lr * units::nanohenry / (resonator_capacitance(spec) * units::femtofarad));
}

double resonator_frequency_ghz(const CircuitSpec& spec) {
  const double lc = spec.lr * units::nanohenry * resonator_capacitance(spec) * units::femtofarad;
  return 1.0 / std::sqrt(lc) / units::two_pi / units::gigahertz;
}

Eigen::Index probe_index(int cutoff, int n1, int n2, int n3) {
  const Eigen::Index d = 2 * cutoff + 1;
  return (static_cast<Eigen::Index>(n1 + cutoff) * d + (n2 + cutoff)) * d + (n3 + cutoff);
}

SparseCMatrix build_probe_hamiltonian(const CircuitSpec& spec, int cutoff, bool flux_on_left) {
  if (cutoff < 1) {
    throw std::invalid_argument("build_probe_hamiltonian: cutoff must be at least 1");
  }
  const Matrix5d k = capacitance_matrix(spec).inverse();
  const double charging = 2.0 * units::charging_ghz_per_inverse_ff;
  const double ej = spec.ejp;
  const complex flux_phase = std::polar(1.0, units::two_pi * spec.flux);
  const complex left_phase = flux_on_left ? flux_phase : complex(1.0, 0.0);
  const complex right_phase = flux_on_left ? complex(1.0, 0.0) : flux_phase;
  const double constant = ej * (2.0 + spec.alpha_l + spec.alpha_r);

  const Eigen::Index d = 2 * cutoff + 1;
  const Eigen::Index dim = d * d * d;
  std::vector<Eigen::Triplet<complex>> entries;
  entries.reserve(static_cast<std::size_t>(dim) * 9);
  auto hop = [&](Eigen::Index from, Eigen::Index to, complex amp) {
    entries.emplace_back(to, from, amp);
    entries.emplace_back(from, to, std::conj(amp));
  };
  for (int n1 = -cutoff; n1 <= cutoff; ++n1) {
    for (int n2 = -cutoff; n2 <= cutoff; ++n2) {
      for (int n3 = -cutoff; n3 <= cutoff; ++n3) {
        const Eigen::Index i = probe_index(cutoff, n1, n2, n3);
        const Eigen::Vector3d n(n1, n2, n3 - spec.ng);
        const double diag = charging * n.dot(k.topLeftCorner<3, 3>() * n) + constant;
        entries.emplace_back(i, i, diag);
        // exp(i phi_a) raises n_a by one.
        if (n1 < cutoff) {
          hop(i, probe_index(cutoff, n1 + 1, n2, n3), -0.5 * ej);
        }
        if (n2 < cutoff) {
          hop(i, probe_index(cutoff, n1, n2 + 1, n3), -0.5 * ej);
        }
        if (n3 < cutoff && n1 > -cutoff) {
          hop(i, probe_index(cutoff, n1 - 1, n2, n3 + 1), -0.5 * ej * spec.alpha_l * left_phase);
        }
        if (n2 < cutoff && n3 > -cutoff) {
          hop(i, probe_index(cutoff, n1, n2 + 1, n3 - 1), -0.5 * ej * spec.alpha_r * right_phase);
        }
      }
    }
  }
  SparseCMatrix h(dim, dim);
  h.setFromTriplets(entries.begin(), entries.end());
  h.makeCompressed();
  return h;
}

FluxQubitSubspace flux_qubit_eigensystem(const CircuitSpec& spec, const ProbeSolverOptions& options) {
  spec.validate();
  const Eigen::Index d = 2 * options.cutoff + 1;
  if (d * d * d > options.max_dimension) {
    throw std::invalid_argument("flux_qubit_eigensystem: dimension " + std::to_string(d * d * d) +
                                " exceeds cap " + std::to_string(options.max_dimension));
  }
  if (options.levels < 2) {
    throw std::invalid_argument("flux_qubit_eigensystem: need at least 2 levels");
  }
  const SparseCMatrix h = build_probe_hamiltonian(spec, options.cutoff, options.flux_on_left);
  const LanczosResult solved = lowest_eigenpairs(h, options.levels, options.lanczos);
  FluxQubitSubspace out;
  out.cutoff = options.cutoff;
  out.energies = solved.eigenvalues;
  out.states = solved.eigenvectors;
  out.delta_p = out.energies[1] - out.energies[0];
  if (options.convergence_check) {
    ProbeSolverOptions finer = options;
    finer.cutoff += 2;
    finer.convergence_check = false;
    const FluxQubitSubspace check = flux_qubit_eigensystem(spec, finer);
    const double shift = std::abs(check.delta_p - out.delta_p);
    if (shift > 5e-3 * std::abs(check.delta_p)) {
      std::ostringstream msg;
      msg << "gap changes by " << shift << " GHz between cutoffs " << options.cutoff << " and "
          << finer.cutoff;
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

CouplingSet couplings_from_subspace(const CircuitSpec& spec, const FluxQubitSubspace& subspace,
                                    double degeneracy_ghz) {
  const double threshold = degeneracy_threshold(spec, degeneracy_ghz);
  if (subspace.delta_p < threshold) {
    throw DegenerateDoubletError(subspace.delta_p);
  }
  const Matrix5d kinv = inverse_si(spec);
  const int cutoff = subspace.cutoff;
  const Eigen::Index dim = subspace.states.rows();
  const double two_e = 2.0 * units::electron_charge;
  // Diagonal coupling operators sum_i K_i4 q_i and sum_i K_i5 q_i (volts).
  Eigen::VectorXd to_resonator(dim);
  Eigen::VectorXd to_target(dim);
  for (int n1 = -cutoff; n1 <= cutoff; ++n1) {
    for (int n2 = -cutoff; n2 <= cutoff; ++n2) {
      for (int n3 = -cutoff; n3 <= cutoff; ++n3) {
        const Eigen::Vector3d q = two_e * Eigen::Vector3d(n1, n2, n3 - spec.ng);
        const Eigen::Index i = probe_index(cutoff, n1, n2, n3);
        to_resonator[i] = kinv.block<3, 1>(0, 3).dot(q);
        to_target[i] = kinv.block<3, 1>(0, 4).dot(q);
      }
    }
  }
  const auto s0 = subspace.states.col(0);
  const auto s1 = subspace.states.col(1);
  auto element = [&](const Eigen::VectorXd& op, const auto& a, const auto& b) {
    return a.dot(op.cast<complex>().cwiseProduct(b));
  };
  const double a00 = element(to_resonator, s0, s0).real();
  const double a11 = element(to_resonator, s1, s1).real();
  const complex a01 = element(to_resonator, s0, s1);
  const double b00 = element(to_target, s0, s0).real();
  const double b11 = element(to_target, s1, s1).real();

  CouplingSet out;
  out.delta_p = subspace.delta_p;
  out.impedance_ohm = resonator_impedance(spec);
  out.resonator_ghz = resonator_frequency_ghz(spec);
  const double z = out.impedance_ohm;
  const double q_zpf = std::sqrt(units::hbar / (2.0 * z));
  const double ratio = std::sqrt(4.0 * units::electron_charge * units::electron_charge * z / units::hbar);
  out.g_par_pc = units::joule_to_ghz(q_zpf * 0.5 * (a00 - a11));
  out.g_perp_pc = units::joule_to_ghz(q_zpf) * a01;
  out.g_par_pt = ratio * out.g_par_pc;
  out.g_perp_pt = ratio * out.g_perp_pc;
  out.g_par_pt_direct = units::joule_to_ghz(two_e * 0.5 * (b00 - b11));
  out.g_perp_ct = units::joule_to_ghz(
      std::sqrt(2.0 * units::hbar * units::electron_charge * units::electron_charge / z) * 2.0 *
      kinv(3, 4));
  out.g_tp = out.g_par_pt + 2.0 * out.g_perp_ct * out.g_par_pc / out.resonator_ghz;
  out.warnings = subspace.warnings;
  return out;
}

CouplingSet coupling_strengths(const CircuitSpec& spec, const ProbeSolverOptions& options,
                               double degeneracy_ghz) {
  return couplings_from_subspace(spec, flux_qubit_eigensystem(spec, options), degeneracy_ghz);
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "ng") return SweepParameter::ng;
  if (name == "ccp") return SweepParameter::ccp;
  if (name == "alpha") return SweepParameter::alpha;
  if (name == "delta_alpha") return SweepParameter::delta_alpha;
  throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::ng: return "ng";
    case SweepParameter::ccp: return "ccp";
    case SweepParameter::alpha: return "alpha";
    case SweepParameter::delta_alpha: return "delta_alpha";
  }
  return "?";
}

CircuitSpec with_parameter(CircuitSpec spec, SweepParameter p, double value) {
  switch (p) {
    case SweepParameter::ng: spec.ng = value; break;
    case SweepParameter::ccp: spec.ccp = value; break;
    case SweepParameter::alpha: spec.alpha_l = spec.alpha_r = value; break;
    case SweepParameter::delta_alpha: spec.alpha_r = spec.alpha_l + value; break;
  }
  return spec;
}

std::vector<SweepRow> sweep(const CircuitSpec& base, SweepParameter parameter, const std::vector<double>& grid,
                            const ProbeSolverOptions& options, double degeneracy_ghz, unsigned threads) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const CircuitSpec spec = with_parameter(base, parameter, grid[i]);
        const FluxQubitSubspace sub = flux_qubit_eigensystem(spec, options);
        rows[i].value = grid[i];
        try {
          rows[i].couplings = couplings_from_subspace(spec, sub, degeneracy_ghz);
        } catch (const DegenerateDoubletError&) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          CouplingSet& c = rows[i].couplings;
          c.delta_p = sub.delta_p;
          c.g_par_pc = c.g_par_pt = c.g_perp_ct = c.g_tp = c.g_par_pt_direct = nan;
          c.g_perp_pc = c.g_perp_pt = complex(nan, nan);
          c.impedance_ohm = resonator_impedance(spec);
          c.resonator_ghz = resonator_frequency_ghz(spec);
          c.warnings = sub.warnings;
          rows[i].degenerate = true;
        }
      },
      threads);
  return rows;
}

}  // namespace cbtomo
