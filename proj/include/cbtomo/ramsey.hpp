#pragma once

// Target-probe Ramsey readout. Energies and angular frequencies share one unit
// with hbar = 1, so times are in inverse energy units (ns when energies are in
// rad/ns).

#include <cstdint>
#include <vector>

#include "cbtomo/charge_model.hpp"

namespace cbtomo {

struct ProbeSpec {
  double delta_p = 0.0;  // probe gap
  double g = 0.0;        // longitudinal coupling

  void validate() const;
};

// Peak frequency of charge state n at zero residual EJ: delta_p + 2 g n.
double peak_frequency(const ProbeSpec& probe, int n);

struct TimeGrid {
  double duration = 0.0;
  std::size_t samples = 0;

  double step() const { return duration / static_cast<double>(samples); }
  double time(std::size_t i) const { return static_cast<double>(i) * step(); }
  std::vector<double> times() const;

  // duration 20 pi/|g|, at least 2048 samples and at least 4 samples per period
  // of the fastest peak in `basis`.
  static TimeGrid default_for(const ProbeSpec& probe, const ChargeBasis& basis);
};

// Product basis |n> (x) |s>, index 2*i + s with s = 0 for up and 1 for down.
CMatrix build_coupled_hamiltonian(const TargetModel& model, const ProbeSpec& probe,
                                  const ChargeBasis& basis);

double analytic_sigma_x(const std::vector<double>& probabilities, const ChargeBasis& basis,
                        const ProbeSpec& probe, double t);

// Exact propagation after the quench via eigendecompositions of the two probe
// sigma_z blocks.
class CoupledPropagator {
 public:
  CoupledPropagator(const TargetModel& readout, const ProbeSpec& probe, const ChargeBasis& basis);

  const ChargeBasis& basis() const { return basis_; }
  // prepared (x) (|down> + |up>)/sqrt(2) in the product basis.
  CVector initial_state(const ChargeWavefunction& prepared) const;
  CVector evolve(const CVector& state, double t) const;
  double sigma_x(const CVector& state) const;
  double energy(const CVector& state) const;

  // <sigma_x(t)> for the prepared state, without forming the product vector.
  std::vector<double> sigma_x_series(const ChargeWavefunction& prepared, const TimeGrid& grid) const;

 private:
  ChargeBasis basis_;
  Eigen::VectorXd up_values_;
  CMatrix up_vectors_;
  Eigen::VectorXd down_values_;
  CMatrix down_vectors_;
};

struct NoiseSpec {
  double std = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct RamseyRecord {
  std::vector<double> times;
  std::vector<double> sigma_x;
  double residual_ej = 0.0;
  ProbeSpec probe;
};

struct SimulationOptions {
  // Extra charge states added around the prepared basis during propagation.
  int padding = 5;
  NoiseSpec noise;
};

RamseyRecord simulate_protocol(const ChargeWavefunction& prepared, const TargetModel& readout,
                               const ProbeSpec& probe, const TimeGrid& grid,
                               const SimulationOptions& options = {});

struct SpectralPeak {
  int n = 0;
  double omega = 0.0;
  double amplitude = 0.0;      // clipped to [0, 1]
  double raw_amplitude = 0.0;  // regression coefficient
};

struct Periodogram {
  std::vector<double> omega;
  std::vector<double> amplitude;
};

struct SpectralPeaks {
  std::vector<SpectralPeak> peaks;  // n ascending
  double condition = 0.0;
  Periodogram periodogram;

  double amplitude(int n) const;
};

struct ExtractionOptions {
  double max_condition = 1e8;
  bool with_periodogram = true;
};

// Harmonic regression of sigma_x on cos(omega_n t) for every n in `basis`.
SpectralPeaks extract_probabilities(const RamseyRecord& record, const ChargeBasis& basis,
                                    const ExtractionOptions& options = {});

// Hann window, zero padded 4x, amplitude normalized so a unit cosine on a bin
// gives a peak of 1.
Periodogram periodogram(const std::vector<double>& samples, double step);

struct ScanRow {
  double residual_ej = 0.0;
  SpectralPeaks peaks;
};

// One extraction per residual EJ value; `readout` supplies EC, ng and EJ2.
std::vector<ScanRow> residual_ej_scan(const ChargeWavefunction& prepared, const TargetModel& readout,
                                      const ProbeSpec& probe, const std::vector<double>& ej_values,
                                      const TimeGrid& grid, const SimulationOptions& options = {},
                                      const ExtractionOptions& extraction = {}, unsigned threads = 0);

}  // namespace cbtomo
