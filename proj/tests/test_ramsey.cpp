#include <cmath>

#include "cbtomo/errors.hpp"
#include "cbtomo/ramsey.hpp"
#include "cbtomo/units.hpp"
#include "doctest.h"

using namespace cbtomo;

namespace {

ProbeSpec probe() { return {units::ghz_to_angular(3.0), units::ghz_to_angular(0.1)}; }

ChargeWavefunction prepared() {
  return ground_state({0.3, 15.0, 0.0, 0.0}, ChargeBasis(19)).in_basis(ChargeBasis(7));
}

}  // namespace

TEST_CASE("peak frequencies are gap plus twice the coupling per charge") {
  const ProbeSpec p{5.0, 0.25};
  CHECK(peak_frequency(p, 0) == 5.0);
  CHECK(peak_frequency(p, -3) == 3.5);
  CHECK(peak_frequency(p, 2) == 6.0);
}

TEST_CASE("default grid covers ten coupling periods with at least 2048 samples") {
  const TimeGrid g = TimeGrid::default_for(probe(), ChargeBasis(7));
  CHECK(g.samples >= 2048);
  CHECK(g.duration == doctest::Approx(20.0 * units::pi / probe().g));
  CHECK(g.times().size() == g.samples);
}

TEST_CASE("closed-form signal starts at the total population") {
  const auto p = charge_probabilities(prepared());
  CHECK(analytic_sigma_x(p, ChargeBasis(7), probe(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact propagation at zero residual EJ matches the closed form") {
  const ChargeWavefunction psi = prepared();
  const TimeGrid grid{50.0, 512};
  const RamseyRecord r = simulate_protocol(psi, {0.3, 0.0, 0.0, 0.0}, probe(), grid);
  const auto p = charge_probabilities(psi);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    CHECK(std::abs(r.sigma_x[i] - analytic_sigma_x(p, ChargeBasis(7), probe(), r.times[i])) < 1e-10);
  }
}

TEST_CASE("propagation conserves norm and energy") {
  const CoupledPropagator prop({0.3, 0.09, 0.0, 0.0}, probe(), ChargeBasis(12));
  const CVector start = prop.initial_state(prepared().in_basis(ChargeBasis(12)));
  const double e0 = prop.energy(start);
  for (double t : {0.5, 7.0, 300.0}) {
    const CVector later = prop.evolve(start, t);
    CHECK(later.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prop.energy(later) == doctest::Approx(e0).epsilon(1e-10));
  }
}

TEST_CASE("noise is reproducible from seed and stream") {
  const TimeGrid grid{50.0, 1024};
  SimulationOptions a;
  a.noise = {0.01, 7, 0};
  SimulationOptions b = a;
  b.noise.stream = 1;
  const auto r1 = simulate_protocol(prepared(), {0.3, 0.0, 0.0, 0.0}, probe(), grid, a);
  const auto r2 = simulate_protocol(prepared(), {0.3, 0.0, 0.0, 0.0}, probe(), grid, a);
  const auto r3 = simulate_protocol(prepared(), {0.3, 0.0, 0.0, 0.0}, probe(), grid, b);
  CHECK(r1.sigma_x == r2.sigma_x);
  CHECK(r1.sigma_x != r3.sigma_x);
}

TEST_CASE("too coarse a grid is rejected") {
  CHECK_THROWS_AS(simulate_protocol(prepared(), {0.3, 0.0, 0.0, 0.0}, probe(), TimeGrid{100.0, 64}),
                  NyquistError);
}

TEST_CASE("short or ill-conditioned records are rejected") {
  RamseyRecord r;
  r.probe = probe();
  const TimeGrid grid{0.2, 64};
  r.times = grid.times();
  r.sigma_x.assign(r.times.size(), 0.5);
  CHECK_THROWS(extract_probabilities(r, ChargeBasis(7)));
  const RamseyRecord full = simulate_protocol(prepared(), {0.3, 0.0, 0.0, 0.0}, probe(),
                                              TimeGrid::default_for(probe(), ChargeBasis(7)));
  ExtractionOptions strict;
  strict.max_condition = 1.0;
  CHECK_THROWS_AS(extract_probabilities(full, ChargeBasis(7), strict), ConditioningError);
}

TEST_CASE("harmonic regression recovers populations from the quenched state") {
  const ChargeWavefunction psi = prepared();
  const RamseyRecord r = simulate_protocol(psi, {0.3, 0.0, 0.0, 0.0}, probe(),
                                           TimeGrid::default_for(probe(), ChargeBasis(7)));
  const SpectralPeaks peaks = extract_probabilities(r, ChargeBasis(7));
  const auto p = charge_probabilities(psi);
  REQUIRE(peaks.peaks.size() == 15);
  for (const auto& peak : peaks.peaks) {
    CHECK(std::abs(peak.amplitude - p[static_cast<std::size_t>(peak.n + 7)]) < 1e-6);
    CHECK(peak.omega == peak_frequency(probe(), peak.n));
  }
}

TEST_CASE("periodogram of a unit cosine on a bin peaks at one") {
  const std::size_t n = 1024;
  const double step = 0.01;
  const double omega = 2.0 * units::pi * 40.0 / (n * step);
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = std::cos(omega * i * step);
  }
  const Periodogram pg = periodogram(samples, step);
  const auto top = std::max_element(pg.amplitude.begin(), pg.amplitude.end());
  CHECK(*top == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(pg.omega[static_cast<std::size_t>(top - pg.amplitude.begin())] == doctest::Approx(omega).epsilon(1e-9));
}
