#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pdc/errors.hpp"
#include "pdc/spdc.hpp"

namespace pdc {
namespace {

constexpr double kPi = std::numbers::pi;
const Analyzers kDiagonal = Analyzers::both(PolarizationAngle{kPi / 4});

TwoPhotonState state_from(double eps2, double theta, const SourceConfig& source = SourceConfig::orthogonal_crystals()) {
  return build_two_photon_state(PumpState::elliptical(eps2, PolarizationAngle{theta}), source);
}

TEST(BuildTwoPhotonState, Examples) {
  const TwoPhotonState vertical = state_from(0.0, 0.0);
  EXPECT_NEAR(std::abs(vertical.a1 - Complex{1, 0}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(vertical.a2), 0.0, 1e-15);

  const TwoPhotonState bell = state_from(0.0, kPi / 4);
  EXPECT_NEAR(std::abs(bell.a1 - Complex{1 / std::sqrt(2.0), 0}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(bell.a2 - Complex{1 / std::sqrt(2.0), 0}), 0.0, 1e-15);

  const TwoPhotonState elliptical = state_from(0.08, 0.0);
  EXPECT_NEAR(elliptical.a1.real(), 0.99679, 5e-6);
  EXPECT_NEAR(elliptical.a1.imag(), 0.0, 1e-15);
  EXPECT_NEAR(elliptical.a2.real(), 0.0, 1e-15);
  EXPECT_NEAR(elliptical.a2.imag(), 0.08, 1e-15);
}

TEST(BuildTwoPhotonState, MatchesEllipticalPumpAmplitudes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double eps2 = unit(rng);
    const double eps1 = std::sqrt(1 - eps2 * eps2);
    const double theta = kPi * unit(rng);
    const TwoPhotonState s = state_from(eps2, theta);
    EXPECT_NEAR(std::abs(s.a1 - Complex{eps1 * std::cos(theta), -eps2 * std::sin(theta)}), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.a2 - Complex{eps1 * std::sin(theta), eps2 * std::cos(theta)}), 0.0, 1e-12);
  }
}

TEST(BuildTwoPhotonState, LinearPumpSweep) {
  for (int i = 0; i <= 200; ++i) {
    const double theta = 0.5 * kPi * i / 200.0;
    const TwoPhotonState s = state_from(0.0, theta);
    EXPECT_NEAR(std::norm(s.a1) + std::norm(s.a2), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(s.a1), std::cos(theta), 1e-12);
  }
}

TEST(BuildTwoPhotonState, RejectsNonOrthogonalPumpAxes) {
  SourceConfig source = SourceConfig::orthogonal_crystals();
  source.crystal2.pump_axis = PolarizationAngle{kPi / 3};
  EXPECT_THROW(build_two_photon_state(PumpState::linear(PolarizationAngle{}), source), ConfigurationError);
}

TEST(Geometry, DefaultsAndValidation) {
  const GeometryConfig g;
  EXPECT_NEAR(g.fringe_period(), 88.4e-6, 1e-12);
  EXPECT_FALSE(g.fringe_period_overridden());
  EXPECT_NEAR(g.wavenumber(), 2 * kPi / 884e-9, 1e-3);
  EXPECT_DOUBLE_EQ(GeometryConfig(884e-9, 0.01, 1.0, 2e-3).fringe_period(), 2e-3);
  EXPECT_THROW(GeometryConfig(0.0, 0.01, 1.0), ConfigurationError);
  EXPECT_THROW(GeometryConfig(884e-9, -0.01, 1.0), ConfigurationError);
  EXPECT_THROW(GeometryConfig(884e-9, 0.01, 1.0, 0.0), ConfigurationError);
}

TEST(PhaseFromPaths, Examples) {
  const GeometryConfig g;
  EXPECT_DOUBLE_EQ(phase_from_paths(3e-6, 3e-6, g, 0.25), 0.25);
  EXPECT_NEAR(phase_from_paths(442e-9, 0.0, g, 0.25), 0.25 + kPi, 1e-12);
  // Fringe peak sits at zero phase for the position Bell state.
  const TwoPhotonState s = state_from(0.0, kPi / 4, SourceConfig::parallel_crystals());
  const double peak = coincidence_probability(s, phase_from_paths(0.0, 0.0, g, 0.0), {});
  EXPECT_NEAR(peak, 1.0, 1e-12);
}

TEST(FringePhase, ExamplesAndDoubledFrequency) {
  const GeometryConfig g(884e-9, 0.01, 1.0, 3e-3);
  const double period = g.fringe_period();
  EXPECT_DOUBLE_EQ(fringe_phase(0, 0, g, 0.3), 0.3);
  EXPECT_NEAR(fringe_phase(period, 0, g, 0.3), 0.3 + 2 * kPi, 1e-12);
  EXPECT_NEAR(fringe_phase(period / 2, period / 2, g, 0.3), 0.3 + 2 * kPi, 1e-12);
  for (double x : {-2e-3, -1e-4, 7e-4, 5e-3}) {
    const double base = fringe_phase(0, 0, g, 0.3);
    EXPECT_NEAR(fringe_phase(x, x, g, 0.3) - base, 2 * (fringe_phase(x, 0, g, 0.3) - base), 1e-12);
  }
}

TEST(CoincidenceProbability, OrthogonalCrystalsBellState) {
  const TwoPhotonState s = state_from(0.0, kPi / 4);
  EXPECT_NEAR(coincidence_probability(s, kPi, kDiagonal), 0.0, 1e-15);
  const double scale = coincidence_probability(s, 0.0, kDiagonal) / 2.0;
  for (int i = 0; i < 64; ++i) {
    const double phi = 2 * kPi * i / 64.0;
    EXPECT_NEAR(coincidence_probability(s, phi, kDiagonal), scale * (1 + std::cos(phi)), 1e-15);
  }
}

TEST(CoincidenceProbability, ParallelCrystalsWithoutAnalyzers) {
  const TwoPhotonState s = state_from(0.0, kPi / 4, SourceConfig::parallel_crystals());
  for (int i = 0; i < 64; ++i) {
    const double phi = 2 * kPi * i / 64.0;
    EXPECT_NEAR(coincidence_probability(s, phi, {}), 0.5 * (1 + std::cos(phi)), 1e-15);
  }
}

// Coincidence pattern of the elliptically pumped source behind 45 degree
// analyzers, written out term by term as an independent reference.
double elliptical_pattern(double eps1, double eps2, double theta, double phi) {
  return eps1 * eps1 + eps2 * eps2 + (eps1 * eps1 - eps2 * eps2) * std::sin(2 * theta) * std::cos(phi) -
         2 * eps1 * eps2 * std::sin(phi);
}

TEST(CoincidenceProbability, EllipticalPumpMatchesTermwisePattern) {
  const double eps2 = 0.08;
  const double eps1 = std::sqrt(1 - eps2 * eps2);
  for (int t = 0; t < 37; ++t) {
    const double theta = kPi * t / 36.0;
    const TwoPhotonState s = state_from(eps2, theta);
    for (int i = 0; i < 73; ++i) {
      const double phi = 2 * kPi * i / 72.0;
      // Each analyzer passes half the pair amplitude per photon: 1/2 * (1/2)^2.
      EXPECT_NEAR(coincidence_probability(s, phi, kDiagonal), elliptical_pattern(eps1, eps2, theta, phi) / 8.0, 1e-12);
    }
  }
}

TEST(CoincidenceProbability, EllipticalPumpOscillationAmplitude) {
  // Fine phi grid over the termwise pattern: (max - min) / 2 relative to the mean.
  const double eps2 = 0.08;
  const double eps1 = std::sqrt(1 - eps2 * eps2);
  double hi = -1;
  double lo = 1e9;
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = elliptical_pattern(eps1, eps2, 0.0, 2 * kPi * i / n);
    hi = std::max(hi, v);
    lo = std::min(lo, v);
    sum += v;
  }
  const double relative = 0.5 * (hi - lo) / (sum / n);
  EXPECT_NEAR(relative, 0.15949, 5e-6);

  const TwoPhotonState s = state_from(eps2, 0.0);
  double c_hi = -1;
  double c_lo = 1e9;
  for (int i = 0; i < n; ++i) {
    const double v = coincidence_probability(s, 2 * kPi * i / n, kDiagonal);
    c_hi = std::max(c_hi, v);
    c_lo = std::min(c_lo, v);
  }
  EXPECT_NEAR(0.5 * (c_hi - c_lo) / coincidence_mean(s, kDiagonal), relative, 1e-9);
}

TEST(CoincidenceProbability, SingleAnalyzerIsRejected) {
  const TwoPhotonState s = state_from(0.0, kPi / 4);
  EXPECT_THROW(coincidence_probability(s, 0.0, Analyzers{PolarizationAngle{}, std::nullopt}), ConfigurationError);
  EXPECT_THROW(coincidence_probability(s, 0.0, Analyzers{std::nullopt, PolarizationAngle{}}), ConfigurationError);
}

TEST(CoincidenceProbability, BoundedAndPeriodic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    SourceConfig source = SourceConfig::orthogonal_crystals();
    source.crystal1.pair_polarization = PolarizationAngle{kPi * u(rng)};
    source.crystal2.pair_polarization = PolarizationAngle{kPi * u(rng)};
    const TwoPhotonState s = state_from(u(rng), kPi * u(rng), source);
    const Analyzers analyzers = u(rng) < 0.5 ? Analyzers{} : Analyzers{PolarizationAngle{kPi * u(rng)}, PolarizationAngle{kPi * u(rng)}};
    const double phi = 20 * (u(rng) - 0.5);
    const double c = coincidence_probability(s, phi, analyzers);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    EXPECT_NEAR(c, coincidence_probability(s, phi + 2 * kPi, analyzers), 1e-12);
  }
}

TEST(PredictedVisibility, Examples) {
  const Complex half{1 / std::sqrt(2.0), 0};
  EXPECT_NEAR(predicted_visibility({half, half, PolarizationAngle{0.3}, PolarizationAngle{0.3}}), 1.0, 1e-15);
  EXPECT_NEAR(predicted_visibility({half, half, PolarizationAngle{0.3}, PolarizationAngle{0.3 + kPi / 2}}), 0.0, 1e-15);
  EXPECT_NEAR(predicted_visibility({Complex{0.8, 0}, Complex{0, 0.6}, PolarizationAngle{}, PolarizationAngle{}}), 0.96, 1e-15);
  // Obtuse polarization difference is a pi fringe shift, not negative contrast.
  EXPECT_NEAR(predicted_visibility({half, half, PolarizationAngle{0.0}, PolarizationAngle{2.0}}), std::abs(std::cos(2.0)), 1e-15);
}

TEST(PredictedVisibilityWithAnalyzers, Examples) {
  const Complex half{1 / std::sqrt(2.0), 0};
  const TwoPhotonState bell{half, half, PolarizationAngle::horizontal(), PolarizationAngle::vertical()};
  EXPECT_NEAR(predicted_visibility_with_analyzers(bell, kDiagonal), 1.0, 1e-15);

  const TwoPhotonState one_crystal{Complex{1, 0}, Complex{0, 0}, PolarizationAngle::horizontal(), PolarizationAngle::vertical()};
  EXPECT_DOUBLE_EQ(predicted_visibility_with_analyzers(one_crystal, kDiagonal), 0.0);

  const Analyzers blocking{bell.chi1, PolarizationAngle{kPi / 4}};
  EXPECT_NEAR(predicted_visibility_with_analyzers(bell, blocking), 0.0, 1e-15);

  EXPECT_THROW(predicted_visibility_with_analyzers(bell, {}), ConfigurationError);
  // Both projections vanish: defined as zero.
  const TwoPhotonState parallel{half, half, PolarizationAngle::horizontal(), PolarizationAngle::horizontal()};
  EXPECT_DOUBLE_EQ(predicted_visibility_with_analyzers(parallel, Analyzers::both(PolarizationAngle::vertical())), 0.0);
}

}  // namespace
}  // namespace pdc
