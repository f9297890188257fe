#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pdc/analysis.hpp"
#include "pdc/errors.hpp"
#include "pdc/fitting.hpp"

namespace pdc {
namespace {

constexpr double kPi = std::numbers::pi;
const Analyzers kDiagonal = Analyzers::both(PolarizationAngle::diagonal());

TEST(VisibilityFromExtrema, Examples) {
  EXPECT_DOUBLE_EQ(visibility_from_extrema(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(visibility_from_extrema(1, 1), 0.0);
  EXPECT_NEAR(visibility_from_extrema(1.82, 0.18), 0.82, 1e-15);
  EXPECT_THROW(visibility_from_extrema(0, 0), DegenerateInputError);
  EXPECT_THROW(visibility_from_extrema(1, 2), InputError);
}

TEST(PhiScanOracle, Examples) {
  const TwoPhotonState bell = build_two_photon_state(PumpState::linear(PolarizationAngle::diagonal()),
                                                     SourceConfig::orthogonal_crystals());
  const VisibilityReport r = phi_scan_oracle(bell, kDiagonal);
  EXPECT_NEAR(r.mu, 1.0, 1e-12);
  EXPECT_EQ(r.method, VisibilityMethod::kOracle);

  const TwoPhotonState one = build_two_photon_state(PumpState::linear(PolarizationAngle::vertical()),
                                                    SourceConfig::orthogonal_crystals());
  EXPECT_NEAR(phi_scan_oracle(one, kDiagonal).mu, 0.0, 1e-12);

  const TwoPhotonState elliptical = build_two_photon_state(PumpState::elliptical(0.08, PolarizationAngle{0.0}),
                                                           SourceConfig::orthogonal_crystals());
  const double closed_form = 2 * std::sqrt(1 - 0.08 * 0.08) * 0.08;
  EXPECT_NEAR(phi_scan_oracle(elliptical, kDiagonal).mu, 0.15949, 5e-6);
  EXPECT_NEAR(phi_scan_oracle(elliptical, kDiagonal).mu, closed_form, 1e-8);

  EXPECT_THROW(phi_scan_oracle(bell, kDiagonal, 999), InputError);
}

TEST(Concurrence, Examples) {
  const Complex half{1 / std::sqrt(2.0), 0};
  const auto h = PolarizationAngle::horizontal();
  const auto v = PolarizationAngle::vertical();
  EXPECT_NEAR(concurrence({half, half, h, v}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(concurrence({Complex{1, 0}, Complex{0, 0}, h, v}), 0.0);
  EXPECT_NEAR(concurrence({Complex{0.99679, 0}, Complex{0, 0.08}, h, v}), 0.15949, 5e-6);
  EXPECT_THROW(concurrence({half, half, h, PolarizationAngle{1.0}}), ConfigurationError);
}

TEST(Concurrence, EqualsDiagonalAnalyzerVisibility) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double axis = kPi * u(rng);
    const double chi = kPi * u(rng);
    const SourceConfig source{{PolarizationAngle{chi}, PolarizationAngle{axis}, CrystalLabel::kCrystal1},
                              {PolarizationAngle{chi + kPi / 2}, PolarizationAngle{axis + kPi / 2}, CrystalLabel::kCrystal2},
                              0.0};
    const TwoPhotonState s = build_two_photon_state(PumpState::elliptical(u(rng), PolarizationAngle{kPi * u(rng)}), source);
    const Analyzers analyzers = Analyzers::both(PolarizationAngle{chi + kPi / 4});
    EXPECT_NEAR(concurrence(s), phi_scan_oracle(s, analyzers, 20000).mu, 1e-6);
  }
}

TEST(PhiScanOracle, InvariantUnderGlobalPhaseAndPhaseOffset) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const TwoPhotonState s{std::polar(u(rng), 2 * kPi * u(rng)), std::polar(u(rng), 2 * kPi * u(rng)),
                           PolarizationAngle{kPi * u(rng)}, PolarizationAngle{kPi * u(rng)}};
    TwoPhotonState shifted = s;
    const Complex global = std::polar(1.0, 2 * kPi * u(rng));
    shifted.a1 *= global;
    shifted.a2 *= global * std::polar(1.0, 2 * kPi * u(rng));
    for (const Analyzers& a : {Analyzers{}, kDiagonal}) {
      EXPECT_NEAR(phi_scan_oracle(s, a, 20000).mu, phi_scan_oracle(shifted, a, 20000).mu, 1e-9);
    }
  }
}

TEST(VisibilityFromExtrema, RecoversFringeModelContrast) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const FringeModelParams p{1 + 1000 * u(rng), u(rng), 1e-3 + 1e-2 * u(rng), 2 * kPi * (u(rng) - 0.5)};
    const double x_max = -p.psi * p.period / (2 * kPi);
    const double x_min = x_max + p.period / 2;
    EXPECT_NEAR(visibility_from_extrema(fringe_model(x_max, p), fringe_model(x_min, p)), p.mu, 1e-12);
  }
}

}  // namespace
}  // namespace pdc
