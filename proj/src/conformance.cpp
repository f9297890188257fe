#include "pdc/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdc/analysis.hpp"
#include "pdc/fitting.hpp"

namespace pdc {

namespace {

constexpr double kPi = std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  PolarizationAngle angle() { return PolarizationAngle{uniform(0.0, kPi)}; }

  TwoPhotonState state(bool orthogonal_pairs) {
    const double axis = uniform(0.0, kPi);
    SourceConfig source{{angle(), PolarizationAngle{axis}, CrystalLabel::kCrystal1},
                        {angle(), PolarizationAngle{axis + kPi / 2}, CrystalLabel::kCrystal2},
                        uniform(-kPi, kPi)};
    if (orthogonal_pairs) {
      source.crystal2.pair_polarization = PolarizationAngle{source.crystal1.pair_polarization.radians() + kPi / 2};
    }
    return build_two_photon_state(PumpState::elliptical(uniform(0.0, 1.0), angle()), source);
  }
};

}  // namespace

std::vector<ConformanceCheck> run_conformance(std::size_t draws, std::uint64_t seed, std::size_t n_grid) {
  Sampler s{std::mt19937_64(seed)};
  double free_space = 0.0;
  double analyzed = 0.0;
  double bridge = 0.0;
  double curve = 0.0;
  double extrema = 0.0;
  double invariance = 0.0;
  double bounds = 0.0;

  for (std::size_t i = 0; i < draws; ++i) {
    const TwoPhotonState st = s.state(false);
    free_space = std::max(free_space, std::abs(predicted_visibility(st) - phi_scan_oracle(st, {}, n_grid).mu));

    const Analyzers analyzers{s.angle(), s.angle()};
    analyzed = std::max(analyzed, std::abs(predicted_visibility_with_analyzers(st, analyzers) -
                                           phi_scan_oracle(st, analyzers, n_grid).mu));

    const TwoPhotonState ortho = s.state(true);
    const Analyzers diagonal = Analyzers::both(PolarizationAngle{ortho.chi1.radians() + kPi / 4});
    bridge = std::max(bridge, std::abs(concurrence(ortho) - phi_scan_oracle(ortho, diagonal, n_grid).mu));

    const double eps2 = s.uniform(0.0, 1.0);
    const double theta = s.uniform(0.0, kPi);
    const double mu_max = s.uniform(0.0, 1.0);
    const TwoPhotonState pumped =
        build_two_photon_state(PumpState::elliptical(eps2, PolarizationAngle{theta}), SourceConfig::orthogonal_crystals());
    const double oracle = mu_max * phi_scan_oracle(pumped, Analyzers::both(PolarizationAngle::diagonal()), n_grid).mu;
    const VisibilityCurveParams params{mu_max, 0.0, std::sqrt(1.0 - eps2 * eps2), CurveVariant::kDerived};
    curve = std::max(curve, std::abs(mu_eff_model(theta, params) - oracle));

    const FringeModelParams fringe{s.uniform(1.0, 1e4), s.uniform(0.0, 1.0), s.uniform(1e-4, 1e-2), s.uniform(-kPi, kPi)};
    const double x_max = -fringe.psi * fringe.period / (2.0 * kPi);
    const double x_min = (kPi - fringe.psi) * fringe.period / (2.0 * kPi);
    extrema = std::max(extrema, std::abs(visibility_from_extrema(fringe_model(x_max, fringe),
                                                                 fringe_model(x_min, fringe)) - fringe.mu));

    TwoPhotonState shifted = st;
    const Complex global = std::polar(1.0, s.uniform(-kPi, kPi));
    shifted.a1 *= global;
    shifted.a2 *= global * std::polar(1.0, s.uniform(-kPi, kPi));
    invariance = std::max(invariance, std::abs(phi_scan_oracle(shifted, analyzers, n_grid).mu -
                                               phi_scan_oracle(st, analyzers, n_grid).mu));

    const double phase = s.uniform(-10.0, 10.0);
    for (const Analyzers& a : {Analyzers{}, analyzers}) {
      const double c = coincidence_probability(st, phase, a);
      const double wrapped = coincidence_probability(st, phase + 2.0 * kPi, a);
      const double outside = std::max({0.0, -c, c - 1.0});
      bounds = std::max({bounds, outside, std::abs(c - wrapped)});
    }
  }

  return {
      {"predicted_visibility matches phase-scan oracle", free_space, 1e-6},
      {"predicted_visibility_with_analyzers matches phase-scan oracle", analyzed, 1e-6},
      {"concurrence matches 45-degree analyzer visibility", bridge, 1e-6},
      {"derived mu_eff matches mu_max * oracle visibility", curve, 1e-6},
      {"extrema of fringe_model reproduce its mu", extrema, 1e-12},
      {"oracle invariant under global phase and phi0", invariance, 1e-9},
      {"coincidence probability bounded and 2pi-periodic", bounds, 1e-12},
  };
}

}  // namespace pdc
