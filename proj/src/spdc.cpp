#include "pdc/spdc.hpp"

#include <cmath>
#include <tuple>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

constexpr double kOrthogonalityTolerance = 1e-9;

}  // namespace

SourceConfig SourceConfig::orthogonal_crystals(double phi0) {
  return {{PolarizationAngle::horizontal(), PolarizationAngle::vertical(), CrystalLabel::kCrystal1},
          {PolarizationAngle::vertical(), PolarizationAngle::horizontal(), CrystalLabel::kCrystal2},
          phi0};
}

SourceConfig SourceConfig::parallel_crystals(double phi0) {
  return {{PolarizationAngle::horizontal(), PolarizationAngle::vertical(), CrystalLabel::kCrystal1},
          {PolarizationAngle::horizontal(), PolarizationAngle::horizontal(), CrystalLabel::kCrystal2},
          phi0};
}

void SourceConfig::validate() const {
  const double overlap = std::cos(crystal1.pump_axis.radians() - crystal2.pump_axis.radians());
  if (std::abs(overlap) > kOrthogonalityTolerance) {
    throw ConfigurationError("crystal pump axes must be orthogonal");
  }
  if (!std::isfinite(phi0)) {
    throw ConfigurationError("phi0 must be finite");
  }
}

GeometryConfig::GeometryConfig(double wavelength, double crystal_separation, double detector_distance,
                               std::optional<double> fringe_period)
    : wavelength_(wavelength),
      crystal_separation_(crystal_separation),
      detector_distance_(detector_distance),
      fringe_period_(0.0),
      period_overridden_(fringe_period.has_value()) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(wavelength) || !positive(crystal_separation) || !positive(detector_distance)) {
    throw ConfigurationError("geometry lengths must be finite and strictly positive");
  }
  fringe_period_ = fringe_period.value_or(wavelength * detector_distance / crystal_separation);
  if (!positive(fringe_period_)) {
    throw ConfigurationError("fringe period must be finite and strictly positive");
  }
}

double GeometryConfig::wavenumber() const { return 2.0 * std::numbers::pi / wavelength_; }

void Analyzers::validate() const {
  if (signal.has_value() != idler.has_value()) {
    throw ConfigurationError("analyzers must be set on both detectors or on neither");
  }
}

TwoPhotonState build_two_photon_state(const PumpState& pump, const SourceConfig& source) {
  source.validate();
  const JonesVector field = pump_jones(pump);
  // The pump axes are orthonormal, so this is a change of basis and the result
  // is already unit norm; normalize() only strips rounding.
  const JonesVector amplitudes = normalize({inner(linear_jones(source.crystal1.pump_axis), field),
                                            inner(linear_jones(source.crystal2.pump_axis), field)});
  return {amplitudes.v, amplitudes.h, source.crystal1.pair_polarization, source.crystal2.pair_polarization};
}

double phase_from_paths(double dx1, double dx2, const GeometryConfig& geometry, double phi0) {
  return geometry.wavenumber() * (dx1 - dx2) + phi0;
}

double fringe_phase(double x_signal, double x_idler, const GeometryConfig& geometry, double phi0) {
  return 2.0 * std::numbers::pi * (x_signal + x_idler) / geometry.fringe_period() + phi0;
}

std::pair<Complex, Complex> projected_amplitudes(const TwoPhotonState& state, const Analyzers& analyzers) {
  analyzers.validate();
  if (!analyzers.present()) return {state.a1, state.a2};
  const double m1 = malus_amplitude(state.chi1, *analyzers.signal) * malus_amplitude(state.chi1, *analyzers.idler);
  const double m2 = malus_amplitude(state.chi2, *analyzers.signal) * malus_amplitude(state.chi2, *analyzers.idler);
  return {state.a1 * m1, state.a2 * m2};
}

CoincidencePattern::CoincidencePattern(const TwoPhotonState& state, const Analyzers& analyzers) {
  if (analyzers.present()) {
    std::tie(first, second) = projected_amplitudes(state, analyzers);
    return;
  }
  analyzers.validate();
  const double delta = state.chi2.radians() - state.chi1.radians();
  first = state.a1;
  second = state.a2 * std::cos(delta);
  incoherent = std::norm(state.a2 * std::sin(delta));
}

double coincidence_probability(const TwoPhotonState& state, double phase, const Analyzers& analyzers) {
  return CoincidencePattern(state, analyzers)(phase);
}

double coincidence_mean(const TwoPhotonState& state, const Analyzers& analyzers) {
  const auto [b1, b2] = projected_amplitudes(state, analyzers);
  return 0.5 * (std::norm(b1) + std::norm(b2));
}

double predicted_visibility(const TwoPhotonState& state) {
  return 2.0 * std::abs(state.a1) * std::abs(state.a2) *
         std::abs(std::cos(state.chi2.radians() - state.chi1.radians()));
}

double predicted_visibility_with_analyzers(const TwoPhotonState& state, const Analyzers& analyzers) {
  if (!analyzers.present()) {
    throw ConfigurationError("predicted_visibility_with_analyzers needs both analyzers");
  }
  const auto [b1, b2] = projected_amplitudes(state, analyzers);
  const double denominator = std::norm(b1) + std::norm(b2);
  if (denominator <= kNegligibleProbability) return 0.0;
  return 2.0 * std::abs(b1) * std::abs(b2) / denominator;
}

}  // namespace pdc
