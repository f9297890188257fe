#include "pdc/polarization.hpp"

#include <cmath>
#include <string>

#include "pdc/errors.hpp"

namespace pdc {

namespace {
constexpr double kNormTolerance = 1e-12;
}

PolarizationAngle::PolarizationAngle(double radians) {
  if (!std::isfinite(radians)) {
    throw InputError("polarization angle must be finite");
  }
  double r = std::fmod(radians, std::numbers::pi);
  if (r < 0.0) r += std::numbers::pi;
  // fmod can land exactly on pi after the shift for tiny negative inputs.
  if (r >= std::numbers::pi) r = 0.0;
  radians_ = r;
}

PolarizationAngle PolarizationAngle::from_degrees(double degrees) {
  return PolarizationAngle{degrees * std::numbers::pi / 180.0};
}

PumpState::PumpState(double eps1, double eps2, PolarizationAngle theta_p)
    : eps1_(eps1), eps2_(eps2), theta_p_(theta_p) {
  if (!(eps1 >= 0.0 && eps1 <= 1.0 && eps2 >= 0.0 && eps2 <= 1.0)) {
    throw ConfigurationError("pump ellipse amplitudes must lie in [0, 1]");
  }
  if (std::abs(eps1 * eps1 + eps2 * eps2 - 1.0) > kNormTolerance) {
    throw ConfigurationError("pump ellipse amplitudes must satisfy eps1^2 + eps2^2 = 1");
  }
}

PumpState PumpState::elliptical(double eps2, PolarizationAngle theta_p) {
  if (!(eps2 >= 0.0 && eps2 <= 1.0)) {
    throw ConfigurationError("pump eps2 must lie in [0, 1], got " + std::to_string(eps2));
  }
  return {std::sqrt(1.0 - eps2 * eps2), eps2, theta_p};
}

JonesVector pump_jones(const PumpState& pump) {
  const double c = std::cos(pump.theta_p().radians());
  const double s = std::sin(pump.theta_p().radians());
  return {Complex{pump.eps1() * c, -pump.eps2() * s}, Complex{pump.eps1() * s, pump.eps2() * c}};
}

double malus_amplitude(PolarizationAngle state_pol, PolarizationAngle analyzer) {
  return std::cos(analyzer.radians() - state_pol.radians());
}

JonesVector normalize(const JonesVector& v) {
  const double n = std::sqrt(v.norm_squared());
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateInputError("cannot normalize a zero or non-finite Jones vector");
  }
  return {v.v / n, v.h / n};
}

JonesVector linear_jones(PolarizationAngle angle) {
  return {Complex{std::cos(angle.radians()), 0.0}, Complex{std::sin(angle.radians()), 0.0}};
}

Complex inner(const JonesVector& a, const JonesVector& b) {
  return std::conj(a.v) * b.v + std::conj(a.h) * b.h;
}

}  // namespace pdc
