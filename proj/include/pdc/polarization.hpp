#pragma once

// Jones-calculus primitives.
//
// Angle convention (used throughout the project): linear polarization angles
// are measured from vertical, so V = 0 and H = pi/2, and Jones vectors are
// written on the ordered basis (V, H).

#include <complex>
#include <numbers>

namespace pdc {

using Complex = std::complex<double>;

/// Linear polarization direction, stored modulo pi in [0, pi).
class PolarizationAngle {
 public:
  constexpr PolarizationAngle() = default;
  explicit PolarizationAngle(double radians);

  static PolarizationAngle from_degrees(double degrees);
  static PolarizationAngle vertical() { return PolarizationAngle{0.0}; }
  static PolarizationAngle horizontal() { return PolarizationAngle{std::numbers::pi / 2}; }
  static PolarizationAngle diagonal() { return PolarizationAngle{std::numbers::pi / 4}; }

  [[nodiscard]] double radians() const { return radians_; }
  [[nodiscard]] double degrees() const { return radians_ * 180.0 / std::numbers::pi; }

  friend bool operator==(const PolarizationAngle&, const PolarizationAngle&) = default;

 private:
  double radians_ = 0.0;
};

struct JonesVector {
  Complex v;
  Complex h;

  [[nodiscard]] double norm_squared() const { return std::norm(v) + std::norm(h); }
};

/// Pure pump polarization: an ellipse with in-phase amplitude eps1,
/// quadrature amplitude eps2 and major axis at theta_p.
class PumpState {
 public:
  PumpState(double eps1, double eps2, PolarizationAngle theta_p);

  static PumpState linear(PolarizationAngle theta_p) { return {1.0, 0.0, theta_p}; }
  /// eps1 is completed as sqrt(1 - eps2^2).
  static PumpState elliptical(double eps2, PolarizationAngle theta_p);

  [[nodiscard]] double eps1() const { return eps1_; }
  [[nodiscard]] double eps2() const { return eps2_; }
  [[nodiscard]] PolarizationAngle theta_p() const { return theta_p_; }
  [[nodiscard]] bool is_linear() const { return eps2_ == 0.0; }

 private:
  double eps1_;
  double eps2_;
  PolarizationAngle theta_p_;
};

JonesVector pump_jones(const PumpState& pump);

/// Amplitude for a photon polarized along `state_pol` to pass an analyzer.
double malus_amplitude(PolarizationAngle state_pol, PolarizationAngle analyzer);

/// Throws DegenerateInputError for the zero vector.
JonesVector normalize(const JonesVector& v);

/// Real Jones vector of a linear polarization.
JonesVector linear_jones(PolarizationAngle angle);

/// <a|b> with the conjugate on the left.
Complex inner(const JonesVector& a, const JonesVector& b);

}  // namespace pdc
