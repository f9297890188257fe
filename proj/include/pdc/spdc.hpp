#pragma once

// Two-crystal down-conversion source: pair amplitudes, interferometric
// phase and coincidence probabilities.

#include <optional>

#include "pdc/polarization.hpp"

namespace pdc {

enum class CrystalLabel { kCrystal1, kCrystal2 };

struct CrystalConfig {
  /// Polarization shared by both photons of a pair born in this crystal.
  PolarizationAngle pair_polarization;
  /// Pump component this crystal converts.
  PolarizationAngle pump_axis;
  CrystalLabel label = CrystalLabel::kCrystal1;
};

struct SourceConfig {
  CrystalConfig crystal1;
  CrystalConfig crystal2;
  /// Constant phase collecting pump propagation and static path offsets.
  double phi0 = 0.0;

  /// Type-I pair: crystal 1 converts V into H pairs, crystal 2 converts H into V pairs.
  static SourceConfig orthogonal_crystals(double phi0 = 0.0);
  /// Both crystals emit H pairs; the pump is still split V/H between them.
  static SourceConfig parallel_crystals(double phi0 = 0.0);

  /// Throws ConfigurationError unless the pump axes are orthogonal and phi0 finite.
  void validate() const;
};

/// Effective 2x2 state: a1 |pair from crystal 1> + a2 |pair from crystal 2>.
struct TwoPhotonState {
  Complex a1;
  Complex a2;
  PolarizationAngle chi1;
  PolarizationAngle chi2;
};

class GeometryConfig {
 public:
  static constexpr double kDefaultWavelength = 884e-9;
  static constexpr double kDefaultCrystalSeparation = 0.01;
  static constexpr double kDefaultDetectorDistance = 1.0;

  GeometryConfig() : GeometryConfig(kDefaultWavelength, kDefaultCrystalSeparation, kDefaultDetectorDistance) {}
  GeometryConfig(double wavelength, double crystal_separation, double detector_distance,
                 std::optional<double> fringe_period = std::nullopt);

  [[nodiscard]] double wavelength() const { return wavelength_; }
  [[nodiscard]] double crystal_separation() const { return crystal_separation_; }
  [[nodiscard]] double detector_distance() const { return detector_distance_; }
  /// lambda * L / d unless overridden.
  [[nodiscard]] double fringe_period() const { return fringe_period_; }
  [[nodiscard]] bool fringe_period_overridden() const { return period_overridden_; }
  [[nodiscard]] double wavenumber() const;

 private:
  double wavelength_;
  double crystal_separation_;
  double detector_distance_;
  double fringe_period_;
  bool period_overridden_;
};

/// Polarization analyzers in front of the two detectors; both or neither.
struct Analyzers {
  std::optional<PolarizationAngle> signal;
  std::optional<PolarizationAngle> idler;

  static Analyzers none() { return {}; }
  static Analyzers both(PolarizationAngle a) { return {a, a}; }
  [[nodiscard]] bool present() const { return signal.has_value() && idler.has_value(); }
  /// Throws ConfigurationError when exactly one analyzer is set.
  void validate() const;
};

TwoPhotonState build_two_photon_state(const PumpState& pump, const SourceConfig& source);

double phase_from_paths(double dx1, double dx2, const GeometryConfig& geometry, double phi0);

/// Small-angle phase for transverse detector displacements.
double fringe_phase(double x_signal, double x_idler, const GeometryConfig& geometry, double phi0);

/// Probability in [0, 1] of a coincidence at interferometric phase `phase`.
///
/// With analyzers each crystal's amplitude is weighted by the product of
/// the two single-photon projections. Without analyzers the crystal-2 pair
/// interferes through its overlap cos(chi2 - chi1) with the crystal-1 pair
/// and the orthogonal remainder adds incoherently.
double coincidence_probability(const TwoPhotonState& state, double phase, const Analyzers& analyzers);

/// coincidence_probability with the phase-independent amplitudes resolved
/// once: C(phase) = 0.5 (|first + e^{i phase} second|^2 + incoherent).
struct CoincidencePattern {
  Complex first;
  Complex second;
  double incoherent = 0.0;

  CoincidencePattern(const TwoPhotonState& state, const Analyzers& analyzers);
  [[nodiscard]] double operator()(double phase) const {
    return 0.5 * (std::norm(first + std::polar(1.0, phase) * second) + incoherent);
  }
};

/// 2|a1||a2||cos(chi2 - chi1)|.
double predicted_visibility(const TwoPhotonState& state);

/// 2|b1||b2| / (|b1|^2 + |b2|^2) with b_j the analyzer-weighted amplitudes.
double predicted_visibility_with_analyzers(const TwoPhotonState& state, const Analyzers& analyzers);

/// b_j = a_j * m_j; m_j = 1 without analyzers.
std::pair<Complex, Complex> projected_amplitudes(const TwoPhotonState& state, const Analyzers& analyzers);

}  // namespace pdc

namespace pdc {

/// Coincidence probabilities at or below this are treated as exactly zero
/// (crossed analyzers leave ~1e-33 from cos(pi/2) rounding).
inline constexpr double kNegligibleProbability = 1e-24;

/// Average of coincidence_probability over one period of the phase.
double coincidence_mean(const TwoPhotonState& state, const Analyzers& analyzers);

}  // namespace pdc
