#pragma once

// Visibility definitions, the brute-force phase-scan oracle and the bridge
// from fringe visibility to polarization entanglement.

#include <cstddef>

#include "pdc/spdc.hpp"

namespace pdc {

enum class VisibilityMethod { kExtrema, kFit, kOracle };

struct VisibilityReport {
  double mu;
  double c_max;
  double c_min;
  VisibilityMethod method;
};

/// (c_max - c_min) / (c_max + c_min); DegenerateInputError when both vanish.
double visibility_from_extrema(double c_max, double c_min);

/// Scan the coincidence probability over a uniform phase grid on [0, 2 pi),
/// polish both extrema with golden-section search and apply the extrema
/// definition. Needs n_grid >= 1000. Returns mu = 0 for a vanishing pattern.
VisibilityReport phi_scan_oracle(const TwoPhotonState& state, const Analyzers& analyzers,
                                 std::size_t n_grid = 100000);

/// 2|a1||a2| for a state whose crystals emit orthogonal polarizations.
/// Throws ConfigurationError otherwise.
double concurrence(const TwoPhotonState& state);

}  // namespace pdc
