#include "pdc/analysis.hpp"

#include <cmath>

#include "pdc/errors.hpp"

namespace pdc {

double visibility_from_extrema(double c_max, double c_min) {
  if (!(c_max >= c_min && c_min >= 0.0)) {
    throw InputError("visibility needs c_max >= c_min >= 0");
  }
  if (c_max + c_min == 0.0) throw DegenerateInputError("visibility undefined when both extrema vanish");
  return (c_max - c_min) / (c_max + c_min);
}

namespace {

template <typename F>
double golden_extremum(F&& f, double a, double b, bool maximize) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto better = [&](double x, double y) { return maximize ? f(x) > f(y) : f(x) < f(y); };
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  for (int i = 0; i < 80 && b - a > 1e-13; ++i) {
    if (better(c, d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return f(0.5 * (a + b));
}

}  // namespace

VisibilityReport phi_scan_oracle(const TwoPhotonState& state, const Analyzers& analyzers, std::size_t n_grid) {
  if (n_grid < 1000) throw InputError("phi_scan_oracle needs at least 1000 grid points");
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n_grid);
  const CoincidencePattern c(state, analyzers);

  std::size_t i_max = 0;
  std::size_t i_min = 0;
  double v_max = c(0.0);
  double v_min = v_max;
  for (std::size_t i = 1; i < n_grid; ++i) {
    const double v = c(step * static_cast<double>(i));
    if (v > v_max) {
      v_max = v;
      i_max = i;
    }
    if (v < v_min) {
      v_min = v;
      i_min = i;
    }
  }
  const double phase_max = step * static_cast<double>(i_max);
  const double phase_min = step * static_cast<double>(i_min);
  const double c_max = std::max(v_max, golden_extremum(c, phase_max - step, phase_max + step, true));
  const double c_min = std::max(0.0, std::min(v_min, golden_extremum(c, phase_min - step, phase_min + step, false)));
  const double mu = c_max > kNegligibleProbability ? visibility_from_extrema(c_max, c_min) : 0.0;
  return {mu, c_max, c_min, VisibilityMethod::kOracle};
}

double concurrence(const TwoPhotonState& state) {
  if (std::abs(std::cos(state.chi2.radians() - state.chi1.radians())) > 1e-9) {
    throw ConfigurationError("concurrence needs crystals with orthogonal pair polarizations");
  }
  return 2.0 * std::abs(state.a1) * std::abs(state.a2);
}

}  // namespace pdc
