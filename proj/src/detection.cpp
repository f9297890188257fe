#include "pdc/detection.hpp"

#include <cmath>
#include <random>

#include "pdc/errors.hpp"
#include "pdc/parallel.hpp"

namespace pdc {

void ScanConfig::validate() const {
  if (positions.empty()) throw ConfigurationError("scan needs at least one position");
  for (double x : positions) {
    if (!std::isfinite(x)) throw ConfigurationError("scan positions must be finite");
  }
  const auto nonnegative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!nonnegative(integration_time)) throw ConfigurationError("integration time must be >= 0");
  if (!nonnegative(peak_rate) || !nonnegative(background_rate)) {
    throw ConfigurationError("count rates must be >= 0");
  }
  if (!nonnegative(slit_width)) throw ConfigurationError("slit width must be >= 0");
  if (!(instrument_factor >= 0.0 && instrument_factor <= 1.0)) {
    throw ConfigurationError("instrument factor must lie in [0, 1]");
  }
}

double slit_visibility_factor(double slit_width, double fringe_period) {
  if (!(fringe_period > 0.0)) throw ConfigurationError("fringe period must be positive");
  if (!(slit_width >= 0.0)) throw ConfigurationError("slit width must be >= 0");
  const double u = std::numbers::pi * slit_width / fringe_period;
  if (u == 0.0) return 1.0;
  // sin(k pi) is not exactly zero in floating point.
  const double ratio = slit_width / fringe_period;
  if (ratio == std::round(ratio)) return 0.0;
  return std::sin(u) / u;
}

std::vector<double> linear_positions(double start, double stop, std::size_t count) {
  if (count == 0) throw ConfigurationError("position count must be positive");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = start + (stop - start) * t;
  }
  return out;
}

double scan_fringe_period(ScanMode mode, const GeometryConfig& geometry) {
  return mode == ScanMode::kBoth ? geometry.fringe_period() / 2.0 : geometry.fringe_period();
}

std::vector<ExpectedPoint> expected_scan(const TwoPhotonState& state, const SourceConfig& source,
                                         const GeometryConfig& geometry, const Analyzers& analyzers,
                                         const ScanConfig& scan, unsigned threads) {
  scan.validate();
  source.validate();
  analyzers.validate();

  const double mean = coincidence_mean(state, analyzers);
  const double ideal = analyzers.present() ? predicted_visibility_with_analyzers(state, analyzers)
                                           : predicted_visibility(state);
  const double depth = scan.instrument_factor * slit_visibility_factor(scan.slit_width, geometry.fringe_period());
  const double peak = 1.0 + std::abs(depth) * ideal;

  std::vector<ExpectedPoint> out(scan.positions.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const double x = scan.positions[i];
    double rate = scan.background_rate;
    if (mean > kNegligibleProbability) {
      const double xs = scan.mode == ScanMode::kIdlerOnly ? 0.0 : x;
      const double xi = scan.mode == ScanMode::kSignalOnly ? 0.0 : x;
      const double phase = fringe_phase(xs, xi, geometry, source.phi0);
      const double normalized = coincidence_probability(state, phase, analyzers) / mean;
      const double smoothed = 1.0 + depth * (normalized - 1.0);
      rate += scan.peak_rate * smoothed / peak;
    }
    // Rounding can leave -1e-17 at a perfect null.
    out[i] = {x, std::max(rate, 0.0)};
  });
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<ScanRecord> sample_counts(std::span<const ExpectedPoint> expected, double integration_time,
                                      std::uint64_t seed, unsigned threads) {
  if (!(integration_time >= 0.0) || !std::isfinite(integration_time)) {
    throw ConfigurationError("integration time must be finite and >= 0");
  }
  std::vector<ScanRecord> out(expected.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const ExpectedPoint& p = expected[i];
    if (!(p.rate >= 0.0) || !std::isfinite(p.rate)) {
      throw InputError("expected rates must be finite and >= 0");
    }
    const double mean = p.rate * integration_time;
    std::uint64_t counts = 0;
    if (mean > 0.0) {
      std::mt19937_64 engine(derive_seed(seed, i));
      std::poisson_distribution<std::uint64_t> poisson(mean);
      counts = poisson(engine);
    }
    out[i] = {p.position, p.rate, counts, integration_time};
  });
  return out;
}

}  // namespace pdc
