#pragma once

// Scan simulation: detector sweeps, instrument-limited fringe contrast and
// Poisson coincidence counting.

#include <cstdint>
#include <span>
#include <vector>

#include "pdc/spdc.hpp"

namespace pdc {

enum class ScanMode { kSignalOnly, kIdlerOnly, kBoth };

struct ScanConfig {
  ScanMode mode = ScanMode::kSignalOnly;
  std::vector<double> positions;
  double integration_time = 10.0;  ///< seconds per point
  double peak_rate = 100.0;        ///< coincidences/s at the fringe maximum
  double background_rate = 0.0;    ///< accidentals/s, added flat
  double slit_width = 0.5e-3;
  double instrument_factor = 1.0;  ///< mode-match ceiling on fringe contrast
  std::uint64_t seed = 0;

  void validate() const;
};

struct ExpectedPoint {
  double position;
  double rate;
};

struct ScanRecord {
  double position;
  double expected_rate;
  std::uint64_t counts;
  double integration_time;
};

/// Boxcar average of a sinusoid over a slit: sin(pi w / period) / (pi w / period).
double slit_visibility_factor(double slit_width, double fringe_period);

/// Evenly spaced detector positions, inclusive of both ends.
std::vector<double> linear_positions(double start, double stop, std::size_t count);

/// Period of the coincidence fringe seen along the scan coordinate.
double scan_fringe_period(ScanMode mode, const GeometryConfig& geometry);

/// Expected coincidence rate at each scan position.
///
/// The ideal fringe is normalized to its phase average, its modulation is
/// scaled by instrument_factor * slit_visibility_factor, and the result is
/// scaled so the fringe maximum sits at peak_rate before the background is
/// added. When both analyzer projections vanish only the background is left.
std::vector<ExpectedPoint> expected_scan(const TwoPhotonState& state, const SourceConfig& source,
                                         const GeometryConfig& geometry, const Analyzers& analyzers,
                                         const ScanConfig& scan, unsigned threads = 1);

/// Independent Poisson draws with mean rate * integration_time. Each point owns
/// a generator seeded from (seed, index), so results do not depend on `threads`.
std::vector<ScanRecord> sample_counts(std::span<const ExpectedPoint> expected, double integration_time,
                                      std::uint64_t seed, unsigned threads = 1);

/// Mix a master seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pdc
