#pragma once

// Run configuration bundle and its YAML file format.

#include <filesystem>
#include <string>
#include <string_view>

#include "pdc/detection.hpp"
#include "pdc/errors.hpp"

namespace pdc {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  int schema_version = kSchemaVersion;
  PumpState pump = PumpState::linear(PolarizationAngle::diagonal());
  SourceConfig source = SourceConfig::parallel_crystals();
  GeometryConfig geometry;
  Analyzers analyzers;
  ScanConfig scan;

  /// Parallel crystals, 45 degree linear pump, no analyzers, 0.83 contrast ceiling.
  static RunConfig defaults();
  /// Orthogonal crystals behind 45 degree analyzers with a slightly
  /// elliptical pump (eps2 = 0.08) and a 0.77 ceiling.
  static RunConfig fig5();

  void validate() const;
};

/// Fringe period used by the built-in configurations. The geometric
/// lambda L / d (88 um) is narrower than the 0.5 mm slit, which would wash
/// the fringes out completely.
inline constexpr double kDefaultFringePeriod = 4e-3;

/// Instrument factor that puts the fringe-contrast ceiling at `ceiling`
/// once slit smoothing is included.
double instrument_factor_for_ceiling(double ceiling, double slit_width, double fringe_period);

class ConfigFileError : public InputError {
 public:
  ConfigFileError(std::string source, int line, const std::string& message);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

RunConfig parse_config(std::string_view text, const std::string& source_name = "<config>");
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

}  // namespace pdc
