#pragma once

// End-to-end runs shared by the CLI and the acceptance suite.

#include <cstdint>
#include <span>
#include <vector>

#include "pdc/config.hpp"
#include "pdc/fitting.hpp"

namespace pdc {

struct ScanRun {
  std::vector<ScanRecord> records;
  FringeFit fit;
};

/// Expected scan, Poisson sampling and a fringe fit. With `fix_period` the
/// fit uses the configured fringe period for the scan mode.
ScanRun simulate_scan(const RunConfig& config, unsigned threads = 1, bool fix_period = false);

struct SweepPoint {
  double theta;
  double mu;
  double sigma;
  bool converged;
};

/// Visibility versus pump orientation. Angle k is simulated with seed
/// derive_seed(config.scan.seed, k) and fitted at the known fringe period.
std::vector<SweepPoint> sweep_pump_angle(const RunConfig& config, std::span<const double> thetas,
                                         unsigned threads = 1);

/// n angles evenly covering [0, pi] inclusive.
std::vector<double> sweep_angles(std::size_t count);

struct Fig5Truth {
  double mu_max = 0.77;
  double theta0 = std::numbers::pi;
  double eps2 = 0.08;
};

struct Fig5Tolerances {
  double mu_max = 0.05;
  double theta0 = 0.1;
  double eps2 = 0.03;
};

struct Fig5Outcome {
  std::vector<SweepPoint> sweep;
  VisibilityCurveFit fit;
  /// Fitted theta0 moved by multiples of pi/2 next to the reference value.
  double theta0_near_truth = 0.0;
  bool mu_max_ok = false;
  bool theta0_ok = false;
  bool eps2_ok = false;

  [[nodiscard]] bool pass() const { return mu_max_ok && theta0_ok && eps2_ok; }
};

/// Sweep 19 pump angles on `config` (normally RunConfig::fig5()), fit the
/// visibility curve and compare with the reference parameters.
Fig5Outcome reproduce_fig5(const RunConfig& config, CurveVariant variant, unsigned threads = 1,
                           std::size_t angles = 19, const Fig5Truth& truth = {},
                           const Fig5Tolerances& tolerances = {});

}  // namespace pdc
