#include "pdc/pipeline.hpp"

#include <cmath>

#include "pdc/parallel.hpp"

namespace pdc {

ScanRun simulate_scan(const RunConfig& config, unsigned threads, bool fix_period) {
  config.validate();
  const TwoPhotonState state = build_two_photon_state(config.pump, config.source);
  const auto expected = expected_scan(state, config.source, config.geometry, config.analyzers, config.scan, threads);
  ScanRun run;
  run.records = sample_counts(expected, config.scan.integration_time, config.scan.seed, threads);
  std::optional<double> period;
  if (fix_period) period = scan_fringe_period(config.scan.mode, config.geometry);
  run.fit = fit_fringe(run.records, period);
  return run;
}

std::vector<SweepPoint> sweep_pump_angle(const RunConfig& config, std::span<const double> thetas, unsigned threads) {
  config.validate();
  std::vector<SweepPoint> out(thetas.size());
  parallel_for(thetas.size(), threads, [&](std::size_t k) {
    RunConfig local = config;
    local.pump = PumpState(config.pump.eps1(), config.pump.eps2(), PolarizationAngle{thetas[k]});
    local.scan.seed = derive_seed(config.scan.seed, k);
    const ScanRun run = simulate_scan(local, 1, true);
    out[k] = {thetas[k], run.fit.params.mu, run.fit.errors.mu, run.fit.fit.converged};
  });
  return out;
}

std::vector<double> sweep_angles(std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

Fig5Outcome reproduce_fig5(const RunConfig& config, CurveVariant variant, unsigned threads, std::size_t angles,
                           const Fig5Truth& truth, const Fig5Tolerances& tolerances) {
  Fig5Outcome outcome;
  const std::vector<double> thetas = sweep_angles(angles);
  outcome.sweep = sweep_pump_angle(config, thetas, threads);
  std::vector<VisibilityPoint> points;
  points.reserve(outcome.sweep.size());
  for (const auto& p : outcome.sweep) points.push_back({p.theta, p.mu, p.sigma});
  outcome.fit = fit_visibility_curve(points, variant);
  outcome.theta0_near_truth = fold_theta0(outcome.fit.params.theta0, truth.theta0);
  outcome.mu_max_ok = std::abs(outcome.fit.params.mu_max - truth.mu_max) <= tolerances.mu_max;
  outcome.theta0_ok = std::abs(outcome.theta0_near_truth - truth.theta0) <= tolerances.theta0;
  outcome.eps2_ok = std::abs(outcome.fit.params.eps2() - truth.eps2) <= tolerances.eps2;
  return outcome;
}

}  // namespace pdc
