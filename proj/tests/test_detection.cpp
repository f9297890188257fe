#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pdc/config.hpp"
#include "pdc/detection.hpp"
#include "pdc/errors.hpp"
#include "pdc/fitting.hpp"

namespace pdc {
namespace {

constexpr double kPi = std::numbers::pi;

// Simpson average of cos(2 pi x / period) across a slit centred on a maximum.
double slit_average(double width, double period) {
  const int n = 20000;
  const double h = width / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -width / 2 + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::cos(2 * kPi * x / period);
  }
  return sum * h / 3.0 / width;
}

TEST(SlitVisibilityFactor, Examples) {
  EXPECT_DOUBLE_EQ(slit_visibility_factor(0.0, 1e-3), 1.0);
  EXPECT_DOUBLE_EQ(slit_visibility_factor(1e-3, 1e-3), 0.0);
  EXPECT_NEAR(slit_average(0.5e-3, 1e-3), 0.63662, 5e-6);
  EXPECT_NEAR(slit_visibility_factor(0.5e-3, 1e-3), 0.63662, 5e-6);
}

TEST(SlitVisibilityFactor, MatchesQuadrature) {
  for (double ratio : {0.05, 0.3, 0.77, 1.4, 2.5}) {
    EXPECT_NEAR(slit_visibility_factor(ratio * 2e-3, 2e-3), slit_average(ratio * 2e-3, 2e-3), 1e-10) << ratio;
  }
}

struct Rig {
  TwoPhotonState state;
  RunConfig config;
};

Rig bell_setup(double instrument = 1.0, double slit = 0.0) {
  RunConfig c = RunConfig::fig5();
  c.pump = PumpState::linear(PolarizationAngle{kPi / 4});
  c.scan.instrument_factor = instrument;
  c.scan.slit_width = slit;
  return {build_two_photon_state(c.pump, c.source), c};
}

std::vector<FringeSample> noiseless(std::span<const ExpectedPoint> expected) {
  std::vector<FringeSample> out;
  for (const auto& p : expected) out.push_back({p.position, p.rate, 1.0});
  return out;
}

TEST(ExpectedScan, IdealBellStateTracesFullFringe) {
  const Rig s = bell_setup();
  const auto scan = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan);
  const double period = s.config.geometry.fringe_period();
  for (const auto& p : scan) {
    EXPECT_NEAR(p.rate, s.config.scan.peak_rate * 0.5 * (1 + std::cos(2 * kPi * p.position / period)), 1e-12);
  }
}

TEST(ExpectedScan, CeilingOf083) {
  RunConfig c = RunConfig::defaults();
  const TwoPhotonState st = build_two_photon_state(c.pump, c.source);
  const auto scan = expected_scan(st, c.source, c.geometry, c.analyzers, c.scan);
  const FringeFit fit = fit_fringe_rates(noiseless(scan));
  EXPECT_NEAR(fit.params.mu, 0.83, 1e-6);
}

TEST(ExpectedScan, NoiselessVisibilityIsProductOfFactors) {
  for (double theta : {0.2, 0.5, 0.785, 1.2}) {
    for (double eps2 : {0.0, 0.08, 0.3}) {
      RunConfig c = RunConfig::fig5();
      c.pump = PumpState::elliptical(eps2, PolarizationAngle{theta});
      c.scan.instrument_factor = 0.9;
      c.scan.slit_width = 0.7e-3;
      const TwoPhotonState st = build_two_photon_state(c.pump, c.source);
      const auto scan = expected_scan(st, c.source, c.geometry, c.analyzers, c.scan);
      const double expected = 0.9 * slit_visibility_factor(0.7e-3, c.geometry.fringe_period()) *
                              predicted_visibility_with_analyzers(st, c.analyzers);
      EXPECT_NEAR(fit_fringe_rates(noiseless(scan)).params.mu, expected, 1e-6) << theta << " " << eps2;
    }
  }
}

TEST(ExpectedScan, BothDetectorsHalveThePeriod) {
  Rig s = bell_setup(0.8);
  const auto single = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan);
  s.config.scan.mode = ScanMode::kBoth;
  const auto both = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan);
  const double ratio = fit_fringe_rates(noiseless(both)).params.period / fit_fringe_rates(noiseless(single)).params.period;
  EXPECT_NEAR(ratio, 0.5, 1e-9);

  s.config.scan.mode = ScanMode::kIdlerOnly;
  const auto idler = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan);
  for (std::size_t i = 0; i < idler.size(); ++i) EXPECT_DOUBLE_EQ(idler[i].rate, single[i].rate);
}

TEST(ExpectedScan, BackgroundDilutesVisibility) {
  const Rig s = bell_setup(0.77);
  RunConfig c = s.config;
  const auto clean = expected_scan(s.state, c.source, c.geometry, c.analyzers, c.scan);
  const FringeFit base = fit_fringe_rates(noiseless(clean));
  for (double b : {5.0, 20.0, 100.0}) {
    c.scan.background_rate = b;
    const auto scan = expected_scan(s.state, c.source, c.geometry, c.analyzers, c.scan);
    const double modulation = base.params.mu * base.params.c0;
    EXPECT_NEAR(fit_fringe_rates(noiseless(scan)).params.mu, modulation / (base.params.c0 + b), 1e-6);
  }
}

TEST(ExpectedScan, MonotoneInPeakRate) {
  Rig s = bell_setup(0.6);
  const auto low = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan);
  s.config.scan.peak_rate *= 3;
  const auto high = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan);
  for (std::size_t i = 0; i < low.size(); ++i) EXPECT_GE(high[i].rate, low[i].rate);
}

TEST(ExpectedScan, ThreadCountDoesNotChangeResult) {
  const Rig s = bell_setup(0.7, 0.5e-3);
  const auto one = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan, 1);
  const auto four = expected_scan(s.state, s.config.source, s.config.geometry, s.config.analyzers, s.config.scan, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].rate, four[i].rate);
}

TEST(ScanConfig, Validation) {
  ScanConfig scan;
  EXPECT_THROW(scan.validate(), ConfigurationError);
  scan.positions = {0.0};
  EXPECT_NO_THROW(scan.validate());
  scan.instrument_factor = 1.5;
  EXPECT_THROW(scan.validate(), ConfigurationError);
  scan.instrument_factor = 1.0;
  scan.peak_rate = -1;
  EXPECT_THROW(scan.validate(), ConfigurationError);
  scan.peak_rate = 1;
  scan.positions = {std::nan("")};
  EXPECT_THROW(scan.validate(), ConfigurationError);
}

TEST(SampleCounts, ZeroIntegrationTime) {
  const std::vector<ExpectedPoint> expected{{0.0, 100.0}, {1e-3, 50.0}};
  for (const auto& r : sample_counts(expected, 0.0, 9)) EXPECT_EQ(r.counts, 0u);
}

TEST(SampleCounts, LargeMeanAveragesToExpectation) {
  std::vector<ExpectedPoint> expected;
  for (int i = 0; i < 100; ++i) expected.push_back({i * 1e-4, 1e5});
  const auto records = sample_counts(expected, 10.0, 42);
  double sum = 0;
  for (const auto& r : records) sum += static_cast<double>(r.counts);
  EXPECT_NEAR(sum / 100.0 / 1e6, 1.0, 0.005);
}

TEST(SampleCounts, DeterministicAcrossRunsAndThreads) {
  std::vector<ExpectedPoint> expected;
  for (int i = 0; i < 257; ++i) expected.push_back({i * 1e-5, 10.0 + i});
  const auto a = sample_counts(expected, 2.0, 123, 1);
  const auto b = sample_counts(expected, 2.0, 123, 1);
  const auto c = sample_counts(expected, 2.0, 123, 7);
  const auto d = sample_counts(expected, 2.0, 124, 1);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].counts, b[i].counts);
    EXPECT_EQ(a[i].counts, c[i].counts);
    any_diff = any_diff || a[i].counts != d[i].counts;
  }
  EXPECT_TRUE(any_diff);
}

TEST(SampleCounts, RejectsNegativeRate) {
  const std::vector<ExpectedPoint> expected{{0.0, -1.0}};
  EXPECT_THROW(sample_counts(expected, 1.0, 1), InputError);
}

}  // namespace
}  // namespace pdc
