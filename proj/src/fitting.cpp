#include "pdc/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pdc/errors.hpp"

namespace pdc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

struct Evaluation {
  Eigen::VectorXd residual;
  double cost = std::numeric_limits<double>::infinity();
  bool finite = false;
};

Evaluation evaluate(const ScalarModel& model, std::span<const Observation> data, const Eigen::VectorXd& p) {
  Evaluation e;
  e.residual.resize(static_cast<Eigen::Index>(data.size()));
  const std::span<const double> view(p.data(), static_cast<std::size_t>(p.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = model(data[i].x, view);
    e.residual[static_cast<Eigen::Index>(i)] = std::sqrt(data[i].weight) * (data[i].y - f);
  }
  e.finite = e.residual.allFinite();
  if (e.finite) e.cost = e.residual.squaredNorm();
  return e;
}

std::vector<double> resolved_scales(const NlsOptions& options, std::size_t count) {
  if (options.scales.empty()) return std::vector<double>(count, 1.0);
  if (options.scales.size() != count) throw InputError("parameter scale count does not match parameters");
  return options.scales;
}

/// Rank of the Jacobian after scaling each column to its parameter's magnitude.
Eigen::Index scaled_rank(const Eigen::MatrixXd& jacobian, std::span<const double> scales) {
  Eigen::MatrixXd scaled = jacobian;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) *= scales[static_cast<std::size_t>(j)];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-9);
  return qr.rank();
}

double wrap_phase(double psi) {
  double r = std::remainder(psi, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

}  // namespace

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged: return "converged";
    case FitStatus::kMaxIterations: return "max-iterations";
    case FitStatus::kSingular: return "singular";
    case FitStatus::kStalled: return "stalled";
  }
  return "unknown";
}

std::vector<double> FitResult::standard_errors() const {
  std::vector<double> out(params.size(), 0.0);
  for (std::size_t i = 0; i < out.size() && static_cast<Eigen::Index>(i) < covariance.rows(); ++i) {
    out[i] = std::sqrt(std::max(covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)), 0.0));
  }
  return out;
}

Eigen::MatrixXd numeric_jacobian(const ScalarModel& model, std::span<const Observation> data,
                                 std::span<const double> params, double relative_step,
                                 std::span<const double> scales) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd jacobian(n, m);
  std::vector<double> plus(params.begin(), params.end());
  std::vector<double> minus(params.begin(), params.end());
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double scale = scales.empty() ? 1.0 : scales[k];
    const double h = relative_step * std::max(std::abs(params[k]), scale);
    plus[k] = params[k] + h;
    minus[k] = params[k] - h;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& obs = data[static_cast<std::size_t>(i)];
      jacobian(i, j) = std::sqrt(obs.weight) * (model(obs.x, plus) - model(obs.x, minus)) / (2.0 * h);
    }
    plus[k] = params[k];
    minus[k] = params[k];
  }
  return jacobian;
}

FitResult nls_solve(const ScalarModel& model, std::span<const Observation> data, std::vector<double> init,
                    const NlsOptions& options) {
  const std::size_t m = init.size();
  if (m == 0) throw InputError("nls_solve needs at least one parameter");
  if (data.size() < m) throw IllPosedFitError("fewer data points than parameters");
  for (const auto& obs : data) {
    if (!std::isfinite(obs.x) || !std::isfinite(obs.y) || !std::isfinite(obs.weight) || obs.weight < 0.0) {
      throw InputError("data must be finite with nonnegative weights");
    }
  }
  for (double v : init) {
    if (!std::isfinite(v)) throw InputError("initial parameters must be finite");
  }
  const std::vector<double> scales = resolved_scales(options, m);

  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(m));
  Evaluation current = evaluate(model, data, p);
  if (!current.finite) throw InputError("model output is not finite at the initial parameters");

  double signal = 0.0;
  for (const auto& obs : data) signal += obs.weight * obs.y * obs.y;
  const double exact_fit_cost = 1e-28 * std::max(signal, std::numeric_limits<double>::min());

  const auto jacobian_at = [&](const Eigen::VectorXd& point) {
    return numeric_jacobian(model, data, std::span<const double>(point.data(), m), options.jacobian_step, scales);
  };

  FitStatus status = FitStatus::kMaxIterations;
  double lambda = 1e-3;
  int iteration = 0;
  while (iteration < options.max_iterations) {
    if (current.cost <= exact_fit_cost) {
      status = FitStatus::kConverged;
      break;
    }
    ++iteration;
    const Eigen::MatrixXd jacobian = jacobian_at(p);
    const Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
    const Eigen::VectorXd gradient = jacobian.transpose() * current.residual;
    Eigen::VectorXd damping = normal.diagonal();
    const double largest = damping.maxCoeff();
    if (!(largest > 0.0)) {
      status = FitStatus::kSingular;
      break;
    }
    damping = damping.cwiseMax(1e-12 * largest);

    bool accepted = false;
    bool done = false;
    while (!accepted) {
      const Eigen::MatrixXd system = normal + lambda * Eigen::MatrixXd(damping.asDiagonal());
      const Eigen::VectorXd step = system.ldlt().solve(gradient);
      Evaluation trial;
      if (step.allFinite()) trial = evaluate(model, data, p + step);
      if (trial.finite && trial.cost < current.cost) {
        double relative_step = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const auto k = static_cast<Eigen::Index>(j);
          relative_step = std::max(relative_step, std::abs(step[k]) / std::max(std::abs(p[k]), scales[j]));
        }
        const double relative_decrease = (current.cost - trial.cost) / current.cost;
        p += step;
        current = std::move(trial);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (relative_step < options.tolerance && relative_decrease < options.tolerance) {
          status = FitStatus::kConverged;
          done = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No downhill step exists at working precision: accept the point if
          // the residual is orthogonal to every Jacobian column.
          double worst = 0.0;
          for (Eigen::Index j = 0; j < gradient.size(); ++j) {
            const double column = std::sqrt(normal(j, j));
            if (column > 0.0) worst = std::max(worst, std::abs(gradient[j]) / (column * std::sqrt(current.cost)));
          }
          status = worst < 1e-6 ? FitStatus::kConverged : FitStatus::kStalled;
          done = true;
          break;
        }
      }
    }
    if (done) break;
  }

  FitResult result;
  result.params.assign(p.data(), p.data() + m);
  result.residual_norm = std::sqrt(current.cost);
  result.iterations = iteration;

  const Eigen::MatrixXd jacobian = jacobian_at(p);
  if (status != FitStatus::kSingular && scaled_rank(jacobian, scales) < static_cast<Eigen::Index>(m)) {
    status = FitStatus::kSingular;
  }
  const Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
  const auto dof = static_cast<double>(data.size()) - static_cast<double>(m);
  const double residual_variance = dof > 0.0 ? current.cost / dof : 0.0;
  Eigen::MatrixXd covariance = residual_variance * normal.completeOrthogonalDecomposition().pseudoInverse();
  result.covariance = 0.5 * (covariance + covariance.transpose());
  result.status = status;
  result.converged = status == FitStatus::kConverged;
  return result;
}

// ---------------------------------------------------------------------------

double fringe_model(double x, const FringeModelParams& p) {
  return p.c0 * (1.0 + p.mu * std::cos(kTwoPi * x / p.period + p.psi));
}

namespace {

std::vector<double> smoothed(std::span<const FringeSample> sorted) {
  const std::size_t n = sorted.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(n - 1, i + 1);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += sorted[k].rate;
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double periodogram(std::span<const FringeSample> sorted, double mean, double frequency) {
  double re = 0.0;
  double im = 0.0;
  for (const auto& s : sorted) {
    const double arg = kTwoPi * frequency * s.position;
    re += (s.rate - mean) * std::cos(arg);
    im -= (s.rate - mean) * std::sin(arg);
  }
  return re * re + im * im;
}

/// Period of the strongest component with at least one cycle inside the scan.
double dominant_period(std::span<const FringeSample> sorted, double mean, double span) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double gap = sorted[i].position - sorted[i - 1].position;
    if (gap > 0.0) gaps.push_back(gap);
  }
  if (gaps.empty()) throw IllPosedFitError("scan positions are all identical");
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  const double nyquist = 0.5 / gaps[gaps.size() / 2];
  const double lowest = 1.0 / span;
  if (nyquist <= lowest) throw IllPosedFitError("scan too sparse to resolve a full fringe period");

  const double df = lowest / 16.0;
  double best_f = lowest;
  double best_power = -1.0;
  for (double f = lowest; f <= nyquist; f += df) {
    const double power = periodogram(sorted, mean, f);
    if (power > best_power) {
      best_power = power;
      best_f = f;
    }
  }
  // Golden-section polish inside the winning bin.
  double a = std::max(lowest, best_f - df);
  double b = std::min(nyquist, best_f + df);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  for (int i = 0; i < 60; ++i) {
    if (periodogram(sorted, mean, c) > periodogram(sorted, mean, d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 2.0 / (a + b);
}

}  // namespace

FringeFit fit_fringe_rates(std::span<const FringeSample> samples, std::optional<double> fix_period) {
  const std::size_t needed = fix_period ? 3 : 4;
  if (samples.size() < needed) {
    throw IllPosedFitError("fringe fit needs at least " + std::to_string(needed) + " points");
  }
  if (fix_period && !(std::isfinite(*fix_period) && *fix_period > 0.0)) {
    throw InputError("fixed fringe period must be positive");
  }
  std::vector<FringeSample> sorted(samples.begin(), samples.end());
  for (const auto& s : sorted) {
    if (!std::isfinite(s.position) || !std::isfinite(s.rate) || !std::isfinite(s.weight) || s.weight < 0.0) {
      throw InputError("fringe samples must be finite with nonnegative weights");
    }
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FringeSample& a, const FringeSample& b) { return a.position < b.position; });
  const double span = sorted.back().position - sorted.front().position;
  if (!(span > 0.0)) throw IllPosedFitError("scan positions do not span any distance");

  double mean = 0.0;
  for (const auto& s : sorted) mean += s.rate;
  mean /= static_cast<double>(sorted.size());
  if (!(mean > 0.0)) throw IllPosedFitError("scan recorded no coincidences");

  const std::vector<double> smooth = smoothed(sorted);
  const auto [lo, hi] = std::minmax_element(smooth.begin(), smooth.end());
  const double mu0 = std::clamp((*hi - *lo) / (*hi + *lo), 1e-3, 1.0);
  const double period0 = fix_period ? *fix_period : dominant_period(sorted, mean, span);

  std::vector<Observation> data;
  data.reserve(sorted.size());
  for (const auto& s : sorted) data.push_back({s.position, s.rate, s.weight});

  double psi0 = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 16; ++k) {
    const double psi = -std::numbers::pi + kTwoPi * k / 16.0;
    double cost = 0.0;
    for (const auto& obs : data) {
      const double r = obs.y - fringe_model(obs.x, {mean, mu0, period0, psi});
      cost += obs.weight * r * r;
    }
    if (cost < best) {
      best = cost;
      psi0 = psi;
    }
  }

  FitResult fit;
  if (fix_period) {
    const double period = *fix_period;
    const ScalarModel model = [period](double x, std::span<const double> p) {
      return fringe_model(x, {p[0], p[1], period, p[2]});
    };
    NlsOptions options;
    options.scales = {mean, 1.0, 1.0};
    FitResult reduced = nls_solve(model, data, {mean, mu0, psi0}, options);
    fit = reduced;
    fit.params = {reduced.params[0], reduced.params[1], period, reduced.params[2]};
    fit.covariance = Eigen::MatrixXd::Zero(4, 4);
    const std::array<Eigen::Index, 3> slot{0, 1, 3};
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) fit.covariance(slot[i], slot[j]) = reduced.covariance(i, j);
    }
  } else {
    const ScalarModel model = [](double x, std::span<const double> p) {
      return fringe_model(x, FringeModelParams::from_vector(p));
    };
    NlsOptions options;
    options.scales = {mean, 1.0, period0, 1.0};
    fit = nls_solve(model, data, {mean, mu0, period0, psi0}, options);
  }

  // Canonical form: period > 0, mu >= 0, psi in (-pi, pi].
  FringeModelParams params = FringeModelParams::from_vector(fit.params);
  if (params.period < 0.0) {
    params.period = -params.period;
    params.psi = -params.psi;
    fit.covariance.row(2) *= -1.0;
    fit.covariance.col(2) *= -1.0;
    fit.covariance.row(3) *= -1.0;
    fit.covariance.col(3) *= -1.0;
  }
  if (params.mu < 0.0) {
    params.mu = -params.mu;
    params.psi += std::numbers::pi;
    fit.covariance.row(1) *= -1.0;
    fit.covariance.col(1) *= -1.0;
  }
  params.psi = wrap_phase(params.psi);
  fit.params = params.as_vector();

  if (!fix_period && params.period > span) {
    throw IllPosedFitError("scan spans less than one fringe period; fix the period or widen the scan");
  }
  const std::vector<double> se = fit.standard_errors();
  return {params, FringeModelParams::from_vector(se), std::move(fit)};
}

FringeFit fit_fringe(std::span<const ScanRecord> scan, std::optional<double> fix_period) {
  std::vector<FringeSample> samples;
  samples.reserve(scan.size());
  for (const auto& record : scan) {
    if (!(record.integration_time > 0.0)) continue;
    const double t = record.integration_time;
    const double counts = static_cast<double>(record.counts);
    samples.push_back({record.position, counts / t, t * t / std::max(counts, 1.0)});
  }
  return fit_fringe_rates(samples, fix_period);
}

// ---------------------------------------------------------------------------

std::string_view to_string(CurveVariant variant) {
  return variant == CurveVariant::kPaper ? "paper" : "derived";
}

std::optional<CurveVariant> parse_curve_variant(std::string_view text) {
  if (text == "paper") return CurveVariant::kPaper;
  if (text == "derived") return CurveVariant::kDerived;
  return std::nullopt;
}

double VisibilityCurveParams::eps2() const { return std::sqrt(std::max(0.0, 1.0 - eps1 * eps1)); }

double mu_eff_model(double theta, const VisibilityCurveParams& p) {
  const double e1sq = p.eps1 * p.eps1;
  const double v1 = 4.0 * e1sq * (1.0 - e1sq);
  const double v2 = (2.0 * e1sq - 1.0) * std::sin(2.0 * (theta - p.theta0));
  const double shape = p.variant == CurveVariant::kPaper ? std::sqrt(v1 * v1 + v2 * v2) : std::sqrt(v1 + v2 * v2);
  return std::clamp(p.mu_max * shape, 0.0, std::max(p.mu_max, 0.0));
}

double fold_theta0(double theta0, double reference) {
  return theta0 + kHalfPi * std::round((reference - theta0) / kHalfPi);
}

namespace {

/// Curve parametrized by the ellipse angle eta (eps1 = cos eta, eps2 = sin eta),
/// which keeps eps1^2 + eps2^2 = 1 for any step the solver takes.
double curve_by_ellipse_angle(double theta, double mu_max, double theta0, double eta, CurveVariant variant) {
  const double v1 = std::pow(std::sin(2.0 * eta), 2);
  const double v2 = std::cos(2.0 * eta) * std::sin(2.0 * (theta - theta0));
  return mu_max * (variant == CurveVariant::kPaper ? std::sqrt(v1 * v1 + v2 * v2) : std::sqrt(v1 + v2 * v2));
}

}  // namespace

VisibilityCurveFit fit_visibility_curve(std::span<const VisibilityPoint> points, CurveVariant variant,
                                        const CurveInit& init) {
  if (points.size() < 4) throw IllPosedFitError("visibility curve fit needs at least 4 pump angles");
  double theta_lo = std::numeric_limits<double>::infinity();
  double theta_hi = -std::numeric_limits<double>::infinity();
  std::size_t zero_sigmas = 0;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.theta) || !std::isfinite(pt.mu) || !std::isfinite(pt.sigma) || pt.sigma < 0.0) {
      throw InputError("visibility points must be finite with nonnegative sigma");
    }
    theta_lo = std::min(theta_lo, pt.theta);
    theta_hi = std::max(theta_hi, pt.theta);
    if (pt.sigma == 0.0) ++zero_sigmas;
  }
  if (theta_hi - theta_lo < kHalfPi - 1e-12) {
    throw IllPosedFitError("pump angles must span at least pi/2");
  }
  if (zero_sigmas != 0 && zero_sigmas != points.size()) {
    throw InputError("sigma must be positive for every point, or zero for all (unweighted fit)");
  }

  std::vector<Observation> data;
  data.reserve(points.size());
  for (const auto& pt : points) {
    data.push_back({pt.theta, pt.mu, zero_sigmas == 0 ? 1.0 / (pt.sigma * pt.sigma) : 1.0});
  }

  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const auto& a, const auto& b) { return a.mu < b.mu; });
  const double mu_max0 = init.mu_max.value_or(std::max(hi->mu, 1e-6));
  const double theta00 = init.theta0.value_or(lo->theta);
  double eta0 = 0.0;
  if (init.eps2) {
    eta0 = std::asin(std::clamp(*init.eps2, 0.0, 1.0));
  } else {
    const double ratio = std::clamp(lo->mu / mu_max0, 0.0, 1.0);
    eta0 = variant == CurveVariant::kPaper ? 0.5 * std::asin(std::sqrt(ratio)) : 0.5 * std::asin(ratio);
  }
  eta0 = std::max(eta0, 1e-3);

  const ScalarModel model = [variant](double theta, std::span<const double> p) {
    return curve_by_ellipse_angle(theta, p[0], p[1], p[2], variant);
  };
  FitResult fit = nls_solve(model, data, {mu_max0, theta00, eta0});

  // Fold eta into [0, pi/4] and theta0 into [0, pi/2); both leave the curve unchanged.
  double eta = std::fmod(fit.params[2], kHalfPi);
  if (eta < 0.0) eta += kHalfPi;
  double sign = std::fmod(fit.params[2], kHalfPi) < 0.0 ? -1.0 : 1.0;
  if (eta > kHalfPi / 2.0) {
    eta = kHalfPi - eta;
    sign = -sign;
  }
  double theta0 = std::fmod(fit.params[1], kHalfPi);
  if (theta0 < 0.0) theta0 += kHalfPi;

  // Covariance of (mu_max, theta0, eta) -> (mu_max, theta0, eps1 = cos eta).
  Eigen::Matrix3d transform = Eigen::Matrix3d::Identity();
  transform(2, 2) = -std::sin(eta) * sign;
  const Eigen::Matrix3d internal = fit.covariance;
  const double eta_variance = std::max(internal(2, 2), 0.0);
  fit.covariance = transform * internal * transform.transpose();

  VisibilityCurveFit out;
  out.params = {fit.params[0], theta0, std::cos(eta), variant};
  fit.params = {out.params.mu_max, out.params.theta0, out.params.eps1};
  const std::vector<double> se = fit.standard_errors();
  out.mu_max_error = se[0];
  out.theta0_error = se[1];
  out.eps1_error = se[2];
  out.eps2_error = std::cos(eta) * std::sqrt(eta_variance);
  out.at_boundary = std::abs(eta - kHalfPi / 2.0) < 1e-6;
  out.fit = std::move(fit);
  return out;
}

}  // namespace pdc
