#pragma once

// Nonlinear least squares and the two models fitted to scan data: the
// double-slit fringe and the visibility-versus-pump-angle curve.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pdc/detection.hpp"

namespace pdc {

struct Observation {
  double x;
  double y;
  double weight;
};

using ScalarModel = std::function<double(double x, std::span<const double> params)>;

struct NlsOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;
  /// Central-difference step relative to max(|p_j|, scale_j).
  double jacobian_step = 1e-6;
  /// Typical magnitude of each parameter; defaults to 1.
  std::vector<double> scales;
};

enum class FitStatus { kConverged, kMaxIterations, kSingular, kStalled };

std::string_view to_string(FitStatus status);

struct FitResult {
  std::vector<double> params;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::kStalled;

  [[nodiscard]] std::vector<double> standard_errors() const;
};

/// Weighted Jacobian d(sqrt(w) f(x; p)) / dp by central differences.
Eigen::MatrixXd numeric_jacobian(const ScalarModel& model, std::span<const Observation> data,
                                 std::span<const double> params, double relative_step,
                                 std::span<const double> scales = {});

/// Levenberg-Marquardt minimization of sum w (y - f(x; p))^2.
///
/// Stops when an accepted step changes the parameters and the cost by less
/// than `tolerance` (relative), when the residual vanishes, or after
/// max_iterations. A rank-deficient Jacobian at the final point is reported
/// as kSingular with the best parameters found so far.
FitResult nls_solve(const ScalarModel& model, std::span<const Observation> data, std::vector<double> init,
                    const NlsOptions& options = {});

// ---------------------------------------------------------------------------
// Double-slit fringe

struct FringeModelParams {
  double c0;      ///< mean rate
  double mu;      ///< visibility
  double period;  ///< along the scan coordinate
  double psi;     ///< phase offset

  [[nodiscard]] std::vector<double> as_vector() const { return {c0, mu, period, psi}; }
  static FringeModelParams from_vector(std::span<const double> p) { return {p[0], p[1], p[2], p[3]}; }
};

/// c0 [1 + mu cos(2 pi x / period + psi)]
double fringe_model(double x, const FringeModelParams& p);

struct FringeSample {
  double position;
  double rate;
  double weight;
};

struct FringeFit {
  FringeModelParams params;
  FringeModelParams errors;  ///< one standard error per parameter; 0 for fixed ones
  FitResult fit;             ///< params ordered (c0, mu, period, psi)
};

/// Fit rates directly. mu is reported nonnegative with its sign folded into psi.
FringeFit fit_fringe_rates(std::span<const FringeSample> samples, std::optional<double> fix_period = std::nullopt);

/// Poisson-weighted fit of counted scan records (weight 1/max(counts, 1) in
/// count units). Records with zero integration time are skipped.
FringeFit fit_fringe(std::span<const ScanRecord> scan, std::optional<double> fix_period = std::nullopt);

// ---------------------------------------------------------------------------
// Visibility versus pump angle

/// `kPaper` is the closed form printed with the Fig. 5 fit; `kDerived` is the
/// fringe contrast that follows from the coincidence pattern itself.
enum class CurveVariant { kPaper, kDerived };

std::string_view to_string(CurveVariant variant);
std::optional<CurveVariant> parse_curve_variant(std::string_view text);

struct VisibilityCurveParams {
  double mu_max;
  double theta0;
  double eps1;
  CurveVariant variant = CurveVariant::kDerived;

  [[nodiscard]] double eps2() const;
};

double mu_eff_model(double theta, const VisibilityCurveParams& p);

struct VisibilityPoint {
  double theta;
  double mu;
  double sigma;
};

struct CurveInit {
  std::optional<double> mu_max;
  std::optional<double> theta0;
  std::optional<double> eps2;
};

struct VisibilityCurveFit {
  /// eps2 <= eps1 and theta0 in [0, pi/2): the model cannot tell the two
  /// ellipse axes apart and is periodic in theta0 with period pi/2.
  VisibilityCurveParams params;
  double mu_max_error = 0.0;
  double theta0_error = 0.0;
  double eps1_error = 0.0;
  double eps2_error = 0.0;
  /// eps2 landed on eps1 (circular pump), where theta0 is unconstrained.
  bool at_boundary = false;
  FitResult fit;  ///< params ordered (mu_max, theta0, eps1)
};

VisibilityCurveFit fit_visibility_curve(std::span<const VisibilityPoint> points, CurveVariant variant,
                                        const CurveInit& init = {});

/// Representative of theta0 (mod pi/2) closest to `reference`.
double fold_theta0(double theta0, double reference);

}  // namespace pdc
