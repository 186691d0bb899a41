#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/nonlinearity.hpp"
#include "gelfand/operator_params.hpp"

namespace gelfand {

struct CurvePoint {
  double rho;
  double lambda;
};

struct FailedPoint {
  double rho;
  std::string error;
};

struct SignChange {
  double rho_lo;
  double rho_hi;
};

struct BifurcationCurve {
  OperatorParams params;
  Nonlinearity nl;
  double tol = 0.0;
  std::vector<CurvePoint> points;
  std::vector<FailedPoint> failed;
  /// NaN when the singular solution could not be computed.
  double lambda_star = 0.0;
  std::vector<SignChange> sign_changes;
  /// Largest sampled lambda.
  double lambda_sharp_estimate = 0.0;
  std::vector<std::string> warnings;
};

struct SweepOptions {
  /// 0 uses GELFAND_THREADS, falling back to the hardware concurrency.
  unsigned threads = 0;
  /// Narrow each sign-change bracket with one extra solve at its midpoint.
  bool verify_brackets = true;
};

/// lo:hi:n grid, geometric when `geometric` is set.
std::vector<double> make_grid(double lo, double hi, std::size_t n, bool geometric);

unsigned default_threads();

/// lambda(rho) over an increasing grid of positive rho.
BifurcationCurve sweep(const OperatorParams& params, const Nonlinearity& nl, const std::vector<double>& rho_grid,
                       double tol, const SweepOptions& options = {});

struct OscillationReport {
  std::size_t sign_change_count = 0;
  /// max |lambda - lambda*| on each stretch between consecutive sign changes.
  std::vector<double> amplitudes;
};

OscillationReport detect_oscillation(const BifurcationCurve& curve);

struct LambdaSharp {
  double value;
  double rho;
  double sampled_max;
  /// Local grid spacing at the maximum.
  double rho_resolution;
};

/// Largest sampled lambda refined by the parabola through the three points around it.
LambdaSharp lambda_sharp_detail(const BifurcationCurve& curve);
double lambda_sharp(const BifurcationCurve& curve);

/// sup over [r1, r2] of |u(r, rho) - u*(r)| in ball scaling (u(1, rho) = 0 = u*(1)).
std::vector<double> convergence_profile(const OperatorParams& params, const Nonlinearity& nl,
                                        const std::vector<double>& rho_list, double r1, double r2, double tol);

std::string curve_csv(const BifurcationCurve& curve);
std::string curve_gnuplot(const BifurcationCurve& curve);
nlohmann::json curve_summary(const BifurcationCurve& curve);

}  // namespace gelfand
