#pragma once

#include <optional>
#include <vector>

#include "gelfand/nonlinearity.hpp"
#include "gelfand/operator_params.hpp"
#include "gelfand/regular_solver.hpp"

namespace gelfand {

enum class SingularKind { ExactIdentity, AsymptoticSeededNumeric };
const char* to_string(SingularKind kind);

/// A solution of L(u) + lambda* e^{f(u)} = 0 on (0, r_max] with u(1) = 0 that
/// blows up at the origin.
///
/// Two scalings are in play. The ball form is the one above. The canonical form
/// w solves L(w) + e^{f(w)} = 0 and is related by u(r) = w(lambda*^{1/theta} r).
class SingularSolution {
 public:
  static SingularSolution exact(const OperatorParams& params);
  static SingularSolution numeric(OperatorParams params, Nonlinearity nl, RadialTrajectory canonical,
                                  double log_lambda_star, double log_seed_radius, double tol);

  SingularKind kind() const { return kind_; }
  const OperatorParams& params() const { return params_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  double lambda_star() const;
  double log_lambda_star() const { return log_lambda_star_; }
  double tol() const { return tol_; }

  /// Ball form.
  double u(double r) const;
  double u_at_log(double log_r) const;
  double uprime(double r) const;
  double uprime_at_log(double log_r) const;
  double r_max() const;
  double log_r_max() const;

  /// Canonical form w(s) = u(s lambda*^{-1/theta}).
  double canonical_at_log(double log_s) const;

  /// Canonical seed radius of the numeric kind (NaN for the exact kind).
  double seed_radius() const;
  double log_seed_radius() const { return log_seed_radius_; }
  /// The numerically integrated part, in canonical scaling.
  const std::optional<RadialTrajectory>& canonical_trajectory() const { return canonical_; }

 private:
  SingularSolution(SingularKind kind, OperatorParams params, Nonlinearity nl)
      : kind_(kind), params_(std::move(params)), nl_(std::move(nl)) {}

  double canonical_uprime_scaled(double log_s) const;  // s w'(s)

  SingularKind kind_;
  OperatorParams params_;
  Nonlinearity nl_;
  double log_lambda_star_ = 0.0;
  double log_seed_radius_ = 0.0;
  double tol_ = 0.0;
  std::optional<RadialTrajectory> canonical_;
};

/// |L(u*) + lambda* e^{f(u*)}| / (lambda* e^{f(u*)}) at ln r, with
/// L(u) = -r^{-gamma-1} (r|u'|)^{beta+1} r^{delta} ((beta+1) l' + delta), l = ln(r|u'|),
/// and l' from a five-point stencil in ln r.
double singular_residual(const SingularSolution& sing, double log_r, double h = 1e-2);

/// u*(r) = -theta ln r with lambda* = theta^{beta+1}(alpha - beta - 1); for f(u) = u.
SingularSolution exact_singular(const OperatorParams& params);

struct AsymptoticValue {
  double Z;
  double u_approx;
};

/// Leading asymptotics of the singular solution in ball form:
///   tau = ln((beta+1) / (lambda* r^theta)),
///   Z = ln(theta^{beta+1}(alpha-beta-1)) - ln lambda* - theta ln r
///       + (beta+1) ln(g'(tau) + (beta+1) g''(tau) ln g'(tau)),
///   u_approx = g(Z).
AsymptoticValue asymptotic_Z(const OperatorParams& params, const Nonlinearity& nl, double lambda_star, double r);
AsymptoticValue asymptotic_Z_log(const OperatorParams& params, const Nonlinearity& nl, double log_lambda_star,
                                 double log_r);

struct NumericSingularOptions {
  /// Canonical seed radius; NaN selects it from `log_r_focus`.
  double log_seed_radius = std::numeric_limits<double>::quiet_NaN();
  /// Smallest ball radius at which the result will be used. The automatic
  /// seed sits far enough inside it for the seed error to have decayed.
  double log_r_focus = -18.420680743952367;  // ln 1e-8
};

/// Seeds (u, u') from the asymptotics at a small canonical radius, integrates
/// outward to the zero R*, and reports lambda* = R*^theta.
SingularSolution numeric_singular(const OperatorParams& params, const Nonlinearity& nl, double r0, double r_max,
                                  double tol);
SingularSolution numeric_singular(const OperatorParams& params, const Nonlinearity& nl, double r_max, double tol,
                                  const NumericSingularOptions& options);

struct RemainderFit {
  double order;      // q in |u* - u_approx| ~ C (ln 1/r)^{-q}
  double intercept;
  std::size_t points;
  std::vector<double> log_r;
  std::vector<double> diff;
};

/// Least-squares slope of ln|u*_numeric - u_approx| against ln ln(1/r) on [r_lo, r_hi].
RemainderFit remainder_fit(const OperatorParams& params, const Nonlinearity& nl, double r_lo, double r_hi,
                           double tol = 1e-11);
/// Same fit with the window given in ln r, for radii below the double range.
RemainderFit remainder_fit_log(const OperatorParams& params, const Nonlinearity& nl, double log_r_lo,
                               double log_r_hi, double tol = 1e-11);
double remainder_order(const OperatorParams& params, const Nonlinearity& nl, double r_lo, double r_hi,
                       double tol = 1e-11);

/// ln of int_0^inf exp(-(f(u+x) - f(u))/(beta+1)) dx.
double log_J(const Nonlinearity& nl, double beta, double u);
/// F(u) = int_u^inf exp(-f(s)/(beta+1)) ds.
double calF(const Nonlinearity& nl, double beta, double u);
double log_calF(const Nonlinearity& nl, double beta, double u);
/// I(u) = F(u) f'(u) e^{f(u)/(beta+1)}; tends to beta+1.
double I_fun(const Nonlinearity& nl, const OperatorParams& params, double u);

/// ln epsilon_rho = ((beta+1)/theta) ln(F(rho) / F_1(1)), F_1(u) = (beta+1) e^{-u/(beta+1)}.
double log_epsilon_rho(const OperatorParams& params, const Nonlinearity& nl, double rho);

struct TildeSample {
  double s;
  double u_tilde;
};

/// u~(s) = F_1^{-1}(epsilon_rho^{-theta/(beta+1)} F(u(epsilon_rho s))), on the trajectory samples.
std::vector<TildeSample> transform_tilde(const RadialTrajectory& traj);
/// The same transform at one point; s = 0 gives exactly 1.
double transform_tilde_at(const RadialTrajectory& traj, double s);

}  // namespace gelfand
