#pragma once

#include <memory>
#include <vector>

#include "gelfand/dopri5.hpp"
#include "gelfand/nonlinearity.hpp"
#include "gelfand/operator_params.hpp"

namespace gelfand {

struct Sample {
  double log_r;
  double r;
  double u;
  double uprime;
};

/// Integration frame shared by regular and singular trajectories.
///
/// The state is (q, zeta) in the variable sigma with ln r = log_r_ref + sigma:
///   u = u_ref + q,  zeta = ln (r |u'|)^{beta+1},
///   dq/dsigma = -exp(zeta/(beta+1)),
///   dzeta/dsigma = -delta + exp(f(u) + theta ln r + ln lambda - zeta).
/// f(u) + theta ln r is carried as f_shift(u_ref, q) + theta sigma + e_offset
/// so nothing overflows even when f(rho) is far beyond the double range of e^x.
struct TrajectoryCore {
  double u_ref = 0.0;
  double log_r_ref = 0.0;
  double e_offset = 0.0;
  double sigma_start = 0.0;
  double sigma_end = 0.0;
  bool analytic_start = false;
  std::vector<DenseStep<2>> steps;
  std::vector<double> sample_sigmas;
};

class RadialTrajectory {
 public:
  RadialTrajectory(OperatorParams params, Nonlinearity nl, std::shared_ptr<const TrajectoryCore> core, double rho,
                   double tol, bool domain_edge);

  const OperatorParams& params() const { return params_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  double rho() const { return rho_; }
  double tol() const { return tol_; }
  double lambda() const;
  double log_lambda() const { return log_lambda_; }
  /// Constant added to u by `shifted`; zero for genuine solutions.
  double offset() const { return offset_; }
  /// True when integration stopped because u reached the lower edge of the domain of f.
  bool ended_at_domain_edge() const { return domain_edge_; }

  double log_r_min() const { return log_r_ref() + core_->sigma_start; }
  double log_r_max() const { return log_r_ref() + core_->sigma_end; }
  double r_max() const;
  const std::vector<Sample>& samples() const { return samples_; }

  double u_at(double r) const;
  double uprime_at(double r) const;
  double u_at_log(double log_r) const;
  double uprime_at_log(double log_r) const;
  /// u - u_ref without cancellation (u_ref = rho for regular solutions).
  double deviation_at_log(double log_r) const;
  /// ln (r |u'|)^{beta+1}.
  double log_omega_at_log(double log_r) const;
  double u_ref() const { return core_->u_ref; }

  RadialTrajectory shifted(double du) const;
  RadialTrajectory rescaled(double log_lambda) const;

  const TrajectoryCore& core() const { return *core_; }
  /// (u - u_ref, zeta) at an integration-frame coordinate; avoids the rounding of ln r when ln r_ref is huge.
  Vec<2> state_at_sigma(double sigma) const {
    Vec<2> y = state(sigma);
    y[0] += offset_;
    return y;
  }
  double sigma_of(double log_r) const { return log_r - log_r_ref(); }

 private:
  double log_r_ref() const { return core_->log_r_ref - log_lambda_ / params_.theta(); }
  Vec<2> state(double sigma) const;
  void build_samples();

  OperatorParams params_;
  Nonlinearity nl_;
  std::shared_ptr<const TrajectoryCore> core_;
  double rho_;
  double tol_;
  double log_lambda_ = 0.0;
  double offset_ = 0.0;
  bool domain_edge_ = false;
  std::vector<Sample> samples_;
};

struct SolveOptions {
  /// Extra radii at which samples are emitted (sorted internally).
  std::vector<double> sample_radii;
  std::size_t max_steps = 200000;
};

/// Solves L(u) + e^{f(u)} = 0, u(0) = rho, u'(0) = 0 on (0, r_max].
RadialTrajectory solve_ivp(const OperatorParams& params, const Nonlinearity& nl, double rho, double r_max,
                           double tol, const SolveOptions& options = {});
RadialTrajectory solve_ivp_log(const OperatorParams& params, const Nonlinearity& nl, double rho,
                               double log_r_max, double tol, const SolveOptions& options = {});

/// Trajectory that stops exactly where u reaches B.
RadialTrajectory solve_to_level(const OperatorParams& params, const Nonlinearity& nl, double rho, double B,
                                double tol);

/// R(B, rho): the radius where u(., rho) = B.
double find_radius(const OperatorParams& params, const Nonlinearity& nl, double rho, double B, double tol);
double find_log_radius(const OperatorParams& params, const Nonlinearity& nl, double rho, double B, double tol);

/// lambda(rho) = R(0, rho)^theta.
double lambda_of_rho(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol);
double log_lambda_of_rho(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol);

/// Relative mismatch of the two sides of the Pohozaev-type identity on [r1, r2].
double pohozaev_residual(const RadialTrajectory& traj, double a, double r1, double r2);

/// u_lambda(r) = u(lambda^{1/theta} r), a solution of L(u) + lambda e^{f(u)} = 0.
RadialTrajectory to_scaled(const RadialTrajectory& traj, double lambda);

namespace detail {

/// Right-hand side of the log-radius system for a given frame.
struct LogSystem {
  const Nonlinearity* nl;
  double u_ref;
  double e_offset;
  double theta;
  double beta1;
  double delta;
  double q_floor;  // domain_min - u_ref

  double exponent(double sigma, double q) const {
    return nl->f_shift(u_ref, std::max(q, q_floor)) + theta * sigma + e_offset;
  }
  void operator()(double sigma, const Vec<2>& y, Vec<2>& dy) const {
    dy[0] = -std::exp(y[1] / beta1);
    dy[1] = -delta + std::exp(exponent(sigma, y[0]) - y[1]);
  }
};

struct FrameRun {
  std::shared_ptr<TrajectoryCore> core;
  bool hit_level = false;
  bool hit_domain_edge = false;
};

/// Integrates from (sigma0, y0) to sigma_end; stops at u = level when given.
FrameRun integrate_frame(const OperatorParams& params, const Nonlinearity& nl, double u_ref, double log_r_ref,
                         double e_offset, double sigma0, const Vec<2>& y0, double sigma_end, double tol,
                         const double* level, std::size_t max_steps, double q_atol);

double internal_rtol(double tol);

}  // namespace detail

}  // namespace gelfand
