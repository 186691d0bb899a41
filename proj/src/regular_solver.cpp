#include "gelfand/regular_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

constexpr double kGuard = 650.0;

struct RegularSetup {
  double log_r_ref;
  double sigma0;
  Vec<2> y0;
};

void check_tol(double tol) {
  if (!(tol >= 1e-14 && tol <= 1e-3)) throw DomainError("tolerance must lie in [1e-14, 1e-3]");
}

RegularSetup regular_setup(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol) {
  if (!std::isfinite(rho)) throw DomainError("rho must be finite");
  if (std::isfinite(nl.domain_min()) && !(rho > nl.domain_min())) {
    throw DomainError("rho must exceed the lower edge of the domain of f");
  }
  const double f_rho = nl.f(rho);
  double fp = nl.f_prime(rho);
  if (!std::isfinite(f_rho)) throw BlowupError("f(rho) overflows");
  if (!(fp < 1e300)) fp = 1e300;
  const double b1 = params.beta() + 1.0;
  // Leading-order start: omega = r^theta e^{f(rho)} / (gamma + 1), |q| = omega^{1/(beta+1)} / theta_hat.
  const double target = 1e-3 * tol / std::max(1.0, fp);
  const double zeta0 = b1 * std::log(target * params.theta_hat());
  RegularSetup s;
  s.log_r_ref = -f_rho / params.theta();
  s.sigma0 = (zeta0 + std::log(params.gamma() + 1.0)) / params.theta();
  s.y0 = {-target, zeta0};
  return s;
}

double primitive(const Nonlinearity& nl, double u, double log_lambda) {
  const double lam = std::exp(log_lambda);
  if (nl.is_identity()) return lam * std::expm1(u);
  if (u < nl.domain_min()) throw DomainError("u below the domain of f in the Pohozaev primitive");
  if (u == 0.0) return 0.0;
  auto integrand = [&](double s) { return std::exp(nl.f(s)); };
  const double lo = std::min(0.0, u);
  const double hi = std::max(0.0, u);
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 15, 1e-14);
  return lam * (u >= 0.0 ? val : -val);
}

}  // namespace

namespace detail {

double internal_rtol(double tol) { return std::max(tol / 32.0, 4e-15); }

FrameRun integrate_frame(const OperatorParams& params, const Nonlinearity& nl, double u_ref, double log_r_ref,
                         double e_offset, double sigma0, const Vec<2>& y0, double sigma_end, double tol,
                         const double* level, std::size_t max_steps, double q_atol) {
  const double rtol = internal_rtol(tol);
  LogSystem sys{&nl, u_ref, e_offset, params.theta(), params.beta() + 1.0, params.delta(), nl.domain_min() - u_ref};

  Dopri5Options<2> opt;
  opt.h_init = 1e-2;
  opt.h_max = 0.5;
  opt.max_steps = max_steps;
  opt.scale = [&](const Vec<2>& a, const Vec<2>& b) {
    return Vec<2>{rtol * std::max(std::abs(a[0]), std::abs(b[0])) + q_atol,
                  rtol + 4e-16 * std::max(std::abs(a[1]), std::abs(b[1]))};
  };
  double q_target = sys.q_floor;
  if (level) q_target = std::max(q_target, *level - u_ref);
  const bool has_target = std::isfinite(q_target);
  if (has_target) {
    opt.event = [q_target](double, const Vec<2>& y) { return y[0] - q_target; };
  }
  opt.stop = [&](double sigma, const Vec<2>& y) {
    if (y[1] / sys.beta1 > kGuard || sys.exponent(sigma, y[0]) - y[1] > kGuard) {
      throw BlowupError("solution exceeds overflow guard at ln r = " + std::to_string(log_r_ref + sigma));
    }
    return false;
  };

  auto core = std::make_shared<TrajectoryCore>();
  core->u_ref = u_ref;
  core->log_r_ref = log_r_ref;
  core->e_offset = e_offset;
  core->sigma_start = sigma0;
  core->sigma_end = sigma0;

  FrameRun run;
  run.core = core;
  if (sigma_end <= sigma0) return run;

  auto res = dopri5<2>(sys, sigma0, y0, sigma_end, opt);
  switch (res.status) {
    case StepStatus::MaxSteps:
      throw ToleranceError("step budget exhausted before ln r = " + std::to_string(log_r_ref + sigma_end));
    case StepStatus::StepUnderflow:
      throw ToleranceError("step size underflow near ln r = " + std::to_string(log_r_ref + res.t));
    case StepStatus::Event:
      if (level && std::abs(q_target - (*level - u_ref)) == 0.0) {
        run.hit_level = true;
      } else {
        run.hit_domain_edge = true;
      }
      break;
    default:
      break;
  }
  core->steps = std::move(res.steps);
  core->sigma_end = res.t;
  return run;
}

}  // namespace detail

RadialTrajectory::RadialTrajectory(OperatorParams params, Nonlinearity nl, std::shared_ptr<const TrajectoryCore> core,
                                   double rho, double tol, bool domain_edge)
    : params_(std::move(params)),
      nl_(std::move(nl)),
      core_(std::move(core)),
      rho_(rho),
      tol_(tol),
      domain_edge_(domain_edge) {
  build_samples();
}

double RadialTrajectory::lambda() const { return std::exp(log_lambda_); }

double RadialTrajectory::r_max() const { return std::exp(log_r_max()); }

Vec<2> RadialTrajectory::state(double sigma) const {
  const auto& c = *core_;
  if (sigma < c.sigma_start) {
    if (!c.analytic_start) throw DomainError("radius below the start of the trajectory");
    const double b1 = params_.beta() + 1.0;
    const double zeta = params_.theta() * sigma + c.e_offset - std::log(params_.gamma() + 1.0);
    return {-std::exp(zeta / b1) / params_.theta_hat(), zeta};
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(c.sigma_end));
  if (sigma > c.sigma_end + slack) throw DomainError("radius beyond the end of the trajectory");
  sigma = std::min(sigma, c.sigma_end);
  if (c.steps.empty()) {
    throw DomainError("radius beyond the end of the trajectory");
  }
  const auto* st = find_step(c.steps, sigma);
  if (!st) st = sigma <= c.steps.front().t0 ? &c.steps.front() : &c.steps.back();
  return (*st)(sigma);
}

double RadialTrajectory::u_at_log(double log_r) const {
  return core_->u_ref + deviation_at_log(log_r);
}

double RadialTrajectory::deviation_at_log(double log_r) const { return state(sigma_of(log_r))[0] + offset_; }

double RadialTrajectory::log_omega_at_log(double log_r) const { return state(sigma_of(log_r))[1]; }

double RadialTrajectory::uprime_at_log(double log_r) const {
  const double zeta = log_omega_at_log(log_r);
  return -std::exp(zeta / (params_.beta() + 1.0) - log_r);
}

double RadialTrajectory::u_at(double r) const {
  if (r == 0.0 && core_->analytic_start) return core_->u_ref + offset_;
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  return u_at_log(std::log(r));
}

double RadialTrajectory::uprime_at(double r) const {
  if (r == 0.0 && core_->analytic_start) return 0.0;
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  return uprime_at_log(std::log(r));
}

RadialTrajectory RadialTrajectory::shifted(double du) const {
  RadialTrajectory t = *this;
  t.offset_ += du;
  t.build_samples();
  return t;
}

RadialTrajectory RadialTrajectory::rescaled(double log_lambda) const {
  RadialTrajectory t = *this;
  t.log_lambda_ += log_lambda;
  t.build_samples();
  return t;
}

void RadialTrajectory::build_samples() {
  samples_.clear();
  samples_.reserve(core_->sample_sigmas.size());
  const double b1 = params_.beta() + 1.0;
  for (double sigma : core_->sample_sigmas) {
    const Vec<2> y = state(sigma);
    const double log_r = log_r_ref() + sigma;
    samples_.push_back({log_r, std::exp(log_r), core_->u_ref + y[0] + offset_, -std::exp(y[1] / b1 - log_r)});
  }
}

namespace {

RadialTrajectory finish(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol,
                        detail::FrameRun run, const std::vector<double>& extra_log_r) {
  auto& c = *run.core;
  c.analytic_start = true;
  std::vector<double> sig;
  sig.reserve(c.steps.size() + extra_log_r.size() + 1);
  sig.push_back(c.sigma_start);
  for (const auto& st : c.steps) sig.push_back(std::min(st.t1(), c.sigma_end));
  for (double lr : extra_log_r) {
    const double s = lr - c.log_r_ref;
    if (s <= c.sigma_end) sig.push_back(s);
  }
  std::sort(sig.begin(), sig.end());
  sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
  c.sample_sigmas = std::move(sig);
  return RadialTrajectory(params, nl, run.core, rho, tol, run.hit_domain_edge);
}

}  // namespace

RadialTrajectory solve_ivp_log(const OperatorParams& params, const Nonlinearity& nl, double rho, double log_r_max,
                               double tol, const SolveOptions& options) {
  check_tol(tol);
  const auto s = regular_setup(params, nl, rho, tol);
  auto run = detail::integrate_frame(params, nl, rho, s.log_r_ref, 0.0, s.sigma0, s.y0, log_r_max - s.log_r_ref, tol,
                                     nullptr, options.max_steps, 0.0);
  std::vector<double> extra;
  for (double r : options.sample_radii) {
    if (r > 0.0) extra.push_back(std::log(r));
  }
  return finish(params, nl, rho, tol, std::move(run), extra);
}

RadialTrajectory solve_ivp(const OperatorParams& params, const Nonlinearity& nl, double rho, double r_max, double tol,
                           const SolveOptions& options) {
  if (!(r_max > 0.0)) throw DomainError("r_max must be positive");
  return solve_ivp_log(params, nl, rho, std::log(r_max), tol, options);
}

RadialTrajectory solve_to_level(const OperatorParams& params, const Nonlinearity& nl, double rho, double B,
                                double tol) {
  check_tol(tol);
  if (!(B < rho)) throw DomainError("level must lie below rho");
  if (B < nl.domain_min()) throw DomainError("level lies outside the domain of f");
  const auto s = regular_setup(params, nl, rho, tol);
  if (!(s.y0[0] > B - rho)) {
    throw DomainError("level too close to rho to be resolved at this tolerance");
  }
  // Far enough that any level is crossed unless the solution is broken.
  const double sigma_limit = s.sigma0 + 1e4;
  auto run = detail::integrate_frame(params, nl, rho, s.log_r_ref, 0.0, s.sigma0, s.y0, sigma_limit, tol, &B,
                                     1000000, 0.0);
  if (!run.hit_level) throw BracketError("u never reached the requested level");
  return finish(params, nl, rho, tol, std::move(run), {});
}

double find_log_radius(const OperatorParams& params, const Nonlinearity& nl, double rho, double B, double tol) {
  if (B > rho) throw DomainError("level B must not exceed rho");
  if (B < nl.domain_min()) throw DomainError("level B lies outside the domain of f");
  if (B == rho) return -std::numeric_limits<double>::infinity();
  const auto s = regular_setup(params, nl, rho, tol);
  if (!(s.y0[0] > B - rho)) {
    // Level lies inside the analytic start-up region.
    const double b1 = params.beta() + 1.0;
    const double zeta = b1 * std::log((rho - B) * params.theta_hat());
    return s.log_r_ref + (zeta + std::log(params.gamma() + 1.0)) / params.theta();
  }
  return solve_to_level(params, nl, rho, B, tol).log_r_max();
}

double find_radius(const OperatorParams& params, const Nonlinearity& nl, double rho, double B, double tol) {
  return std::exp(find_log_radius(params, nl, rho, B, tol));
}

double log_lambda_of_rho(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol) {
  return params.theta() * find_log_radius(params, nl, rho, 0.0, tol);
}

double lambda_of_rho(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol) {
  return std::exp(log_lambda_of_rho(params, nl, rho, tol));
}

RadialTrajectory to_scaled(const RadialTrajectory& traj, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return traj.rescaled(std::log(lambda));
}

double pohozaev_residual(const RadialTrajectory& traj, double a, double r1, double r2) {
  if (!(r1 > 0.0 && r1 < r2)) throw DomainError("need 0 < r1 < r2");
  const double lr1 = std::log(r1);
  const double lr2 = std::log(r2);
  if (lr2 > traj.log_r_max() + 1e-12 * std::max(1.0, std::abs(traj.log_r_max()))) {
    throw DomainError("r2 beyond the end of the trajectory");
  }
  const auto& p = traj.params();
  const auto& nl = traj.nonlinearity();
  const double b1 = p.beta() + 1.0;
  const double b2 = p.beta() + 2.0;
  const double delta = p.delta();
  const double g1 = p.gamma() + 1.0;
  const double ll = traj.log_lambda();

  // Integrand of the left side times r, i.e. per unit of ln r.
  auto bulk = [&](double log_r) {
    const double u = traj.u_at_log(log_r);
    const double zeta = traj.log_omega_at_log(log_r);
    const double grad = std::exp(delta * log_r + b2 / b1 * zeta);
    const double src = std::exp(g1 * log_r) * (g1 * primitive(nl, u, ll) - a * u * std::exp(ll + nl.f(u)));
    const double v = (a - delta / b2) * grad + src;
    if (!std::isfinite(v)) throw EvalError("non-finite Pohozaev integrand");
    return v;
  };
  auto bracket = [&](double log_r) {
    const double u = traj.u_at_log(log_r);
    const double zeta = traj.log_omega_at_log(log_r);
    const double v = b1 / b2 * std::exp(delta * log_r + b2 / b1 * zeta) +
                     std::exp(g1 * log_r) * primitive(nl, u, ll) - a * std::exp(delta * log_r + zeta) * u;
    if (!std::isfinite(v)) throw EvalError("non-finite Pohozaev boundary term");
    return v;
  };

  // Integrate in ln r over the solver's own steps.
  std::vector<double> cuts{lr1};
  for (double s : traj.core().sample_sigmas) {
    const double lr = traj.log_r_max() - traj.core().sigma_end + s;
    if (lr > lr1 && lr < lr2) cuts.push_back(lr);
  }
  cuts.push_back(lr2);
  // Long panels (the analytic start-up region) are split so the fixed-depth rule stays accurate.
  std::vector<double> fine{cuts[0]};
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const int n = std::max(1, static_cast<int>(std::ceil((cuts[i] - cuts[i - 1]) / 0.5)));
    for (int k = 1; k <= n; ++k) fine.push_back(cuts[i - 1] + (cuts[i] - cuts[i - 1]) * k / n);
  }
  cuts = std::move(fine);
  double lhs = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    lhs += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        bulk, cuts[i - 1], cuts[i], 6, 1e-14);
  }
  const double rhs = bracket(lr2) - bracket(lr1);
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) throw EvalError("non-finite Pohozaev sides");
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

}  // namespace gelfand
