#include "gelfand/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinSeedTau = 20.0;

struct GCorrection {
  double B;   // g' + (beta+1) g'' ln g'
  double dB;  // dB/dtau
};

GCorrection g_correction(const Nonlinearity& nl, double b1, double tau) {
  const double g1 = nl.g_prime(tau);
  const double g2 = nl.g_second(tau);
  const double lg = std::log(g1);
  GCorrection c;
  c.B = g1 + b1 * g2 * lg;
  c.dB = g2 == 0.0 ? 0.0 : g2 + b1 * (nl.g_third(tau) * lg + g2 * g2 / g1);
  return c;
}

struct SeedState {
  double tau;
  double v;       // w at the seed
  double vprime;  // -s w'(s) = dv/dt with t = ln kappa - ln s
};

// Canonical asymptotic state at ln s; throws SeedError outside the asymptotic regime.
SeedState seed_state(const OperatorParams& p, const Nonlinearity& nl, double log_s) {
  const double b1 = p.beta() + 1.0;
  const double th = p.theta();
  SeedState st;
  st.tau = std::log(b1) - th * log_s;
  const auto c = g_correction(nl, b1, st.tau);
  if (!(std::isfinite(c.B) && c.B > 0.0 && std::isfinite(c.dB))) {
    throw SeedError("asymptotic correction not positive at the seed radius");
  }
  const double X = st.tau + std::log(std::pow(th, b1) * p.delta() / b1) + b1 * std::log(c.B);
  st.v = nl.g(X);
  st.vprime = nl.g_prime(X) * th * (1.0 + b1 * c.dB / c.B);
  if (!(std::isfinite(st.v) && std::isfinite(st.vprime) && st.vprime > 0.0)) {
    throw SeedError("asymptotic seed is not finite or not decreasing");
  }
  return st;
}

// Smallest real part among the eigenvalues of the linearised phase system.
double slowest_rate(const OperatorParams& p) {
  const double d = p.delta();
  const double disc = d * d - 4.0 * d * p.theta() / (p.beta() + 1.0);
  return disc <= 0.0 ? 0.5 * d : 0.5 * (d - std::sqrt(disc));
}

double log_F1_at_one(double b1) { return std::log(b1) - 1.0 / b1; }

}  // namespace

const char* to_string(SingularKind kind) {
  return kind == SingularKind::ExactIdentity ? "ExactIdentity" : "AsymptoticSeededNumeric";
}

SingularSolution SingularSolution::exact(const OperatorParams& params) {
  SingularSolution s(SingularKind::ExactIdentity, params, Nonlinearity(IdentityFamily{}));
  s.log_lambda_star_ = std::log(lambda_star_exact(params));
  s.log_seed_radius_ = kNaN;
  return s;
}

SingularSolution SingularSolution::numeric(OperatorParams params, Nonlinearity nl, RadialTrajectory canonical,
                                           double log_lambda_star, double log_seed_radius, double tol) {
  SingularSolution s(SingularKind::AsymptoticSeededNumeric, std::move(params), std::move(nl));
  s.log_lambda_star_ = log_lambda_star;
  s.log_seed_radius_ = log_seed_radius;
  s.tol_ = tol;
  s.canonical_.emplace(std::move(canonical));
  return s;
}

double SingularSolution::lambda_star() const { return std::exp(log_lambda_star_); }

double SingularSolution::seed_radius() const { return std::exp(log_seed_radius_); }

double SingularSolution::canonical_at_log(double log_s) const {
  if (kind_ == SingularKind::ExactIdentity) return log_lambda_star_ - params_.theta() * log_s;
  if (log_s < log_seed_radius_) return asymptotic_Z_log(params_, nl_, 0.0, log_s).u_approx;
  return canonical_->u_at_log(log_s);
}

double SingularSolution::canonical_uprime_scaled(double log_s) const {
  if (kind_ == SingularKind::ExactIdentity) return -params_.theta();
  if (log_s < log_seed_radius_) return -seed_state(params_, nl_, log_s).vprime;
  return -std::exp(canonical_->log_omega_at_log(log_s) / (params_.beta() + 1.0));
}

double SingularSolution::u_at_log(double log_r) const {
  return canonical_at_log(log_r + log_lambda_star_ / params_.theta());
}

double SingularSolution::uprime_at_log(double log_r) const {
  return canonical_uprime_scaled(log_r + log_lambda_star_ / params_.theta()) * std::exp(-log_r);
}

double SingularSolution::u(double r) const {
  if (!(r > 0.0)) throw DomainError("singular solution is defined for r > 0 only");
  return u_at_log(std::log(r));
}

double SingularSolution::uprime(double r) const {
  if (!(r > 0.0)) throw DomainError("singular solution is defined for r > 0 only");
  return uprime_at_log(std::log(r));
}

double SingularSolution::log_r_max() const {
  if (kind_ == SingularKind::ExactIdentity) return std::numeric_limits<double>::infinity();
  return canonical_->log_r_max() - log_lambda_star_ / params_.theta();
}

double SingularSolution::r_max() const { return std::exp(log_r_max()); }

SingularSolution exact_singular(const OperatorParams& params) { return SingularSolution::exact(params); }

AsymptoticValue asymptotic_Z_log(const OperatorParams& params, const Nonlinearity& nl, double log_lambda_star,
                                 double log_r) {
  const double b1 = params.beta() + 1.0;
  const double th = params.theta();
  const double tau = std::log(b1) - log_lambda_star - th * log_r;
  const double B = g_correction(nl, b1, tau).B;
  if (!(std::isfinite(B) && B > 0.0)) {
    throw DomainError("radius outside the asymptotic regime (correction term not positive)");
  }
  AsymptoticValue out;
  out.Z = std::log(std::pow(th, b1) * params.delta()) - log_lambda_star - th * log_r + b1 * std::log(B);
  out.u_approx = nl.g(out.Z);
  if (!std::isfinite(out.u_approx)) throw DomainError("g(Z) is not finite at this radius");
  return out;
}

AsymptoticValue asymptotic_Z(const OperatorParams& params, const Nonlinearity& nl, double lambda_star, double r) {
  if (!(lambda_star > 0.0)) throw DomainError("lambda* must be positive");
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  return asymptotic_Z_log(params, nl, std::log(lambda_star), std::log(r));
}

namespace {

SingularSolution integrate_singular(const OperatorParams& params, const Nonlinearity& nl, double log_seed,
                                    double r_max, double tol) {
  if (!(tol >= 1e-14 && tol <= 1e-3)) throw DomainError("tolerance must lie in [1e-14, 1e-3]");
  if (!(r_max > 0.0)) throw DomainError("r_max must be positive");
  const double b1 = params.beta() + 1.0;
  const double tau0 = std::log(b1) - params.theta() * log_seed;
  if (tau0 < kMinSeedTau) throw SeedError("seed radius too large: tau = " + std::to_string(tau0) + " < 20");
  const auto st = seed_state(params, nl, log_seed);
  const double f0 = nl.f(0.0);
  if (!std::isfinite(f0)) throw EvalError("f(0) is not finite");
  const Vec<2> y0{st.v, b1 * std::log(st.vprime)};
  const double q_atol = detail::internal_rtol(tol) * 1e-3;

  const double zero = 0.0;
  auto run = detail::integrate_frame(params, nl, 0.0, 0.0, f0, log_seed, y0, log_seed + 1e4, tol, &zero, 1000000,
                                     q_atol);
  if (!run.hit_level) throw BracketError("singular trajectory never reached u = 0");
  const double sigma_star = run.core->sigma_end;
  const double log_lambda = params.theta() * sigma_star;

  if (r_max > 1.0 && !std::isfinite(nl.domain_min())) {
    run = detail::integrate_frame(params, nl, 0.0, 0.0, f0, log_seed, y0, sigma_star + std::log(r_max), tol, nullptr,
                                  1000000, q_atol);
  }
  auto& core = *run.core;
  core.analytic_start = false;
  core.sample_sigmas.clear();
  core.sample_sigmas.push_back(core.sigma_start);
  for (const auto& s : core.steps) core.sample_sigmas.push_back(std::min(s.t1(), core.sigma_end));
  RadialTrajectory canonical(params, nl, run.core, kNaN, tol, false);
  return SingularSolution::numeric(params, nl, std::move(canonical), log_lambda, log_seed, tol);
}

}  // namespace

SingularSolution numeric_singular(const OperatorParams& params, const Nonlinearity& nl, double r_max, double tol,
                                  const NumericSingularOptions& options) {
  double log_seed = options.log_seed_radius;
  if (std::isnan(log_seed)) {
    const double b1 = params.beta() + 1.0;
    // lambda* is not known yet; the identity value fixes the scale well enough.
    const double log_lambda_guess = std::log(std::pow(params.theta(), b1) * params.delta());
    const double log_s_focus = options.log_r_focus + log_lambda_guess / params.theta();
    log_seed = std::min(log_s_focus - 28.0 / slowest_rate(params), (std::log(b1) - 2.0 * kMinSeedTau) / params.theta());
  }
  return integrate_singular(params, nl, log_seed, r_max, tol);
}

SingularSolution numeric_singular(const OperatorParams& params, const Nonlinearity& nl, double r0, double r_max,
                                  double tol) {
  NumericSingularOptions opt;
  if (r0 > 0.0) {
    opt.log_seed_radius = std::log(r0);
  } else if (r0 < 0.0 || std::isnan(r0)) {
    throw DomainError("seed radius must be positive (or 0 for automatic)");
  }
  return numeric_singular(params, nl, r_max, tol, opt);
}

double singular_residual(const SingularSolution& sing, double log_r, double h) {
  const auto& p = sing.params();
  const double b1 = p.beta() + 1.0;
  auto ell = [&](double lr) { return std::log(-sing.uprime_at_log(lr)) + lr; };
  const double dl = (ell(log_r - 2 * h) - 8 * ell(log_r - h) + 8 * ell(log_r + h) - ell(log_r + 2 * h)) / (12 * h);
  // Both terms carry the factor r^{-theta}; compare them without it.
  const double op = -std::exp(b1 * ell(log_r) + (p.delta() - p.gamma() - 1.0 + p.theta()) * log_r) * (b1 * dl + p.delta());
  const double src = std::exp(sing.log_lambda_star() + sing.nonlinearity().f(sing.u_at_log(log_r)) + p.theta() * log_r);
  return std::abs(op + src) / src;
}

RemainderFit remainder_fit(const OperatorParams& params, const Nonlinearity& nl, double r_lo, double r_hi,
                           double tol) {
  if (!(r_lo > 0.0 && r_lo < r_hi && r_hi < 1.0)) throw DomainError("remainder window must satisfy 0 < r_lo < r_hi < 1");
  return remainder_fit_log(params, nl, std::log(r_lo), std::log(r_hi), tol);
}

RemainderFit remainder_fit_log(const OperatorParams& params, const Nonlinearity& nl, double log_r_lo,
                               double log_r_hi, double tol) {
  if (!(log_r_lo < log_r_hi && log_r_hi < 0.0)) throw DomainError("remainder window must satisfy r_lo < r_hi < 1");
  NumericSingularOptions opt;
  opt.log_r_focus = log_r_lo;
  const auto sol = numeric_singular(params, nl, 1.0, tol, opt);

  RemainderFit fit{};
  const int n = 41;
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i) {
    const double lr = log_r_lo + (log_r_hi - log_r_lo) * i / (n - 1);
    const double u = sol.u_at_log(lr);
    const double ua = asymptotic_Z_log(params, nl, sol.log_lambda_star(), lr).u_approx;
    const double d = std::abs(u - ua);
    fit.log_r.push_back(lr);
    fit.diff.push_back(d);
    // Points where the difference is within reach of the integration error carry no slope information.
    if (d > 100.0 * tol * std::max(1.0, std::abs(u))) {
      xs.push_back(std::log(-lr));
      ys.push_back(std::log(d));
    }
  }
  fit.points = xs.size();
  if (xs.size() < 8) throw FitError("remainder below the noise floor on the window");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("degenerate remainder window");
  const double slope = sxy / sxx;
  fit.order = -slope;
  fit.intercept = my - slope * mx;
  return fit;
}

double remainder_order(const OperatorParams& params, const Nonlinearity& nl, double r_lo, double r_hi, double tol) {
  return remainder_fit(params, nl, r_lo, r_hi, tol).order;
}

double log_J(const Nonlinearity& nl, double beta, double u) {
  if (u < nl.domain_min()) throw DomainError("u below the domain of f");
  const double b1 = beta + 1.0;
  const double fp = nl.f_prime(u);
  if (!(fp > 0.0)) throw EvalError("f' not positive");
  if (nl.is_identity()) return std::log(b1);
  auto integrand = [&](double x) { return std::exp(-nl.f_shift(u, x) / b1); };
  double len = std::min(b1 / fp, 1.0);
  if (!(len > 0.0)) throw EvalError("f' not finite at u");
  double X = 0.0;
  double sum = 0.0;
  for (int panel = 0; panel < 400; ++panel) {
    sum += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, X, X + len, 8, 1e-13);
    X += len;
    // Integration by parts: int_X^inf e^{-df/(b+1)} <= (b+1) e^{-df(X)/(b+1)} / f'(u+X) when f' is nondecreasing.
    const double fpx = nl.f_prime(u + X);
    const double tail = b1 * integrand(X) / std::max(fpx, 1e-300);
    if (!std::isfinite(sum)) throw EvalError("non-finite quadrature sum");
    if (tail < 1e-13 * sum || integrand(X) == 0.0) return std::log(sum);
    len *= 2.0;
  }
  throw TailError("tail bound not reached for calF");
}

double log_calF(const Nonlinearity& nl, double beta, double u) { return -nl.f(u) / (beta + 1.0) + log_J(nl, beta, u); }

double calF(const Nonlinearity& nl, double beta, double u) { return std::exp(log_calF(nl, beta, u)); }

double I_fun(const Nonlinearity& nl, const OperatorParams& params, double u) {
  return std::exp(log_J(nl, params.beta(), u)) * nl.f_prime(u);
}

double log_epsilon_rho(const OperatorParams& params, const Nonlinearity& nl, double rho) {
  const double b1 = params.beta() + 1.0;
  return b1 / params.theta() * (log_calF(nl, params.beta(), rho) - log_F1_at_one(b1));
}

namespace {

struct TildeFrame {
  double rho;
  double b1;
  double log_j_rho;
  double shift;  // ln s = sigma + shift
};

TildeFrame tilde_frame(const RadialTrajectory& traj) {
  if (!(traj.rho() > 1.0)) throw DomainError("the rescaling transform needs rho > 1");
  const auto& p = traj.params();
  const auto& nl = traj.nonlinearity();
  TildeFrame fr;
  fr.rho = traj.rho();
  fr.b1 = p.beta() + 1.0;
  fr.log_j_rho = log_J(nl, p.beta(), fr.rho);
  // ln r = -f(rho)/theta + sigma - ln(lambda)/theta and ln eps = -f(rho)/theta + (b1/theta)(ln J(rho) - ln F1(1));
  // the large f(rho)/theta cancels exactly.
  fr.shift = -traj.log_lambda() / p.theta() - fr.b1 / p.theta() * (fr.log_j_rho - log_F1_at_one(fr.b1));
  return fr;
}

double tilde_value(const RadialTrajectory& traj, const TildeFrame& fr, double q) {
  const auto& nl = traj.nonlinearity();
  const double v = 1.0 + nl.f_shift(fr.rho, q) - fr.b1 * (log_J(nl, fr.b1 - 1.0, fr.rho + q) - fr.log_j_rho);
  if (!std::isfinite(v)) throw EvalError("non-finite transformed value");
  return v;
}

}  // namespace

std::vector<TildeSample> transform_tilde(const RadialTrajectory& traj) {
  const auto fr = tilde_frame(traj);
  std::vector<TildeSample> out;
  out.push_back({0.0, 1.0});
  for (double sigma : traj.core().sample_sigmas) {
    const double log_s = sigma + fr.shift;
    const double q = traj.state_at_sigma(sigma)[0];
    out.push_back({std::exp(log_s), tilde_value(traj, fr, q)});
  }
  return out;
}

double transform_tilde_at(const RadialTrajectory& traj, double s) {
  const auto fr = tilde_frame(traj);
  if (s == 0.0) return 1.0;
  if (!(s > 0.0)) throw DomainError("s must be non-negative");
  const double sigma = std::log(s) - fr.shift;
  const double q = traj.state_at_sigma(sigma)[0];
  return tilde_value(traj, fr, q);
}

}  // namespace gelfand
