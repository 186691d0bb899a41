#include "gelfand/phase_plane.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "gelfand/dopri5.hpp"
#include "gelfand/errors.hpp"

namespace gelfand {

const char* to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::UnstableFocus:
      return "UnstableFocus";
    case FixedPointClass::UnstableNode:
      return "UnstableNode";
    case FixedPointClass::Borderline:
      return "Borderline";
  }
  return "?";
}

namespace {

// Sign of the discriminant, exact for integer operator data.
int discriminant_sign(const OperatorParams& params, double D) {
  if (const auto* kh = std::get_if<KHessianOrigin>(&params.origin())) {
    const long long delta = kh->d - 2LL * kh->k;
    const long long d = delta * delta - 8 * delta;
    return (d > 0) - (d < 0);
  }
  if (const auto* pl = std::get_if<PLaplacianOrigin>(&params.origin())) {
    if (pl->p == std::round(pl->p) && std::abs(pl->p) < 1e6) {
      // D (p-1) = (d-p)^2 (p-1) - 4 (d-p) p.
      const long long p = std::llround(pl->p);
      const long long delta = pl->d - p;
      const long long d = delta * delta * (p - 1) - 4 * delta * p;
      return (d > 0) - (d < 0);
    }
  }
  const double scale = std::max(1.0, params.delta() * params.delta());
  if (std::abs(D) <= 1e-12 * scale) return 0;
  return D > 0 ? 1 : -1;
}

double omega_star(const OperatorParams& params) { return std::pow(params.theta(), params.beta() + 1.0); }

double log_kappa(const OperatorParams& params) { return std::log(params.beta() + 1.0) / params.theta(); }

void require_identity(const Nonlinearity& nl) {
  if (!nl.is_identity()) throw DomainError("the autonomous reduction holds for f(u) = u only");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FixedPoint classify_fixed_point(const OperatorParams& params) {
  const double delta = params.delta();
  const double c = delta * params.theta() / (params.beta() + 1.0);
  FixedPoint fp{};
  fp.discriminant = delta * delta - 4.0 * c;
  const int sign = discriminant_sign(params, fp.discriminant);
  if (sign < 0) {
    fp.classification = FixedPointClass::UnstableFocus;
    const double im = 0.5 * std::sqrt(-fp.discriminant);
    fp.mu1 = {0.5 * delta, im};
    fp.mu2 = {0.5 * delta, -im};
  } else if (sign > 0) {
    fp.classification = FixedPointClass::UnstableNode;
    const double big = 0.5 * (delta + std::sqrt(fp.discriminant));
    fp.mu1 = big;
    fp.mu2 = c / big;
  } else {
    fp.classification = FixedPointClass::Borderline;
    fp.mu1 = fp.mu2 = 0.5 * delta;
  }
  return fp;
}

void phase_rhs(const OperatorParams& params, double x, double y, double& dx, double& dy) {
  const double ws = omega_star(params);
  dx = params.theta() * std::expm1(std::log1p(y / ws) / (params.beta() + 1.0));
  dy = params.delta() * (y - ws * std::expm1(x));
}

double phase_time(const OperatorParams& params, double log_r) { return log_kappa(params) - log_r; }

PhaseOrbit integrate_orbit(const OperatorParams& params, double x0, double y0, std::pair<double, double> t_span,
                           double tol, const OrbitOptions& options) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw DomainError("tol must lie in (0, 1e-3]");
  const double ws = omega_star(params);
  const double floor = -ws + options.guard * ws;
  if (!(y0 > floor)) throw DomainError("y0 must exceed -theta^(beta+1)");

  PhaseOrbit orbit{params, classify_fixed_point(params), {}};
  Dopri5Options<2> opt;
  opt.max_steps = options.max_steps;
  opt.h_init = 1e-3;
  opt.h_max = 0.25;
  opt.scale = [tol](const Vec<2>& a, const Vec<2>& b) {
    return Vec<2>{tol * (1.0 + std::max(std::abs(a[0]), std::abs(b[0]))),
                  tol * (1.0 + std::max(std::abs(a[1]), std::abs(b[1])))};
  };
  opt.event = [floor](double, const Vec<2>& y) { return y[1] - floor; };
  auto rhs = [&params](double, const Vec<2>& y, Vec<2>& dy) { phase_rhs(params, y[0], y[1], dy[0], dy[1]); };
  const auto res = dopri5<2>(rhs, t_span.first, Vec<2>{x0, y0}, t_span.second, opt);
  if (res.status == StepStatus::Event) throw DomainExitError("orbit reached the boundary y = -theta^(beta+1)");
  if (res.status != StepStatus::Reached) throw ToleranceError("orbit integration did not reach the end of the span");

  if (options.samples == 0 || res.steps.empty()) {
    orbit.samples.push_back({t_span.first, x0, y0});
    for (const auto& s : res.steps) {
      const auto y = s(s.t1());
      orbit.samples.push_back({s.t1(), y[0], y[1]});
    }
  } else {
    const std::size_t n = std::max<std::size_t>(options.samples, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = t_span.first + (t_span.second - t_span.first) * static_cast<double>(i) / (n - 1);
      const auto* s = find_step(res.steps, t);
      const auto y = s ? (*s)(t) : (i == 0 ? Vec<2>{x0, y0} : res.y);
      orbit.samples.push_back({t, y[0], y[1]});
    }
  }
  return orbit;
}

PhaseOrbit orbit_from_solution(const RadialTrajectory& traj, double log_r_lo, double log_r_hi, std::size_t samples) {
  require_identity(traj.nonlinearity());
  if (!(log_r_lo < log_r_hi)) throw DomainError("empty radius window");
  if (samples < 2) throw DomainError("need at least two samples");
  const auto& p = traj.params();
  const double ws = omega_star(p);
  // u*_lambda = ln(theta^{beta+1} delta / lambda) - theta ln r.
  const double c = std::log(ws * p.delta()) - traj.log_lambda();
  PhaseOrbit orbit{p, classify_fixed_point(p), {}};
  for (std::size_t i = 0; i < samples; ++i) {
    const double lr = log_r_hi - (log_r_hi - log_r_lo) * static_cast<double>(i) / (samples - 1);
    const double x = (traj.u_ref() - c) + traj.deviation_at_log(lr) + p.theta() * lr;
    const double y = std::exp(traj.log_omega_at_log(lr)) - ws;
    orbit.samples.push_back({phase_time(p, lr), x, y});
  }
  return orbit;
}

PhaseOrbit orbit_from_solution(const RadialTrajectory& traj, std::size_t samples) {
  return orbit_from_solution(traj, traj.log_r_min(), traj.log_r_max(), samples);
}

PhaseOrbit orbit_from_solution(const SingularSolution& sing, double log_r_lo, double log_r_hi, std::size_t samples) {
  require_identity(sing.nonlinearity());
  if (!(log_r_lo < log_r_hi)) throw DomainError("empty radius window");
  if (samples < 2) throw DomainError("need at least two samples");
  const auto& p = sing.params();
  const double ws = omega_star(p);
  PhaseOrbit orbit{p, classify_fixed_point(p), {}};
  if (sing.kind() == SingularKind::ExactIdentity) {
    for (std::size_t i = 0; i < samples; ++i) {
      const double lr = log_r_hi - (log_r_hi - log_r_lo) * static_cast<double>(i) / (samples - 1);
      orbit.samples.push_back({phase_time(p, lr), 0.0, 0.0});
    }
    return orbit;
  }
  const double c = std::log(ws * p.delta()) - sing.log_lambda_star();
  for (std::size_t i = 0; i < samples; ++i) {
    const double lr = log_r_hi - (log_r_hi - log_r_lo) * static_cast<double>(i) / (samples - 1);
    const double x = sing.u_at_log(lr) - c + p.theta() * lr;
    const double y = std::pow(-sing.uprime_at_log(lr) * std::exp(lr), p.beta() + 1.0) - ws;
    orbit.samples.push_back({phase_time(p, lr), x, y});
  }
  return orbit;
}

double winding_angle(const PhaseOrbit& orbit) {
  double total = 0.0;
  for (std::size_t i = 1; i < orbit.samples.size(); ++i) {
    const auto& a = orbit.samples[i - 1];
    const auto& b = orbit.samples[i];
    const double cross = a.x * b.y - a.y * b.x;
    const double dot = a.x * b.x + a.y * b.y;
    total += std::atan2(cross, dot);
  }
  return total;
}

namespace {

constexpr double kAmbiguous = 1e-12;
constexpr int kTangencyDepth = 40;

struct GridPass {
  std::vector<std::pair<double, double>> brackets;  // (x, g) with opposite signs at the ends
  std::vector<std::pair<double, double>> bracket_values;
  std::size_t dropped = 0;
};

GridPass scan(const std::function<double(double)>& g, double lo, double hi, std::size_t n) {
  std::vector<double> xs(n + 1), gs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    xs[i] = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / n;
    gs[i] = g(xs[i]);
  }
  // Decisive points in order; cells with both ends ambiguous are bisected for a decisive point.
  std::vector<std::pair<double, double>> pts;
  GridPass pass;
  for (std::size_t i = 0; i <= n; ++i) {
    if (i > 0 && std::abs(gs[i - 1]) < kAmbiguous && std::abs(gs[i]) < kAmbiguous) {
      // Breadth-first bisection, at most kTangencyDepth midpoint evaluations.
      std::vector<std::pair<double, double>> queue{{xs[i - 1], xs[i]}};
      bool found = false;
      for (int k = 0; k < kTangencyDepth && !found && static_cast<std::size_t>(k) < queue.size(); ++k) {
        const auto [a, b] = queue[k];
        const double m = 0.5 * (a + b);
        const double v = g(m);
        if (std::abs(v) >= kAmbiguous) {
          pts.emplace_back(m, v);
          found = true;
        } else {
          queue.emplace_back(a, m);
          queue.emplace_back(m, b);
        }
      }
      if (!found) ++pass.dropped;
    }
    if (std::abs(gs[i]) >= kAmbiguous) pts.emplace_back(xs[i], gs[i]);
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (std::signbit(pts[i - 1].second) != std::signbit(pts[i].second)) {
      pass.brackets.emplace_back(pts[i - 1].first, pts[i].first);
      pass.bracket_values.emplace_back(pts[i - 1].second, pts[i].second);
    }
  }
  return pass;
}

}  // namespace

IntersectionReport count_sign_changes(const std::function<double(double)>& g, double log_r_lo, double log_r_hi,
                                      std::size_t base_points) {
  if (!(log_r_lo < log_r_hi)) throw DomainError("empty radius window");
  std::size_t n = base_points ? base_points : std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(24.0 * (log_r_hi - log_r_lo))));
  IntersectionReport rep;
  rep.r_lo = std::exp(log_r_lo);
  rep.r_hi = std::exp(log_r_hi);

  GridPass coarse = scan(g, log_r_lo, log_r_hi, n);
  GridPass fine = scan(g, log_r_lo, log_r_hi, 2 * n);
  for (int round = 0; round < 4 && fine.brackets.size() != coarse.brackets.size(); ++round) {
    n *= 2;
    coarse = std::move(fine);
    fine = scan(g, log_r_lo, log_r_hi, 2 * n);
  }
  rep.grid_stability = fine.brackets.size() == coarse.brackets.size();
  rep.dropped = fine.dropped;
  if (fine.dropped) rep.warnings.push_back(std::to_string(fine.dropped) + " near-tangent grid cell(s) dropped");

  for (std::size_t i = 0; i < fine.brackets.size(); ++i) {
    auto [a, b] = fine.brackets[i];
    auto [ga, gb] = fine.bracket_values[i];
    std::uintmax_t iters = 200;
    auto stop = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-10; };
    const auto br = boost::math::tools::toms748_solve(g, a, b, ga, gb, stop, iters);
    rep.crossing_radii.push_back(std::exp(0.5 * (br.first + br.second)));
  }
  rep.count = rep.crossing_radii.size();
  return rep;
}

IntersectionReport count_intersections(const RadialTrajectory& reg, const SingularSolution& sing, double r_lo,
                                       double r_hi) {
  if (!(r_lo > 0.0 && r_lo < r_hi)) throw DomainError("need 0 < r_lo < r_hi");
  const double shift = reg.log_lambda() / reg.params().theta();
  auto g = [&](double lr) { return reg.u_at_log(lr) - sing.canonical_at_log(lr + shift); };
  return count_sign_changes(g, std::log(r_lo), std::log(r_hi));
}

IntersectionReport count_intersections(const SingularSolution& sing, const RadialTrajectory& reg, double r_lo,
                                       double r_hi) {
  if (!(r_lo > 0.0 && r_lo < r_hi)) throw DomainError("need 0 < r_lo < r_hi");
  const double shift = reg.log_lambda() / reg.params().theta();
  auto g = [&](double lr) { return sing.canonical_at_log(lr + shift) - reg.u_at_log(lr); };
  return count_sign_changes(g, std::log(r_lo), std::log(r_hi));
}

void to_json(nlohmann::json& j, const IntersectionReport& report) {
  j = nlohmann::json{{"interval", {report.r_lo, report.r_hi}},
                     {"count", report.count},
                     {"crossings", report.crossing_radii},
                     {"stable", report.grid_stability}};
  if (!report.warnings.empty()) j["warnings"] = report.warnings;
}

std::string orbit_csv(const PhaseOrbit& orbit) {
  std::ostringstream os;
  os << "t,x,y\n";
  for (const auto& s : orbit.samples) os << fmt(s.t) << ',' << fmt(s.x) << ',' << fmt(s.y) << '\n';
  return os.str();
}

}  // namespace gelfand
