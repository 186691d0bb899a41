#include "gelfand/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "gelfand/errors.hpp"
#include "gelfand/regular_solver.hpp"
#include "gelfand/singular.hpp"

namespace gelfand {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct PointResult {
  double lambda = 0.0;
  bool ok = false;
  std::string error;
};

PointResult solve_point(const OperatorParams& params, const Nonlinearity& nl, double rho, double tol) {
  PointResult r;
  try {
    r.lambda = std::exp(log_lambda_of_rho(params, nl, rho, tol));
    if (!(r.lambda > 0.0) || !std::isfinite(r.lambda)) {
      r.error = "lambda outside the double range";
    } else {
      r.ok = true;
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

double singular_lambda(const OperatorParams& params, const Nonlinearity& nl, double tol,
                       std::vector<std::string>& warnings) {
  if (nl.is_identity()) return lambda_star_exact(params);
  try {
    return numeric_singular(params, nl, 0.0, 1.0, std::max(tol, 1e-12)).lambda_star();
  } catch (const Error& e) {
    warnings.push_back(std::string("singular solution unavailable: ") + e.what());
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Signs of lambda - lambda* at each point; 0 where the difference is within the solver noise.
std::vector<int> deviation_signs(const BifurcationCurve& curve) {
  const double floor = 100.0 * curve.tol * std::max(1.0, std::abs(curve.lambda_star));
  std::vector<int> s;
  for (const auto& p : curve.points) {
    const double d = p.lambda - curve.lambda_star;
    s.push_back(std::abs(d) <= floor ? 0 : (d > 0 ? 1 : -1));
  }
  return s;
}

// Pairs (i, j), i < j, of consecutive decisive points with opposite signs.
std::vector<std::pair<std::size_t, std::size_t>> sign_change_pairs(const BifurcationCurve& curve) {
  const auto s = deviation_signs(curve);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t last = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0) continue;
    if (last < s.size() && s[last] != s[i]) out.emplace_back(last, i);
    last = i;
  }
  return out;
}

}  // namespace

std::vector<double> make_grid(double lo, double hi, std::size_t n, bool geometric) {
  if (n == 0) throw DomainError("grid needs at least one point");
  if (n == 1) return {lo};
  if (!(lo < hi)) throw DomainError("grid needs lo < hi");
  if (geometric && !(lo > 0.0)) throw DomainError("geometric grid needs lo > 0");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    g[i] = geometric ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s;
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

unsigned default_threads() {
  if (const char* env = std::getenv("GELFAND_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BifurcationCurve sweep(const OperatorParams& params, const Nonlinearity& nl, const std::vector<double>& rho_grid,
                       double tol, const SweepOptions& options) {
  if (rho_grid.empty()) throw DomainError("empty rho grid");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0)) throw DomainError("rho grid must be positive");
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1])) throw DomainError("rho grid must be strictly increasing");
  }
  BifurcationCurve curve{params, nl, tol, {}, {}, 0.0, {}, 0.0, {}};
  const unsigned threads = options.threads ? options.threads : default_threads();

  std::vector<PointResult> results(rho_grid.size());
  parallel_for(rho_grid.size(), threads, [&](std::size_t i) { results[i] = solve_point(params, nl, rho_grid[i], tol); });
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (results[i].ok) {
      curve.points.push_back({rho_grid[i], results[i].lambda});
    } else {
      curve.failed.push_back({rho_grid[i], results[i].error});
    }
  }
  if (!curve.failed.empty()) curve.warnings.push_back(std::to_string(curve.failed.size()) + " rho value(s) failed");
  curve.lambda_sharp_estimate = 0.0;
  for (const auto& p : curve.points) curve.lambda_sharp_estimate = std::max(curve.lambda_sharp_estimate, p.lambda);

  curve.lambda_star = singular_lambda(params, nl, tol, curve.warnings);
  if (std::isnan(curve.lambda_star)) return curve;

  const double ls = curve.lambda_star;
  const auto pairs = sign_change_pairs(curve);
  std::vector<SignChange> raw;
  for (const auto& [i, j] : pairs) raw.push_back({curve.points[i].rho, curve.points[j].rho});
  if (options.verify_brackets && !raw.empty()) {
    std::vector<PointResult> mids(raw.size());
    parallel_for(raw.size(), threads, [&](std::size_t i) {
      mids[i] = solve_point(params, nl, 0.5 * (raw[i].rho_lo + raw[i].rho_hi), tol);
    });
    const double floor = 100.0 * tol * std::max(1.0, std::abs(ls));
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const double m = mids[k].lambda - ls;
      if (!mids[k].ok || std::abs(m) <= floor) continue;
      const double mid = 0.5 * (raw[k].rho_lo + raw[k].rho_hi);
      const double lo_val = curve.points[pairs[k].first].lambda - ls;
      if (std::signbit(m) != std::signbit(lo_val)) {
        raw[k].rho_hi = mid;
      } else {
        raw[k].rho_lo = mid;
      }
    }
  }
  curve.sign_changes = std::move(raw);
  return curve;
}

OscillationReport detect_oscillation(const BifurcationCurve& curve) {
  OscillationReport rep;
  const auto& pts = curve.points;
  if (pts.size() < 2 || std::isnan(curve.lambda_star)) return rep;
  const double ls = curve.lambda_star;
  const auto pairs = sign_change_pairs(curve);
  rep.sign_change_count = pairs.size();
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    double amp = 0.0;
    for (std::size_t i = pairs[k - 1].second; i <= pairs[k].first; ++i) amp = std::max(amp, std::abs(pts[i].lambda - ls));
    rep.amplitudes.push_back(amp);
  }
  return rep;
}

LambdaSharp lambda_sharp_detail(const BifurcationCurve& curve) {
  const auto& pts = curve.points;
  if (pts.empty()) throw DomainError("empty curve");
  std::size_t im = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].lambda > pts[im].lambda) im = i;
  }
  LambdaSharp out{pts[im].lambda, pts[im].rho, pts[im].lambda, 0.0};
  if (pts.size() == 1) return out;
  const std::size_t lo = im == 0 ? 0 : im - 1;
  const std::size_t hi = std::min(im + 1, pts.size() - 1);
  out.rho_resolution = 0.5 * (pts[hi].rho - pts[lo].rho);
  if (im == 0 || im + 1 == pts.size()) return out;

  const double x0 = pts[im - 1].rho, x1 = pts[im].rho, x2 = pts[im + 1].rho;
  const double y0 = pts[im - 1].lambda, y1 = pts[im].lambda, y2 = pts[im + 1].lambda;
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return out;
  const double b = d01 - a * (x0 + x1);
  const double xv = -b / (2.0 * a);
  if (!(xv > x0 && xv < x2)) return out;
  const double yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
  if (yv > out.value) {
    out.value = yv;
    out.rho = xv;
  }
  return out;
}

double lambda_sharp(const BifurcationCurve& curve) { return lambda_sharp_detail(curve).value; }

std::vector<double> convergence_profile(const OperatorParams& params, const Nonlinearity& nl,
                                        const std::vector<double>& rho_list, double r1, double r2, double tol) {
  if (!(r1 > 0.0 && r1 < r2)) throw DomainError("window must satisfy 0 < r1 < r2");
  const double theta = params.theta();
  const auto sing = nl.is_identity() ? exact_singular(params) : numeric_singular(params, nl, 0.0, r2, tol);
  const double l1 = std::log(r1), l2 = std::log(r2);
  const int n = 400;

  std::vector<double> out;
  for (double rho : rho_list) {
    std::function<double(double)> diff;
    std::optional<RadialTrajectory> ball;
    if (rho == 0.0) {
      // lambda(0) = 0 and the ball solution is u = 0.
      diff = [&](double lr) { return std::abs(sing.u_at_log(lr)); };
    } else {
      const double log_R = find_log_radius(params, nl, rho, 0.0, tol);
      const auto tr = solve_ivp_log(params, nl, rho, log_R + l2 + 1e-9, tol);
      ball.emplace(tr.rescaled(theta * log_R));
      diff = [&](double lr) { return std::abs(ball->u_at_log(lr) - sing.u_at_log(lr)); };
    }
    int best = 0;
    double sup = -1.0;
    for (int i = 0; i <= n; ++i) {
      const double v = diff(l1 + (l2 - l1) * i / n);
      if (v > sup) {
        sup = v;
        best = i;
      }
    }
    const double a = l1 + (l2 - l1) * std::max(best - 1, 0) / n;
    const double b = l1 + (l2 - l1) * std::min(best + 1, n) / n;
    const auto m = boost::math::tools::brent_find_minima([&](double lr) { return -diff(lr); }, a, b, 40);
    out.push_back(std::max(sup, -m.second));
  }
  return out;
}

std::string curve_csv(const BifurcationCurve& curve) {
  std::ostringstream os;
  os << "rho,lambda\n";
  for (const auto& p : curve.points) os << fmt(p.rho) << ',' << fmt(p.lambda) << '\n';
  return os.str();
}

std::string curve_gnuplot(const BifurcationCurve& curve) {
  std::ostringstream os;
  os << "# rho lambda\n";
  for (const auto& p : curve.points) os << fmt(p.rho) << ' ' << fmt(p.lambda) << '\n';
  return os.str();
}

nlohmann::json curve_summary(const BifurcationCurve& curve) {
  nlohmann::json changes = nlohmann::json::array();
  for (const auto& s : curve.sign_changes) changes.push_back({s.rho_lo, s.rho_hi});
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& f : curve.failed) failed.push_back({{"rho", f.rho}, {"error", f.error}});
  nlohmann::json j{{"lambda_star", std::isnan(curve.lambda_star) ? nlohmann::json(nullptr) : nlohmann::json(curve.lambda_star)},
                   {"lambda_sharp", curve.points.empty() ? nlohmann::json(nullptr) : nlohmann::json(lambda_sharp(curve))},
                   {"lambda_sharp_sampled", curve.lambda_sharp_estimate},
                   {"sign_changes", changes},
                   {"points", curve.points.size()},
                   {"failed", failed}};
  return j;
}

}  // namespace gelfand
