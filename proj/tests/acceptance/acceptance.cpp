// Prints one PASS/FAIL line per acceptance criterion.
// Exit status: 0 once every criterion has been evaluated; with --strict, the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "gelfand/bifurcation.hpp"
#include "gelfand/errors.hpp"
#include "gelfand/phase_plane.hpp"
#include "gelfand/regular_solver.hpp"
#include "gelfand/singular.hpp"

using namespace gelfand;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome c1_exact_lambda_star() {
  const double a = lambda_star_exact(make_khessian(3, 1));
  const double b = lambda_star_exact(make_khessian(5, 2));
  const double c = lambda_star_exact(make_plaplacian(5, 3.0));
  return {a == 2.0 && b == 16.0 && c == 18.0, fmt("%.17g", a) + ", " + fmt("%.17g", b) + ", " + fmt("%.17g", c)};
}

Outcome c2_singular_residual() {
  double worst = 0.0;
  for (const auto& p : {make_khessian(3, 1), make_khessian(5, 2), make_khessian(7, 3)}) {
    const auto s = exact_singular(p);
    for (int i = 0; i <= 200; ++i) worst = std::max(worst, singular_residual(s, std::log(1e-8) * (1.0 - i / 200.0)));
  }
  return {worst <= 1e-12, "max relative residual " + fmt("%.3g", worst)};
}

Outcome c3_numeric_shooting() {
  const Nonlinearity id(IdentityFamily{});
  double worst = 0.0;
  std::string detail;
  for (const auto& p : {make_khessian(3, 1), make_khessian(5, 2)}) {
    const double ls = numeric_singular(p, id, 0.0, 1.0, 1e-10).lambda_star();
    worst = std::max(worst, std::abs(ls - lambda_star_exact(p)));
    detail += fmt("%.12g", ls) + " ";
  }
  return {worst <= 1e-4, "lambda* = " + detail + "(max error " + fmt("%.3g", worst) + ")"};
}

Outcome c4_oscillation() {
  const auto p = make_khessian(3, 1);
  const Nonlinearity id(IdentityFamily{});
  const auto curve = sweep(p, id, make_grid(0.1, 30.0, 256, true), 1e-10);
  int verified = 0;
  for (const auto& s : curve.sign_changes) {
    const double a = lambda_of_rho(p, id, s.rho_lo, 1e-10) - 2.0;
    const double b = lambda_of_rho(p, id, s.rho_hi, 1e-10) - 2.0;
    if (std::signbit(a) != std::signbit(b)) ++verified;
  }
  const double edge = curve.points.empty() ? INFINITY : std::abs(curve.points.back().lambda - 2.0);
  const bool ok = curve.failed.empty() && curve.points.size() == 256 && verified >= 3 && edge < 0.05;
  return {ok, std::to_string(verified) + " verified sign changes, |lambda(30) - 2| = " + fmt("%.3g", edge)};
}

Outcome c5_intersections() {
  const Nonlinearity id(IdentityFamily{});
  const auto p3 = make_khessian(3, 1);
  const double R = find_radius(p3, id, 20.0, 0.0, 1e-11);
  const auto tr = solve_ivp(p3, id, 20.0, R, 1e-11);
  const auto rep = count_intersections(tr, exact_singular(p3), 1e-6, R);
  bool ok = rep.count >= 2;
  std::string detail = "d=3: " + std::to_string(rep.count) + " on (1e-6, R(0,20)); d=11:";
  const auto p11 = make_khessian(11, 1);
  for (double rho : {5.0, 10.0, 20.0}) {
    const auto t = solve_ivp(p11, id, rho, 1e3, 1e-11);
    const auto r = count_intersections(t, exact_singular(p11), 1e-8, 1e3);
    ok = ok && r.count == 0 && r.grid_stability;
    detail += " " + std::to_string(r.count) + (r.grid_stability ? "" : "(unstable)");
  }
  return {ok, detail};
}

Outcome c6_fixed_points() {
  std::vector<OperatorParams> grid{make_khessian(10, 1), OperatorParams::raw(8.0 + 1.0, 0.0, 9.0)};
  for (int d = 3; d <= 12; ++d) grid.push_back(make_khessian(d, 1));
  for (int d = 5; d <= 12; ++d) grid.push_back(make_khessian(d, 2));
  for (int d = 4; d <= 9; ++d) grid.push_back(make_plaplacian(d, 3.0));
  for (int d = 3; d <= 6; ++d) grid.push_back(make_plaplacian(d, 2.5));
  for (double a : {2.5, 6.0, 15.0, 40.0}) {
    for (double b : {0.5, 1.5, 2.5}) {
      for (double g : {a, a + 1.0}) {
        if (a - b - 1.0 > 0.0) grid.push_back(OperatorParams::raw(a, b, g));
      }
    }
  }
  if (grid.size() > 50) grid.erase(grid.begin() + 50, grid.end());
  int bad = 0;
  for (const auto& p : grid) {
    const auto fp = classify_fixed_point(p);
    const double c = p.delta() * p.theta() / (p.beta() + 1.0);
    if (std::abs((fp.mu1 + fp.mu2).real() - p.delta()) > 1e-12 * p.delta()) ++bad;
    if (std::abs((fp.mu1 * fp.mu2).real() - c) > 1e-12 * c) ++bad;
    if ((fp.classification == FixedPointClass::UnstableFocus) != (classify_regime(p).tag == RegimeTag::Oscillatory)) ++bad;
  }
  const bool boundary = classify_fixed_point(make_khessian(10, 1)).classification == FixedPointClass::Borderline &&
                        classify_regime(make_khessian(10, 1)).tag != RegimeTag::Oscillatory;
  return {bad == 0 && boundary && grid.size() == 50,
          std::to_string(grid.size()) + " parameter sets, " + std::to_string(bad) + " mismatches"};
}

Outcome c7_pohozaev() {
  const Nonlinearity id(IdentityFamily{});
  const double tol = 1e-10;
  struct Case {
    OperatorParams p;
    double rho;
  };
  const std::vector<Case> cases{{make_khessian(3, 1), 1.0},  {make_khessian(3, 1), 8.0},  {make_khessian(5, 2), 3.0},
                                {make_khessian(7, 3), 10.0}, {make_khessian(11, 1), 4.0}, {make_plaplacian(5, 3.0), 6.0}};
  double worst = 0.0, weakest_gain = INFINITY;
  for (const auto& c : cases) {
    const auto tr = solve_ivp(c.p, id, c.rho, 1.0, tol);
    const auto bad = tr.shifted(1e-3);
    for (double a : {0.0, 0.1, c.p.delta() / (c.p.beta() + 2.0)}) {
      const double r = pohozaev_residual(tr, a, 1e-3, 1.0);
      const double rb = pohozaev_residual(bad, a, 1e-3, 1.0);
      worst = std::max(worst, r);
      weakest_gain = std::min(weakest_gain, rb / std::max(r, 1e-300));
    }
  }
  return {worst <= 10 * tol && weakest_gain >= 10.0,
          "max residual " + fmt("%.3g", worst) + ", min degradation factor " + fmt("%.3g", weakest_gain)};
}

Outcome c8_quadrature() {
  const Nonlinearity id(IdentityFamily{});
  double worst = 0.0;
  for (double beta : {0.0, 1.0, 2.0}) {
    const auto p = OperatorParams::raw(beta + 3.0, beta, beta + 3.0);
    for (int i = 0; i <= 100; ++i) worst = std::max(worst, std::abs(I_fun(id, p, 0.5 * i) - (beta + 1.0)));
  }
  const double e1 = boost::math::expint(1, 1.0);
  const double f = calF(Nonlinearity(IterExpFamily{1, 1.0}), 0.0, 0.0);
  const double err = std::abs(f - e1);
  return {worst <= 1e-8 && err <= 1e-6,
          "I_fun max error " + fmt("%.3g", worst) + ", calF(e^u, 0) = " + fmt("%.12g", f) + " vs E1(1) " + fmt("%.12g", e1)};
}

Outcome c9_remainder_order() {
  const double q = remainder_order(make_khessian(3, 1), Nonlinearity(IterExpFamily{1, 1.0}), 1e-8, 1e-3);
  return {q >= 1.8, "fitted order " + fmt("%.4g", q) + " on [1e-8, 1e-3] (required >= 1.8)"};
}

Outcome c10_convergence() {
  const auto p = make_khessian(3, 1);
  const Nonlinearity id(IdentityFamily{});
  const auto d = convergence_profile(p, id, {10.0, 20.0, 40.0}, 0.5, 1.5, 1e-11);
  const bool ok1 = d[1] < d[0] && d[2] < d[1];

  const Nonlinearity ex(IterExpFamily{1, 1.0});
  const auto w = solve_ivp(p, id, 1.0, 2.5, 1e-13);
  std::vector<double> sups;
  for (double rho : {10.0, 15.0, 20.0}) {
    const auto tr = solve_ivp_log(p, ex, rho, log_epsilon_rho(p, ex, rho) + std::log(2.5), 1e-12);
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) sup = std::max(sup, std::abs(transform_tilde_at(tr, 0.01 * i) - w.u_at(0.01 * i)));
    sups.push_back(sup);
  }
  const bool ok2 = sups[1] < sups[0] && sups[2] < sups[1];
  return {ok1 && ok2, "u vs u*: " + fmt("%.3g", d[0]) + " " + fmt("%.3g", d[1]) + " " + fmt("%.3g", d[2]) +
                          "; u~ vs w: " + fmt("%.3g", sups[0]) + " " + fmt("%.3g", sups[1]) + " " + fmt("%.3g", sups[2])};
}

Outcome c11_lambda_sharp() {
  const auto p = make_khessian(3, 1);
  const Nonlinearity id(IdentityFamily{});
  const double a = lambda_sharp(sweep(p, id, make_grid(0.1, 30.0, 256, true), 1e-10));
  const double b = lambda_sharp(sweep(p, id, make_grid(0.1, 30.0, 512, true), 1e-10));
  const double unit = std::pow(10.0, std::floor(std::log10(std::abs(b))) - 2.0);
  return {std::abs(a - b) <= 0.5 * unit, "lambda# = " + fmt("%.8g", a) + " (256 pts), " + fmt("%.8g", b) + " (512 pts)"};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact lambda* recovery", c1_exact_lambda_star},
      {"exact singular residual", c2_singular_residual},
      {"numeric singular shooting (f = u)", c3_numeric_shooting},
      {"oscillation of lambda(rho), d=3 k=1", c4_oscillation},
      {"intersection dichotomy", c5_intersections},
      {"fixed-point classification", c6_fixed_points},
      {"Pohozaev invariant", c7_pohozaev},
      {"quadrature identity", c8_quadrature},
      {"asymptotic remainder order, f = e^u", c9_remainder_order},
      {"convergence to the singular solution", c10_convergence},
      {"lambda# stable under grid doubling", c11_lambda_sharp},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return strict ? failures : 0;
}
