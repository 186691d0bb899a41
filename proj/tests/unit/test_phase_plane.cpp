#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gelfand/errors.hpp"
#include "gelfand/phase_plane.hpp"

using namespace gelfand;

namespace {

int x_sign_changes(const PhaseOrbit& o) {
  int n = 0;
  for (std::size_t i = 1; i < o.samples.size(); ++i) {
    if (std::signbit(o.samples[i - 1].x) != std::signbit(o.samples[i].x)) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("fixed point classification") {
  auto fp = classify_fixed_point(make_khessian(3, 1));
  CHECK(fp.classification == FixedPointClass::UnstableFocus);
  CHECK(fp.discriminant == doctest::Approx(-7.0));
  CHECK(fp.mu1.real() == doctest::Approx(0.5));
  CHECK(std::abs(fp.mu1.imag()) == doctest::Approx(std::sqrt(7.0) / 2));
  CHECK(fp.mu2 == std::conj(fp.mu1));

  fp = classify_fixed_point(make_khessian(11, 1));
  CHECK(fp.classification == FixedPointClass::UnstableNode);
  CHECK(fp.discriminant == doctest::Approx(9.0));
  CHECK(fp.mu1.real() == doctest::Approx(6.0));
  CHECK(fp.mu2.real() == doctest::Approx(3.0));

  CHECK(classify_fixed_point(make_khessian(10, 1)).classification == FixedPointClass::Borderline);
  CHECK(classify_fixed_point(OperatorParams::raw(8.99, 0.0, 8.99)).classification == FixedPointClass::UnstableFocus);
  CHECK(classify_fixed_point(OperatorParams::raw(9.01, 0.0, 9.01)).classification == FixedPointClass::UnstableNode);
  // p-Laplacian, p = 3: D = (d-3)^2 - 6 (d-3) vanishes at d = 9.
  CHECK(classify_fixed_point(make_plaplacian(9, 3.0)).classification == FixedPointClass::Borderline);
  CHECK(classify_fixed_point(make_plaplacian(8, 3.0)).classification == FixedPointClass::UnstableFocus);
}

TEST_CASE("eigenvalue identities and agreement with the regime bands") {
  int n = 0;
  for (double alpha : {2.5, 4.0, 7.0, 12.0, 30.0}) {
    for (double beta : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      if (alpha - beta - 1 <= 0) continue;
      for (double gamma : {alpha, alpha + 0.5}) {
        const auto p = OperatorParams::raw(alpha, beta, gamma);
        const auto fp = classify_fixed_point(p);
        const double sum = (fp.mu1 + fp.mu2).real();
        const double prod = (fp.mu1 * fp.mu2).real();
        CHECK(std::abs(sum - p.delta()) <= 1e-12 * p.delta());
        const double c = p.delta() * p.theta() / (p.beta() + 1);
        CHECK(std::abs(prod - c) <= 1e-12 * c);
        CHECK(fp.mu1.real() > 0.0);
        CHECK(fp.mu2.real() > 0.0);
        CHECK((fp.classification == FixedPointClass::UnstableFocus) ==
              (classify_regime(p).tag == RegimeTag::Oscillatory));
        ++n;
      }
    }
  }
  CHECK(n >= 40);
}

TEST_CASE("orbit integration") {
  const auto p = make_khessian(3, 1);
  const auto still = integrate_orbit(p, 0.0, 0.0, {0.0, 10.0}, 1e-10);
  for (const auto& s : still.samples) {
    CHECK(s.x == 0.0);
    CHECK(s.y == 0.0);
  }
  // Backward in t the perturbation spirals into the focus, so x changes sign repeatedly.
  OrbitOptions o;
  o.samples = 4001;
  const auto back = integrate_orbit(p, 1e-6, 0.0, {0.0, -40.0}, 1e-12, o);
  CHECK(x_sign_changes(back) >= 5);
  CHECK(back.samples.back().t == doctest::Approx(-40.0));

  const auto node = integrate_orbit(make_khessian(11, 1), 1e-6, 0.0, {0.0, -40.0}, 1e-12, o);
  CHECK(x_sign_changes(node) == 0);

  CHECK_THROWS_AS(integrate_orbit(p, 0.0, -2.0 + 1e-3, {0.0, 5.0}, 1e-10), DomainExitError);
  CHECK_THROWS_AS(integrate_orbit(p, 0.0, -2.5, {0.0, 5.0}, 1e-10), DomainError);
}

TEST_CASE("orbits of solutions") {
  const auto p = make_khessian(3, 1);
  const Nonlinearity id(IdentityFamily{});
  const auto star = orbit_from_solution(exact_singular(p), -10.0, 2.0, 50);
  for (const auto& s : star.samples) {
    CHECK(std::abs(s.x) <= 1e-14);
    CHECK(std::abs(s.y) <= 1e-14);
  }
  const auto num = numeric_singular(p, id, 0.0, 1.0, 1e-10);
  const auto star_num = orbit_from_solution(num, -8.0, 0.0, 50);
  for (const auto& s : star_num.samples) CHECK(std::abs(s.x) <= 1e-7);

  const auto tr = solve_ivp(p, id, 10.0, 50.0, 1e-11);
  const auto orb = orbit_from_solution(tr, 1000);
  for (std::size_t i = 1; i < orb.samples.size(); ++i) CHECK(orb.samples[i].t > orb.samples[i - 1].t);
  for (const auto& s : orb.samples) CHECK(s.y > -2.0);
  // Clockwise as t increases; the orbit makes at least one full turn.
  CHECK(winding_angle(orb) < -2 * std::numbers::pi);

  CHECK_THROWS_AS(orbit_from_solution(solve_ivp(p, Nonlinearity(PowerFamily{2.0}), 2.0, 1.0, 1e-8), 10),
                  DomainError);
}

TEST_CASE("orbit reduction agrees with direct integration") {
  const auto p = make_khessian(3, 1);
  const double tol = 1e-10;
  const auto tr = solve_ivp(p, Nonlinearity(IdentityFamily{}), 5.0, 30.0, tol);
  const double lo = -4.0, hi = std::log(30.0);
  const auto orb = orbit_from_solution(tr, lo, hi, 401);
  // Start at the small-r end (largest t) and integrate towards smaller t.
  const auto& start = orb.samples.back();
  OrbitOptions o;
  o.samples = 401;
  const auto direct = integrate_orbit(p, start.x, start.y, {start.t, orb.samples.front().t}, tol, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < 401; ++i) {
    const auto& a = orb.samples[400 - i];
    const auto& b = direct.samples[i];
    CHECK(a.t == doctest::Approx(b.t).epsilon(1e-12));
    worst = std::max({worst, std::abs(a.x - b.x), std::abs(a.y - b.y)});
  }
  CHECK(worst <= 10 * tol);
}

TEST_CASE("sign change counting") {
  auto g = [](double x) { return std::sin(3.0 * x); };
  const auto rep = count_sign_changes(g, 0.1, 10.0);
  CHECK(rep.count == 9);
  CHECK(rep.grid_stability);
  for (std::size_t i = 0; i < rep.count; ++i) {
    CHECK(std::log(rep.crossing_radii[i]) == doctest::Approx((i + 1) * std::numbers::pi / 3).epsilon(1e-9));
  }
  // A flat zero stretch is reported as dropped, not as a crossing.
  auto flat = [](double x) { return x < 1.0 ? x - 1.0 : (x < 2.0 ? 0.0 : x - 2.0); };
  const auto rf = count_sign_changes(flat, 0.0, 3.0, 64);
  CHECK(rf.count == 1);
  CHECK(rf.dropped > 0);
  CHECK_FALSE(rf.warnings.empty());
}

TEST_CASE("intersections with the singular solution") {
  const Nonlinearity id(IdentityFamily{});
  const auto p3 = make_khessian(3, 1);
  const auto s3 = exact_singular(p3);
  const double R20 = find_radius(p3, id, 20.0, 0.0, 1e-11);
  const auto tr20 = solve_ivp(p3, id, 20.0, R20, 1e-11);
  const auto rep = count_intersections(tr20, s3, 1e-6, R20);
  CHECK(rep.count >= 2);
  CHECK(rep.count == rep.crossing_radii.size());
  for (std::size_t i = 0; i < rep.count; ++i) {
    const double r = rep.crossing_radii[i];
    CHECK(r > 1e-6);
    CHECK(r < R20);
    if (i > 0) CHECK(r > rep.crossing_radii[i - 1]);
    const double a = tr20.u_at_log(std::log(r) - 1e-6) - s3.canonical_at_log(std::log(r) - 1e-6);
    const double b = tr20.u_at_log(std::log(r) + 1e-6) - s3.canonical_at_log(std::log(r) + 1e-6);
    CHECK(std::signbit(a) != std::signbit(b));
  }
  CHECK(count_intersections(s3, tr20, 1e-6, R20).count == rep.count);

  // Ball scaling gives the same count on the correspondingly scaled window.
  const auto ball = to_scaled(tr20, std::pow(R20, 2.0));
  CHECK(count_intersections(ball, s3, 1e-6 / R20, 1.0).count == rep.count);

  const auto tr10 = solve_ivp(p3, id, 10.0, 100.0, 1e-11);
  const auto tr25 = solve_ivp(p3, id, 25.0, 100.0, 1e-11);
  CHECK(count_intersections(tr25, s3, 1e-8, 100.0).count >= count_intersections(tr10, s3, 1e-8, 100.0).count);

  const auto p11 = make_khessian(11, 1);
  const auto s11 = exact_singular(p11);
  for (double rho : {5.0, 10.0, 20.0}) {
    const auto tr = solve_ivp(p11, id, rho, 1e3, 1e-11);
    const auto r11 = count_intersections(tr, s11, 1e-8, 1e3);
    CHECK(r11.count == 0);
    CHECK(r11.grid_stability);
  }
}

TEST_CASE("exports") {
  IntersectionReport rep;
  rep.r_lo = 1e-3;
  rep.r_hi = 2.0;
  rep.count = 1;
  rep.crossing_radii = {0.5};
  rep.grid_stability = true;
  nlohmann::json j = rep;
  CHECK(j["count"] == 1);
  CHECK(j["stable"] == true);
  CHECK(j["interval"][1] == 2.0);
  const auto orbit = integrate_orbit(make_khessian(3, 1), 0.1, 0.0, {0.0, 1.0}, 1e-8, OrbitOptions{3});
  const auto csv = orbit_csv(orbit);
  CHECK(csv.rfind("t,x,y\n0,0.10000000000000001,0\n", 0) == 0);
}
