#include <doctest.h>

#include <cmath>
#include <vector>

#include "gelfand/errors.hpp"
#include "gelfand/nonlinearity.hpp"

using namespace gelfand;

namespace {

std::vector<Nonlinearity> families() {
  return {Nonlinearity(IdentityFamily{}),          Nonlinearity(PowerFamily{2.0}),
          Nonlinearity(PowerFamily{0.75}),         Nonlinearity(PowerFamily{3.5}),
          Nonlinearity(IterExpFamily{1, 1.0}),     Nonlinearity(IterExpFamily{1, 0.5}),
          Nonlinearity(IterExpFamily{2, 1.0}),     Nonlinearity(PerturbedFamily{1.0, 0.5}),
          Nonlinearity(PerturbedFamily{2.0, -0.7})};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

// Upper end of the round-trip grid for which f stays in double range.
double u_cap(const Nonlinearity& nl) {
  if (const auto* it = std::get_if<IterExpFamily>(&nl.family())) return it->n == 1 ? 6.0 : 1.5;
  return 50.0;
}

}  // namespace

TEST_CASE("closed-form values") {
  const Nonlinearity id(IdentityFamily{});
  CHECK(id.f(5.0) == 5.0);
  CHECK(id.g(5.0) == 5.0);
  CHECK(id.g_second(5.0) == 0.0);

  const Nonlinearity sq(PowerFamily{2.0});
  CHECK(sq.f(3.0) == doctest::Approx(9.0));
  CHECK(sq.g(9.0) == doctest::Approx(3.0));
  CHECK(sq.g_prime(9.0) == doctest::Approx(1.0 / 6.0));

  const Nonlinearity ex(IterExpFamily{1, 1.0});
  CHECK(ex.f(1.5) == doctest::Approx(std::exp(1.5)));
  CHECK(ex.g(7.0) == doctest::Approx(std::log(7.0)));
  CHECK(ex.g_second(7.0) == doctest::Approx(-1.0 / 49.0));
  CHECK(ex.g_third(7.0) == doctest::Approx(2.0 / 343.0));
}

TEST_CASE("family parameter validation") {
  CHECK_THROWS_AS(Nonlinearity(PowerFamily{0.4}), DomainError);
  CHECK_THROWS_AS(Nonlinearity(PowerFamily{0.5}), DomainError);
  CHECK_THROWS_AS(Nonlinearity(IterExpFamily{0, 1.0}), DomainError);
  CHECK_THROWS_AS(Nonlinearity(IterExpFamily{1, 0.0}), DomainError);
  CHECK_THROWS_AS(Nonlinearity(PerturbedFamily{0.0, 0.1}), DomainError);
  CHECK_THROWS_AS(Nonlinearity(PerturbedFamily{2.0, 0.5}), DomainError);
  CHECK(Nonlinearity(PowerFamily{2.0}).domain_min() == 0.0);
  CHECK(std::isinf(Nonlinearity(IterExpFamily{1, 1.0}).domain_min()));
}

TEST_CASE("inverse round trip and derivative consistency") {
  for (const auto& nl : families()) {
    CAPTURE(nl.describe());
    for (double u : log_grid(0.1, u_cap(nl), 60)) {
      const double t = nl.f(u);
      CHECK(std::abs(nl.g(t) - u) <= 1e-10 * std::max(1.0, u));
      CHECK(std::abs(nl.g_prime(t) * nl.f_prime(u) - 1.0) <= 1e-8);
      CHECK(nl.f_prime(u) > 0.0);
    }
  }
}

TEST_CASE("shifted f has no cancellation") {
  for (const auto& nl : families()) {
    CAPTURE(nl.describe());
    for (double base : {0.5, 1.0, 3.0}) {
      if (base > u_cap(nl)) continue;
      for (double q : {-1e-9, 1e-7, -0.3, 0.2}) {
        const double direct = nl.f(base + q) - nl.f(base);
        CHECK(nl.f_shift(base, q) == doctest::Approx(direct).epsilon(std::abs(q) < 1e-6 ? 1e-6 : 1e-12));
      }
      // First-order behaviour for tiny q.
      CHECK(nl.f_shift(base, 1e-14) == doctest::Approx(nl.f_prime(base) * 1e-14).epsilon(1e-9));
    }
  }
}

TEST_CASE("derivatives of g agree with central differences") {
  for (const auto& nl : families()) {
    CAPTURE(nl.describe());
    for (double t : {3.0, 20.0, 150.0, 4000.0}) {
      const double h = 1e-4 * t;
      const double d1 = (nl.g(t + h) - nl.g(t - h)) / (2 * h);
      const double d2 = (nl.g_prime(t + h) - nl.g_prime(t - h)) / (2 * h);
      const double d3 = (nl.g_second(t + h) - nl.g_second(t - h)) / (2 * h);
      CHECK(nl.g_prime(t) == doctest::Approx(d1).epsilon(1e-6));
      if (nl.g_second(t) != 0.0) CHECK(nl.g_second(t) == doctest::Approx(d2).epsilon(1e-6));
      if (nl.g_third(t) != 0.0) CHECK(nl.g_third(t) == doctest::Approx(d3).epsilon(1e-6));
    }
  }
}

TEST_CASE("f'' agrees with central differences") {
  for (const auto& nl : families()) {
    CAPTURE(nl.describe());
    for (double u : {0.3, 0.9, 1.4}) {
      const double h = 1e-5;
      const double d = (nl.f_prime(u + h) - nl.f_prime(u - h)) / (2 * h);
      CHECK(nl.f_second(u) == doctest::Approx(d).epsilon(1e-6).scale(1e-8));
    }
  }
}

TEST_CASE("g' decays for iterated exponentials") {
  const Nonlinearity nl(IterExpFamily{2, 1.0});
  const auto grid = log_grid(20.0, 1e6, 40);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(nl.g_prime(grid[i]) < nl.g_prime(grid[i - 1]));
}

TEST_CASE("json descriptors") {
  for (const auto& nl : families()) {
    nlohmann::json j = nl;
    const auto back = nonlinearity_from_json(j);
    CHECK(back.describe() == nl.describe());
  }
  CHECK_THROWS_AS(nonlinearity_from_json(nlohmann::json{{"family", "cubic"}}), ConfigError);
  CHECK_THROWS_AS(nonlinearity_from_json(nlohmann::json{{"family", "power"}, {"params", {{"p", 0.3}}}}), DomainError);
}

TEST_CASE("assumption diagnostics") {
  const auto grid = log_grid(1.0, 1e6, 64);
  const auto rid = diagnose_assumptions(Nonlinearity(IdentityFamily{}), grid);
  CHECK(rid.all_pass());

  const auto rsq = diagnose_assumptions(Nonlinearity(PowerFamily{2.0}), grid);
  CHECK(rsq.at("A2").verdict == Verdict::Pass);
  CHECK(rsq.at("A2").end_value == doctest::Approx(0.25 * std::pow(1e6, -1.5)));
  CHECK(rsq.all_pass());
  CHECK(rsq.at("A3-proxy").proxy);

  const auto rex = diagnose_assumptions(Nonlinearity(IterExpFamily{1, 1.0}), grid);
  CHECK(rex.all_pass());

  // Close to the admissibility edge p = 1/2 the decay of g'' is slow.
  const auto rslow = diagnose_assumptions(Nonlinearity(PowerFamily{0.55}), grid);
  CHECK(rslow.at("A2").end_value > rsq.at("A2").end_value * 1e6);
  CHECK(rslow.at("A2").verdict != Verdict::Pass);

  CHECK_THROWS_AS(diagnose_assumptions(Nonlinearity(IdentityFamily{}), log_grid(1.0, 1e6, 10)), DomainError);
  CHECK_THROWS_AS(diagnose_assumptions(Nonlinearity(IdentityFamily{}), log_grid(1.0, 100.0, 40)), DomainError);
}
