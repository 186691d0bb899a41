#include <doctest.h>

#include <cmath>

#include "gelfand/errors.hpp"
#include "gelfand/operator_params.hpp"

using namespace gelfand;

TEST_CASE("k-Hessian rows") {
  const auto p = make_khessian(3, 1);
  CHECK(p.alpha() == 2.0);
  CHECK(p.beta() == 0.0);
  CHECK(p.gamma() == 2.0);
  CHECK(p.theta() == 2.0);

  const auto q = make_khessian(5, 2);
  CHECK(q.alpha() == 3.0);
  CHECK(q.beta() == 1.0);
  CHECK(q.gamma() == 4.0);
  CHECK(q.theta() == 4.0);
  CHECK(q.alpha_hat() == doctest::Approx(1.5));
  CHECK(q.theta_hat() == doctest::Approx(2.0));

  for (int k = 1; k <= 6; ++k) {
    for (int d = 2 * k + 1; d < 2 * k + 40; ++d) CHECK(make_khessian(d, k).theta() == 2.0 * k);
  }

  CHECK_THROWS_AS(make_khessian(2, 1), DomainError);
  CHECK_THROWS_AS(make_khessian(4, 2), DomainError);
  CHECK_THROWS_AS(make_khessian(5, 0), DomainError);
}

TEST_CASE("p-Laplacian rows") {
  const auto p = make_plaplacian(5, 3.0);
  CHECK(p.alpha() == 4.0);
  CHECK(p.beta() == 1.0);
  CHECK(p.gamma() == 4.0);
  CHECK(p.theta() == 3.0);
  CHECK(make_plaplacian(3, 2.0) == make_khessian(3, 1));
  CHECK_THROWS_AS(make_plaplacian(3, 5.0), DomainError);
  CHECK_THROWS_AS(make_plaplacian(3, 3.0), DomainError);
  CHECK_THROWS_AS(make_plaplacian(5, 1.5), DomainError);
}

TEST_CASE("raw constructor validates") {
  CHECK_NOTHROW(OperatorParams::raw(8.99, 0.0, 8.99));
  CHECK_THROWS_AS(OperatorParams::raw(1.0, 0.0, 2.0), DomainError);   // alpha = beta + 1
  CHECK_THROWS_AS(OperatorParams::raw(3.0, -0.5, 2.0), DomainError);  // beta < 0
  CHECK_THROWS_AS(OperatorParams::raw(5.0, 0.0, 2.0), DomainError);   // theta < 0
  CHECK_THROWS_AS(OperatorParams::raw(NAN, 0.0, 2.0), DomainError);
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(make_khessian(3, 1)).tag == RegimeTag::Oscillatory);
  CHECK(classify_regime(make_khessian(9, 1)).tag == RegimeTag::Oscillatory);
  CHECK(classify_regime(make_khessian(10, 1)).tag == RegimeTag::NonIntersecting);
  CHECK(classify_regime(make_khessian(11, 1)).tag == RegimeTag::NonIntersecting);

  const auto r = classify_regime(make_khessian(20, 2));
  CHECK(r.tag == RegimeTag::Intermediate);
  CHECK(r.delta == 16.0);
  CHECK(r.focus_threshold == 8.0);
  CHECK(r.node_threshold == 32.0);

  // d = 9.99 written as a raw triple.
  CHECK(classify_regime(OperatorParams::raw(8.99, 0.0, 8.99)).tag == RegimeTag::Oscillatory);
  CHECK(classify_regime(OperatorParams::raw(9.0, 0.0, 9.0)).tag == RegimeTag::NonIntersecting);

  // Focus boundary for k = 2: delta = 4 theta / (beta + 1) = 8 at d = 12 ties to Intermediate.
  CHECK(classify_regime(make_khessian(11, 2)).tag == RegimeTag::Oscillatory);
  CHECK(classify_regime(make_khessian(12, 2)).tag == RegimeTag::Intermediate);
  CHECK(classify_regime(make_khessian(35, 2)).tag == RegimeTag::Intermediate);
  CHECK(classify_regime(make_khessian(36, 2)).tag == RegimeTag::NonIntersecting);
}

TEST_CASE("exact singular parameter") {
  CHECK(lambda_star_exact(make_khessian(3, 1)) == 2.0);
  CHECK(lambda_star_exact(make_khessian(5, 2)) == 16.0);
  CHECK(lambda_star_exact(make_plaplacian(5, 3.0)) == 18.0);
  CHECK(lambda_star_exact(make_khessian(11, 1)) == 18.0);
  for (int k = 1; k <= 5; ++k) {
    for (int d = 2 * k + 1; d < 2 * k + 12; ++d) {
      CHECK(lambda_star_exact(make_khessian(d, k)) == std::pow(2.0 * k, k) * (d - 2 * k));
    }
  }
}

TEST_CASE("json round trip") {
  for (const auto& p : {make_khessian(5, 2), make_plaplacian(5, 3.0), OperatorParams::raw(2.5, 0.5, 3.0)}) {
    nlohmann::json j = p;
    const auto back = operator_params_from_json(j);
    CHECK(back == p);
    CHECK(back.origin().index() == p.origin().index());
  }
  nlohmann::json j = make_khessian(3, 1);
  CHECK(j["origin"] == "khessian");
  CHECK(j["alpha"] == 2.0);

  nlohmann::json bad = {{"origin", "khessian"}, {"d", 3}, {"k", 1}, {"alpha", 5.0}};
  CHECK_THROWS_AS(operator_params_from_json(bad), ConfigError);
  CHECK_THROWS_AS(operator_params_from_json(nlohmann::json{{"origin", "nope"}}), ConfigError);
  CHECK_THROWS_AS(operator_params_from_json(nlohmann::json{{"origin", "khessian"}, {"d", 2}, {"k", 1}}), DomainError);
}
