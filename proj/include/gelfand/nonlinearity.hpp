#pragma once

#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gelfand {

struct IdentityFamily {};

/// f(u) = u^p, p > 1/2.
struct PowerFamily {
  double p;
};

/// f(u) = exp^{on}(u^p), n >= 1, p > 0.
struct IterExpFamily {
  int n;
  double p;
};

/// f(u) = u + amplitude * exp(-decay * u).
struct PerturbedFamily {
  double decay;
  double amplitude;
};

using Family = std::variant<IdentityFamily, PowerFamily, IterExpFamily, PerturbedFamily>;

/// The nonlinearity f in L(u) + e^{f(u)} = 0 together with its inverse g.
///
/// e^{f(u)} is never formed here. Callers that need it combine f(u) with
/// their own exponents; `f_shift` gives f(base + q) - f(base) without
/// cancellation so that solvers can work relative to a large base value.
class Nonlinearity {
 public:
  explicit Nonlinearity(Family family);

  double f(double u) const;
  double f_prime(double u) const;
  double f_second(double u) const;
  /// f(base + q) - f(base).
  double f_shift(double base, double q) const;

  double g(double t) const;
  double g_prime(double t) const;
  double g_second(double t) const;
  double g_third(double t) const;

  /// Smallest u on which f is defined and increasing (-inf when unbounded).
  double domain_min() const { return domain_min_; }
  bool is_identity() const { return std::holds_alternative<IdentityFamily>(family_); }
  const Family& family() const { return family_; }
  std::string describe() const;

 private:
  Family family_;
  double domain_min_ = -std::numeric_limits<double>::infinity();
};

Nonlinearity make_nonlinearity(Family family);

void to_json(nlohmann::json& j, const Nonlinearity& nl);
Nonlinearity nonlinearity_from_json(const nlohmann::json& j);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct AssumptionCheck {
  std::string name;
  std::string monitored;
  Verdict verdict = Verdict::Inconclusive;
  double worst_value = 0.0;
  double worst_location = 0.0;
  double end_value = 0.0;
  double threshold = 0.0;
  bool proxy = false;
};

/// Grid evidence for the growth assumptions on g = f^{-1}; never a proof.
struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  const AssumptionCheck& at(const std::string& name) const;
  bool all_pass() const;
};

struct DiagnosticThresholds {
  double g_second = 1e-3;
  double log_ratio = 1e-2;
  double a3_proxy = 0.15;
  double tail_excess = 1e-3;
};

/// Evaluates the monitored quantities on an increasing grid of t values
/// (at least 32 points, max >= 1e3). A verdict is Pass only when the quantity
/// is non-increasing over the last half of the grid and below its threshold
/// at the final point.
AssumptionReport diagnose_assumptions(const Nonlinearity& nl, std::span<const double> t_grid,
                                      const DiagnosticThresholds& thresholds = {});

}  // namespace gelfand
