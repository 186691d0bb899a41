#pragma once

#include <string>
#include <variant>

#include <json.hpp>

namespace gelfand {

struct KHessianOrigin {
  int d;
  int k;
};

struct PLaplacianOrigin {
  int d;
  double p;
};

struct RawOrigin {};

using Origin = std::variant<RawOrigin, KHessianOrigin, PLaplacianOrigin>;

/// Exponents of the radial operator L(u) = r^-gamma (r^alpha |u'|^beta u')'.
///
/// Only the triple is stored; theta, alpha_hat and theta_hat are recomputed on
/// every call so the derived values can never drift from their definitions.
class OperatorParams {
 public:
  /// Validates alpha > beta + 1, beta >= 0 and theta > 0.
  static OperatorParams raw(double alpha, double beta, double gamma);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double theta() const { return gamma_ + 2.0 + beta_ - alpha_; }
  double alpha_hat() const { return alpha_ / (beta_ + 1.0); }
  double theta_hat() const { return theta() / (beta_ + 1.0); }
  /// alpha - beta - 1, positive for every valid triple.
  double delta() const { return alpha_ - beta_ - 1.0; }

  const Origin& origin() const { return origin_; }
  std::string describe() const;

  friend bool operator==(const OperatorParams& a, const OperatorParams& b) {
    return a.alpha_ == b.alpha_ && a.beta_ == b.beta_ && a.gamma_ == b.gamma_;
  }

 private:
  OperatorParams(double alpha, double beta, double gamma, Origin origin)
      : alpha_(alpha), beta_(beta), gamma_(gamma), origin_(origin) {}

  friend OperatorParams make_khessian(int d, int k);
  friend OperatorParams make_plaplacian(int d, double p);

  double alpha_;
  double beta_;
  double gamma_;
  Origin origin_;
};

/// k-Hessian row: alpha = d-k, beta = k-1, gamma = d-1 (theta = 2k).
OperatorParams make_khessian(int d, int k);

/// p-Laplacian row: alpha = d-1, beta = p-2, gamma = d-1 (theta = p).
OperatorParams make_plaplacian(int d, double p);

enum class RegimeTag { Oscillatory, Intermediate, NonIntersecting };

struct Regime {
  RegimeTag tag;
  double delta;
  double focus_threshold;  // 4 theta / (beta + 1)
  double node_threshold;   // 4 theta (beta + 1)
};

const char* to_string(RegimeTag tag);

/// Oscillatory iff delta < 4theta/(beta+1); NonIntersecting iff
/// delta >= 4theta(beta+1); Intermediate otherwise. Integer-data origins
/// are compared exactly, everything else with a 1e-12 relative tie band.
Regime classify_regime(const OperatorParams& params);

/// theta^(beta+1) (alpha - beta - 1), the singular parameter for f(u) = u.
double lambda_star_exact(const OperatorParams& params);

void to_json(nlohmann::json& j, const OperatorParams& params);
OperatorParams operator_params_from_json(const nlohmann::json& j);

}  // namespace gelfand
