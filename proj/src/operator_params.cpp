#include "gelfand/operator_params.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

constexpr double kTieBand = 1e-12;

void validate(double alpha, double beta, double gamma) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) {
    throw DomainError("operator exponents must be finite");
  }
  if (beta < 0.0) throw DomainError("beta must be >= 0");
  if (!(alpha > beta + 1.0)) throw DomainError("alpha > beta + 1 is required");
  if (!(gamma + 2.0 + beta - alpha > 0.0)) throw DomainError("theta = gamma + 2 + beta - alpha must be positive");
}

// -1, 0, +1 for a < b, a == b, a > b with a relative tie band.
int compare(double a, double b) {
  const double band = kTieBand * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  if (std::abs(a - b) <= band) return 0;
  return a < b ? -1 : 1;
}

}  // namespace

OperatorParams OperatorParams::raw(double alpha, double beta, double gamma) {
  validate(alpha, beta, gamma);
  return OperatorParams(alpha, beta, gamma, RawOrigin{});
}

OperatorParams make_khessian(int d, int k) {
  if (k < 1) throw DomainError("k-Hessian order must satisfy k >= 1");
  if (d <= 2 * k) throw DomainError("k-Hessian requires d > 2k (alpha > beta + 1)");
  const double alpha = d - k;
  const double beta = k - 1;
  const double gamma = d - 1;
  validate(alpha, beta, gamma);
  return OperatorParams(alpha, beta, gamma, KHessianOrigin{d, k});
}

OperatorParams make_plaplacian(int d, double p) {
  if (!(p >= 2.0)) throw DomainError("p-Laplacian requires p >= 2 (beta >= 0)");
  if (!(p < d)) throw DomainError("p-Laplacian requires p < d (alpha > beta + 1)");
  const double alpha = d - 1;
  const double beta = p - 2.0;
  const double gamma = d - 1;
  validate(alpha, beta, gamma);
  return OperatorParams(alpha, beta, gamma, PLaplacianOrigin{d, p});
}

std::string OperatorParams::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* kh = std::get_if<KHessianOrigin>(&origin_)) {
    os << "k-Hessian(d=" << kh->d << ", k=" << kh->k << ")";
  } else if (const auto* pl = std::get_if<PLaplacianOrigin>(&origin_)) {
    os << "p-Laplacian(d=" << pl->d << ", p=" << pl->p << ")";
  } else {
    os << "raw(alpha=" << alpha_ << ", beta=" << beta_ << ", gamma=" << gamma_ << ")";
  }
  return os.str();
}

const char* to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::Oscillatory: return "Oscillatory";
    case RegimeTag::Intermediate: return "Intermediate";
    case RegimeTag::NonIntersecting: return "NonIntersecting";
  }
  return "?";
}

Regime classify_regime(const OperatorParams& params) {
  Regime r{};
  r.delta = params.delta();
  r.focus_threshold = 4.0 * params.theta() / (params.beta() + 1.0);
  r.node_threshold = 4.0 * params.theta() * (params.beta() + 1.0);

  int vs_focus = 0;
  int vs_node = 0;
  if (const auto* kh = std::get_if<KHessianOrigin>(&params.origin())) {
    // delta = d - 2k, 4 theta/(beta+1) = 8, 4 theta (beta+1) = 8 k^2.
    const long long delta = kh->d - 2LL * kh->k;
    const long long node = 8LL * kh->k * kh->k;
    vs_focus = delta < 8 ? -1 : (delta == 8 ? 0 : 1);
    vs_node = delta < node ? -1 : (delta == node ? 0 : 1);
  } else {
    vs_focus = compare(r.delta, r.focus_threshold);
    vs_node = compare(r.delta, r.node_threshold);
  }

  if (vs_node >= 0) {
    r.tag = RegimeTag::NonIntersecting;
  } else if (vs_focus < 0) {
    r.tag = RegimeTag::Oscillatory;
  } else {
    r.tag = RegimeTag::Intermediate;
  }
  return r;
}

double lambda_star_exact(const OperatorParams& params) {
  if (const auto* kh = std::get_if<KHessianOrigin>(&params.origin())) {
    // (2k)^k (d - 2k) in integer arithmetic while it fits.
    double value = 1.0;
    for (int i = 0; i < kh->k; ++i) value *= 2.0 * kh->k;
    return value * (kh->d - 2 * kh->k);
  }
  return std::pow(params.theta(), params.beta() + 1.0) * params.delta();
}

void to_json(nlohmann::json& j, const OperatorParams& params) {
  j = nlohmann::json{{"alpha", params.alpha()}, {"beta", params.beta()}, {"gamma", params.gamma()}};
  if (const auto* kh = std::get_if<KHessianOrigin>(&params.origin())) {
    j["origin"] = "khessian";
    j["d"] = kh->d;
    j["k"] = kh->k;
  } else if (const auto* pl = std::get_if<PLaplacianOrigin>(&params.origin())) {
    j["origin"] = "plaplacian";
    j["d"] = pl->d;
    j["p"] = pl->p;
  } else {
    j["origin"] = "raw";
  }
}

OperatorParams operator_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("operator descriptor must be a JSON object");
  const std::string origin = j.value("origin", std::string("raw"));
  try {
    OperatorParams params = [&] {
      if (origin == "khessian") return make_khessian(j.at("d").get<int>(), j.at("k").get<int>());
      if (origin == "plaplacian") return make_plaplacian(j.at("d").get<int>(), j.at("p").get<double>());
      if (origin == "raw") {
        return OperatorParams::raw(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                                   j.at("gamma").get<double>());
      }
      throw ConfigError("unknown operator origin '" + origin + "'");
    }();
    // Explicit exponents next to a named origin must agree with it.
    for (const char* key : {"alpha", "beta", "gamma"}) {
      if (origin != "raw" && j.contains(key)) {
        const double given = j.at(key).get<double>();
        const double derived = key[0] == 'a' ? params.alpha() : (key[0] == 'b' ? params.beta() : params.gamma());
        if (given != derived) throw ConfigError(std::string("operator field '") + key + "' disagrees with origin");
      }
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed operator descriptor: ") + e.what());
  }
}

}  // namespace gelfand
