#include "gelfand/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// (base + q)^p - base^p without cancellation.
double power_shift(double base, double q, double p) {
  if (p == 1.0) return q;
  if (base == 0.0) return std::pow(q, p);
  return std::pow(base, p) * std::expm1(p * std::log1p(q / base));
}

double power_value(double u, double p) { return p == 1.0 ? u : std::pow(u, p); }

double power_derivative(double u, double p) { return p == 1.0 ? 1.0 : p * std::pow(u, p - 1.0); }

// Iterated logarithms b_0 = t, b_i = ln b_{i-1} for i = 0..n.
std::vector<double> iterated_logs(double t, int n) {
  std::vector<double> b(static_cast<std::size_t>(n) + 1);
  b[0] = t;
  for (int i = 1; i <= n; ++i) b[i] = std::log(b[i - 1]);
  return b;
}

struct IterLogDerivs {
  double g1;  // g'
  double h;   // g''/g'
  double dh;  // d/dt (g''/g')
};

// g(t) = b_n^{1/p}; ln g' = -ln p + (1/p - 1) ln b_n - sum_{i<n} ln b_i.
IterLogDerivs iterexp_inverse_derivs(const IterExpFamily& fam, double t) {
  const auto b = iterated_logs(t, fam.n);
  const double ip = 1.0 / fam.p;
  // b_i' = 1 / prod_{j<i} b_j and b_i'' = b_i' * (-sum_{j<i} b_j'/b_j).
  std::vector<double> d1(b.size());
  std::vector<double> d2(b.size());
  double prod_inv = 1.0;
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    d1[i] = prod_inv;
    d2[i] = prod_inv * (-ratio_sum);
    ratio_sum += d1[i] / b[i];
    prod_inv /= b[i];
  }
  const std::size_t n = b.size() - 1;
  double g1 = ip;
  for (std::size_t i = 0; i < n; ++i) g1 /= b[i];
  double h = 0.0;
  double dh = 0.0;
  if (fam.p != 1.0) {
    g1 *= std::pow(b[n], ip - 1.0);
    const double rn = d1[n] / b[n];
    h += (ip - 1.0) * rn;
    dh += (ip - 1.0) * (d2[n] / b[n] - rn * rn);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ri = d1[i] / b[i];
    h -= ri;
    dh -= d2[i] / b[i] - ri * ri;
  }
  return {g1, h, dh};
}

double perturbed_f(const PerturbedFamily& fam, double u) { return u + fam.amplitude * std::exp(-fam.decay * u); }

double perturbed_inverse(const PerturbedFamily& fam, double t) {
  const double c = std::abs(fam.amplitude);
  double lo = t - c;
  double hi = t + c;
  auto h = [&](double u) { return perturbed_f(fam, u) - t; };
  for (int i = 0; i < 200 && h(lo) > 0.0; ++i) lo -= std::max(1.0, c);
  for (int i = 0; i < 200 && h(hi) < 0.0; ++i) hi += std::max(1.0, c);
  const double hlo = h(lo);
  const double hhi = h(hi);
  if (hlo == 0.0) return lo;
  if (hhi == 0.0) return hi;
  if (!(hlo < 0.0 && hhi > 0.0)) throw EvalError("perturbed inverse: failed to bracket root");
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(h, lo, hi, hlo, hhi,
                                                        boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

}  // namespace

Nonlinearity::Nonlinearity(Family family) : family_(family) {
  std::visit(Overloaded{
                 [&](const IdentityFamily&) { domain_min_ = -kInf; },
                 [&](const PowerFamily& fam) {
                   if (!(std::isfinite(fam.p) && fam.p > 0.5)) throw DomainError("power family requires p > 1/2");
                   domain_min_ = fam.p == 1.0 ? -kInf : 0.0;
                 },
                 [&](const IterExpFamily& fam) {
                   if (fam.n < 1) throw DomainError("iterated exponential requires n >= 1");
                   if (!(std::isfinite(fam.p) && fam.p > 0.0)) throw DomainError("iterated exponential requires p > 0");
                   domain_min_ = fam.p == 1.0 ? -kInf : 0.0;
                 },
                 [&](const PerturbedFamily& fam) {
                   if (!(std::isfinite(fam.decay) && fam.decay > 0.0)) throw DomainError("perturbed family requires decay > 0");
                   if (!std::isfinite(fam.amplitude)) throw DomainError("perturbed family requires finite amplitude");
                   if (fam.amplitude * fam.decay >= 1.0) {
                     throw DomainError("perturbed family requires amplitude * decay < 1 so that f' > 0 on [0, inf)");
                   }
                   domain_min_ = fam.amplitude > 0.0 ? 0.0 : -kInf;
                 },
             },
             family_);
}

double Nonlinearity::f(double u) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return u; },
                        [&](const PowerFamily& fam) { return power_value(u, fam.p); },
                        [&](const IterExpFamily& fam) {
                          double a = power_value(u, fam.p);
                          for (int i = 0; i < fam.n; ++i) a = std::exp(a);
                          return a;
                        },
                        [&](const PerturbedFamily& fam) { return perturbed_f(fam, u); },
                    },
                    family_);
}

double Nonlinearity::f_prime(double u) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return 1.0; },
                        [&](const PowerFamily& fam) { return power_derivative(u, fam.p); },
                        [&](const IterExpFamily& fam) {
                          double a = power_value(u, fam.p);
                          double d = power_derivative(u, fam.p);
                          for (int i = 0; i < fam.n; ++i) {
                            a = std::exp(a);
                            d *= a;
                          }
                          return d;
                        },
                        [&](const PerturbedFamily& fam) {
                          return 1.0 - fam.amplitude * fam.decay * std::exp(-fam.decay * u);
                        },
                    },
                    family_);
}

double Nonlinearity::f_second(double u) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return 0.0; },
                        [&](const PowerFamily& fam) {
                          return fam.p == 1.0 ? 0.0 : fam.p * (fam.p - 1.0) * std::pow(u, fam.p - 2.0);
                        },
                        [&](const IterExpFamily& fam) {
                          // f''/f' = (p-1)/u + sum_{j<n} a_j'.
                          double a = power_value(u, fam.p);
                          double da = power_derivative(u, fam.p);
                          double log_deriv = fam.p == 1.0 ? 0.0 : (fam.p - 1.0) / u;
                          for (int i = 0; i < fam.n; ++i) {
                            log_deriv += da;
                            a = std::exp(a);
                            da *= a;
                          }
                          return da * log_deriv;
                        },
                        [&](const PerturbedFamily& fam) {
                          return fam.amplitude * fam.decay * fam.decay * std::exp(-fam.decay * u);
                        },
                    },
                    family_);
}

double Nonlinearity::f_shift(double base, double q) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return q; },
                        [&](const PowerFamily& fam) { return power_shift(base, q, fam.p); },
                        [&](const IterExpFamily& fam) {
                          double a = power_value(base, fam.p);
                          double d = power_shift(base, q, fam.p);
                          for (int i = 0; i < fam.n; ++i) {
                            a = std::exp(a);
                            d = a * std::expm1(d);
                          }
                          return d;
                        },
                        [&](const PerturbedFamily& fam) {
                          return q + fam.amplitude * std::exp(-fam.decay * base) * std::expm1(-fam.decay * q);
                        },
                    },
                    family_);
}

double Nonlinearity::g(double t) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return t; },
                        [&](const PowerFamily& fam) { return fam.p == 1.0 ? t : std::pow(t, 1.0 / fam.p); },
                        [&](const IterExpFamily& fam) {
                          const double bn = iterated_logs(t, fam.n).back();
                          return fam.p == 1.0 ? bn : std::pow(bn, 1.0 / fam.p);
                        },
                        [&](const PerturbedFamily& fam) { return perturbed_inverse(fam, t); },
                    },
                    family_);
}

double Nonlinearity::g_prime(double t) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return 1.0; },
                        [&](const PowerFamily& fam) { return std::pow(t, 1.0 / fam.p - 1.0) / fam.p; },
                        [&](const IterExpFamily& fam) { return iterexp_inverse_derivs(fam, t).g1; },
                        [&](const PerturbedFamily&) { return 1.0 / f_prime(g(t)); },
                    },
                    family_);
}

double Nonlinearity::g_second(double t) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return 0.0; },
                        [&](const PowerFamily& fam) {
                          const double ip = 1.0 / fam.p;
                          return ip * (ip - 1.0) * std::pow(t, ip - 2.0);
                        },
                        [&](const IterExpFamily& fam) {
                          const auto d = iterexp_inverse_derivs(fam, t);
                          return d.g1 * d.h;
                        },
                        [&](const PerturbedFamily&) {
                          const double u = g(t);
                          const double fp = f_prime(u);
                          return -f_second(u) / (fp * fp * fp);
                        },
                    },
                    family_);
}

double Nonlinearity::g_third(double t) const {
  return std::visit(Overloaded{
                        [&](const IdentityFamily&) { return 0.0; },
                        [&](const PowerFamily& fam) {
                          const double ip = 1.0 / fam.p;
                          return ip * (ip - 1.0) * (ip - 2.0) * std::pow(t, ip - 3.0);
                        },
                        [&](const IterExpFamily& fam) {
                          const auto d = iterexp_inverse_derivs(fam, t);
                          return d.g1 * (d.h * d.h + d.dh);
                        },
                        [&](const PerturbedFamily& fam) {
                          const double u = g(t);
                          const double fp = f_prime(u);
                          const double fpp = f_second(u);
                          const double fppp = -fam.amplitude * std::pow(fam.decay, 3) * std::exp(-fam.decay * u);
                          return (3.0 * fpp * fpp - fp * fppp) / std::pow(fp, 5);
                        },
                    },
                    family_);
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const IdentityFamily&) { os << "identity"; },
                 [&](const PowerFamily& fam) { os << "power(p=" << fam.p << ")"; },
                 [&](const IterExpFamily& fam) { os << "iterexp(n=" << fam.n << ", p=" << fam.p << ")"; },
                 [&](const PerturbedFamily& fam) {
                   os << "perturbed(decay=" << fam.decay << ", amplitude=" << fam.amplitude << ")";
                 },
             },
             family_);
  return os.str();
}

Nonlinearity make_nonlinearity(Family family) { return Nonlinearity(family); }

void to_json(nlohmann::json& j, const Nonlinearity& nl) {
  std::visit(Overloaded{
                 [&](const IdentityFamily&) { j = {{"family", "identity"}, {"params", nlohmann::json::object()}}; },
                 [&](const PowerFamily& fam) { j = {{"family", "power"}, {"params", {{"p", fam.p}}}}; },
                 [&](const IterExpFamily& fam) { j = {{"family", "iterexp"}, {"params", {{"n", fam.n}, {"p", fam.p}}}}; },
                 [&](const PerturbedFamily& fam) {
                   j = {{"family", "perturbed"}, {"params", {{"decay", fam.decay}, {"amplitude", fam.amplitude}}}};
                 },
             },
             nl.family());
}

Nonlinearity nonlinearity_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("nonlinearity descriptor must be a JSON object");
  try {
    const std::string family = j.at("family").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    if (family == "identity") return Nonlinearity(IdentityFamily{});
    if (family == "power") return Nonlinearity(PowerFamily{params.at("p").get<double>()});
    if (family == "iterexp") {
      return Nonlinearity(IterExpFamily{params.value("n", 1), params.value("p", 1.0)});
    }
    if (family == "perturbed") {
      return Nonlinearity(PerturbedFamily{params.at("decay").get<double>(), params.at("amplitude").get<double>()});
    }
    throw ConfigError("unknown nonlinearity family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed nonlinearity descriptor: ") + e.what());
  }
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

const AssumptionCheck& AssumptionReport::at(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no assumption check named " + name);
}

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.verdict == Verdict::Pass; });
}

AssumptionReport diagnose_assumptions(const Nonlinearity& nl, std::span<const double> t_grid,
                                      const DiagnosticThresholds& thresholds) {
  if (t_grid.size() < 32) throw DomainError("diagnostic grid needs at least 32 points");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("diagnostic grid must be strictly increasing");
  }
  if (!(t_grid.front() > 0.0)) throw DomainError("diagnostic grid must be positive");
  if (t_grid.back() < 1e3) throw DomainError("diagnostic grid must reach t >= 1e3");

  const std::size_t n = t_grid.size();
  std::vector<double> g2(n);
  for (std::size_t i = 0; i < n; ++i) g2[i] = std::abs(nl.g_second(t_grid[i]));

  auto make = [&](std::string name, std::string monitored, double threshold, bool proxy, auto&& quantity) {
    AssumptionCheck c;
    c.name = std::move(name);
    c.monitored = std::move(monitored);
    c.threshold = threshold;
    c.proxy = proxy;
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = quantity(i);
      if (!std::isfinite(q[i])) {
        throw EvalError("assumption diagnostic '" + c.name + "' is not finite at t = " + std::to_string(t_grid[i]));
      }
    }
    const std::size_t half = n / 2;
    bool shrinking = true;
    for (std::size_t i = half; i + 1 < n; ++i) {
      if (q[i + 1] > q[i] * (1.0 + 1e-9) + 1e-300) shrinking = false;
    }
    c.worst_value = q[half];
    c.worst_location = t_grid[half];
    for (std::size_t i = half; i < n; ++i) {
      if (q[i] > c.worst_value) {
        c.worst_value = q[i];
        c.worst_location = t_grid[i];
      }
    }
    c.end_value = q.back();
    if (shrinking && c.end_value < threshold) {
      c.verdict = Verdict::Pass;
    } else if (c.end_value >= threshold && q.back() >= q[half]) {
      c.verdict = Verdict::Fail;
    } else {
      c.verdict = Verdict::Inconclusive;
    }
    return c;
  };

  AssumptionReport report;
  report.checks.push_back(make("A2", "|g''(t)|", thresholds.g_second, false, [&](std::size_t i) { return g2[i]; }));
  report.checks.push_back(make("A4", "|g''/g' ln g'|", thresholds.log_ratio, false, [&](std::size_t i) {
    if (g2[i] == 0.0) return 0.0;
    const double g1 = nl.g_prime(t_grid[i]);
    return std::abs(nl.g_second(t_grid[i]) / g1 * std::log(g1));
  }));
  report.checks.push_back(make("A3-proxy", "|g'(t)/g'(1.1 t) - 1|", thresholds.a3_proxy, true, [&](std::size_t i) {
    return std::abs(nl.g_prime(t_grid[i]) / nl.g_prime(1.1 * t_grid[i]) - 1.0);
  }));
  std::vector<double> tail_sup(n);
  tail_sup[n - 1] = g2[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) tail_sup[i] = std::max(tail_sup[i + 1], g2[i]);
  report.checks.push_back(make("A5b", "sup_{s>=t}|g''(s)| - |g''(t)|", thresholds.tail_excess, false,
                               [&](std::size_t i) { return tail_sup[i] - g2[i]; }));
  report.checks.push_back(make("A2'", "|f''/f'^3| at u = g(t)", thresholds.g_second, false, [&](std::size_t i) {
    const double u = nl.g(t_grid[i]);
    const double fp = nl.f_prime(u);
    return std::abs(nl.f_second(u) / (fp * fp * fp));
  }));
  report.checks.push_back(make("A4'", "|f''/f'^2 ln f'| at u = g(t)", thresholds.log_ratio, false, [&](std::size_t i) {
    const double u = nl.g(t_grid[i]);
    const double fpp = nl.f_second(u);
    if (fpp == 0.0) return 0.0;
    const double fp = nl.f_prime(u);
    return std::abs(fpp / (fp * fp) * std::log(fp));
  }));
  return report;
}

}  // namespace gelfand
