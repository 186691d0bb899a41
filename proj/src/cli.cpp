#include "gelfand/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "gelfand/bifurcation.hpp"
#include "gelfand/errors.hpp"
#include "gelfand/io.hpp"
#include "gelfand/phase_plane.hpp"
#include "gelfand/regular_solver.hpp"
#include "gelfand/singular.hpp"

namespace gelfand::cli {

namespace {

double to_number(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::string six(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

Nonlinearity parse_nonlinearity(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{') {
    try {
      return nonlinearity_from_json(nlohmann::json::parse(spec));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad nonlinearity JSON: ") + e.what());
    }
  }
  const auto parts = split(spec, ':');
  if (parts.empty()) throw ConfigError("empty nonlinearity");
  const std::string& name = parts[0];
  try {
    if (name == "identity" && parts.size() == 1) return Nonlinearity(IdentityFamily{});
    if (name == "exp" && parts.size() == 1) return Nonlinearity(IterExpFamily{1, 1.0});
    if (name == "power" && parts.size() == 2) return Nonlinearity(PowerFamily{to_number(parts[1])});
    if (name == "iterexp" && (parts.size() == 2 || parts.size() == 3)) {
      const double n = to_number(parts[1]);
      if (n != std::floor(n)) throw ConfigError("iterexp depth must be an integer");
      return Nonlinearity(IterExpFamily{static_cast<int>(n), parts.size() == 3 ? to_number(parts[2]) : 1.0});
    }
    if (name == "perturbed" && parts.size() == 3) {
      return Nonlinearity(PerturbedFamily{to_number(parts[1]), to_number(parts[2])});
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown nonlinearity '" + spec + "'");
}

Range parse_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("range must be lo:hi:n");
  const double n = to_number(parts[2]);
  if (!(n >= 1) || n != std::floor(n)) throw ConfigError("range count must be a positive integer");
  return {to_number(parts[0]), to_number(parts[1]), static_cast<std::size_t>(n)};
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError("window must be lo:hi");
  return {to_number(parts[0]), to_number(parts[1])};
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  if (cfg.op) j["operator"] = *cfg.op;
  j["nonlinearity"] = cfg.nl;
  j["tol"] = cfg.tol;
  if (cfg.rho) j["rho"] = *cfg.rho;
  if (cfg.rho_range) j["rho_range"] = {cfg.rho_range->lo, cfg.rho_range->hi, cfg.rho_range->n};
  j["log"] = cfg.log_spacing;
  if (cfg.r_max) j["r_max"] = *cfg.r_max;
  if (cfg.window) j["window"] = {cfg.window->first, cfg.window->second};
  j["samples"] = cfg.samples;
  j["format"] = cfg.format;
  if (!cfg.out.empty()) j["out"] = cfg.out;
  if (cfg.threads) j["threads"] = cfg.threads;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"operator", "nonlinearity", "tol", "rho", "rho_range", "log", "r_max",
                                              "window", "samples", "format", "out", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    if (j.contains("operator")) c.op = operator_params_from_json(j["operator"]);
    if (j.contains("nonlinearity")) c.nl = nonlinearity_from_json(j["nonlinearity"]);
    c.tol = j.value("tol", c.tol);
    if (j.contains("rho")) c.rho = j["rho"].get<double>();
    if (j.contains("rho_range")) {
      const auto& r = j["rho_range"];
      if (r.is_string()) {
        c.rho_range = parse_range(r.get<std::string>());
      } else {
        c.rho_range = Range{r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<std::size_t>()};
      }
    }
    c.log_spacing = j.value("log", false);
    if (j.contains("r_max")) c.r_max = j["r_max"].get<double>();
    if (j.contains("window")) c.window = std::make_pair(j["window"].at(0).get<double>(), j["window"].at(1).get<double>());
    c.samples = j.value("samples", c.samples);
    c.format = j.value("format", c.format);
    c.out = j.value("out", c.out);
    c.threads = j.value("threads", 0u);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

namespace {

struct Flags {
  std::string config;
  std::vector<int> khessian;
  std::vector<double> plaplacian;
  std::vector<double> raw;
  std::string f;
  double tol = 0.0;
  std::string rho;
  bool log_spacing = false;
  double r_max = 0.0;
  std::string window;
  std::size_t samples = 0;
  std::string format;
  std::string out;
  unsigned threads = 0;
  // phase
  double x0 = 0.0, y0 = 0.0;
  std::string t_span;
  // singular
  double r0 = 0.0;
  bool asymptotic = false;
  bool remainder = false;

  CLI::Option* o_khessian = nullptr;
  CLI::Option* o_plaplacian = nullptr;
  CLI::Option* o_raw = nullptr;
  CLI::Option* o_f = nullptr;
  CLI::Option* o_tol = nullptr;
  CLI::Option* o_rho = nullptr;
  CLI::Option* o_log = nullptr;
  CLI::Option* o_r_max = nullptr;
  CLI::Option* o_window = nullptr;
  CLI::Option* o_samples = nullptr;
  CLI::Option* o_format = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_threads = nullptr;
  CLI::Option* o_x0 = nullptr;
};

void add_operator(CLI::App* app, Flags& f) {
  f.o_khessian = app->add_option("--khessian", f.khessian, "k-Hessian operator: d k")->expected(2);
  f.o_plaplacian = app->add_option("--plaplacian", f.plaplacian, "p-Laplacian operator: d p")->expected(2);
  f.o_raw = app->add_option("--raw", f.raw, "raw exponents: alpha beta gamma")->expected(3);
  f.o_khessian->excludes(f.o_plaplacian)->excludes(f.o_raw);
  f.o_plaplacian->excludes(f.o_raw);
  app->add_option("--config", f.config, "JSON config file; flags override its values");
}

void add_common(CLI::App* app, Flags& f) {
  add_operator(app, f);
  f.o_f = app->add_option("--f", f.f, "nonlinearity: identity | exp | power:P | iterexp:N[:P] | perturbed:D:A | JSON");
  f.o_tol = app->add_option("--tol", f.tol, "solver tolerance (default 1e-10)");
  f.o_out = app->add_option("--out", f.out, "output file ('-' for stdout)");
  f.o_format = app->add_option("--format", f.format, "output format")->check(CLI::IsMember({"csv", "json", "gnuplot"}));
}

OperatorParams operator_from_flags(const Flags& f) {
  if (f.o_khessian->count()) return make_khessian(f.khessian[0], f.khessian[1]);
  if (f.o_plaplacian->count()) {
    const double d = f.plaplacian[0];
    if (d != std::floor(d)) throw DomainError("dimension d must be an integer");
    return make_plaplacian(static_cast<int>(d), f.plaplacian[1]);
  }
  return OperatorParams::raw(f.raw[0], f.raw[1], f.raw[2]);
}

RunConfig assemble(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot read config '" + f.config + "'");
    try {
      c = run_config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  if ((f.o_khessian && f.o_khessian->count()) || (f.o_plaplacian && f.o_plaplacian->count()) ||
      (f.o_raw && f.o_raw->count())) {
    c.op = operator_from_flags(f);
  }
  if (f.o_f && f.o_f->count()) c.nl = parse_nonlinearity(f.f);
  if (f.o_tol && f.o_tol->count()) c.tol = f.tol;
  if (f.o_rho && f.o_rho->count()) {
    if (f.rho.find(':') != std::string::npos) {
      c.rho_range = parse_range(f.rho);
      c.rho.reset();
    } else {
      c.rho = to_number(f.rho);
      c.rho_range.reset();
    }
  }
  if (f.o_log && f.o_log->count()) c.log_spacing = f.log_spacing;
  if (f.o_r_max && f.o_r_max->count()) c.r_max = f.r_max;
  if (f.o_window && f.o_window->count()) c.window = parse_window(f.window);
  if (f.o_samples && f.o_samples->count()) c.samples = f.samples;
  if (f.o_format && f.o_format->count()) c.format = f.format;
  if (f.o_out && f.o_out->count()) c.out = f.out;
  if (f.o_threads && f.o_threads->count()) c.threads = f.threads;
  if (!c.op) throw ConfigError("an operator is required (--khessian, --plaplacian, --raw or config)");
  if (!(c.tol >= 1e-14 && c.tol <= 1e-3)) throw ConfigError("tol must lie in [1e-14, 1e-3]");
  return c;
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) return;
  if (c.out == "-") {
    out << text;
  } else {
    write_text_file(c.out, text);
  }
}

double require_rho(const RunConfig& c) {
  if (!c.rho) throw ConfigError("--rho VALUE is required");
  return *c.rho;
}

std::vector<double> log_radii(double lo, double hi, std::size_t n) {
  std::vector<double> r;
  for (std::size_t i = 0; i < n; ++i) {
    r.push_back(n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
  }
  r.front() = lo;
  if (n > 1) r.back() = hi;
  return r;
}

int cmd_params(const Flags& f, std::ostream& out) {
  const RunConfig c = assemble(f);
  const auto& p = *c.op;
  const auto reg = classify_regime(p);
  const auto fp = classify_fixed_point(p);
  nlohmann::json j{{"alpha", p.alpha()},
                   {"beta", p.beta()},
                   {"gamma", p.gamma()},
                   {"theta", p.theta()},
                   {"delta", p.delta()},
                   {"alpha_hat", p.alpha_hat()},
                   {"theta_hat", p.theta_hat()},
                   {"lambda_star_identity", lambda_star_exact(p)},
                   {"regime", to_string(reg.tag)},
                   {"fixed_point", to_string(fp.classification)}};
  out << p.describe() << "\n";
  out << "theta=" << six(p.theta()) << " delta=" << six(p.delta()) << " alpha_hat=" << six(p.alpha_hat())
      << " theta_hat=" << six(p.theta_hat()) << "\n";
  out << "lambda*=" << six(lambda_star_exact(p)) << " (f = u)\n";
  out << "regime=" << to_string(reg.tag) << " fixed_point=" << to_string(fp.classification) << "\n";
  emit(c, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_solve(const Flags& f, std::ostream& out) {
  const RunConfig c = assemble(f);
  const double rho = require_rho(c);
  const auto& p = *c.op;
  const double log_R = find_log_radius(p, c.nl, rho, 0.0, c.tol);
  const double r_max = c.r_max ? *c.r_max : std::exp(log_R);
  const auto traj = solve_ivp(p, c.nl, rho, r_max, c.tol);
  std::vector<double> radii;
  const std::size_t n = std::max<std::size_t>(c.samples, 2);
  for (std::size_t i = 0; i < n; ++i) radii.push_back(traj.r_max() * static_cast<double>(i) / (n - 1));
  out << "rho=" << six(rho) << " R(0,rho)=" << six(std::exp(log_R)) << " lambda(rho)=" << six(std::exp(p.theta() * log_R))
      << " u(r_max)=" << six(traj.u_at(r_max)) << (traj.ended_at_domain_edge() ? " (stopped at domain edge)" : "")
      << "\n";
  emit(c, c.format == "json" ? trajectory_json(traj, radii).dump(2) + "\n" : trajectory_csv(traj, radii), out);
  return kOk;
}

int cmd_singular(const Flags& f, std::ostream& out) {
  const RunConfig c = assemble(f);
  const auto& p = *c.op;
  const double r_max = c.r_max ? *c.r_max : 1.0;
  const auto sing = (c.nl.is_identity() && f.r0 == 0.0) ? exact_singular(p) : numeric_singular(p, c.nl, f.r0, r_max, c.tol);
  const auto win = c.window ? *c.window : std::make_pair(1e-8, r_max);
  const auto radii = log_radii(win.first, win.second, std::max<std::size_t>(c.samples, 2));
  out << "kind=" << to_string(sing.kind()) << " lambda*=" << six(sing.lambda_star());
  if (sing.kind() == SingularKind::AsymptoticSeededNumeric) out << " seed_radius=" << six(sing.seed_radius());
  if (f.remainder) out << " remainder_order=" << six(remainder_order(p, c.nl, win.first, std::min(win.second, 1e-3)));
  out << "\n";
  if (f.asymptotic) {
    emit(c, asymptotic_csv(p, c.nl, sing.lambda_star(), radii), out);
  } else {
    emit(c, c.format == "json" ? singular_json(sing, radii).dump(2) + "\n" : singular_csv(sing, radii), out);
  }
  return kOk;
}

int cmd_bifurcate(const Flags& f, std::ostream& out) {
  RunConfig c = assemble(f);
  std::vector<double> grid;
  if (c.rho_range) {
    grid = make_grid(c.rho_range->lo, c.rho_range->hi, c.rho_range->n, c.log_spacing);
  } else {
    grid = make_grid(0.1, 30.0, 256, true);
  }
  SweepOptions opt;
  opt.threads = c.threads;
  const auto curve = sweep(*c.op, c.nl, grid, c.tol, opt);
  out << "lambda*=" << (std::isnan(curve.lambda_star) ? std::string("unavailable") : six(curve.lambda_star))
      << ", sign changes=" << curve.sign_changes.size()
      << ", lambda#~" << (curve.points.empty() ? std::string("n/a") : six(lambda_sharp(curve)));
  if (!curve.failed.empty()) out << ", failed points=" << curve.failed.size();
  out << "\n";
  std::string text;
  if (c.format == "json") {
    auto j = curve_summary(curve);
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : curve.points) pts.push_back({pt.rho, pt.lambda});
    j["curve"] = pts;
    text = j.dump(2) + "\n";
  } else if (c.format == "gnuplot") {
    text = curve_gnuplot(curve);
  } else {
    text = curve_csv(curve);
  }
  emit(c, text, out);
  if (curve.points.empty()) return kNumericError;
  return kOk;
}

int cmd_intersect(const Flags& f, std::ostream& out) {
  const RunConfig c = assemble(f);
  const double rho = require_rho(c);
  const auto& p = *c.op;
  const auto win = c.window ? *c.window : std::make_pair(1e-8, 1e3);
  const auto sing = c.nl.is_identity() ? exact_singular(p) : numeric_singular(p, c.nl, 0.0, win.second, c.tol);
  const auto traj = solve_ivp(p, c.nl, rho, win.second, c.tol);
  const auto rep = count_intersections(traj, sing, win.first, win.second);
  out << "count=" << rep.count << (rep.grid_stability ? " (stable)" : " (unstable under refinement)") << "\n";
  for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
  nlohmann::json j = rep;
  if (c.format == "json" || c.out.empty() || c.out == "-") {
    emit(c, j.dump(2) + "\n", out);
  } else {
    std::string text = "r\n";
    for (double r : rep.crossing_radii) text += format_double(r) + "\n";
    emit(c, text, out);
  }
  return kOk;
}

int cmd_phase(const Flags& f, std::ostream& out) {
  const RunConfig c = assemble(f);
  const auto& p = *c.op;
  const auto fp = classify_fixed_point(p);
  PhaseOrbit orbit{p, fp, {}};
  if (c.rho) {
    const double rho = *c.rho;
    const double r_max = c.r_max ? *c.r_max : 1e3;
    const auto traj = solve_ivp(p, c.nl, rho, r_max, c.tol);
    const auto win = c.window ? *c.window : std::make_pair(std::exp(traj.log_r_min()), r_max);
    orbit = orbit_from_solution(traj, std::log(win.first), std::log(win.second), std::max<std::size_t>(c.samples, 2));
  } else {
    const auto span = f.t_span.empty() ? std::make_pair(0.0, -40.0) : parse_window(f.t_span);
    OrbitOptions opt;
    opt.samples = std::max<std::size_t>(c.samples, 2);
    orbit = integrate_orbit(p, f.x0, f.y0, span, c.tol, opt);
  }
  out << "fixed_point=" << to_string(fp.classification) << " mu=" << six(fp.mu1.real()) << (fp.mu1.imag() >= 0 ? "+" : "")
      << six(fp.mu1.imag()) << "i," << six(fp.mu2.real()) << (fp.mu2.imag() >= 0 ? "+" : "") << six(fp.mu2.imag())
      << "i winding=" << six(winding_angle(orbit) / (2 * std::numbers::pi)) << " turns\n";
  emit(c, orbit_csv(orbit), out);
  return kOk;
}

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

int cmd_check(std::ostream& out) {
  std::vector<CheckLine> lines;
  auto add = [&](std::string name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      lines.push_back({std::move(name), ok, std::move(detail)});
    } catch (const std::exception& e) {
      lines.push_back({std::move(name), false, std::string("error: ") + e.what()});
    }
  };
  const Nonlinearity id(IdentityFamily{});

  add("exact lambda*", [] {
    const bool ok = lambda_star_exact(make_khessian(3, 1)) == 2.0 && lambda_star_exact(make_khessian(5, 2)) == 16.0 &&
                    lambda_star_exact(make_plaplacian(5, 3.0)) == 18.0;
    return std::make_pair(ok, std::string("2, 16, 18"));
  });
  add("exact singular residual", [] {
    double worst = 0.0;
    for (const auto& p : {make_khessian(3, 1), make_khessian(5, 2), make_khessian(7, 3)}) {
      const auto s = exact_singular(p);
      for (int i = 0; i <= 40; ++i) worst = std::max(worst, singular_residual(s, std::log(1e-8) * (1.0 - i / 40.0)));
    }
    return std::make_pair(worst <= 1e-12, "max " + six(worst));
  });
  add("numeric singular lambda* (f = u)", [&] {
    double worst = 0.0;
    for (const auto& p : {make_khessian(3, 1), make_khessian(5, 2)}) {
      const double ls = numeric_singular(p, id, 0.0, 1.0, 1e-10).lambda_star();
      worst = std::max(worst, std::abs(ls - lambda_star_exact(p)));
    }
    return std::make_pair(worst <= 1e-4, "max error " + six(worst));
  });
  add("Pohozaev residuals", [&] {
    const double tol = 1e-10;
    double worst = 0.0;
    for (const auto& [p, rho] : std::vector<std::pair<OperatorParams, double>>{
             {make_khessian(3, 1), 2.0}, {make_khessian(5, 2), 5.0}, {make_plaplacian(4, 3.0), 3.0}}) {
      const auto tr = solve_ivp(p, id, rho, 1.0, tol);
      for (double a : {0.0, 0.1, p.delta() / (p.beta() + 2.0)}) worst = std::max(worst, pohozaev_residual(tr, a, 1e-3, 1.0));
    }
    return std::make_pair(worst <= 10 * tol, "max " + six(worst));
  });
  add("I_fun identity", [&] {
    double worst = 0.0;
    for (double beta : {0.0, 1.0, 2.0}) {
      const auto p = OperatorParams::raw(beta + 3.0, beta, beta + 3.0);
      for (double u = 0.0; u <= 50.0; u += 5.0) worst = std::max(worst, std::abs(I_fun(id, p, u) - (beta + 1.0)));
    }
    return std::make_pair(worst <= 1e-8, "max " + six(worst));
  });
  add("regime / eigenvalue consistency", [] {
    int bad = 0;
    for (int d = 3; d <= 14; ++d) {
      for (int k = 1; 2 * k < d && k <= 3; ++k) {
        const auto p = make_khessian(d, k);
        const auto fp = classify_fixed_point(p);
        const double c = p.delta() * p.theta() / (p.beta() + 1.0);
        if (std::abs((fp.mu1 + fp.mu2).real() - p.delta()) > 1e-12 * p.delta()) ++bad;
        if (std::abs((fp.mu1 * fp.mu2).real() - c) > 1e-12 * c) ++bad;
        if ((fp.classification == FixedPointClass::UnstableFocus) != (classify_regime(p).tag == RegimeTag::Oscillatory)) ++bad;
      }
    }
    return std::make_pair(bad == 0, std::to_string(bad) + " mismatches");
  });

  bool all = true;
  for (const auto& l : lines) {
    out << (l.pass ? "ok   " : "FAIL ") << l.name << ": " << l.detail << "\n";
    all = all && l.pass;
  }
  return all ? kOk : kInvariantFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial generalized Gelfand problem: regular and singular solutions, bifurcation and phase plane",
               "gelfand"};
  app.require_subcommand(1);
  std::deque<Flags> store;
  std::vector<std::pair<CLI::App*, Flags*>> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> std::pair<CLI::App*, Flags*> {
    store.emplace_back();
    auto* a = app.add_subcommand(name, help);
    subs.emplace_back(a, &store.back());
    return subs.back();
  };

  {
    auto [a, f] = sub("params", "print derived exponents, lambda* and regime");
    add_operator(a, *f);
    f->o_out = a->add_option("--out", f->out, "write a JSON summary ('-' for stdout)");
  }
  {
    auto [a, f] = sub("solve", "regular solution u(0)=rho, u'(0)=0");
    add_common(a, *f);
    f->o_rho = a->add_option("--rho", f->rho, "initial value u(0)");
    f->o_r_max = a->add_option("--r-max", f->r_max, "integrate to this radius (default: the first zero)");
    f->o_samples = a->add_option("--samples", f->samples, "uniform output radii (default 200)");
  }
  {
    auto [a, f] = sub("singular", "singular solution and lambda*");
    add_common(a, *f);
    a->add_option("--r0", f->r0, "canonical seed radius (0 = automatic)");
    a->add_flag("--asymptotic", f->asymptotic, "export r,Z,u_approx instead of the solution");
    a->add_flag("--remainder", f->remainder, "also fit the asymptotic remainder order");
    f->o_r_max = a->add_option("--r-max", f->r_max, "largest radius (default 1)");
    f->o_window = a->add_option("--window", f->window, "output radii lo:hi (default 1e-8:r_max)");
    f->o_samples = a->add_option("--samples", f->samples, "output points (default 200)");
  }
  {
    auto [a, f] = sub("bifurcate", "sweep lambda(rho)");
    add_common(a, *f);
    f->o_rho = a->add_option("--rho", f->rho, "grid lo:hi:n (default 0.1:30:256 geometric)");
    f->o_log = a->add_flag("--log", f->log_spacing, "geometric spacing for --rho");
    f->o_threads = a->add_option("--threads", f->threads, "worker threads (default GELFAND_THREADS or all cores)");
  }
  {
    auto [a, f] = sub("intersect", "zeros of u(., rho) - u*");
    add_common(a, *f);
    f->o_rho = a->add_option("--rho", f->rho, "initial value u(0)");
    f->o_window = a->add_option("--window", f->window, "radius window lo:hi (default 1e-8:1e3)");
  }
  {
    auto [a, f] = sub("phase", "orbit of the autonomous system");
    add_common(a, *f);
    f->o_rho = a->add_option("--rho", f->rho, "orbit of the regular solution with u(0)=rho (f = u)");
    f->o_r_max = a->add_option("--r-max", f->r_max, "largest radius of that solution (default 1e3)");
    f->o_window = a->add_option("--window", f->window, "radius window lo:hi");
    f->o_samples = a->add_option("--samples", f->samples, "output points (default 200)");
    a->add_option("--x0", f->x0, "initial x when no --rho is given");
    a->add_option("--y0", f->y0, "initial y when no --rho is given");
    a->add_option("--t-span", f->t_span, "t0:t1 (default 0:-40)");
  }
  sub("check", "run the invariant suite");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      CLI::App* target = &app;
      for (auto& [a, _] : subs) {
        if (a->parsed()) target = a;
      }
      out << target->help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    for (auto& [a, f] : subs) {
      if (!a->parsed()) continue;
      const std::string name = a->get_name();
      if (name == "params") return cmd_params(*f, out);
      if (name == "solve") return cmd_solve(*f, out);
      if (name == "singular") return cmd_singular(*f, out);
      if (name == "bifurcate") return cmd_bifurcate(*f, out);
      if (name == "intersect") return cmd_intersect(*f, out);
      if (name == "phase") return cmd_phase(*f, out);
      if (name == "check") return cmd_check(out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  }
  return kConfigError;
}

}  // namespace gelfand::cli
