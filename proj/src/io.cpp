#include "gelfand/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gelfand/errors.hpp"

namespace gelfand {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const RadialTrajectory& traj) {
  std::ostringstream os;
  os << "r,u,uprime\n";
  for (const auto& s : traj.samples()) {
    os << format_double(s.r) << ',' << format_double(s.u) << ',' << format_double(s.uprime) << '\n';
  }
  return os.str();
}

nlohmann::json trajectory_json(const RadialTrajectory& traj) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : traj.samples()) samples.push_back({s.r, s.u, s.uprime});
  nlohmann::json meta{{"params", traj.params()},
                      {"nonlinearity", traj.nonlinearity()},
                      {"rho", traj.rho()},
                      {"tol", traj.tol()},
                      {"lambda", traj.lambda()}};
  return {{"metadata", meta}, {"samples", samples}};
}

std::string trajectory_csv(const RadialTrajectory& traj, const std::vector<double>& radii) {
  std::ostringstream os;
  os << "r,u,uprime\n";
  for (double r : radii) {
    os << format_double(r) << ',' << format_double(traj.u_at(r)) << ',' << format_double(traj.uprime_at(r)) << '\n';
  }
  return os.str();
}

nlohmann::json trajectory_json(const RadialTrajectory& traj, const std::vector<double>& radii) {
  auto j = trajectory_json(traj);
  nlohmann::json samples = nlohmann::json::array();
  for (double r : radii) samples.push_back({r, traj.u_at(r), traj.uprime_at(r)});
  j["samples"] = samples;
  return j;
}

std::string singular_csv(const SingularSolution& sing, const std::vector<double>& radii) {
  std::ostringstream os;
  os << "r,u,uprime\n";
  for (double r : radii) {
    os << format_double(r) << ',' << format_double(sing.u(r)) << ',' << format_double(sing.uprime(r)) << '\n';
  }
  return os.str();
}

nlohmann::json singular_json(const SingularSolution& sing, const std::vector<double>& radii) {
  nlohmann::json samples = nlohmann::json::array();
  for (double r : radii) samples.push_back({r, sing.u(r), sing.uprime(r)});
  nlohmann::json meta{{"params", sing.params()},
                      {"nonlinearity", sing.nonlinearity()},
                      {"kind", to_string(sing.kind())},
                      {"lambda_star", sing.lambda_star()},
                      {"tol", sing.tol()}};
  if (sing.kind() == SingularKind::AsymptoticSeededNumeric) meta["seed_radius"] = sing.seed_radius();
  return {{"metadata", meta}, {"samples", samples}};
}

std::string asymptotic_csv(const OperatorParams& params, const Nonlinearity& nl, double lambda_star,
                           const std::vector<double>& radii) {
  std::ostringstream os;
  os << "r,Z,u_approx\n";
  for (double r : radii) {
    const auto a = asymptotic_Z(params, nl, lambda_star, r);
    os << format_double(r) << ',' << format_double(a.Z) << ',' << format_double(a.u_approx) << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace gelfand
