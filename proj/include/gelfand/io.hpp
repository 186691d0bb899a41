#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/regular_solver.hpp"
#include "gelfand/singular.hpp"

namespace gelfand {

/// Full round-trip precision.
std::string format_double(double v);

/// CSV `r,u,uprime` over the trajectory samples.
std::string trajectory_csv(const RadialTrajectory& traj);
/// {"metadata": {params, nonlinearity, rho, tol, lambda}, "samples": [[r, u, uprime], ...]}.
nlohmann::json trajectory_json(const RadialTrajectory& traj);
/// The same formats at chosen radii.
std::string trajectory_csv(const RadialTrajectory& traj, const std::vector<double>& radii);
nlohmann::json trajectory_json(const RadialTrajectory& traj, const std::vector<double>& radii);

/// CSV `r,u,uprime` of the singular solution (ball form) at the given radii.
std::string singular_csv(const SingularSolution& sing, const std::vector<double>& radii);
nlohmann::json singular_json(const SingularSolution& sing, const std::vector<double>& radii);

/// CSV `r,Z,u_approx`.
std::string asymptotic_csv(const OperatorParams& params, const Nonlinearity& nl, double lambda_star,
                           const std::vector<double>& radii);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace gelfand
