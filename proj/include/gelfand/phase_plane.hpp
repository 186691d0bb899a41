#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/operator_params.hpp"
#include "gelfand/regular_solver.hpp"
#include "gelfand/singular.hpp"

namespace gelfand {

enum class FixedPointClass { UnstableFocus, UnstableNode, Borderline };
const char* to_string(FixedPointClass c);

struct FixedPoint {
  FixedPointClass classification;
  std::complex<double> mu1;
  std::complex<double> mu2;
  double discriminant;
};

/// Linearization of the autonomous system at the origin:
///   mu^2 - delta mu + delta theta/(beta+1) = 0, D = delta^2 - 4 delta theta/(beta+1).
FixedPoint classify_fixed_point(const OperatorParams& params);

struct PhaseSample {
  double t;
  double x;
  double y;
};

/// The autonomous system in t = ln(kappa/r), kappa = (beta+1)^{1/theta}:
///   x' = (y + theta^{beta+1})^{1/(beta+1)} - theta,
///   y' = delta (y - theta^{beta+1}(e^x - 1)),
/// with x = u - u* and y = (r|u'|)^{beta+1} - theta^{beta+1}.
struct PhaseOrbit {
  OperatorParams params;
  FixedPoint origin;
  std::vector<PhaseSample> samples;
};

void phase_rhs(const OperatorParams& params, double x, double y, double& dx, double& dy);

struct OrbitOptions {
  /// Uniform output grid size; 0 emits the accepted integration steps.
  std::size_t samples = 0;
  /// Distance from the boundary y = -theta^{beta+1} treated as an exit.
  double guard = 1e-12;
  std::size_t max_steps = 1000000;
};

/// Integrates from (x0, y0) at t_span.first to t_span.second (either direction).
PhaseOrbit integrate_orbit(const OperatorParams& params, double x0, double y0, std::pair<double, double> t_span,
                           double tol, const OrbitOptions& options = {});

/// (x, y) along a solution of the f = u problem, sampled uniformly in t over [log_r_lo, log_r_hi].
PhaseOrbit orbit_from_solution(const RadialTrajectory& traj, double log_r_lo, double log_r_hi, std::size_t samples);
PhaseOrbit orbit_from_solution(const RadialTrajectory& traj, std::size_t samples = 512);
PhaseOrbit orbit_from_solution(const SingularSolution& sing, double log_r_lo, double log_r_hi, std::size_t samples);

/// t = ln(kappa / r).
double phase_time(const OperatorParams& params, double log_r);

/// Signed winding angle of the orbit about the origin as t increases (positive = counterclockwise).
double winding_angle(const PhaseOrbit& orbit);

struct IntersectionReport {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t count = 0;
  std::vector<double> crossing_radii;
  bool grid_stability = false;
  /// Grid cells left unresolved by the tangency bisection.
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

/// Sign changes of a function of ln r on [log_r_lo, log_r_hi], with refinement and root bracketing.
IntersectionReport count_sign_changes(const std::function<double(double)>& g, double log_r_lo, double log_r_hi,
                                      std::size_t base_points = 0);

/// Zeros of u(., rho) - u* on (r_lo, r_hi). Both are compared at the regular trajectory's lambda.
IntersectionReport count_intersections(const RadialTrajectory& reg, const SingularSolution& sing, double r_lo,
                                       double r_hi);
IntersectionReport count_intersections(const SingularSolution& sing, const RadialTrajectory& reg, double r_lo,
                                       double r_hi);

void to_json(nlohmann::json& j, const IntersectionReport& report);
std::string orbit_csv(const PhaseOrbit& orbit);

}  // namespace gelfand
