#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gelfand/bifurcation.hpp"
#include "gelfand/errors.hpp"
#include "gelfand/io.hpp"
#include "gelfand/nonlinearity.hpp"
#include "gelfand/operator_params.hpp"
#include "gelfand/phase_plane.hpp"
#include "gelfand/regular_solver.hpp"
#include "gelfand/singular.hpp"

namespace py = pybind11;
using namespace gelfand;

namespace {

py::array_t<double> columns(const std::vector<std::array<double, 3>>& rows) {
  py::array_t<double> a({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int k = 0; k < 3; ++k) v(i, k) = rows[i][k];
  }
  return a;
}

py::dict report_dict(const IntersectionReport& r) {
  py::dict d;
  d["interval"] = py::make_tuple(r.r_lo, r.r_hi);
  d["count"] = r.count;
  d["crossing_radii"] = r.crossing_radii;
  d["grid_stability"] = r.grid_stability;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_gelfand, m) {
  m.doc() = "Radial generalized Gelfand problem L(u) + lambda e^{f(u)} = 0";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<EvalError>(m, "EvalError", numeric.ptr());
  py::register_exception<BlowupError>(m, "BlowupError", numeric.ptr());
  py::register_exception<ToleranceError>(m, "ToleranceError", numeric.ptr());
  py::register_exception<BracketError>(m, "BracketError", numeric.ptr());
  py::register_exception<SeedError>(m, "SeedError", numeric.ptr());
  py::register_exception<FitError>(m, "FitError", numeric.ptr());
  py::register_exception<TailError>(m, "TailError", numeric.ptr());
  py::register_exception<DomainExitError>(m, "DomainExitError", numeric.ptr());

  py::class_<OperatorParams>(m, "OperatorParams")
      .def_static("raw", &OperatorParams::raw, py::arg("alpha"), py::arg("beta"), py::arg("gamma"))
      .def_static("khessian", &make_khessian, py::arg("d"), py::arg("k"))
      .def_static("plaplacian", &make_plaplacian, py::arg("d"), py::arg("p"))
      .def_property_readonly("alpha", &OperatorParams::alpha)
      .def_property_readonly("beta", &OperatorParams::beta)
      .def_property_readonly("gamma", &OperatorParams::gamma)
      .def_property_readonly("theta", &OperatorParams::theta)
      .def_property_readonly("delta", &OperatorParams::delta)
      .def_property_readonly("alpha_hat", &OperatorParams::alpha_hat)
      .def_property_readonly("theta_hat", &OperatorParams::theta_hat)
      .def("to_json", [](const OperatorParams& p) { return nlohmann::json(p).dump(); })
      .def_static("from_json", [](const std::string& s) { return operator_params_from_json(nlohmann::json::parse(s)); })
      .def("__repr__", &OperatorParams::describe);

  m.def("regime", [](const OperatorParams& p) { return std::string(to_string(classify_regime(p).tag)); });
  m.def("lambda_star_exact", &lambda_star_exact);

  py::class_<Nonlinearity>(m, "Nonlinearity")
      .def_static("identity", [] { return make_nonlinearity(IdentityFamily{}); })
      .def_static("power", [](double p) { return make_nonlinearity(PowerFamily{p}); }, py::arg("p"))
      .def_static("iterexp", [](int n, double p) { return make_nonlinearity(IterExpFamily{n, p}); }, py::arg("n"),
                  py::arg("p") = 1.0)
      .def_static("perturbed", [](double d, double a) { return make_nonlinearity(PerturbedFamily{d, a}); },
                  py::arg("decay"), py::arg("amplitude"))
      .def_static("from_json", [](const std::string& s) { return nonlinearity_from_json(nlohmann::json::parse(s)); })
      .def("to_json", [](const Nonlinearity& n) { return nlohmann::json(n).dump(); })
      .def("f", &Nonlinearity::f)
      .def("f_prime", &Nonlinearity::f_prime)
      .def("g", &Nonlinearity::g)
      .def("g_prime", &Nonlinearity::g_prime)
      .def_property_readonly("domain_min", &Nonlinearity::domain_min)
      .def("__repr__", &Nonlinearity::describe);

  py::class_<RadialTrajectory>(m, "RadialTrajectory")
      .def_property_readonly("rho", &RadialTrajectory::rho)
      .def_property_readonly("tol", &RadialTrajectory::tol)
      .def_property_readonly("lambda_", &RadialTrajectory::lambda)
      .def_property_readonly("r_max", &RadialTrajectory::r_max)
      .def("u", &RadialTrajectory::u_at, py::arg("r"))
      .def("uprime", &RadialTrajectory::uprime_at, py::arg("r"))
      .def("samples", [](const RadialTrajectory& t) {
        std::vector<std::array<double, 3>> rows;
        for (const auto& s : t.samples()) rows.push_back({s.r, s.u, s.uprime});
        return columns(rows);
      })
      .def("to_csv", [](const RadialTrajectory& t) { return trajectory_csv(t); })
      .def("rescaled", &to_scaled, py::arg("lambda_"));

  m.def("solve_ivp", [](const OperatorParams& p, const Nonlinearity& nl, double rho, double r_max, double tol) {
    return solve_ivp(p, nl, rho, r_max, tol);
  }, py::arg("params"), py::arg("nl"), py::arg("rho"), py::arg("r_max"), py::arg("tol") = 1e-10);
  m.def("find_radius", &find_radius, py::arg("params"), py::arg("nl"), py::arg("rho"), py::arg("level"),
        py::arg("tol") = 1e-10);
  m.def("lambda_of_rho", &lambda_of_rho, py::arg("params"), py::arg("nl"), py::arg("rho"), py::arg("tol") = 1e-10);
  m.def("pohozaev_residual", &pohozaev_residual, py::arg("traj"), py::arg("a"), py::arg("r1"), py::arg("r2"));

  py::class_<SingularSolution>(m, "SingularSolution")
      .def_property_readonly("kind", [](const SingularSolution& s) { return std::string(to_string(s.kind())); })
      .def_property_readonly("lambda_star", &SingularSolution::lambda_star)
      .def_property_readonly("seed_radius", &SingularSolution::seed_radius)
      .def("u", &SingularSolution::u, py::arg("r"))
      .def("uprime", &SingularSolution::uprime, py::arg("r"));

  m.def("exact_singular", &exact_singular, py::arg("params"));
  m.def("numeric_singular",
        py::overload_cast<const OperatorParams&, const Nonlinearity&, double, double, double>(&numeric_singular),
        py::arg("params"), py::arg("nl"), py::arg("r0") = 0.0, py::arg("r_max") = 1.0, py::arg("tol") = 1e-10);
  m.def("singular_residual", &singular_residual, py::arg("sing"), py::arg("log_r"), py::arg("h") = 1e-2);
  m.def("asymptotic_u", [](const OperatorParams& p, const Nonlinearity& nl, double lambda_star, double r) {
    return asymptotic_Z(p, nl, lambda_star, r).u_approx;
  });
  m.def("remainder_order", &remainder_order, py::arg("params"), py::arg("nl"), py::arg("r_lo"), py::arg("r_hi"),
        py::arg("tol") = 1e-11);
  m.def("calF", &calF, py::arg("nl"), py::arg("beta"), py::arg("u"));
  m.def("I_fun", &I_fun, py::arg("nl"), py::arg("params"), py::arg("u"));
  m.def("log_epsilon_rho", &log_epsilon_rho, py::arg("params"), py::arg("nl"), py::arg("rho"));
  m.def("transform_tilde_at", &transform_tilde_at, py::arg("traj"), py::arg("s"));

  m.def("classify_fixed_point", [](const OperatorParams& p) {
    const auto fp = classify_fixed_point(p);
    py::dict d;
    d["classification"] = std::string(to_string(fp.classification));
    d["eigenvalues"] = py::make_tuple(fp.mu1, fp.mu2);
    d["discriminant"] = fp.discriminant;
    return d;
  });
  m.def("integrate_orbit", [](const OperatorParams& p, double x0, double y0, double t0, double t1, double tol,
                              std::size_t samples) {
    OrbitOptions o;
    o.samples = samples;
    const auto orbit = integrate_orbit(p, x0, y0, {t0, t1}, tol, o);
    std::vector<std::array<double, 3>> rows;
    for (const auto& s : orbit.samples) rows.push_back({s.t, s.x, s.y});
    return columns(rows);
  }, py::arg("params"), py::arg("x0"), py::arg("y0"), py::arg("t0"), py::arg("t1"), py::arg("tol") = 1e-10,
        py::arg("samples") = 0);
  m.def("count_intersections", [](const RadialTrajectory& reg, const SingularSolution& sing, double r_lo, double r_hi) {
    return report_dict(count_intersections(reg, sing, r_lo, r_hi));
  });

  m.def("sweep", [](const OperatorParams& p, const Nonlinearity& nl, const std::vector<double>& rho, double tol,
                    unsigned threads) {
    SweepOptions o;
    o.threads = threads;
    const auto c = sweep(p, nl, rho, tol, o);
    std::vector<double> rs, ls;
    for (const auto& pt : c.points) {
      rs.push_back(pt.rho);
      ls.push_back(pt.lambda);
    }
    std::vector<std::pair<double, double>> changes;
    for (const auto& s : c.sign_changes) changes.emplace_back(s.rho_lo, s.rho_hi);
    std::vector<double> failed;
    for (const auto& f : c.failed) failed.push_back(f.rho);
    py::dict d;
    d["rho"] = py::array_t<double>(rs.size(), rs.data());
    d["lambda"] = py::array_t<double>(ls.size(), ls.data());
    d["lambda_star"] = c.lambda_star;
    d["sign_changes"] = changes;
    d["lambda_sharp"] = c.points.empty() ? std::nan("") : lambda_sharp(c);
    d["oscillation_amplitudes"] = detect_oscillation(c).amplitudes;
    d["failed"] = failed;
    return d;
  }, py::arg("params"), py::arg("nl"), py::arg("rho"), py::arg("tol") = 1e-10, py::arg("threads") = 0);
  m.def("make_grid", &make_grid, py::arg("lo"), py::arg("hi"), py::arg("n"), py::arg("geometric") = false);
  m.def("convergence_profile", &convergence_profile, py::arg("params"), py::arg("nl"), py::arg("rho_list"),
        py::arg("r1"), py::arg("r2"), py::arg("tol") = 1e-10);
}
