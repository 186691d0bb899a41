#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gelfand/cli.hpp"
#include "gelfand/errors.hpp"

using namespace gelfand;
using namespace gelfand::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("gelfand_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parsers") {
  CHECK(parse_nonlinearity("identity").is_identity());
  CHECK(std::get<IterExpFamily>(parse_nonlinearity("exp").family()).n == 1);
  CHECK(std::get<PowerFamily>(parse_nonlinearity("power:2").family()).p == 2.0);
  const auto ie = std::get<IterExpFamily>(parse_nonlinearity("iterexp:2:0.5").family());
  CHECK(ie.n == 2);
  CHECK(ie.p == 0.5);
  CHECK(std::get<PerturbedFamily>(parse_nonlinearity("perturbed:1:0.25").family()).amplitude == 0.25);
  CHECK(std::get<PowerFamily>(parse_nonlinearity(R"({"family":"power","params":{"p":3}})").family()).p == 3.0);
  CHECK_THROWS_AS(parse_nonlinearity("power"), ConfigError);
  CHECK_THROWS_AS(parse_nonlinearity("power:x"), ConfigError);
  CHECK_THROWS_AS(parse_nonlinearity("power:0.2"), ConfigError);
  CHECK_THROWS_AS(parse_nonlinearity("iterexp:1.5"), ConfigError);

  const auto r = parse_range("0.1:30:256");
  CHECK(r.lo == 0.1);
  CHECK(r.hi == 30.0);
  CHECK(r.n == 256);
  CHECK_THROWS_AS(parse_range("1:2"), ConfigError);
  CHECK_THROWS_AS(parse_range("1:2:0"), ConfigError);
  CHECK(parse_window("1e-8:1e3").second == 1e3);
}

TEST_CASE("run config round trip") {
  RunConfig c;
  c.op = make_khessian(5, 2);
  c.nl = Nonlinearity(IterExpFamily{2, 0.5});
  c.tol = 1e-9;
  c.rho_range = Range{0.5, 20.0, 64};
  c.log_spacing = true;
  c.window = std::make_pair(1e-6, 2.0);
  c.samples = 17;
  c.format = "json";
  c.out = "x.json";
  c.threads = 3;
  const auto back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(back == c);
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"tol", "small"}}), ConfigError);
}

TEST_CASE("params command") {
  auto r = call({"params", "--khessian", "3", "1"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("theta=2 ") != std::string::npos);
  CHECK(r.out.find("lambda*=2 ") != std::string::npos);
  CHECK(r.out.find("regime=Oscillatory") != std::string::npos);

  r = call({"params", "--khessian", "1", "1"});
  CHECK(r.code == kConfigError);
  CHECK(r.err.find("d > 2k") != std::string::npos);

  r = call({"params", "--plaplacian", "5", "3"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("theta=3 ") != std::string::npos);
  CHECK(r.out.find("lambda*=18 ") != std::string::npos);

  CHECK(call({"params", "--khessian", "3", "1", "--raw", "2", "0", "2"}).code == kConfigError);
  CHECK(call({"params"}).code == kConfigError);
  CHECK(call({"nonsense"}).code == kConfigError);
  CHECK(call({}).code == kConfigError);
  CHECK(call({"--help"}).code == kOk);
  CHECK(call({"bifurcate", "--help"}).out.find("--rho") != std::string::npos);
}

TEST_CASE("bifurcate command") {
  const auto path = temp_path("curve.csv");
  auto r = call({"bifurcate", "--khessian", "3", "1", "--f", "identity", "--rho", "0.1:30:256", "--out", path});
  CHECK(r.code == kOk);
  CHECK(r.out.rfind("lambda*=2, sign changes=", 0) == 0);
  CHECK(r.out.find("lambda#~3.32") != std::string::npos);
  const auto first = slurp(path);
  CHECK(first.rfind("rho,lambda\n0.10000000000000001,", 0) == 0);
  // Deterministic output regardless of threading.
  r = call({"bifurcate", "--khessian", "3", "1", "--rho", "0.1:30:256", "--threads", "3", "--out", path});
  CHECK(slurp(path) == first);
  std::remove(path.c_str());

  r = call({"bifurcate", "--khessian", "3", "1", "--rho", "0.5:5:8", "--log", "--format", "json", "--out", "-"});
  CHECK(r.code == kOk);
  const auto j = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  CHECK(j["lambda_star"] == 2.0);
  CHECK(j["curve"].size() == 8);
  CHECK(j["curve"][1][0].get<double>() == doctest::Approx(0.5 * std::pow(10.0, 1.0 / 7)));
}

TEST_CASE("intersect, solve, singular and phase commands") {
  auto r = call({"intersect", "--khessian", "11", "1", "--f", "identity", "--rho", "10"});
  CHECK(r.code == kOk);
  CHECK(r.out.rfind("count=0", 0) == 0);

  r = call({"intersect", "--khessian", "3", "1", "--rho", "20", "--window", "1e-6:1e2", "--format", "json", "--out", "-"});
  CHECK(r.code == kOk);
  const auto j = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  CHECK(j["count"].get<int>() >= 2);
  CHECK(j["stable"] == true);

  r = call({"solve", "--khessian", "3", "1", "--f", "exp", "--rho", "2", "--samples", "3", "--out", "-"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("r,u,uprime\n0,2,0\n") != std::string::npos);

  r = call({"solve", "--khessian", "3", "1", "--f", "iterexp:2", "--rho", "8"});
  CHECK(r.code == kNumericError);
  CHECK(call({"solve", "--khessian", "3", "1", "--f", "bogus", "--rho", "1"}).code == kConfigError);
  CHECK(call({"solve", "--khessian", "3", "1"}).code == kConfigError);
  CHECK(call({"solve", "--khessian", "3", "1", "--rho", "1", "--tol", "0.5"}).code == kConfigError);

  r = call({"singular", "--khessian", "5", "2", "--samples", "2", "--window", "0.5:1", "--out", "-"});
  CHECK(r.code == kOk);
  CHECK(r.out.rfind("kind=ExactIdentity lambda*=16", 0) == 0);
  CHECK(r.out.find("\n1,0,-4\n") != std::string::npos);

  r = call({"singular", "--khessian", "3", "1", "--f", "exp", "--asymptotic", "--samples", "2", "--window", "1e-8:1e-3",
            "--out", "-"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("r,Z,u_approx\n1e-08,") != std::string::npos);

  r = call({"phase", "--khessian", "3", "1", "--x0", "0.001", "--t-span", "0:-30", "--samples", "5", "--out", "-"});
  CHECK(r.code == kOk);
  CHECK(r.out.rfind("fixed_point=UnstableFocus", 0) == 0);
  CHECK(r.out.find("t,x,y\n0,0.001,0\n") != std::string::npos);
  CHECK(call({"phase", "--khessian", "3", "1", "--f", "exp", "--rho", "3"}).code == kConfigError);
}

TEST_CASE("config files and flag overrides") {
  const auto cfg = temp_path("cfg.json");
  {
    std::ofstream f(cfg);
    f << R"({"operator": {"alpha": 2, "beta": 0, "gamma": 2, "origin": "khessian", "d": 3, "k": 1},
             "nonlinearity": {"family": "identity"}, "rho": 20, "window": [1e-6, 100], "format": "json"})";
  }
  auto a = call({"intersect", "--config", cfg, "--out", "-"});
  CHECK(a.code == kOk);
  auto b = call({"intersect", "--khessian", "3", "1", "--rho", "20", "--window", "1e-6:100", "--format", "json", "--out", "-"});
  CHECK(a.out == b.out);
  auto c = call({"intersect", "--config", cfg, "--khessian", "11", "1", "--window", "1e-8:1e3"});
  CHECK(c.out.rfind("count=0", 0) == 0);
  {
    std::ofstream f(cfg);
    f << "{not json";
  }
  CHECK(call({"intersect", "--config", cfg}).code == kConfigError);
  CHECK(call({"intersect", "--config", temp_path("missing.json")}).code == kConfigError);
  std::remove(cfg.c_str());
}

TEST_CASE("check command") {
  const auto r = call({"check"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("ok   Pohozaev residuals") != std::string::npos);
}
