#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gelfand/nonlinearity.hpp"
#include "gelfand/operator_params.hpp"

namespace gelfand::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericError = 3, kInvariantFailure = 4 };

struct Range {
  double lo;
  double hi;
  std::size_t n;
};

/// Settings shared by all commands; a --config file supplies the same keys as JSON.
struct RunConfig {
  std::optional<OperatorParams> op;
  Nonlinearity nl{IdentityFamily{}};
  double tol = 1e-10;
  std::optional<double> rho;
  std::optional<Range> rho_range;
  bool log_spacing = false;
  std::optional<double> r_max;
  std::optional<std::pair<double, double>> window;
  std::size_t samples = 200;
  std::string format = "csv";
  std::string out;
  unsigned threads = 0;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// "identity", "exp", "power:P", "iterexp:N[:P]", "perturbed:DECAY:AMP" or a JSON descriptor.
Nonlinearity parse_nonlinearity(const std::string& spec);
/// "lo:hi:n".
Range parse_range(const std::string& text);
/// "lo:hi".
std::pair<double, double> parse_window(const std::string& text);

/// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gelfand::cli
