#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nematic/equilibria.hpp"
#include "nematic/kinetic.hpp"
#include "nematic/sphere.hpp"

namespace nematic {

enum class Subcommand { bifurcation, spectrum, leslie, simulate, convergence, energy };
std::string to_string(Subcommand s);
Subcommand subcommand_from_string(const std::string& s);

struct RunConfig {
  Subcommand subcommand = Subcommand::spectrum;
  double alpha = 8.0;
  Branch branch = Branch::eta1;
  int L = 16;
  int n_theta = 48;
  int n_phi = 64;
  double eps = 0.05;
  std::vector<double> eps_list{0.1, 0.05, 0.025};
  Mat3 kappa = Mat3::Zero();  // simple shear unless set
  double t_final = 1.0;       // 30 for energy unless set
  std::optional<double> dt;   // fixed step; otherwise dt_rule
  DtPolicy dt_rule;
  unsigned long seed = 20240601;
  std::string out_dir = "out";

  double alpha_min = 5.0;
  double alpha_max = 10.0;
  int steps = 100;
  bool sweep = false;             // leslie: table over [alpha_min, alpha_max]
  int dissipation_samples = 10000;
  int time_samples = 100;
  Vec3 n0 = Vec3::UnitX();
  double amplitude = 0.02;        // energy: size of the degree-2 perturbation
  bool svg = true;
};

// Keys accepted in config files; command-line flags use the same names with
// '-' for '_' (--alpha-min).
const std::vector<std::string>& config_keys();

// Flat "key = value" text, '#' starts a comment, values may be double-quoted.
std::map<std::string, std::string> read_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin);

// Validated config from raw key/value strings. Throws ConfigError.
RunConfig make_config(Subcommand sub, const std::map<std::string, std::string>& values);

struct HelpRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// argv[1] is the subcommand. Precedence: defaults < --config file <
// NEMATIC_OUT_DIR (out_dir only) < flags. Throws ConfigError, or HelpRequest
// carrying the help text.
RunConfig parse_config(int argc, const char* const* argv);

}  // namespace nematic
