#include "nematic/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nematic/errors.hpp"

namespace nematic {

namespace {

struct KeyInfo {
  const char* key;
  const char* help;
};

const KeyInfo kKeys[] = {
    {"alpha", "interaction intensity"},
    {"branch", "isotropic, eta1 or eta2"},
    {"L", "harmonic degree (8..32)"},
    {"n_theta", "latitude nodes of the kinetic product grid"},
    {"n_phi", "longitude nodes of the kinetic product grid"},
    {"eps", "Deborah number for simulate"},
    {"eps_list", "strictly decreasing Deborah numbers for convergence"},
    {"kappa", "velocity gradient, 9 numbers row-major, traceless"},
    {"t_final", "final time"},
    {"dt", "fixed time step (overrides dt_rule)"},
    {"dt_rule", "linear (dt = c eps) or quadratic (dt = c eps^2)"},
    {"dt_coeff", "the constant c of dt_rule"},
    {"seed", "random seed"},
    {"out_dir", "output directory"},
    {"alpha_min", "sweep start"},
    {"alpha_max", "sweep end"},
    {"steps", "number of sweep points"},
    {"sweep", "leslie: write a table over [alpha_min, alpha_max]"},
    {"samples", "random (D, n) samples for the dissipation minimum"},
    {"time_samples", "output rows per trajectory"},
    {"n0", "initial director, 3 numbers"},
    {"amplitude", "energy: size of the degree-2 perturbation of 1/(4 pi)"},
    {"svg", "write SVG plots (true/false)"},
    {"subcommand", "config files only: subcommand when none is given"},
};

const char* const kSubcommands[] = {"bifurcation", "spectrum", "leslie", "simulate", "convergence", "energy"};

std::string dashed(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("invalid value for " + key + ": '" + s + "' (expected a finite number)");
  return v;
}

long to_long(const std::string& key, const std::string& s, long lo, long hi) {
  const std::string t = trim(s);
  long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size())
    throw ConfigError("invalid value for " + key + ": '" + s + "' (expected an integer)");
  if (v < lo || v > hi)
    throw ConfigError(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + t);
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  return out;
}

bool to_bool(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError("invalid value for " + key + ": '" + s + "' (expected true or false)");
}

bool is_key(const std::string& k) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyInfo& i) { return k == i.key; });
}

std::string subcommand_list() {
  std::string s;
  for (const char* n : kSubcommands) s += (s.empty() ? "" : ", ") + std::string(n);
  return s;
}

}  // namespace

std::string to_string(Subcommand s) { return kSubcommands[static_cast<int>(s)]; }

Subcommand subcommand_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == kSubcommands[i]) return static_cast<Subcommand>(i);
  throw ConfigError("unknown subcommand '" + s + "' (expected one of: " + subcommand_list() + ")");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const KeyInfo& i : kKeys) k.push_back(i.key);
    return k;
  }();
  return keys;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    // '#' inside a quoted value is kept
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!is_key(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    else if (value.find('"') != std::string::npos) throw ConfigError(where + "unbalanced quote");
    if (out.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

RunConfig make_config(Subcommand sub, const std::map<std::string, std::string>& values) {
  RunConfig c;
  c.subcommand = sub;
  c.kappa(0, 1) = 1.0;
  if (sub == Subcommand::energy) {
    c.t_final = 30.0;
    c.dt = 0.01;
  }
  for (const auto& [k, v] : values)
    if (!is_key(k)) throw ConfigError("unknown key '" + k + "'");
  auto has = [&](const char* k) { return values.count(k) > 0; };
  auto get = [&](const char* k) { return values.at(k); };

  if (has("alpha")) c.alpha = to_double("alpha", get("alpha"));
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (has("branch")) {
    try {
      c.branch = branch_from_string(trim(get("branch")));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (has("L")) c.L = static_cast<int>(to_long("L", get("L"), 8, 32));
  if (has("n_theta")) c.n_theta = static_cast<int>(to_long("n_theta", get("n_theta"), 2, 4096));
  if (has("n_phi")) c.n_phi = static_cast<int>(to_long("n_phi", get("n_phi"), 4, 8192));
  if (c.n_theta < c.L + 3)
    throw ConfigError("n_theta must be >= L + 3 so that products of degree 2L + 4 are integrated exactly");
  if (c.n_phi < 2 * c.L + 5)
    throw ConfigError("n_phi must be >= 2L + 5 so that products of degree 2L + 4 are integrated exactly");
  if (c.n_phi % 2) throw ConfigError("n_phi must be even");

  if (has("eps")) c.eps = to_double("eps", get("eps"));
  if (!(c.eps >= 1e-3)) throw ConfigError("eps must be >= 1e-3");
  if (has("eps_list")) c.eps_list = to_list("eps_list", get("eps_list"));
  if (c.eps_list.size() < 2) throw ConfigError("eps_list needs at least two values");
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
    if (!(c.eps_list[i] >= 1e-3)) throw ConfigError("eps_list values must be >= 1e-3");
    if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1])) throw ConfigError("eps_list must be strictly decreasing");
  }

  if (has("kappa")) {
    std::vector<double> k = to_list("kappa", get("kappa"));
    if (k.size() != 9) throw ConfigError("kappa needs 9 numbers (row-major 3x3), got " + std::to_string(k.size()));
    for (int i = 0; i < 9; ++i) c.kappa(i / 3, i % 3) = k[i];
  }
  if (std::abs(c.kappa.trace()) > 1e-12) throw ConfigError("velocity gradient must be traceless");
  if (sub == Subcommand::energy && has("kappa") && !c.kappa.isZero(0.0))
    throw ConfigError("energy runs without flow; remove kappa or set it to zero");

  if (has("t_final")) c.t_final = to_double("t_final", get("t_final"));
  if (!(c.t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (has("dt")) c.dt = to_double("dt", get("dt"));
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (has("dt_rule")) {
    try {
      c.dt_rule.rule = dt_rule_from_string(trim(get("dt_rule")));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (has("dt_coeff")) c.dt_rule.c = to_double("dt_coeff", get("dt_coeff"));
  if (!(c.dt_rule.c > 0.0)) throw ConfigError("dt_coeff must be positive");
  if (has("seed")) c.seed = static_cast<unsigned long>(to_long("seed", get("seed"), 0, 4294967295L));
  if (has("out_dir")) c.out_dir = trim(get("out_dir"));
  if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");

  if (has("alpha_min")) c.alpha_min = to_double("alpha_min", get("alpha_min"));
  if (has("alpha_max")) c.alpha_max = to_double("alpha_max", get("alpha_max"));
  if (has("steps")) c.steps = static_cast<int>(to_long("steps", get("steps"), 1, 100000));
  if (!(c.alpha_min > 0.0) || c.alpha_max < c.alpha_min) throw ConfigError("need 0 < alpha_min <= alpha_max");
  c.sweep = has("sweep") ? to_bool("sweep", get("sweep")) : (has("alpha_min") || has("alpha_max") || has("steps"));
  if (has("samples")) c.dissipation_samples = static_cast<int>(to_long("samples", get("samples"), 1, 10000000));
  if (has("time_samples")) c.time_samples = static_cast<int>(to_long("time_samples", get("time_samples"), 1, 1000000));
  if (has("n0")) {
    std::vector<double> v = to_list("n0", get("n0"));
    if (v.size() != 3) throw ConfigError("n0 needs 3 numbers");
    c.n0 = Vec3(v[0], v[1], v[2]);
    if (!(c.n0.norm() > 0.0)) throw ConfigError("n0 must be nonzero");
    c.n0.normalize();
  }
  if (has("amplitude")) c.amplitude = to_double("amplitude", get("amplitude"));
  if (!(c.amplitude > 0.0)) throw ConfigError("amplitude must be positive");
  if (has("svg")) c.svg = to_bool("svg", get("svg"));
  return c;
}

RunConfig parse_config(int argc, const char* const* argv) {
  if (argc >= 2 && argv[1][0] != '-') subcommand_from_string(argv[1]);

  CLI::App app{"Maier-Saupe equilibria, linearized Doi-Onsager spectra, Leslie coefficients and small-Deborah "
               "kinetics",
               "nematic"};
  app.require_subcommand(0, 1);
  std::map<std::string, std::string> raw;
  std::map<std::string, std::vector<CLI::Option*>> given;
  std::string config_path;
  std::vector<CLI::App*> subs;
  for (const char* name : kSubcommands) {
    CLI::App* sc = app.add_subcommand(name);
    subs.push_back(sc);
    sc->add_option("--config", config_path, "flat key = value file; flags override it");
    for (const KeyInfo& k : kKeys) {
      if (std::string(k.key) == "subcommand") continue;
      given[k.key].push_back(sc->add_option("--" + dashed(k.key), raw[k.key], k.help));
    }
  }
  app.add_option("--config", config_path, "flat key = value file; flags override it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    for (CLI::App* sc : subs)
      if (sc->parsed()) throw HelpRequest(sc->help("nematic"));
    throw HelpRequest(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  std::map<std::string, std::string> values;
  if (!config_path.empty()) values = read_config_file(config_path);

  std::string sub_name;
  for (CLI::App* sc : subs)
    if (sc->parsed()) sub_name = sc->get_name();
  if (sub_name.empty()) {
    if (!values.count("subcommand")) throw ConfigError("missing subcommand (expected one of: " + subcommand_list() + ")");
    sub_name = trim(values["subcommand"]);
  }
  values.erase("subcommand");
  const Subcommand sub = subcommand_from_string(sub_name);

  if (const char* env = std::getenv("NEMATIC_OUT_DIR"); env && *env) values["out_dir"] = env;
  for (const auto& [k, opts] : given)
    for (CLI::Option* o : opts)
      if (o->count() > 0) values[k] = raw[k];
  return make_config(sub, values);
}

}  // namespace nematic
