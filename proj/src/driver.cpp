#include "nematic/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "nematic/equilibria.hpp"
#include "nematic/errors.hpp"
#include "nematic/kinetic.hpp"
#include "nematic/leslie.hpp"
#include "nematic/spectral.hpp"

namespace nematic {

namespace {

class Writer {
 public:
  explicit Writer(const RunConfig& cfg) : dir_(cfg.out_dir), svg_(cfg.svg) {}

  void put(const std::string& name, const std::string& content) {
    const std::string path = (std::filesystem::path(dir_) / name).string();
    write_text(path, content);
    files.push_back(path);
  }
  void put_svg(const std::string& name, const PlotSpec& plot) {
    if (svg_) put(name, to_svg(plot));
  }

  std::vector<std::string> files;

 private:
  std::string dir_;
  bool svg_;
};

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json mat_json(const Mat3& m) {
  Json out = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.push_back(m(i, j));
  return out;
}

Json leslie_json(const LeslieSet& ls, double dissipation) {
  return Json{{"alpha", ls.alpha},   {"eta", ls.eta},       {"S2", ls.S2},         {"S4", ls.S4},
              {"lambda", ls.lambda}, {"alpha1", ls.alpha1}, {"alpha2", ls.alpha2}, {"alpha3", ls.alpha3},
              {"alpha4", ls.alpha4}, {"alpha5", ls.alpha5}, {"alpha6", ls.alpha6}, {"gamma1", ls.gamma1},
              {"gamma2", ls.gamma2}, {"parodi_residual", ls.parodi_residual()},
              {"dissipation_min_over_samples", dissipation}};
}

ConvergenceOptions convergence_options(const RunConfig& cfg) {
  ConvergenceOptions opt;
  opt.alpha = cfg.alpha;
  opt.n0 = cfg.n0;
  opt.kappa = cfg.kappa;
  opt.t_final = cfg.t_final;
  opt.eps_list = cfg.eps_list;
  opt.L = cfg.L;
  opt.dt = cfg.dt_rule;
  opt.fixed_dt = cfg.dt.value_or(0.0);
  opt.samples = cfg.time_samples;
  opt.n_theta = cfg.n_theta;
  opt.n_phi = cfg.n_phi;
  return opt;
}

std::string trajectory_csv(const ConvergenceRun& run) {
  std::vector<std::string> header{"t", "S2", "n_x", "n_y", "n_z"};
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) header.push_back("sigma_" + std::to_string(i) + std::to_string(j));
  header.push_back("err");
  CsvTable csv(header);
  for (const TrajectoryRow& r : run.rows) {
    std::vector<double> v{r.t, r.S2, r.axis.x(), r.axis.y(), r.axis.z()};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v.push_back(r.sigma(i, j));
    v.push_back(r.err);
    csv.add_row(v);
  }
  return csv.str();
}

Json run_json(const ConvergenceRun& run) {
  return Json{{"eps", run.eps}, {"dt", run.dt}, {"sup_error", run.sup_err}, {"sup_angle", run.sup_angle},
              {"f1_residual", run.f1_residual}};
}

RunResult do_bifurcation(const RunConfig& cfg, Writer& w) {
  const auto rows = bifurcation_diagram(cfg.alpha_min, cfg.alpha_max, cfg.steps);
  CsvTable csv({"alpha", "eta", "branch", "S2", "S4", "stable"});
  PlotSpec plot{"Equilibrium branches", "alpha", "S2", false, false, {}};
  for (Branch b : {Branch::isotropic, Branch::eta1, Branch::eta2}) plot.series.push_back({to_string(b), {}, {}});
  for (const BifurcationRow& r : rows) {
    csv.add_row(std::vector<std::string>{format_number(r.alpha), format_number(r.branch.eta), to_string(r.branch.branch),
                                         format_number(r.branch.S2), format_number(r.branch.S4),
                                         r.stable ? "true" : "false"});
    PlotSeries& s = plot.series[static_cast<int>(r.branch.branch)];
    s.x.push_back(r.alpha);
    s.y.push_back(r.branch.S2);
  }
  w.put("bifurcation.csv", csv.str());
  w.put_svg("bifurcation.svg", plot);
  const auto [a_star, eta_star] = alpha_star();
  return {{}, Json{{"alpha_min", cfg.alpha_min}, {"alpha_max", cfg.alpha_max}, {"steps", cfg.steps},
                   {"rows", static_cast<long>(rows.size())}, {"alpha_star", a_star}, {"eta_star", eta_star}}};
}

RunResult do_spectrum(const RunConfig& cfg, Writer& w) {
  const EquilibriumBranch br = find_branch(cfg.alpha, cfg.branch);
  const EquilibriumField h = equilibrium_field(br, cfg.n0.normalized(), cfg.L);
  const LinearizedOperators ops = assemble_all(h, cfg.L);
  const SpectrumReport rep = spectrum_G(ops);
  Json j{{"alpha", cfg.alpha},
         {"eta", br.eta},
         {"branch", to_string(br.branch)},
         {"L", cfg.L},
         {"eigenvalues", rep.eigenvalues},
         {"kernel_dim", rep.kernel_dim},
         {"c0", nullptr}};
  if (br.branch == Branch::eta1 && classify_stability(br).stable) j["c0"] = lower_bound_c0(ops, h);
  w.put("spectrum.json", to_json_text(j));
  return {{}, j};
}

RunResult do_leslie(const RunConfig& cfg, Writer& w) {
  const auto seed = static_cast<unsigned>(cfg.seed);
  if (!cfg.sweep) {
    const EquilibriumBranch br = find_branch(cfg.alpha, cfg.branch);
    const LeslieSet ls = leslie_coeffs(br.eta, cfg.alpha);
    const Json j = leslie_json(ls, dissipation_min(ls, cfg.dissipation_samples, seed));
    w.put("leslie.json", to_json_text(j));
    return {{}, j};
  }
  CsvTable csv({"alpha", "eta", "S2", "S4", "lambda", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6",
                "gamma1", "gamma2", "parodi_residual", "dissipation_min_over_samples"});
  for (int i = 0; i < cfg.steps; ++i) {
    const double a = cfg.steps == 1 ? cfg.alpha_min
                                    : cfg.alpha_min + (cfg.alpha_max - cfg.alpha_min) * i / (cfg.steps - 1);
    EquilibriumBranch br;
    try {
      br = find_branch(a, cfg.branch);
    } catch (const DomainError&) {
      continue;  // branch absent at this alpha
    }
    const LeslieSet ls = leslie_coeffs(br.eta, a);
    csv.add_row(std::vector<double>{a, ls.eta, ls.S2, ls.S4, ls.lambda, ls.alpha1, ls.alpha2, ls.alpha3, ls.alpha4,
                                    ls.alpha5, ls.alpha6, ls.gamma1, ls.gamma2, ls.parodi_residual(),
                                    dissipation_min(ls, cfg.dissipation_samples, seed)});
  }
  if (csv.rows() == 0)
    throw DomainError("leslie: branch " + to_string(cfg.branch) + " does not exist anywhere in [alpha_min, alpha_max]");
  w.put("leslie.csv", csv.str());
  return {{}, Json{{"rows", static_cast<long>(csv.rows())}, {"branch", to_string(cfg.branch)}}};
}

RunResult do_simulate(const RunConfig& cfg, Writer& w) {
  const ConvergenceRun run = run_single(convergence_options(cfg), cfg.eps);
  w.put("trajectory_eps_" + eps_tag(cfg.eps) + ".csv", trajectory_csv(run));
  Json j = run_json(run);
  j["alpha"] = cfg.alpha;
  j["L"] = cfg.L;
  j["t_final"] = cfg.t_final;
  j["kappa"] = mat_json(cfg.kappa);
  j["n0"] = vec_json(cfg.n0.normalized());
  w.put("simulate.json", to_json_text(j));
  return {{}, j};
}

RunResult do_convergence(const RunConfig& cfg, Writer& w) {
  const ConvergenceReport rep = run_convergence(convergence_options(cfg));
  std::vector<double> sup_err, sup_angle, dts, f1_res;
  for (const ConvergenceRun& run : rep.runs) {
    w.put("trajectory_eps_" + eps_tag(run.eps) + ".csv", trajectory_csv(run));
    sup_err.push_back(run.sup_err);
    sup_angle.push_back(run.sup_angle);
    dts.push_back(run.dt);
    f1_res.push_back(run.f1_residual);
  }
  Json j{{"alpha", cfg.alpha},
         {"L", cfg.L},
         {"t_final", cfg.t_final},
         {"kappa", mat_json(cfg.kappa)},
         {"n0", vec_json(cfg.n0.normalized())},
         {"dt_rule", cfg.dt ? "fixed" : to_string(cfg.dt_rule.rule)},
         {"dt", dts},
         {"eps_list", cfg.eps_list},
         {"f1_residuals", f1_res},
         {"sup_errors", sup_err},
         {"sup_angle_errors", sup_angle},
         {"fitted_slope", rep.fitted_slope},
         {"director_slope", rep.director_slope}};
  w.put("convergence.json", to_json_text(j));
  w.put_svg("convergence.svg", PlotSpec{"Stress error vs eps",
                                        "eps",
                                        "sup error",
                                        true,
                                        true,
                                        {{"stress", cfg.eps_list, sup_err}, {"director angle", cfg.eps_list, sup_angle}}});
  return {{}, j};
}

RunResult do_energy(const RunConfig& cfg, Writer& w) {
  const double dt = cfg.dt.value_or(0.01);
  const Vec3 axis = seeded_axis(cfg.seed);
  const KineticSolver solver(cfg.L, cfg.alpha, cfg.n_theta, cfg.n_phi);
  const HarmonicField f0 = perturbed_isotropic(cfg.L, cfg.amplitude, axis);
  const long steps = static_cast<long>(std::ceil(cfg.t_final / dt - 1e-9));
  const int every = static_cast<int>(std::max(1L, steps / std::max(1, cfg.time_samples)));
  const EnergyReport rep = run_energy_decay(solver, f0, dt, cfg.t_final, every);

  CsvTable csv({"t", "energy", "S2"});
  PlotSpec plot{"Free energy", "t", "A[f]", false, false, {{"A[f]", {}, {}}}};
  for (const EnergyRow& r : rep.rows) {
    csv.add_row(std::vector<double>{r.t, r.energy, r.S2});
    plot.series[0].x.push_back(r.t);
    plot.series[0].y.push_back(r.energy);
  }
  // The stable equilibrium whose S2 is closest to where the run ended.
  const double S2_final = rep.rows.back().S2;
  EquilibriumBranch nearest;
  double best = INFINITY;
  for (const EquilibriumBranch& b : solve_eta_branches(cfg.alpha))
    if (classify_stability(b).stable && std::abs(b.S2 - S2_final) < best) {
      best = std::abs(b.S2 - S2_final);
      nearest = b;
    }
  Json j{{"alpha", cfg.alpha},
         {"L", cfg.L},
         {"dt", rep.dt},
         {"t_final", cfg.t_final},
         {"amplitude", cfg.amplitude},
         {"axis", vec_json(axis)},
         {"initial_energy", rep.rows.front().energy},
         {"final_energy", rep.rows.back().energy},
         {"max_increase", rep.max_increase},
         {"final_S2", S2_final},
         {"fit_eta", rep.fit_eta},
         {"fit_axis", vec_json(rep.fit_axis)},
         {"fit_distance", rep.fit_distance},
         {"predicted_branch", nullptr},
         {"predicted_S2", nullptr}};
  if (std::isfinite(best)) {
    j["predicted_branch"] = to_string(nearest.branch);
    j["predicted_S2"] = nearest.S2;
  }
  w.put("energy.csv", csv.str());
  w.put("energy.json", to_json_text(j));
  w.put_svg("energy.svg", plot);
  return {{}, j};
}

}  // namespace

Vec3 seeded_axis(unsigned long seed) {
  std::mt19937_64 rng(seed);
  // Uniform on the sphere from raw 53-bit draws; avoids distribution objects
  // whose output differs between standard libraries.
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double z = 2.0 * unit() - 1.0, phi = 2.0 * std::acos(-1.0) * unit();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

RunResult execute(const RunConfig& cfg) {
  Writer w(cfg);
  RunResult res;
  switch (cfg.subcommand) {
    case Subcommand::bifurcation: res = do_bifurcation(cfg, w); break;
    case Subcommand::spectrum: res = do_spectrum(cfg, w); break;
    case Subcommand::leslie: res = do_leslie(cfg, w); break;
    case Subcommand::simulate: res = do_simulate(cfg, w); break;
    case Subcommand::convergence: res = do_convergence(cfg, w); break;
    case Subcommand::energy: res = do_energy(cfg, w); break;
  }
  res.files = w.files;
  return res;
}

}  // namespace nematic
