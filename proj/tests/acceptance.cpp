// Acceptance criteria, one line each. Usage: nematic_acceptance [N ...]
// (no arguments runs all). Exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nematic/equilibria.hpp"
#include "nematic/kinetic.hpp"
#include "nematic/leslie.hpp"
#include "nematic/spectral.hpp"

using namespace nematic;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) detail << " [failed: " << what << "]";
  }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Mat3 sym(const Mat3& k) { return 0.5 * (k + k.transpose()); }
Mat3 antisym(const Mat3& k) { return 0.5 * (k - k.transpose()); }

Mat3 random_traceless(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat3 k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = nd(rng);
  return k - k.trace() / 3.0 * Mat3::Identity();
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return Vec3(nd(rng), nd(rng), nd(rng)).normalized();
}

Mat3 simple_shear() {
  Mat3 k = Mat3::Zero();
  k(0, 1) = 1.0;
  return k;
}

// 1. alpha* and eta2(7.5)
void bifurcation(Outcome& o) {
  const auto t0 = Clock::now();
  const auto [a_star, eta_star] = alpha_star();
  const double eta2 = find_branch(7.5, Branch::eta2).eta;
  const double dt = seconds_since(t0);
  o.detail.precision(9);
  o.detail << "alpha* = " << a_star << " (target 6.731393 +- 1e-5), eta* = " << eta_star
           << ", |eta2(7.5)| = " << std::abs(eta2) << " (<= 1e-6), " << dt << " s";
  o.require(std::abs(a_star - 6.731393) <= 1e-5, "alpha*");
  o.require(std::abs(eta2) <= 1e-6, "eta2(7.5)");
  o.require(dt < 5.0, "runtime < 5 s");
}

// 2. isotropic spectrum and the sign change at alpha = 7.5
void isotropic_spectrum(Outcome& o) {
  const auto t0 = Clock::now();
  const int L = 16;
  auto G_at = [&](double alpha) {
    return assemble_G_h(equilibrium_field(find_branch(alpha, Branch::isotropic), Vec3::UnitZ(), L), L);
  };
  double worst = 0.0;
  for (double alpha : {5.0, 7.5, 8.0}) {
    std::vector<double> expect;
    for (int k = 0; k <= L; ++k)
      for (int i = 0; i < 2 * k + 1; ++i) expect.push_back(k == 2 ? -6.0 + 4.0 * alpha / 5.0 : -double(k * (k + 1)));
    std::sort(expect.begin(), expect.end());
    const SpectrumReport rep = spectrum(G_at(alpha), Subspace::all);
    if (rep.eigenvalues.size() != expect.size()) {
      o.require(false, "eigenvalue count");
      return;
    }
    for (std::size_t i = 0; i < expect.size(); ++i)
      worst = std::max(worst, std::abs(rep.eigenvalues[i] - expect[i]));
  }
  // largest mean-zero eigenvalue changes sign where -6 + 4 alpha / 5 does
  auto top = [&](double alpha) { return spectrum(G_at(alpha), Subspace::mean_zero).max_real; };
  double lo = 7.0, hi = 8.0;
  const bool bracket = top(lo) < 0.0 && top(hi) > 0.0;
  while (bracket && hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (top(mid) > 0.0 ? hi : lo) = mid;
  }
  const double cross = 0.5 * (lo + hi);
  const double dt = seconds_since(t0);
  o.detail.precision(10);
  o.detail << "max |eig - closed form| = " << worst << " (<= 1e-8) over alpha in {5, 7.5, 8}, sign change at alpha = "
           << cross << " (7.5 +- 1e-6), " << dt << " s";
  o.require(worst <= 1e-8, "eigenvalues");
  o.require(bracket && std::abs(cross - 7.5) <= 1e-6, "sign change");
  o.require(dt < 30.0, "runtime < 30 s");
}

// 3. two-dimensional kernel spanned by R_i h, annihilated by H
void kernel_structure(Outcome& o) {
  const auto t0 = Clock::now();
  const int L = 32;
  const EquilibriumField h = equilibrium_field(find_branch(8.0, Branch::eta1), Vec3::UnitZ(), L);
  const LinearizedOperators ops = assemble_all(h, L);
  const SpectrumReport rep = spectrum_G(ops);

  const int N = sh_size(L);
  Eigen::MatrixXd K(N, static_cast<int>(rep.kernel_basis.size()));
  for (int i = 0; i < K.cols(); ++i) K.col(i) = to_real(rep.kernel_basis[i]);
  Eigen::MatrixXd Q = K.householderQr().householderQ() * Eigen::MatrixXd::Identity(N, K.cols());
  double loss = 0.0, h_norm = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const Eigen::VectorXd r = to_real(apply_R(h.field, i));
    loss = std::max(loss, 1.0 - (Q.transpose() * r).norm() / r.norm());
  }
  for (int i = 0; i < K.cols(); ++i) h_norm = std::max(h_norm, (ops.H.matrix * Q.col(i)).norm());
  const double dt = seconds_since(t0);
  o.detail << "L = 32, kernel_dim = " << rep.kernel_dim << " (== 2, tol " << rep.kernel_tol
           << "), projection loss = " << loss << " (< 1e-6), max |H k| = " << h_norm << " (<= 1e-8), " << dt << " s";
  o.require(rep.kernel_dim == 2, "kernel dimension");
  o.require(K.cols() == 2 && loss < 1e-6, "span of R_i h");
  o.require(K.cols() == 2 && h_norm <= 1e-8, "H on kernel");
  o.require(dt < 30.0, "runtime < 30 s");
}

// 4. constrained lower bound c0 of H
void lower_bound(Outcome& o) {
  o.detail.precision(6);
  for (double alpha : {7.0, 8.0, 10.0}) {
    const EquilibriumBranch b = find_branch(alpha, Branch::eta1);
    const double c16 = lower_bound_c0(equilibrium_field(b, Vec3::UnitZ(), 16), 16);
    const double c20 = lower_bound_c0(equilibrium_field(b, Vec3::UnitZ(), 20), 20);
    const double drift = std::abs(c20 - c16) / c16;
    o.detail << "alpha " << alpha << ": c0(16) = " << c16 << ", c0(20) = " << c20 << ", change " << 100 * drift
             << "%; ";
    std::ostringstream tag;
    tag << "alpha " << alpha;
    o.require(c16 > 0.0 && c20 > 0.0, tag.str() + " c0 > 0");
    o.require(drift <= 0.05, tag.str() + " 5% under L 16 -> 20");
  }
}

// 5. kernel product: spectral route vs g0 quadrature
void lambda_cross(Outcome& o) {
  const auto t0 = Clock::now();
  const int L = 16;
  const EquilibriumBranch b = find_branch(8.0, Branch::eta1);
  const double lambda = lambda_of(b.eta, 8.0);
  std::mt19937_64 rng(11);
  const Vec3 n = random_unit(rng);
  const ProjectionContext pc(equilibrium_field(b, n, L), L);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vec3 u = random_unit(rng), up = random_unit(rng);
    const Vec3 ut = u - u.dot(n) * n, upt = up - up.dot(n) * n;
    const double closed = b.S2 / lambda * ut.dot(upt);
    const double scale = b.S2 / lambda * ut.norm() * upt.norm();
    worst = std::max(worst, std::abs(pc.kernel_product(u, up) - closed) / scale);
  }
  const double dt = seconds_since(t0);
  o.detail << "alpha = 8, L = 16, lambda = " << lambda << ", max relative gap = " << worst << " (<= 1e-4), " << dt
           << " s";
  o.require(worst <= 1e-4, "kernel product");
  o.require(dt < 30.0, "runtime < 30 s");
}

const double kSweep[] = {7.0, 8.0, 10.0, 15.0, 25.0};

// 6. Parodi relation, gamma1, gamma2
void leslie_identities(Outcome& o) {
  double parodi = 0.0, g1 = 0.0, g2 = 0.0;
  for (double alpha : kSweep) {
    const LeslieSet ls = leslie_coeffs(find_branch(alpha, Branch::eta1).eta, alpha);
    parodi = std::max(parodi, ls.parodi_residual());
    g1 = std::max(g1, std::abs(ls.gamma1 - ls.S2 / ls.lambda) / ls.gamma1);
    g2 = std::max(g2, std::abs(ls.gamma2 + ls.S2));
  }
  o.detail << "alpha in {7, 8, 10, 15, 25}: max Parodi residual = " << parodi << " (<= 1e-12), max |gamma1 - S2/lambda| / gamma1 = "
           << g1 << " (<= 1e-10), max |gamma2 + S2| = " << g2 << " (<= 1e-12)";
  o.require(parodi <= 1e-12, "Parodi");
  o.require(g1 <= 1e-10, "gamma1");
  o.require(g2 <= 1e-12, "gamma2");
}

// 7. dissipation form nonnegative, positivity constants of the proof
void dissipation(Outcome& o) {
  const auto t0 = Clock::now();
  double worst = INFINITY, c_min = INFINITY;
  for (double alpha : kSweep) {
    const EquilibriumBranch b = find_branch(alpha, Branch::eta1);
    const LeslieSet ls = leslie_coeffs(b.eta, alpha);
    worst = std::min(worst, dissipation_min(ls, 10000, 20240601u));
    // S4, S2 - S4, S4/35 - 3 S2/7 + 2/5 from the order parameters and from the
    // A_k integral forms (common positive factors dropped)
    const double e = b.eta;
    auto A = [&](int k) { return a_k_scaled(e, k); };
    const double from_S[] = {ls.S4, ls.S2 - ls.S4, ls.S4 / 35.0 - 3.0 * ls.S2 / 7.0 + 0.4};
    const double from_A[] = {A(8) - 2 * A(6) + A(4), A(6) - 2 * A(4) + A(2), 5 * A(0) - 6 * A(2) + A(4)};
    for (int i = 0; i < 3; ++i) c_min = std::min({c_min, from_S[i], from_A[i] / A(0)});
  }
  const double dt = seconds_since(t0);
  o.detail << "10^4 samples per alpha in {7, 8, 10, 15, 25}: min form / |D|^2 = " << worst
           << " (>= -1e-12), smallest positivity constant = " << c_min << " (> 0), " << dt << " s";
  o.require(worst >= -1e-12, "dissipation form");
  o.require(c_min > 0.0, "positivity constants");
  o.require(dt < 10.0, "runtime < 10 s");
}

// 8. L(Omega) = 0, K(kappa) closed form, <L(D), A^-1 L(D)> closed form
void projection_lemmas(Outcome& o) {
  const int L = 20;
  const EquilibriumBranch b = find_branch(8.0, Branch::eta1);
  const double lambda = lambda_of(b.eta, 8.0);
  std::mt19937_64 rng(8);
  const Vec3 n = random_unit(rng);
  const ProjectionContext pc(equilibrium_field(b, n, L), L);
  double l_omega = 0.0, k_rel = 0.0, form_rel = 0.0;
  for (int t = 0; t < 100; ++t) l_omega = std::max(l_omega, pc.out_of_kernel(pc.source(antisym(random_traceless(rng)))).norm());
  for (int t = 0; t < 10; ++t) {
    const Mat3 k = random_traceless(rng);
    const Mat3 D = sym(k), Om = 0.5 * (k.transpose() - k);
    const Vec3 w = pc.kernel_coeffs(pc.source(k));
    const Vec3 wc = n.cross(lambda * D * n - Om * n);
    k_rel = std::max(k_rel, (w - wc).norm() / wc.norm());
    const HarmonicField l = pc.out_of_kernel(pc.source(D));
    const double closed = L_projection_form(b.S2, b.S4, lambda, D, n);
    form_rel = std::max(form_rel, std::abs(pc.pair(l, l) - closed) / closed);
  }
  o.detail << "alpha = 8, L = 20: max |L(Omega)| = " << l_omega << " (<= 1e-8), K(kappa) relative gap = " << k_rel
           << " (<= 1e-5), L(D) form relative gap = " << form_rel << " (<= 1e-5)";
  o.require(l_omega <= 1e-8, "L(Omega)");
  o.require(k_rel <= 1e-5, "K(kappa)");
  o.require(form_rel <= 1e-5, "L(D) form");
}

// 9. second and fourth moments against brute-force quadrature
void moment_oracles(Outcome& o) {
  const SphereGrid g = build_grid(96, 192);
  std::mt19937_64 rng(9);
  const Vec3 n = random_unit(rng);
  double worst = 0.0;
  for (double eta : {0.0, find_branch(8.0, Branch::eta1).eta}) {
    const OrientationMoments mt = moment_tensors(eta, n);
    double Z = 0.0;
    Mat3 M2 = Mat3::Zero();
    Tensor4 M4;
    for (int j = 0; j < g.n_theta; ++j)
      for (int k = 0; k < g.n_phi; ++k) {
        const Vec3 m = g.point(j, k);
        const double c = m.dot(n);
        const double w = g.weight(j) * std::exp(eta * (c * c - 1.0));
        Z += w;
        M2 += w * m * m.transpose();
        for (int a = 0; a < 3; ++a)
          for (int bb = 0; bb < 3; ++bb)
            for (int cc = 0; cc < 3; ++cc)
              for (int d = 0; d < 3; ++d) M4(a, bb, cc, d) += w * m[a] * m[bb] * m[cc] * m[d];
      }
    worst = std::max(worst, (M2 / Z - mt.M2).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < 81; ++i) worst = std::max(worst, std::abs(M4.v[i] / Z - mt.M4.v[i]));
  }
  o.detail << "eta in {0, eta1(8)}: max entrywise gap = " << worst << " (<= 1e-10)";
  o.require(worst <= 1e-10, "moments");
}

// 10. first-order convergence of the stress error in eps
void convergence(Outcome& o) {
  const auto t0 = Clock::now();
  ConvergenceOptions opt;
  opt.alpha = 8.0;
  opt.kappa = simple_shear();
  opt.t_final = 1.0;
  opt.eps_list = {0.1, 0.05, 0.025};
  opt.L = 16;
  const ConvergenceReport rep = run_convergence(opt);
  bool monotone = true;
  for (std::size_t i = 1; i < rep.runs.size(); ++i) monotone = monotone && rep.runs[i].sup_angle < rep.runs[i - 1].sup_angle;
  const double dt = seconds_since(t0);
  o.detail << "sup errors";
  for (const ConvergenceRun& r : rep.runs) o.detail << " " << r.sup_err;
  o.detail << ", fitted slope = " << rep.fitted_slope << " ([0.7, 1.3]), director angle errors";
  for (const ConvergenceRun& r : rep.runs) o.detail << " " << r.sup_angle;
  o.detail << " (decreasing), dt rule " << to_string(opt.dt.rule) << ", " << dt << " s";
  o.require(rep.fitted_slope >= 0.7 && rep.fitted_slope <= 1.3, "slope");
  o.require(monotone, "director error monotone");
  o.require(dt < 600.0, "runtime < 10 min");
}

// 11. solvability of the first corrector
void hilbert_probe(Outcome& o) {
  const int L = 16;
  const EquilibriumBranch b = find_branch(8.0, Branch::eta1);
  const double lambda = lambda_of(b.eta, 8.0);
  std::mt19937_64 rng(12);
  const Vec3 n = random_unit(rng);
  const double good = solve_hilbert_f1(n, simple_shear(), b.eta, 8.0, L, lambda).residual;
  const double up = solve_hilbert_f1(n, simple_shear(), b.eta, 8.0, L, 1.2 * lambda).residual;
  const double down = solve_hilbert_f1(n, simple_shear(), b.eta, 8.0, L, 0.8 * lambda).residual;
  o.detail << "residual with lambda = " << good << " (<= 1e-6), with 1.2 lambda = " << up << ", with 0.8 lambda = " << down
           << " (>= 1e-2)";
  o.require(good <= 1e-6, "computed lambda");
  o.require(up >= 1e-2 && down >= 1e-2, "perturbed lambda");
}

// 12. free energy decay without flow
void energy_decay(Outcome& o) {
  const auto t0 = Clock::now();
  for (double alpha : {5.0, 8.0}) {
    const EnergyReport rep =
        run_energy_decay(alpha, perturbed_isotropic(16, 0.02, Vec3(1.0, 2.0, 2.0)), 16, 0.01, 30.0, 100);
    // the stable state reached from a small perturbation of isotropy
    const double target = alpha < 7.5 ? 0.0 : find_branch(alpha, Branch::eta1).S2;
    const double gap = std::abs(rep.rows.back().S2 - target);
    o.detail << "alpha " << alpha << ": max step increase = " << rep.max_increase << ", |S2 - " << target
             << "| = " << gap << "; ";
    std::ostringstream tag;
    tag << "alpha " << alpha;
    o.require(rep.max_increase <= 1e-10, tag.str() + " monotone");
    o.require(gap <= 1e-3, tag.str() + " S2 limit");
  }
  const double dt = seconds_since(t0);
  o.detail << dt << " s";
  o.require(dt < 120.0, "runtime < 2 min");
}

struct Criterion {
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {"bifurcation", bifurcation},           {"isotropic spectrum", isotropic_spectrum},
      {"kernel structure", kernel_structure}, {"lower bound c0", lower_bound},
      {"lambda / g0 cross-check", lambda_cross}, {"Leslie identities", leslie_identities},
      {"dissipation", dissipation},           {"projection lemmas", projection_lemmas},
      {"moment oracles", moment_oracles},     {"small-Deborah convergence", convergence},
      {"Hilbert solvability", hilbert_probe}, {"energy decay", energy_decay},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > 12) {
      std::fprintf(stderr, "usage: %s [criterion 1..12 ...]\n", argv[0]);
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty())
    for (int k = 1; k <= 12; ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    Outcome o;
    o.detail.precision(6);
    try {
      all[k - 1].run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", k, all[k - 1].name, o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
