#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nematic/equilibria.hpp"
#include "nematic/leslie.hpp"
#include "nematic/sphere.hpp"

namespace nematic {

// Homogeneous Doi-Onsager state:
// df/dt = (1/eps) R.(R f + f R U f) - R.(m x (kappa m) f).
struct KineticState {
  double t = 0.0;
  HarmonicField f;
  double eps = 1.0;
  Mat3 kappa = Mat3::Zero();
  int L = 0;
  double alpha = 0.0;
};

KineticState make_kinetic_state(const HarmonicField& f, double eps, const Mat3& kappa, double alpha, double t = 0.0);

struct StressSample {
  double t = 0.0;
  Mat3 sigma_eps = Mat3::Zero();
  Mat3 sigma_L = Mat3::Zero();
  double p = 0.0;
  double err = 0.0;  // |sigma_eps - sigma_L - p I|_F
};

// Grid and transform for one degree, reused across steps. Products are
// evaluated on a grid exact for degree 2L + 4.
class KineticSolver {
 public:
  KineticSolver(int L, double alpha);
  // Explicit product grid; must integrate degree 2L+4 exactly
  // (n_theta >= L+3, n_phi >= 2L+5).
  KineticSolver(int L, double alpha, int n_theta, int n_phi);

  int L() const { return L_; }
  double alpha() const { return alpha_; }
  const SphereTransform& transform() const { return t_; }

  HarmonicField rhs(const HarmonicField& f, double eps, const Mat3& kappa) const;
  HarmonicField rhs(const KineticState& s) const { return rhs(s.f, s.eps, s.kappa); }
  // Everything except the diffusion (1/eps) Laplacian.
  HarmonicField drift(const HarmonicField& f, double eps, const Mat3& kappa) const;

  // Diffusion implicit, drift explicit. Throws NumericalError on NaN/Inf.
  KineticState step_imex(const KineticState& s, double dt) const;

  // Moment form, no division by eps.
  Mat3 stress_sigma_eps(const KineticState& s) const;
  // 1/2 D:<mmmm> - (1/eps) <m (m x R mu)>_f by quadrature.
  Mat3 stress_direct(const KineticState& s) const;

  OrientationMoments moments(const HarmonicField& f) const;
  Mat3 second_moment(const HarmonicField& f) const;
  double mass(const HarmonicField& f) const;
  double min_value(const HarmonicField& f) const;
  // int f (ln f - 1) + 1/2 f U f
  double free_energy(const HarmonicField& f) const;

 private:
  Mat3 second_moment(const GridField& v) const;

  int L_;
  double alpha_;
  SphereTransform t_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
};

// Order parameter and principal axis of Q2 = <mm> - I/3; the axis has its
// largest-magnitude component made positive.
struct Alignment {
  double S2 = 0.0;
  Vec3 axis = Vec3::UnitZ();
};
Alignment alignment(const Mat3& M2);

// Angle between two axes, ignoring sign.
double axis_angle(const Vec3& a, const Vec3& b);

struct HilbertSolve {
  HarmonicField f1;
  HarmonicField rhs;       // d f0/dt + R.(m x kappa m f0)
  double residual = 0.0;   // |projection of rhs onto Ker G*| / |rhs|
  double lambda = 0.0;
};

constexpr double kSolvabilityTol = 1e-6;
// Trajectory runs accept the truncation part of the residual at small L
// (about 4e-5 at L = 8); a wrong lambda gives residuals near 1e-1.
constexpr double kRunSolvabilityTol = 1e-3;

// Solves G f1 = rhs on mean-zero functions, f1 orthogonal to Ker G, absorbing
// any Ker G* component of rhs. dn/dt uses the given lambda. Never throws on
// a large residual; see hilbert_f1.
HilbertSolve solve_hilbert_f1(const Vec3& n, const Mat3& kappa, double eta, double alpha, int L, double lambda);
// Throws NumericalError when the solvability residual exceeds kSolvabilityTol.
// Without lambda, the g0-quadrature value is used.
HilbertSolve hilbert_f1(const Vec3& n, const Mat3& kappa, double eta, double alpha, int L, double lambda);
HilbertSolve hilbert_f1(const Vec3& n, const Mat3& kappa, double eta, double alpha, int L);

// Isotropic part of sigma_eps - sigma_L as eps -> 0: -((S2 - S4)/14) D:nn.
// Contracting <mmmm> with D also leaves -(S4/7)(D:nn) I from the fourth-order
// moment, so the S2 term alone is not enough.
double isotropic_correction(double S2, double S4, const Mat3& D, const Vec3& n);

enum class DtRule { linear, quadratic };
std::string to_string(DtRule r);
DtRule dt_rule_from_string(const std::string& s);

// dt = c eps (linear) or dt = c eps^2 (quadratic). The implicit Euler lag puts
// an O(dt) error on the O(eps) slaved part of f, which the stress sees as
// O(dt/eps); only the quadratic rule keeps the stress error O(eps).
struct DtPolicy {
  DtRule rule = DtRule::quadratic;
  double c = 0.1;
  double dt(double eps) const { return rule == DtRule::linear ? c * eps : c * eps * eps; }
};

struct TrajectoryRow {
  double t = 0.0;
  double S2 = 0.0;
  Vec3 axis = Vec3::UnitZ();
  Mat3 sigma = Mat3::Zero();
  double err = 0.0;
  double angle = 0.0;  // between the Ericksen-Leslie director and the Q2 axis
};

struct ConvergenceRun {
  double eps = 0.0;
  double dt = 0.0;
  double sup_err = 0.0;
  double sup_angle = 0.0;
  double f1_residual = 0.0;  // solvability residual of the initial corrector
  std::vector<TrajectoryRow> rows;
};

struct ConvergenceReport {
  double alpha = 0.0;
  int L = 0;
  std::vector<ConvergenceRun> runs;
  double fitted_slope = 0.0;    // least squares of log sup_err on log eps
  double director_slope = 0.0;  // same for sup_angle
};

struct ConvergenceOptions {
  double alpha = 8.0;
  Vec3 n0 = Vec3::UnitX();
  Mat3 kappa = Mat3::Zero();
  double t_final = 1.0;
  std::vector<double> eps_list{0.1, 0.05, 0.025};
  int L = 16;
  DtPolicy dt;
  double fixed_dt = 0.0;  // > 0 overrides the policy
  int samples = 100;
  int n_theta = 0, n_phi = 0;  // 0: smallest exact product grid
};

// One trajectory per eps from h + eps f1, on the eta1 branch.
ConvergenceRun run_single(const ConvergenceOptions& opt, double eps);
// Runs for different eps are independent and execute concurrently.
ConvergenceReport run_convergence(const ConvergenceOptions& opt);

double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct EnergyRow {
  double t = 0.0;
  double energy = 0.0;
  double S2 = 0.0;
};

struct EnergyReport {
  std::vector<EnergyRow> rows;
  double max_increase = 0.0;  // largest A[f_{k+1}] - A[f_k]
  double dt = 0.0;            // final step size (halved once on positivity loss)
  HarmonicField final_f;
  // Nearest equilibrium h_{eta, n} from the final Q2 axis and S2.
  double fit_eta = 0.0;
  Vec3 fit_axis = Vec3::UnitZ();
  double fit_distance = 0.0;  // L2 distance of final f to the degree-L h_{eta, n}
};

// kappa = 0, eps = 1. Rows at every `record_every` steps and at the end.
EnergyReport run_energy_decay(double alpha, const HarmonicField& f_init, int L, double dt, double t_final,
                              int record_every = 1);
EnergyReport run_energy_decay(const KineticSolver& solver, const HarmonicField& f_init, double dt, double t_final,
                              int record_every = 1);

// A positive density 1/(4 pi) + amplitude * (normalized degree-2 harmonic).
HarmonicField perturbed_isotropic(int L, double amplitude, const Vec3& axis);

// eta with S2(eta) = S2 (negative eta for oblate S2 < 0).
double eta_from_S2(double S2);

}  // namespace nematic
