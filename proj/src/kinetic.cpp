#include "nematic/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "nematic/errors.hpp"
#include "nematic/spectral.hpp"

namespace nematic {

namespace {

constexpr double kPi = std::numbers::pi;

struct Flow {
  Mat3 D, Omega;
};

Flow split(const Mat3& kappa) {
  return {0.5 * (kappa + kappa.transpose()), 0.5 * (kappa.transpose() - kappa)};
}

void check_kappa(const Mat3& kappa) {
  if (!kappa.allFinite()) throw DomainError("velocity gradient must be finite");
  if (std::abs(kappa.trace()) > 1e-12 * std::max(1.0, kappa.norm()))
    throw DomainError("velocity gradient must be traceless");
}

EquilibriumBranch branch_at(double eta, double alpha) {
  EquilibriumBranch b;
  b.alpha = alpha;
  b.eta = eta;
  b.branch = eta == 0.0 ? Branch::isotropic : Branch::eta1;
  b.oblate = eta < 0.0;
  std::tie(b.S2, b.S4) = order_params(eta);
  return b;
}

std::string describe(const char* what, double eps, double dt, double t) {
  std::ostringstream os;
  os.precision(6);
  os << what << " (eps = " << eps << ", dt = " << dt << ", t = " << t << ")";
  return os.str();
}

}  // namespace

KineticState make_kinetic_state(const HarmonicField& f, double eps, const Mat3& kappa, double alpha, double t) {
  if (!(eps > 0.0)) throw DomainError("kinetic state: eps must be positive");
  if (!(alpha >= 0.0)) throw DomainError("kinetic state: alpha must be >= 0");
  check_kappa(kappa);
  if (f.l_max < 2) throw DomainError("kinetic state: degree must be >= 2");
  const double mass = std::sqrt(4.0 * kPi) * f(0, 0).real();
  if (std::abs(mass - 1.0) > 1e-10) throw DomainError("kinetic state: density must have unit mass");
  KineticState s;
  s.t = t;
  s.f = f;
  s.f.symmetrize();
  s.eps = eps;
  s.kappa = kappa;
  s.L = f.l_max;
  s.alpha = alpha;
  return s;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

SphereGrid product_grid(int L, int n_theta, int n_phi) {
  if (L < 2) throw DomainError("KineticSolver: L must be >= 2");
  if (n_theta == 0 && n_phi == 0) return grid_for_degree(2 * L + 4, L);
  if (n_theta < L + 3 || n_phi < 2 * L + 5 || n_phi % 2) {
    std::ostringstream os;
    os << "KineticSolver: grid " << n_theta << "x" << n_phi << " is too coarse for L=" << L << " (need n_theta >= "
       << L + 3 << ", even n_phi >= " << 2 * L + 5 << ")";
    throw DomainError(os.str());
  }
  return build_grid(n_theta, n_phi);
}

}  // namespace

KineticSolver::KineticSolver(int L, double alpha) : KineticSolver(L, alpha, 0, 0) {}

KineticSolver::KineticSolver(int L, double alpha, int n_theta, int n_phi)
    : L_(L), alpha_(alpha), t_(product_grid(L, n_theta, n_phi), L) {
  const SphereGrid& g = t_.grid();
  points_.reserve(g.size());
  weights_.reserve(g.size());
  for (int j = 0; j < g.n_theta; ++j)
    for (int k = 0; k < g.n_phi; ++k) {
      points_.push_back(g.point(j, k));
      weights_.push_back(g.weight(j));
    }
}

Mat3 KineticSolver::second_moment(const GridField& v) const {
  Mat3 M = Mat3::Zero();
  for (std::size_t i = 0; i < points_.size(); ++i) M += (weights_[i] * v.values[i]) * (points_[i] * points_[i].transpose());
  return M;
}

Mat3 KineticSolver::second_moment(const HarmonicField& f) const { return second_moment(t_.synthesize(f)); }

double KineticSolver::mass(const HarmonicField& f) const { return std::sqrt(4.0 * kPi) * f(0, 0).real(); }

double KineticSolver::min_value(const HarmonicField& f) const {
  GridField v = t_.synthesize(f);
  return *std::min_element(v.values.begin(), v.values.end());
}

OrientationMoments KineticSolver::moments(const HarmonicField& f) const {
  GridField v = t_.synthesize(f);
  OrientationMoments out;
  out.M2 = second_moment(v);
  for (std::size_t p = 0; p < points_.size(); ++p) {
    const Vec3& m = points_[p];
    const double w = weights_[p] * v.values[p];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double wij = w * m[i] * m[j];
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) out.M4(i, j, k, l) += wij * m[k] * m[l];
      }
  }
  return out;
}

HarmonicField KineticSolver::drift(const HarmonicField& f, double eps, const Mat3& kappa) const {
  if (f.l_max != L_) throw DomainError("kinetic drift: field degree does not match the solver");
  GridField fv = t_.synthesize(f);
  // R U f = -2 alpha m x (M2 m), so both drift terms are R.(f m x B m).
  const Mat3 B = -(2.0 * alpha_ / eps) * second_moment(fv) - kappa;
  GridField V[3] = {GridField(t_.grid()), GridField(t_.grid()), GridField(t_.grid())};
  for (std::size_t p = 0; p < points_.size(); ++p) {
    const Vec3 w = fv.values[p] * points_[p].cross(B * points_[p]);
    for (int a = 0; a < 3; ++a) V[a].values[p] = w[a];
  }
  HarmonicField out(L_);
  for (int a = 0; a < 3; ++a) out += apply_R(t_.analyze(V[a]), a + 1);
  out(0, 0) = 0.0;
  out.symmetrize();
  return out;
}

HarmonicField KineticSolver::rhs(const HarmonicField& f, double eps, const Mat3& kappa) const {
  HarmonicField out = drift(f, eps, kappa);
  for (int l = 1; l <= L_; ++l)
    for (int m = -l; m <= l; ++m) out(l, m) -= (l * (l + 1.0) / eps) * f(l, m);
  return out;
}

KineticState KineticSolver::step_imex(const KineticState& s, double dt) const {
  if (!(dt > 0.0)) throw DomainError("step_imex: dt must be positive");
  KineticState out = s;
  out.f += dt * drift(s.f, s.eps, s.kappa);
  for (int l = 1; l <= L_; ++l) {
    const double damp = 1.0 / (1.0 + dt * l * (l + 1.0) / s.eps);
    for (int m = -l; m <= l; ++m) out.f(l, m) *= damp;
  }
  out.f(0, 0) = s.f(0, 0);
  out.t = s.t + dt;
  for (const cplx& c : out.f.coeffs)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw NumericalError(describe("step_imex: non-finite coefficient", s.eps, dt, s.t));
  return out;
}

Mat3 KineticSolver::stress_sigma_eps(const KineticState& s) const {
  const Flow fl = split(s.kappa);
  const OrientationMoments M = moments(s.f);
  const Mat3 dQ = second_moment(rhs(s));
  const Mat3 M4D = M.M4.contract(fl.D);
  const Mat3 flow = 2.0 * M4D - fl.D * M.M2 + fl.Omega * M.M2 - M.M2 * (fl.D + fl.Omega);
  return 0.5 * M4D - 0.5 * (flow + dQ);
}

Mat3 KineticSolver::stress_direct(const KineticState& s) const {
  const Flow fl = split(s.kappa);
  GridField fv = t_.synthesize(s.f);
  GridField rf[3];
  for (int a = 0; a < 3; ++a) rf[a] = t_.synthesize(apply_R(s.f, a + 1));
  const OrientationMoments M = moments(s.f);
  Mat3 acc = Mat3::Zero();
  for (std::size_t p = 0; p < points_.size(); ++p) {
    const Vec3& m = points_[p];
    // f R mu = R f + f R U f
    Vec3 v(rf[0].values[p], rf[1].values[p], rf[2].values[p]);
    v += fv.values[p] * (-2.0 * alpha_) * m.cross(M.M2 * m);
    acc += weights_[p] * m * m.cross(v).transpose();
  }
  return 0.5 * M.M4.contract(fl.D) - acc / s.eps;
}

double KineticSolver::free_energy(const HarmonicField& f) const {
  GridField v = t_.synthesize(f);
  const Mat3 M2 = second_moment(v);
  const double mass = this->mass(f);
  double sum = 0.0;
  for (std::size_t p = 0; p < points_.size(); ++p) {
    const double x = v.values[p];
    if (!(x > 0.0)) {
      std::ostringstream os;
      os << "free_energy: density is not positive on the grid (min = " << x << ")";
      throw NumericalError(os.str());
    }
    const double u = alpha_ * (mass - points_[p].dot(M2 * points_[p]));
    sum += weights_[p] * x * (std::log(x) - 1.0 + 0.5 * u);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Alignment

Alignment alignment(const Mat3& M2) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (M2 + M2.transpose()));
  Alignment a;
  const double trace = M2.trace();
  a.S2 = 1.5 * (es.eigenvalues()(2) - trace / 3.0) / (trace == 0.0 ? 1.0 : trace);
  Vec3 v = es.eigenvectors().col(2);
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  a.axis = v[k] < 0.0 ? Vec3(-v) : v;
  return a;
}

double axis_angle(const Vec3& a, const Vec3& b) {
  const Vec3 u = a.normalized(), w = b.normalized();
  return std::atan2(u.cross(w).norm(), std::abs(u.dot(w)));
}

// ---------------------------------------------------------------------------
// Hilbert corrector

HilbertSolve solve_hilbert_f1(const Vec3& n, const Mat3& kappa, double eta, double alpha, int L, double lambda) {
  check_kappa(kappa);
  if (std::abs(n.norm() - 1.0) > 1e-12) throw DomainError("director must be a unit vector");
  if (!(eta > 0.0)) throw DomainError("hilbert_f1: needs a prolate equilibrium (eta > 0)");
  const EquilibriumField h = equilibrium_field(branch_at(eta, alpha), n, L);
  const OperatorContext ctx(h, L);
  const OperatorMatrix A = assemble_A_h(ctx);
  const OperatorMatrix G = assemble_G_h(ctx);
  const HarmonicField ht = h.field.truncated(L);

  HilbertSolve out;
  out.lambda = lambda;
  // d f0/dt = -(n x dn/dt).R h
  const Vec3 w = n.cross(director_rate(make_director_state(n, kappa), lambda));
  HarmonicField b(L);
  for (int a = 0; a < 3; ++a)
    if (w[a] != 0.0) b -= w[a] * apply_R(ht, a + 1);
  {
    const int nt = L + 48;
    SphereTransform t(build_grid(nt, 2 * nt), L);
    GridField hv = h.on_grid(t.grid());
    for (int a = 0; a < 3; ++a) {
      GridField v = sample(t.grid(), [&](const Vec3& m) { return m.cross(kappa * m)[a]; });
      b += apply_R(t.analyze(v * hv), a + 1);
    }
  }
  b(0, 0) = 0.0;
  b.symmetrize();
  out.rhs = b;

  const int N = sh_size(L);
  const Eigen::VectorXd bv = to_real(b);
  const double bnorm = bv.norm();
  if (bnorm == 0.0) {
    out.f1 = HarmonicField(L);
    return out;
  }

  // Ker G* from psi_i = A^{-1} R_i h; Ker G from t.R h, t orthogonal to n.
  auto basis = [&](const Eigen::MatrixXd& C) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C);
    qr.setThreshold(1e-8);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(C.rows(), qr.rank()));
  };
  Eigen::MatrixXd Psi(N, 3), K(N, 3);
  const std::vector<HarmonicField> psi = adjoint_kernel(A, h);
  for (int i = 0; i < 3; ++i) {
    Psi.col(i) = to_real(psi[i]);
    K.col(i) = to_real(apply_R(ht, i + 1));
  }
  const Eigen::MatrixXd Qpsi = basis(Psi), Qk = basis(K);
  out.residual = (Qpsi.transpose() * bv).norm() / bnorm;

  // Bordered system on mean-zero functions:
  // [G  Psi] [f1]   [b]
  // [K^T 0 ] [c ] = [0]
  const int n0 = N - 1, r = static_cast<int>(Qpsi.cols());
  if (Qk.cols() != r) throw NumericalError("hilbert_f1: kernel and adjoint kernel dimensions differ");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n0 + r, n0 + r);
  M.topLeftCorner(n0, n0) = G.matrix.bottomRightCorner(n0, n0);
  M.topRightCorner(n0, r) = Qpsi.bottomRows(n0);
  M.bottomLeftCorner(r, n0) = Qk.bottomRows(n0).transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n0 + r);
  rhs.head(n0) = bv.tail(n0);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) throw NumericalError("hilbert_f1: bordered solve failed");
  Eigen::VectorXd f1 = Eigen::VectorXd::Zero(N);
  f1.tail(n0) = x.head(n0);
  out.f1 = from_real(L, f1);
  return out;
}

HilbertSolve hilbert_f1(const Vec3& n, const Mat3& kappa, double eta, double alpha, int L) {
  return hilbert_f1(n, kappa, eta, alpha, L, lambda_of(eta, alpha));
}

HilbertSolve hilbert_f1(const Vec3& n, const Mat3& kappa, double eta, double alpha, int L, double lambda) {
  HilbertSolve s = solve_hilbert_f1(n, kappa, eta, alpha, L, lambda);
  if (s.residual > kSolvabilityTol) {
    std::ostringstream os;
    os.precision(3);
    os << "hilbert_f1: solvability residual " << s.residual << " exceeds " << kSolvabilityTol
       << " (director rate inconsistent with lambda)";
    throw NumericalError(os.str());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Convergence experiment

double isotropic_correction(double S2, double S4, const Mat3& D, const Vec3& n) {
  return -((S2 - S4) / 14.0) * n.dot(D * n);
}

std::string to_string(DtRule r) { return r == DtRule::linear ? "linear" : "quadratic"; }

DtRule dt_rule_from_string(const std::string& s) {
  if (s == "linear") return DtRule::linear;
  if (s == "quadratic") return DtRule::quadratic;
  throw DomainError("unknown dt rule '" + s + "' (expected linear or quadratic)");
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceRun run_single(const ConvergenceOptions& opt, double eps) {
  if (!(eps > 0.0)) throw DomainError("convergence: eps must be positive");
  if (!(opt.t_final > 0.0)) throw DomainError("convergence: t_final must be positive");
  if (opt.samples < 1) throw DomainError("convergence: samples must be >= 1");
  check_kappa(opt.kappa);
  const EquilibriumBranch br = find_branch(opt.alpha, Branch::eta1);
  const Vec3 n0 = opt.n0.normalized();
  const LeslieSet ls = leslie_coeffs(br.eta, opt.alpha);
  const EquilibriumField h = equilibrium_field(br, n0, opt.L);
  const HilbertSolve f1 = solve_hilbert_f1(n0, opt.kappa, br.eta, opt.alpha, opt.L, lambda_of(br.eta, opt.alpha));
  if (!(f1.residual <= kRunSolvabilityTol)) {
    std::ostringstream os;
    os << "convergence: initial corrector solvability residual " << f1.residual << " exceeds " << kRunSolvabilityTol;
    throw NumericalError(os.str());
  }
  const KineticSolver solver(opt.L, opt.alpha, opt.n_theta, opt.n_phi);

  const double interval = opt.t_final / opt.samples;
  const double target = opt.fixed_dt > 0.0 ? opt.fixed_dt : opt.dt.dt(eps);
  const long per_sample = std::max(1L, static_cast<long>(std::ceil(interval / target - 1e-9)));
  const double dt = interval / per_sample;

  ConvergenceRun run;
  run.eps = eps;
  run.dt = dt;
  run.f1_residual = f1.residual;
  KineticState s = make_kinetic_state(h.field + eps * f1.f1, eps, opt.kappa, opt.alpha);
  DirectorState d = make_director_state(n0, opt.kappa);
  const Flow fl = split(opt.kappa);

  for (int k = 0; k <= opt.samples; ++k) {
    if (k > 0) {
      for (long i = 0; i < per_sample; ++i) {
        s = solver.step_imex(s, dt);
        d = director_step(d, ls.lambda, dt);
      }
      s.t = k * interval;
      d.t = s.t;
    }
    TrajectoryRow row;
    row.t = s.t;
    const Mat3 sig = solver.stress_sigma_eps(s);
    const Mat3 sigL = leslie_stress(ls, d, director_rate(d, ls.lambda));
    const double p = isotropic_correction(ls.S2, ls.S4, fl.D, d.n);
    row.sigma = sig;
    row.err = (sig - sigL - p * Mat3::Identity()).norm();
    const Alignment al = alignment(solver.second_moment(s.f));
    row.S2 = al.S2;
    row.axis = al.axis;
    row.angle = axis_angle(al.axis, d.n);
    if (!std::isfinite(row.err) || row.err > 1e6)
      throw NumericalError(describe("convergence: kinetic solution blew up", eps, dt, s.t));
    run.sup_err = std::max(run.sup_err, row.err);
    run.sup_angle = std::max(run.sup_angle, row.angle);
    run.rows.push_back(row);
  }
  return run;
}

ConvergenceReport run_convergence(const ConvergenceOptions& opt) {
  if (opt.eps_list.size() < 2) throw DomainError("convergence: eps_list needs at least two values");
  for (std::size_t i = 1; i < opt.eps_list.size(); ++i)
    if (!(opt.eps_list[i] < opt.eps_list[i - 1])) throw DomainError("convergence: eps_list must be strictly decreasing");
  ConvergenceReport rep;
  rep.alpha = opt.alpha;
  rep.L = opt.L;
  std::vector<std::future<ConvergenceRun>> jobs;
  for (double eps : opt.eps_list) jobs.push_back(std::async(std::launch::async, run_single, std::cref(opt), eps));
  std::vector<double> e, se, sa;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    rep.runs.push_back(jobs[i].get());
    e.push_back(opt.eps_list[i]);
    se.push_back(rep.runs.back().sup_err);
    sa.push_back(rep.runs.back().sup_angle);
  }
  rep.fitted_slope = fit_slope(e, se);
  rep.director_slope = fit_slope(e, sa);
  return rep;
}

// ---------------------------------------------------------------------------
// Energy decay

HarmonicField perturbed_isotropic(int L, double amplitude, const Vec3& axis) {
  const Vec3 a = axis.normalized();
  HarmonicField f(L);
  f(0, 0) = 1.0 / std::sqrt(4.0 * kPi);
  SphereTransform t(grid_for_degree(4, L), 2);
  HarmonicField p = t.analyze(sample(t.grid(), [&](const Vec3& m) {
    const double c = m.dot(a);
    return 1.5 * c * c - 0.5;
  }));
  p(0, 0) = 0.0;
  p *= amplitude / p.norm();
  for (int m = -2; m <= 2; ++m) f(2, m) = p(2, m);
  f.symmetrize();
  return f;
}

double eta_from_S2(double S2) {
  if (!(S2 > -0.5 && S2 < 1.0)) throw DomainError("eta_from_S2: S2 must lie in (-1/2, 1)");
  // S2 = 2 eta / 15 + O(eta^2); bisection would only resolve eta to ~1e-14 here
  if (std::abs(S2) < 1e-5) return 7.5 * S2;
  double lo = -150.0, hi = 150.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (order_params(mid).first < S2 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EnergyReport run_energy_decay(double alpha, const HarmonicField& f_init, int L, double dt, double t_final,
                              int record_every) {
  return run_energy_decay(KineticSolver(L, alpha), f_init, dt, t_final, record_every);
}

EnergyReport run_energy_decay(const KineticSolver& solver, const HarmonicField& f_init, double dt, double t_final,
                              int record_every) {
  if (!(dt > 0.0)) throw DomainError("energy: dt must be positive");
  if (!(t_final > 0.0)) throw DomainError("energy: t_final must be positive");
  if (record_every < 1) throw DomainError("energy: record_every must be >= 1");
  const int L = solver.L();
  const double alpha = solver.alpha();
  HarmonicField f0 = f_init.truncated(L);
  if (f0.l_max < L) {
    HarmonicField pad(L);
    for (int i = 0; i < sh_size(f0.l_max); ++i) pad.coeffs[i] = f0.coeffs[i];
    f0 = pad;
  }
  if (!(solver.min_value(f0) > 0.0)) throw DomainError("energy: initial density must be positive on the grid");

  EnergyReport rep;
  KineticState s = make_kinetic_state(f0, 1.0, Mat3::Zero(), alpha);
  double energy = solver.free_energy(s.f);
  auto record = [&] {
    rep.rows.push_back({s.t, energy, alignment(solver.second_moment(s.f)).S2});
  };
  record();
  bool reduced = false;
  long step = 0;
  while (s.t < t_final - 1e-12) {
    const double h = std::min(dt, t_final - s.t);
    KineticState next = solver.step_imex(s, h);
    if (!(solver.min_value(next.f) > 0.0)) {
      if (reduced) throw NumericalError(describe("energy: density lost positivity after step reduction", 1.0, dt, s.t));
      reduced = true;
      dt *= 0.5;
      continue;
    }
    const double e = solver.free_energy(next.f);
    rep.max_increase = std::max(rep.max_increase, e - energy);
    energy = e;
    s = next;
    if (++step % record_every == 0 || s.t >= t_final - 1e-12) record();
  }
  rep.dt = dt;
  rep.final_f = s.f;

  const Alignment al = alignment(solver.second_moment(s.f));
  rep.fit_eta = eta_from_S2(std::clamp(al.S2, -0.4999, 0.9999));
  rep.fit_axis = al.axis;
  const EquilibriumField hf = equilibrium_field(branch_at(rep.fit_eta, alpha), al.axis, L);
  rep.fit_distance = (s.f - hf.field).norm();
  return rep;
}

}  // namespace nematic
