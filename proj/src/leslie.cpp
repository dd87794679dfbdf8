#include "nematic/leslie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "nematic/errors.hpp"

namespace nematic {

namespace {

constexpr double kPi = std::numbers::pi;

Mat3 traceless(const Mat3& D) { return D - D.trace() / 3.0 * Mat3::Identity(); }

double ddot(const Mat3& A, const Mat3& B) { return (A.array() * B.array()).sum(); }

// Equilibrium density as a function of theta, scaled like a_k_scaled.
double h_of_theta(double eta, double z0, double theta) {
  double c = std::cos(theta);
  return std::exp(eta * c * c - std::max(eta, 0.0)) / (2.0 * kPi * z0);
}

}  // namespace

// ---------------------------------------------------------------------------
// u0 and g0

double U0Profile::value(double theta) const {
  double c = std::cos(theta);
  return alpha * (1.0 - S2 * c * c - (1.0 - S2) / 3.0);
}

double U0Profile::slope(double theta) const { return 2.0 * alpha * S2 * std::sin(theta) * std::cos(theta); }

U0Profile u0_profile(double eta, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("u0_profile: alpha must be positive");
  return {alpha, order_params(eta).first};
}

G0Solution solve_g0(double eta, double alpha, int n_intervals) {
  if (n_intervals < 200) throw DomainError("solve_g0: need at least 200 intervals");
  const U0Profile u0 = u0_profile(eta, alpha);
  const int N = n_intervals;
  const double dh = kPi / N;

  G0Solution s;
  s.eta = eta;
  s.alpha = alpha;
  s.theta_nodes.resize(N + 1);
  for (int i = 0; i <= N; ++i) s.theta_nodes[i] = i * dh;
  s.theta_nodes[N] = kPi;
  s.g0.assign(N + 1, 0.0);

  // g'' + (cot - u0') g' - g / sin^2 = -u0' on interior nodes; g = 0 at the poles
  const int n = N - 1;
  std::vector<double> a(n), b(n), c(n), r(n);
  for (int k = 0; k < n; ++k) {
    double th = s.theta_nodes[k + 1];
    double sn = std::sin(th);
    double p = std::cos(th) / sn - u0.slope(th);
    a[k] = 1.0 / (dh * dh) - p / (2.0 * dh);
    c[k] = 1.0 / (dh * dh) + p / (2.0 * dh);
    b[k] = -2.0 / (dh * dh) - 1.0 / (sn * sn);
    r[k] = -u0.slope(th);
  }

  // Thomas elimination
  std::vector<double> cp(n), rp(n);
  double min_piv = std::numeric_limits<double>::infinity(), max_diag = 0.0;
  double piv = b[0];
  for (int k = 0; k < n; ++k) {
    if (k > 0) piv = b[k] - a[k] * cp[k - 1];
    max_diag = std::max(max_diag, std::abs(b[k]));
    min_piv = std::min(min_piv, std::abs(piv));
    if (!(std::abs(piv) > 1e-300)) {
      std::ostringstream os;
      os << "solve_g0: singular system at row " << k << " (condition estimate " << max_diag / std::abs(piv) << ")";
      throw NumericalError(os.str());
    }
    cp[k] = c[k] / piv;
    rp[k] = (r[k] - (k > 0 ? a[k] * rp[k - 1] : 0.0)) / piv;
  }
  s.condition = max_diag / min_piv;
  if (!(s.condition < 1e14)) {
    std::ostringstream os;
    os << "solve_g0: system is numerically singular (condition estimate " << s.condition << ")";
    throw NumericalError(os.str());
  }
  std::vector<double> g(n);
  g[n - 1] = rp[n - 1];
  for (int k = n - 2; k >= 0; --k) g[k] = rp[k] - cp[k] * g[k + 1];
  for (int k = 0; k < n; ++k) s.g0[k + 1] = g[k];

  for (int k = 0; k < n; ++k) {
    double lhs = a[k] * s.g0[k] + b[k] * s.g0[k + 1] + c[k] * s.g0[k + 2];
    s.residual = std::max(s.residual, std::abs(lhs - r[k]));
  }
  return s;
}

double g0_pairing(const G0Solution& g) {
  const U0Profile u0 = u0_profile(g.eta, g.alpha);
  const double z0 = a_k_scaled(g.eta, 0);
  double sum = 0.0;
  // the integrand vanishes at both poles
  for (int i = 1; i < g.n_intervals(); ++i) {
    double th = g.theta_nodes[i];
    sum += g.g0[i] * u0.slope(th) * h_of_theta(g.eta, z0, th) * std::sin(th);
  }
  return 2.0 * kPi * sum * g.step();
}

double lambda_of(double eta, double alpha, int n_intervals) {
  if (!(eta > 0.0)) throw DomainError("lambda_of: defined on the nematic branch only (eta > 0); eta = 0 is the 0/0 limit");
  double s2 = order_params(eta).first;
  double p1 = g0_pairing(solve_g0(eta, alpha, n_intervals));
  double p2 = g0_pairing(solve_g0(eta, alpha, 2 * n_intervals));
  double p = (4.0 * p2 - p1) / 3.0;
  double lam = 2.0 * s2 / p;
  if (!(lam > 0.0) || !std::isfinite(lam)) {
    std::ostringstream os;
    os << "lambda_of: expected a positive finite lambda, got " << lam;
    throw NumericalError(os.str());
  }
  return lam;
}

// ---------------------------------------------------------------------------
// Leslie coefficients and the dissipation form

LeslieSet leslie_from(double S2, double S4, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("leslie: lambda must be positive");
  LeslieSet ls;
  ls.S2 = S2;
  ls.S4 = S4;
  ls.lambda = lambda;
  ls.alpha1 = -S4 / 2.0;
  ls.alpha2 = -0.5 * (1.0 + 1.0 / lambda) * S2;
  ls.alpha3 = -0.5 * (1.0 - 1.0 / lambda) * S2;
  ls.alpha4 = 4.0 / 15.0 - 5.0 * S2 / 21.0 - S4 / 35.0;
  ls.alpha5 = S4 / 7.0 + 6.0 * S2 / 7.0;
  ls.alpha6 = S4 / 7.0 - S2 / 7.0;
  ls.gamma1 = ls.alpha3 - ls.alpha2;
  ls.gamma2 = ls.alpha6 - ls.alpha5;
  return ls;
}

LeslieSet leslie_coeffs(double eta, double alpha, int n_intervals) {
  auto [s2, s4] = order_params(eta);
  LeslieSet ls = leslie_from(s2, s4, lambda_of(eta, alpha, n_intervals));
  ls.alpha = alpha;
  ls.eta = eta;
  const double tol = 1e-12 * std::max(1.0, std::abs(s2));
  if (ls.parodi_residual() > tol || std::abs(ls.gamma2 + s2) > tol ||
      std::abs(ls.gamma1 - s2 / ls.lambda) > 1e-10 * std::abs(ls.gamma1))
    throw NumericalError("leslie_coeffs: Parodi or gamma identities violated");
  return ls;
}

double dissipation_form(const LeslieSet& ls, const Mat3& D, const Vec3& n) {
  const double r = ls.gamma2 * ls.gamma2 / ls.gamma1;
  const double dnn = n.dot(D * n);
  return (ls.alpha1 + r) * dnn * dnn + ls.alpha4 * ddot(D, D) + (ls.alpha5 + ls.alpha6 - r) * (D * n).squaredNorm();
}

double dissipation_min(const LeslieSet& ls, int samples, unsigned seed) {
  if (samples < 1) throw DomainError("dissipation_min: need at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double lo = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Mat3 K;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) K(i, j) = nd(rng);
    Mat3 D = traceless(0.5 * (K + K.transpose()));
    Vec3 n(nd(rng), nd(rng), nd(rng));
    n.normalize();
    lo = std::min(lo, dissipation_form(ls, D, n) / ddot(D, D));
  }
  return lo;
}

double L_projection_form(double S2, double S4, double lambda, const Mat3& Din, const Vec3& n) {
  // the isotropic part of D drops out of m x (D m)
  const Mat3 D = traceless(0.5 * (Din + Din.transpose()));
  const double c = S4 / 35.0 - 2.0 * S2 / 21.0 + 1.0 / 15.0;
  const double dn2 = (D * n).squaredNorm(), dnn = n.dot(D * n);
  return ((3.0 * S2 + 4.0 * S4) / 7.0 - lambda * S2) * dn2 + ((1.0 - S2) / 3.0 - 2.0 * c) * ddot(D, D) +
         (lambda * S2 - S4) * dnn * dnn;
}

double L_projection_form(double eta, double alpha, const Mat3& D, const Vec3& n) {
  auto [s2, s4] = order_params(eta);
  return L_projection_form(s2, s4, lambda_of(eta, alpha), D, n);
}

double dissipation_remainder(const LeslieSet& ls, const Mat3& D, const Vec3& n) {
  const double c = ls.S4 / 35.0 - 2.0 * ls.S2 / 21.0 + 1.0 / 15.0;
  const double dnn = n.dot(D * n);
  return 2.0 * (ls.S2 - ls.S4) / 7.0 * (D * n).squaredNorm() + ls.S4 / 2.0 * dnn * dnn + c * ddot(D, D);
}

// ---------------------------------------------------------------------------
// Numerical projections

ProjectionContext::ProjectionContext(const EquilibriumField& h, int L)
    : L_(L), n_(h.director), h_(h), A_([&] {
        require_stable(h, "ProjectionContext");
        return assemble_A_h(h, L);
      }()) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n_[i]) < std::abs(n_[k])) k = i;
  Vec3 e = Vec3::Unit(k);
  t_[0] = (e - e.dot(n_) * n_).normalized();
  t_[1] = n_.cross(t_[0]);
  for (int i = 0; i < 2; ++i) {
    rh_[i] = director_R(t_[i]);
    psi_[i] = from_real(L_, solve_A(A_, to_real(rh_[i])));
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gram_(i, j) = inner(rh_[i], psi_[j]);
}

HarmonicField ProjectionContext::director_R(const Vec3& u) const {
  HarmonicField ht = h_.field.truncated(L_);
  HarmonicField out(L_);
  for (int k = 0; k < 3; ++k)
    if (u[k] != 0.0) out += u[k] * apply_R(ht, k + 1);
  return out;
}

HarmonicField ProjectionContext::source(const Mat3& kappa) const {
  const int nt = L_ + 48;
  SphereTransform t(build_grid(nt, 2 * nt), L_);
  GridField hv = h_.on_grid(t.grid());
  HarmonicField out(L_);
  for (int k = 0; k < 3; ++k) {
    GridField v = sample(t.grid(), [&](const Vec3& m) { return m.cross(kappa * m)[k]; });
    out += apply_R(t.analyze(v * hv), k + 1);
  }
  return out;
}

Vec3 ProjectionContext::kernel_coeffs(const HarmonicField& f) const {
  Eigen::Vector2d rhs(inner(f, psi_[0]), inner(f, psi_[1]));
  // sum_i c_i <t_i.Rh, psi_j> = <f, psi_j>
  Eigen::Vector2d c = gram_.transpose().lu().solve(rhs);
  return c[0] * t_[0] + c[1] * t_[1];
}

HarmonicField ProjectionContext::out_of_kernel(const HarmonicField& f) const {
  return f.truncated(L_) - director_R(kernel_coeffs(f));
}

double ProjectionContext::pair(const HarmonicField& f, const HarmonicField& g) const {
  return to_real(f.truncated(L_)).dot(solve_A(A_, to_real(g.truncated(L_))));
}

double ProjectionContext::kernel_product(const Vec3& u, const Vec3& up) const {
  return pair(director_R(u), director_R(up));
}

// ---------------------------------------------------------------------------
// Director dynamics and stress

DirectorState make_director_state(const Vec3& n, const Mat3& kappa, double t) {
  if (std::abs(n.norm() - 1.0) > 1e-12) throw DomainError("director must be a unit vector");
  if (std::abs(kappa.trace()) > 1e-12 * std::max(1.0, kappa.norm())) throw DomainError("velocity gradient must be traceless");
  DirectorState s;
  s.t = t;
  s.n = n;
  s.kappa = kappa;
  s.D = 0.5 * (kappa + kappa.transpose());
  s.Omega = 0.5 * (kappa.transpose() - kappa);
  return s;
}

Vec3 director_rate(const DirectorState& s, double lambda) {
  Vec3 dn = s.D * s.n;
  return -s.Omega * s.n + lambda * (dn - s.n.dot(dn) * s.n);
}

DirectorState director_step(const DirectorState& s, double lambda, double dt) {
  if (!(dt > 0.0)) throw DomainError("director_step: dt must be positive");
  auto rate = [&](const Vec3& n) {
    DirectorState q = s;
    q.n = n;
    return director_rate(q, lambda);
  };
  Vec3 k1 = rate(s.n);
  Vec3 k2 = rate(s.n + 0.5 * dt * k1);
  Vec3 k3 = rate(s.n + 0.5 * dt * k2);
  Vec3 k4 = rate(s.n + dt * k3);
  DirectorState out = s;
  out.n = (s.n + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).normalized();
  out.t = s.t + dt;
  return out;
}

std::vector<DirectorState> director_solve(const Vec3& n0, const Mat3& kappa, double lambda, double t_final, double dt) {
  if (!(dt > 0.0)) throw DomainError("director_solve: dt must be positive");
  if (!(t_final >= 0.0)) throw DomainError("director_solve: t_final must be >= 0");
  const long steps = std::max(1L, static_cast<long>(std::ceil(t_final / dt - 1e-9)));
  const double h = t_final / steps;
  std::vector<DirectorState> traj{make_director_state(n0, kappa)};
  if (t_final == 0.0) return traj;
  traj.reserve(steps + 1);
  for (long i = 0; i < steps; ++i) {
    DirectorState next = director_step(traj.back(), lambda, h);
    next.t = (i + 1) * h;
    traj.push_back(next);
  }
  return traj;
}

Mat3 leslie_stress(const LeslieSet& ls, const DirectorState& s, const Vec3& dn_dt) {
  const Vec3& n = s.n;
  const Vec3 N = dn_dt + s.Omega * n;
  const Vec3 Dn = s.D * n;
  return ls.alpha1 * n.dot(Dn) * (n * n.transpose()) + ls.alpha2 * n * N.transpose() + ls.alpha3 * N * n.transpose() +
         ls.alpha4 * s.D + ls.alpha5 * n * Dn.transpose() + ls.alpha6 * Dn * n.transpose();
}

// ---------------------------------------------------------------------------
// Moments

Mat3 Tensor4::contract(const Mat3& D) const {
  Mat3 out = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) out(i, j) += (*this)(i, j, k, l) * D(k, l);
  return out;
}

OrientationMoments moment_tensors_from(double S2, double S4, const Vec3& n) {
  OrientationMoments m;
  m.M2 = S2 * n * n.transpose() + (1.0 - S2) / 3.0 * Mat3::Identity();
  const double b = (S2 - S4) / 7.0;
  const double c = S4 / 35.0 - 2.0 * S2 / 21.0 + 1.0 / 15.0;
  auto d = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          m.M4(i, j, k, l) = S4 * n[i] * n[j] * n[k] * n[l] +
                             b * (n[i] * n[j] * d(k, l) + n[k] * n[l] * d(i, j) + n[i] * n[k] * d(j, l) +
                                  n[j] * n[l] * d(i, k) + n[i] * n[l] * d(j, k) + n[j] * n[k] * d(i, l)) +
                             c * (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k));
  return m;
}

OrientationMoments moment_tensors(double eta, const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-12) throw DomainError("moment_tensors: director must be a unit vector");
  auto [s2, s4] = order_params(eta);
  return moment_tensors_from(s2, s4, n);
}

}  // namespace nematic
