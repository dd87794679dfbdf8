#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nematic/equilibria.hpp"
#include "nematic/spectral.hpp"
#include "nematic/sphere.hpp"

namespace nematic {

// u0 = U h as a function of the angle to the director:
// u0 = alpha (1 - S2 cos^2 - (1 - S2)/3), du0/dtheta = 2 alpha S2 sin cos.
struct U0Profile {
  double alpha = 0.0;
  double S2 = 0.0;

  double value(double theta) const;
  double slope(double theta) const;
  std::pair<double, double> operator()(double theta) const { return {value(theta), slope(theta)}; }
};

U0Profile u0_profile(double eta, double alpha);

// g0 on theta_i = i pi / n_intervals, i = 0..n_intervals, with g0 = 0 at both poles.
struct G0Solution {
  double eta = 0.0;
  double alpha = 0.0;
  std::vector<double> theta_nodes;
  std::vector<double> g0;
  double residual = 0.0;    // max |row residual| of the solved difference system
  double condition = 0.0;   // max |diagonal| / min |pivot| of the elimination

  int n_intervals() const { return static_cast<int>(g0.size()) - 1; }
  double step() const { return theta_nodes[1] - theta_nodes[0]; }
};

G0Solution solve_g0(double eta, double alpha, int n_intervals = 2000);

// 2 pi int g0 u0' h sin dtheta on the solution grid (trapezoid).
double g0_pairing(const G0Solution& g);

// lambda = 2 S2 / <g0 u0'>_h, Richardson-extrapolated from n and 2n intervals.
double lambda_of(double eta, double alpha, int n_intervals = 2000);

struct LeslieSet {
  double alpha = 0.0, eta = 0.0;
  double S2 = 0.0, S4 = 0.0;
  double lambda = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0, alpha4 = 0.0, alpha5 = 0.0, alpha6 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0;

  double parodi_residual() const { return std::abs(alpha2 + alpha3 - (alpha6 - alpha5)); }
};

// Coefficients from order parameters and lambda alone.
LeslieSet leslie_from(double S2, double S4, double lambda);
LeslieSet leslie_coeffs(double eta, double alpha, int n_intervals = 2000);

// (a1 + g2^2/g1)(D:nn)^2 + a4 D:D + (a5 + a6 - g2^2/g1)|D.n|^2
double dissipation_form(const LeslieSet& ls, const Mat3& D, const Vec3& n);
// Smallest dissipation_form(D, n) / |D|^2 over seeded random traceless D and unit n.
double dissipation_min(const LeslieSet& ls, int samples, unsigned seed);

// Closed form of <L(D), A^-1 L(D)>.
double L_projection_form(double S2, double S4, double lambda, const Mat3& D, const Vec3& n);
double L_projection_form(double eta, double alpha, const Mat3& D, const Vec3& n);

// The completing-the-square split of dissipation_form:
// value = <L(D), A^-1 L(D)> + 2(S2-S4)/7 |D.n|^2 + S4/2 (D:nn)^2 + c D:D,
// c = S4/35 - 2 S2/21 + 1/15. Returns the three extra terms.
double dissipation_remainder(const LeslieSet& ls, const Mat3& D, const Vec3& n);

// Numerical projections of R.(m x (kappa m) h) onto Ker G and its complement
// (orthogonal in the A^-1 pairing), built on the spectral operators.
class ProjectionContext {
 public:
  ProjectionContext(const EquilibriumField& h, int L);

  int L() const { return L_; }
  const Vec3& director() const { return n_; }

  // R.(m x (kappa m) h), exact h on a fine grid, truncated to degree L.
  HarmonicField source(const Mat3& kappa) const;
  // w with P_in f = w . R h (w orthogonal to n).
  Vec3 kernel_coeffs(const HarmonicField& f) const;
  HarmonicField out_of_kernel(const HarmonicField& f) const;
  // <f, A^-1 g> for mean-zero f, g.
  double pair(const HarmonicField& f, const HarmonicField& g) const;
  // <u.R h, A^-1 (u'.R h)>
  double kernel_product(const Vec3& u, const Vec3& up) const;

 private:
  HarmonicField director_R(const Vec3& u) const;

  int L_;
  Vec3 n_;
  EquilibriumField h_;
  OperatorMatrix A_;
  Vec3 t_[2];                 // tangent basis at n
  HarmonicField rh_[2];       // t_i . R h
  Eigen::Matrix2d gram_;      // <t_i.R h, A^-1 t_j.R h>
  HarmonicField psi_[2];      // A^-1 (t_i . R h)
};

// Homogeneous director dynamics dn/dt = -Omega n + lambda (I - nn) D n.
struct DirectorState {
  double t = 0.0;
  Vec3 n = Vec3::UnitZ();
  Mat3 kappa = Mat3::Zero();
  Mat3 D = Mat3::Zero();
  Mat3 Omega = Mat3::Zero();
};

DirectorState make_director_state(const Vec3& n, const Mat3& kappa, double t = 0.0);
Vec3 director_rate(const DirectorState& s, double lambda);
DirectorState director_step(const DirectorState& s, double lambda, double dt);
std::vector<DirectorState> director_solve(const Vec3& n0, const Mat3& kappa, double lambda, double t_final, double dt);

// sigma^L with N = dn/dt + Omega n (no transport term in the homogeneous case).
Mat3 leslie_stress(const LeslieSet& ls, const DirectorState& s, const Vec3& dn_dt);

struct Tensor4 {
  std::array<double, 81> v{};
  double& operator()(int i, int j, int k, int l) { return v[((i * 3 + j) * 3 + k) * 3 + l]; }
  double operator()(int i, int j, int k, int l) const { return v[((i * 3 + j) * 3 + k) * 3 + l]; }
  // (M : D)_ij = M_ijkl D_kl
  Mat3 contract(const Mat3& D) const;
};

struct OrientationMoments {
  Mat3 M2;
  Tensor4 M4;
};

// <mm> and <mmmm> under h_{eta, n}.
OrientationMoments moment_tensors(double eta, const Vec3& n);
OrientationMoments moment_tensors_from(double S2, double S4, const Vec3& n);

}  // namespace nematic
