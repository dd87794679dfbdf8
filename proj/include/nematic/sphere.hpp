#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace nematic {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_size(int L) { return (L + 1) * (L + 1); }

struct SphereGrid {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> nodes_z;    // Gauss-Legendre, increasing
  std::vector<double> weights_z;  // sum to 2
  std::vector<double> sin_theta;
  double phi_step = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(n_theta) * n_phi; }
  double phi(int k) const { return k * phi_step; }
  Vec3 point(int j, int k) const;
  // Quadrature weight of node (j, k) for the surface measure.
  double weight(int j) const { return weights_z[j] * phi_step; }
};

SphereGrid build_grid(int n_theta, int n_phi);

// Smallest grid that integrates polynomials of total degree `deg` exactly
// and can carry transforms up to degree `L`.
SphereGrid grid_for_degree(int deg, int L);

struct GridField {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> values;  // row-major, theta rows

  GridField() = default;
  GridField(int nt, int np, double v = 0.0)
      : n_theta(nt), n_phi(np), values(static_cast<std::size_t>(nt) * np, v) {}
  explicit GridField(const SphereGrid& g, double v = 0.0) : GridField(g.n_theta, g.n_phi, v) {}

  double& operator()(int j, int k) { return values[static_cast<std::size_t>(j) * n_phi + k]; }
  double operator()(int j, int k) const { return values[static_cast<std::size_t>(j) * n_phi + k]; }
  double* row(int j) { return values.data() + static_cast<std::size_t>(j) * n_phi; }
  const double* row(int j) const { return values.data() + static_cast<std::size_t>(j) * n_phi; }
};

template <class F>
GridField sample(const SphereGrid& g, F&& fn) {
  GridField out(g);
  for (int j = 0; j < g.n_theta; ++j)
    for (int k = 0; k < g.n_phi; ++k) out(j, k) = fn(g.point(j, k));
  return out;
}

GridField operator*(const GridField& a, const GridField& b);

// Complex coefficients c_{l,m} over orthonormal Y_lm (Condon-Shortley phase).
// Only real functions are stored, so c_{l,-m} = (-1)^m conj(c_{l,m}).
class HarmonicField {
 public:
  int l_max = -1;
  std::vector<cplx> coeffs;

  HarmonicField() = default;
  explicit HarmonicField(int L) : l_max(L), coeffs(sh_size(L)) {}

  cplx& operator()(int l, int m) { return coeffs[sh_index(l, m)]; }
  const cplx& operator()(int l, int m) const { return coeffs[sh_index(l, m)]; }

  // Rewrites m < 0 from m > 0 and clears Im c_{l,0}, so the symmetry is exact.
  void symmetrize();
  HarmonicField truncated(int L) const;
  double norm() const;

  HarmonicField& operator+=(const HarmonicField& o);
  HarmonicField& operator-=(const HarmonicField& o);
  HarmonicField& operator*=(double s);
};

HarmonicField operator+(HarmonicField a, const HarmonicField& b);
HarmonicField operator-(HarmonicField a, const HarmonicField& b);
HarmonicField operator*(double s, HarmonicField a);

// Real orthonormal basis with the same index layout:
// R_{l,0} = Y_{l,0}, R_{l,m} = sqrt2 Re Y_{l,m}, R_{l,-m} = sqrt2 Im Y_{l,m} (m > 0).
Eigen::VectorXd to_real(const HarmonicField& f);
HarmonicField from_real(int L, const Eigen::Ref<const Eigen::VectorXd>& a);

class SphereTransform {
 public:
  SphereTransform(SphereGrid grid, int L);

  const SphereGrid& grid() const { return grid_; }
  int l_max() const { return L_; }

  // Orders |m| outside [m_lo, m_hi] are skipped (left zero); callers use this
  // when they know the azimuthal content of g.
  HarmonicField analyze(const GridField& g, int m_lo = 0, int m_hi = -1) const;
  GridField synthesize(const HarmonicField& f) const;

 private:
  const double* plm(int l, int m) const {
    return plm_.data() + (static_cast<std::size_t>(offset_[m]) + (l - m)) * grid_.n_theta;
  }
  const double* wplm(int l, int m) const {
    return wplm_.data() + (static_cast<std::size_t>(offset_[m]) + (l - m)) * grid_.n_theta;
  }

  SphereGrid grid_;
  int L_;
  std::vector<int> offset_;
  std::vector<double> plm_;   // normalized P_lm(z_j), blocks by m, then l, then j
  std::vector<double> wplm_;  // same, times w_j * phi_step
  std::vector<double> cos_, sin_;  // (L+1) x n_phi
};

HarmonicField sh_analyze(const GridField& g, const SphereGrid& grid, int L);
GridField sh_synthesize(const HarmonicField& f, const SphereGrid& grid);

// Normalized associated Legendre values P_lm(z) for 0 <= m <= l <= L at one z,
// stored at sh_index(l, m).
std::vector<double> legendre_table(int L, double z);
double evaluate(const HarmonicField& f, const Vec3& m);

// Rotational gradient R = m x grad, acting exactly on coefficients.
HarmonicField apply_R(const HarmonicField& f, int axis);
// R.R = Laplace-Beltrami, diagonal with eigenvalue -l(l+1).
HarmonicField apply_laplacian(const HarmonicField& f);

double integrate(const HarmonicField& f);
double integrate(const GridField& g, const SphereGrid& grid);
double inner(const HarmonicField& f, const HarmonicField& g);
double inner(const GridField& f, const GridField& g, const SphereGrid& grid);

}  // namespace nematic
