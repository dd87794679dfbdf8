#include "nematic/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nematic/errors.hpp"
#include "nematic/quadrature.hpp"
#include "nematic/simd.hpp"

namespace nematic {

namespace {
constexpr double kPi = std::numbers::pi;
}

Vec3 SphereGrid::point(int j, int k) const {
  double s = sin_theta[j], ph = phi(k);
  return {s * std::cos(ph), s * std::sin(ph), nodes_z[j]};
}

SphereGrid build_grid(int n_theta, int n_phi) {
  if (n_theta < 2) throw DomainError("build_grid: n_theta must be >= 2");
  if (n_phi < 4 || n_phi % 2 != 0) throw DomainError("build_grid: n_phi must be even and >= 4");
  GaussRule r = gauss_legendre(n_theta);
  SphereGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  g.nodes_z = std::move(r.x);
  g.weights_z = std::move(r.w);
  g.sin_theta.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) g.sin_theta[j] = std::sqrt(1.0 - g.nodes_z[j] * g.nodes_z[j]);
  g.phi_step = 2.0 * kPi / n_phi;
  return g;
}

SphereGrid grid_for_degree(int deg, int L) {
  int nt = std::max(deg / 2 + 1, L + 1);
  int np = std::max(deg + 1, 2 * L + 1);
  np += np % 2;
  return build_grid(std::max(nt, 2), std::max(np, 4));
}

GridField operator*(const GridField& a, const GridField& b) {
  if (a.n_theta != b.n_theta || a.n_phi != b.n_phi) throw DomainError("grid field size mismatch");
  GridField out(a.n_theta, a.n_phi);
  simd::active().mul(a.values.data(), b.values.data(), out.values.data(), a.values.size());
  return out;
}

// ---------------------------------------------------------------------------

void HarmonicField::symmetrize() {
  for (int l = 0; l <= l_max; ++l) {
    (*this)(l, 0).imag(0.0);
    for (int m = 1; m <= l; ++m) {
      cplx c = std::conj((*this)(l, m));
      (*this)(l, -m) = (m % 2) ? -c : c;
    }
  }
}

HarmonicField HarmonicField::truncated(int L) const {
  HarmonicField out(L);
  int lm = std::min(L, l_max);
  for (int i = 0; i < sh_size(lm); ++i) out.coeffs[i] = coeffs[i];
  return out;
}

double HarmonicField::norm() const {
  double s = 0.0;
  for (const cplx& c : coeffs) s += std::norm(c);
  return std::sqrt(s);
}

HarmonicField& HarmonicField::operator+=(const HarmonicField& o) {
  if (o.l_max > l_max) {
    HarmonicField t = truncated(o.l_max);
    *this = std::move(t);
  }
  for (int i = 0; i < sh_size(o.l_max); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

HarmonicField& HarmonicField::operator-=(const HarmonicField& o) {
  if (o.l_max > l_max) {
    HarmonicField t = truncated(o.l_max);
    *this = std::move(t);
  }
  for (int i = 0; i < sh_size(o.l_max); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

HarmonicField& HarmonicField::operator*=(double s) {
  for (cplx& c : coeffs) c *= s;
  return *this;
}

HarmonicField operator+(HarmonicField a, const HarmonicField& b) { return a += b; }
HarmonicField operator-(HarmonicField a, const HarmonicField& b) { return a -= b; }
HarmonicField operator*(double s, HarmonicField a) { return a *= s; }

Eigen::VectorXd to_real(const HarmonicField& f) {
  Eigen::VectorXd a(sh_size(f.l_max));
  const double r2 = std::numbers::sqrt2;
  for (int l = 0; l <= f.l_max; ++l) {
    a[sh_index(l, 0)] = f(l, 0).real();
    for (int m = 1; m <= l; ++m) {
      a[sh_index(l, m)] = r2 * f(l, m).real();
      a[sh_index(l, -m)] = -r2 * f(l, m).imag();
    }
  }
  return a;
}

HarmonicField from_real(int L, const Eigen::Ref<const Eigen::VectorXd>& a) {
  if (a.size() != sh_size(L)) throw DomainError("from_real: coefficient count does not match L");
  HarmonicField f(L);
  const double h = 1.0 / std::numbers::sqrt2;
  for (int l = 0; l <= L; ++l) {
    f(l, 0) = a[sh_index(l, 0)];
    for (int m = 1; m <= l; ++m) f(l, m) = cplx(h * a[sh_index(l, m)], -h * a[sh_index(l, -m)]);
  }
  f.symmetrize();
  return f;
}

// ---------------------------------------------------------------------------

std::vector<double> legendre_table(int L, double z) {
  std::vector<double> p(sh_size(L), 0.0);
  double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    p[sh_index(m, m)] = pmm;
    if (m == L) break;
    double p1 = std::sqrt(2.0 * m + 3.0) * z * pmm;
    p[sh_index(m + 1, m)] = p1;
    double p0 = pmm;
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      double p2 = a * (z * p1 - b * p0);
      p[sh_index(l, m)] = p2;
      p0 = p1;
      p1 = p2;
    }
  }
  return p;
}

double evaluate(const HarmonicField& f, const Vec3& m) {
  double z = std::clamp(m.z(), -1.0, 1.0);
  double phi = std::atan2(m.y(), m.x());
  std::vector<double> p = legendre_table(f.l_max, z);
  double v = 0.0;
  for (int l = 0; l <= f.l_max; ++l) {
    v += f(l, 0).real() * p[sh_index(l, 0)];
    for (int mm = 1; mm <= l; ++mm) {
      cplx e(std::cos(mm * phi), std::sin(mm * phi));
      v += 2.0 * (f(l, mm) * e).real() * p[sh_index(l, mm)];
    }
  }
  return v;
}

SphereTransform::SphereTransform(SphereGrid grid, int L) : grid_(std::move(grid)), L_(L) {
  if (L < 0) throw DomainError("SphereTransform: negative degree");
  if (grid_.n_phi < 2 * L + 1 || grid_.n_theta < L + 1)
    throw DomainError("grid too coarse for degree " + std::to_string(L) + " (n_theta=" +
                      std::to_string(grid_.n_theta) + ", n_phi=" + std::to_string(grid_.n_phi) + ")");
  const int nt = grid_.n_theta, np = grid_.n_phi;
  offset_.resize(L + 1);
  int off = 0;
  for (int m = 0; m <= L; ++m) {
    offset_[m] = off;
    off += L - m + 1;
  }
  plm_.assign(static_cast<std::size_t>(off) * nt, 0.0);
  wplm_.assign(plm_.size(), 0.0);
  for (int j = 0; j < nt; ++j) {
    std::vector<double> p = legendre_table(L, grid_.nodes_z[j]);
    double w = grid_.weights_z[j] * grid_.phi_step;
    for (int m = 0; m <= L; ++m)
      for (int l = m; l <= L; ++l) {
        std::size_t at = (static_cast<std::size_t>(offset_[m]) + (l - m)) * nt + j;
        plm_[at] = p[sh_index(l, m)];
        wplm_[at] = w * p[sh_index(l, m)];
      }
  }
  cos_.resize(static_cast<std::size_t>(L + 1) * np);
  sin_.resize(cos_.size());
  for (int m = 0; m <= L; ++m)
    for (int k = 0; k < np; ++k) {
      // exact reduction of m*k mod n_phi keeps the tables symmetric
      double ang = grid_.phi_step * ((static_cast<long>(m) * k) % np);
      cos_[static_cast<std::size_t>(m) * np + k] = std::cos(ang);
      sin_[static_cast<std::size_t>(m) * np + k] = std::sin(ang);
    }
}

HarmonicField SphereTransform::analyze(const GridField& g, int m_lo, int m_hi) const {
  const int nt = grid_.n_theta, np = grid_.n_phi;
  if (g.n_theta != nt || g.n_phi != np) throw DomainError("analyze: grid field does not match transform grid");
  m_lo = std::max(m_lo, 0);
  m_hi = m_hi < 0 ? L_ : std::min(m_hi, L_);
  const simd::Kernels& K = simd::active();
  std::vector<double> fre(static_cast<std::size_t>(L_ + 1) * nt), fim(fre.size());
  double out[2];
  for (int j = 0; j < nt; ++j) {
    const double* row = g.row(j);
    for (int m = m_lo; m <= m_hi; ++m) {
      K.dot2(row, &cos_[static_cast<std::size_t>(m) * np], &sin_[static_cast<std::size_t>(m) * np], np, out);
      fre[static_cast<std::size_t>(m) * nt + j] = out[0];
      fim[static_cast<std::size_t>(m) * nt + j] = -out[1];
    }
  }
  HarmonicField f(L_);
  for (int m = m_lo; m <= m_hi; ++m)
    for (int l = m; l <= L_; ++l) {
      K.dot2(wplm(l, m), &fre[static_cast<std::size_t>(m) * nt], &fim[static_cast<std::size_t>(m) * nt], nt, out);
      f(l, m) = cplx(out[0], out[1]);
    }
  f.symmetrize();
  return f;
}

GridField SphereTransform::synthesize(const HarmonicField& f) const {
  if (f.l_max > L_) throw DomainError("synthesize: field degree exceeds transform degree");
  const int nt = grid_.n_theta, np = grid_.n_phi, Lf = f.l_max;
  const simd::Kernels& K = simd::active();
  std::vector<double> fre(static_cast<std::size_t>(Lf + 1) * nt, 0.0), fim(fre.size(), 0.0);
  std::vector<char> used(Lf + 1, 0);
  for (int m = 0; m <= Lf; ++m) {
    double* re = &fre[static_cast<std::size_t>(m) * nt];
    double* im = &fim[static_cast<std::size_t>(m) * nt];
    for (int l = m; l <= Lf; ++l) {
      if (f(l, m) == cplx(0.0)) continue;
      used[m] = 1;
      K.axpy2(f(l, m).real(), f(l, m).imag(), plm(l, m), re, im, nt);
    }
  }
  GridField g(grid_);
  for (int j = 0; j < nt; ++j) {
    double* row = g.row(j);
    double f0 = fre[j];
    for (int k = 0; k < np; ++k) row[k] = f0;
    for (int m = 1; m <= Lf; ++m)
      if (used[m])
        K.fma2(2.0 * fre[static_cast<std::size_t>(m) * nt + j], &cos_[static_cast<std::size_t>(m) * np],
             -2.0 * fim[static_cast<std::size_t>(m) * nt + j], &sin_[static_cast<std::size_t>(m) * np], row, np);
  }
  return g;
}

HarmonicField sh_analyze(const GridField& g, const SphereGrid& grid, int L) {
  return SphereTransform(grid, L).analyze(g);
}

GridField sh_synthesize(const HarmonicField& f, const SphereGrid& grid) {
  return SphereTransform(grid, f.l_max).synthesize(f);
}

// ---------------------------------------------------------------------------

HarmonicField apply_R(const HarmonicField& f, int axis) {
  if (axis < 1 || axis > 3) throw DomainError("apply_R: axis must be 1, 2 or 3");
  HarmonicField out(f.l_max);
  const cplx I(0.0, 1.0);
  for (int l = 0; l <= f.l_max; ++l) {
    for (int m = 0; m <= l; ++m) {
      if (axis == 3) {
        out(l, m) = I * double(m) * f(l, m);
        continue;
      }
      // Ladder pieces: L+ brings (l, m-1) up, L- brings (l, m+1) down.
      cplx up = 0.0, down = 0.0;
      if (m - 1 >= -l) up = std::sqrt(double(l - m + 1) * (l + m)) * f(l, m - 1);
      if (m + 1 <= l) down = std::sqrt(double(l + m + 1) * (l - m)) * f(l, m + 1);
      out(l, m) = axis == 1 ? 0.5 * I * (up + down) : 0.5 * (up - down);
    }
  }
  out.symmetrize();
  return out;
}

HarmonicField apply_laplacian(const HarmonicField& f) {
  HarmonicField out = f;
  for (int l = 0; l <= f.l_max; ++l)
    for (int m = -l; m <= l; ++m) out(l, m) *= -double(l) * (l + 1);
  return out;
}

double integrate(const HarmonicField& f) { return std::sqrt(4.0 * kPi) * f(0, 0).real(); }

double integrate(const GridField& g, const SphereGrid& grid) {
  if (g.n_theta != grid.n_theta || g.n_phi != grid.n_phi) throw DomainError("integrate: grid size mismatch");
  double s = 0.0;
  for (int j = 0; j < grid.n_theta; ++j) {
    double r = 0.0;
    const double* row = g.row(j);
    for (int k = 0; k < grid.n_phi; ++k) r += row[k];
    s += grid.weights_z[j] * r;
  }
  return s * grid.phi_step;
}

double inner(const HarmonicField& f, const HarmonicField& g) {
  int L = std::min(f.l_max, g.l_max);
  double s = 0.0;
  for (int i = 0; i < sh_size(L); ++i) s += (std::conj(f.coeffs[i]) * g.coeffs[i]).real();
  return s;
}

double inner(const GridField& f, const GridField& g, const SphereGrid& grid) {
  if (f.n_theta != g.n_theta || f.n_phi != g.n_phi) throw DomainError("inner: grid size mismatch");
  return integrate(f * g, grid);
}

}  // namespace nematic
