#include "nematic/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nematic/errors.hpp"
#include "nematic/quadrature.hpp"

namespace nematic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEtaMax = 200.0;

// Internal versions accept eta = 0, where alpha has the finite limit 7.5.
struct Moments {
  double a[5];  // scaled A_0, A_2, ..., A_8
};

Moments moments(double eta, int upto) {
  Moments m{};
  for (int i = 0; i <= upto / 2; ++i) m.a[i] = a_k_scaled(eta, 2 * i);
  return m;
}

double alpha_raw(double eta) {
  Moments m = moments(eta, 4);
  return m.a[0] / (m.a[1] - m.a[2]);
}

// alpha' and alpha'' from A_k' = A_{k+2}.
std::pair<double, double> alpha_derivs(double eta) {
  Moments m = moments(eta, 8);
  double N = m.a[0], N1 = m.a[1], N2 = m.a[2];
  double D = m.a[1] - m.a[2], D1 = m.a[2] - m.a[3], D2 = m.a[3] - m.a[4];
  double d1 = (N1 * D - N * D1) / (D * D);
  double d2 = ((N2 * D - N * D2) * D - 2.0 * (N1 * D - N * D1) * D1) / (D * D * D);
  return {d1, d2};
}

// Root of alpha_raw(eta) = alpha on an interval where alpha_raw is monotone.
double bisect(double alpha, double lo, double hi) {
  double flo = alpha_raw(lo) - alpha;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = alpha_raw(mid) - alpha;
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EquilibriumBranch make_branch(double alpha, double eta, Branch which) {
  EquilibriumBranch b;
  b.alpha = alpha;
  b.eta = eta;
  b.branch = which;
  auto [s2, s4] = order_params(eta);
  b.S2 = s2;
  b.S4 = s4;
  b.oblate = eta < 0.0;
  return b;
}

}  // namespace

std::string to_string(Branch b) {
  switch (b) {
    case Branch::isotropic: return "isotropic";
    case Branch::eta1: return "eta1";
    case Branch::eta2: return "eta2";
  }
  return "?";
}

Branch branch_from_string(const std::string& s) {
  if (s == "isotropic") return Branch::isotropic;
  if (s == "eta1") return Branch::eta1;
  if (s == "eta2") return Branch::eta2;
  throw DomainError("unknown branch '" + s + "' (expected isotropic, eta1 or eta2)");
}

double a_k_scaled(double eta, int k) {
  if (k < 0 || k > 12) throw DomainError("a_k: k must lie in [0, 12]");
  if (k % 2) throw DomainError("a_k: odd k requested; the integral vanishes by symmetry");
  if (!(std::abs(eta) <= kEtaMax)) throw DomainError("a_k: |eta| must be <= 200");
  const double shift = std::max(eta, 0.0);
  auto f = [eta, k, shift](double z) { return std::pow(z, k) * std::exp(eta * z * z - shift); };
  return 2.0 * integrate_adaptive(f, 0.0, 1.0);
}

double a_k(double eta, int k) { return a_k_scaled(eta, k) * std::exp(std::max(eta, 0.0)); }

double alpha_of_eta(double eta) {
  if (eta == 0.0) throw DomainError("alpha_of_eta: eta = 0 is the isotropic state, alpha is not determined");
  return alpha_raw(eta);
}

double dalpha_deta(double eta) { return alpha_derivs(eta).first; }

std::pair<double, double> alpha_star() {
  static const std::pair<double, double> cached = [] {
    // golden section brackets the minimum, Newton on alpha' polishes it
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.5, b = 5.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = alpha_raw(c), fd = alpha_raw(d);
    while (b - a > 1e-4) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = alpha_raw(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = alpha_raw(d);
      }
    }
    double eta = 0.5 * (a + b);
    for (int it = 0; it < 30; ++it) {
      auto [d1, d2] = alpha_derivs(eta);
      double step = d1 / d2;
      eta -= step;
      if (std::abs(step) < 1e-14 * eta) break;
    }
    return std::pair{alpha_raw(eta), eta};
  }();
  return cached;
}

std::vector<EquilibriumBranch> solve_eta_branches(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("solve_eta_branches: alpha must be positive");
  std::vector<EquilibriumBranch> out{make_branch(alpha, 0.0, Branch::isotropic)};
  auto [as, es] = alpha_star();
  if (alpha < as - 1e-12 * as) return out;
  if (std::abs(alpha - as) <= 1e-12 * as) {
    EquilibriumBranch b = make_branch(alpha, es, Branch::eta1);
    b.near_fold = true;
    out.push_back(b);
    return out;
  }

  double hi = es + 1.0;
  while (alpha_raw(hi) < alpha) {
    if (hi >= kEtaMax) throw DomainError("solve_eta_branches: alpha too large, eta1 would exceed 200");
    hi = std::min(2.0 * hi, kEtaMax);
  }
  double eta1 = bisect(alpha, es, hi);

  double lo = es - 1.0;
  while (alpha_raw(lo) < alpha) {
    if (lo <= -kEtaMax) throw DomainError("solve_eta_branches: alpha too large, eta2 would fall below -200");
    lo = std::max(lo - 2.0 * std::abs(lo) - 1.0, -kEtaMax);
  }
  double eta2 = bisect(alpha, lo, es);

  EquilibriumBranch b1 = make_branch(alpha, eta1, Branch::eta1);
  EquilibriumBranch b2 = make_branch(alpha, eta2, Branch::eta2);
  if (eta1 - eta2 < kFoldTolerance) b1.near_fold = b2.near_fold = true;
  out.push_back(b1);
  out.push_back(b2);
  return out;
}

EquilibriumBranch find_branch(double alpha, Branch which) {
  for (const EquilibriumBranch& b : solve_eta_branches(alpha))
    if (b.branch == which) return b;
  std::ostringstream os;
  os << "no " << to_string(which) << " branch at alpha = " << alpha;
  throw DomainError(os.str());
}

std::pair<double, double> order_params(double eta) {
  if (eta == 0.0) return {0.0, 0.0};
  if (std::abs(eta) < 1e-2) {
    // The moment formula for S4 cancels to O(1e-16 / eta^2) relative accuracy here.
    const double s2 = eta * (2.0 / 15 + eta * (4.0 / 315 + eta * (-8.0 / 4725 + eta * (-16.0 / 31185 + eta * 736.0 / 212837625))));
    const double s4 =
        eta * eta * (4.0 / 315 + eta * (16.0 / 10395 + eta * (-464.0 / 2027025 + eta * (-2944.0 / 42567525 + eta * 1216.0 / 1550674125))));
    return {s2, s4};
  }
  Moments m = moments(eta, 4);
  double a0 = m.a[0], a2 = m.a[1], a4 = m.a[2];
  double s2 = (3.0 * a2 - a0) / (2.0 * a0);
  double s4 = (35.0 * a4 - 30.0 * a2 + 3.0 * a0) / (8.0 * a0);
  if (eta > 0.0 && !(s4 > 0.0 && s2 - s4 > 0.0 && s4 / 35.0 - 3.0 * s2 / 7.0 + 0.4 > 0.0))
    throw NumericalError("order_params: positivity of S4, S2 - S4 or S4/35 - 3 S2/7 + 2/5 violated");
  return {s2, s4};
}

// ---------------------------------------------------------------------------

double EquilibriumField::value(const Vec3& m) const {
  double c = m.dot(director);
  double shift = std::max(branch.eta, 0.0);
  return std::exp(branch.eta * c * c - shift) / (Z * std::exp(-shift));
}

GridField EquilibriumField::on_grid(const SphereGrid& g) const {
  return sample(g, [this](const Vec3& m) { return value(m); });
}

EquilibriumField equilibrium_field(const EquilibriumBranch& b, const Vec3& n, int L) {
  if (std::abs(n.norm() - 1.0) > 1e-12) throw DomainError("equilibrium_field: director must be a unit vector");
  if (L < 8) throw DomainError("equilibrium_field: L must be >= 8");
  EquilibriumField h;
  h.branch = b;
  h.director = n;
  h.Z = 2.0 * kPi * a_k(b.eta, 0);
  if (b.eta == 0.0) {
    h.field = HarmonicField(L);
    h.field(0, 0) = 1.0 / std::sqrt(4.0 * kPi);
    return h;
  }
  // Oversampled grid keeps aliasing of the (non band-limited) density far below L.
  const int nt = L + 48;
  SphereGrid fine = build_grid(nt, 2 * nt);
  h.field = SphereTransform(fine, L).analyze(h.on_grid(fine));
  return h;
}

HarmonicField apply_U(const HarmonicField& f, double alpha) {
  HarmonicField out(f.l_max);
  out(0, 0) = f(0, 0) * (8.0 * kPi * alpha / 3.0);
  if (f.l_max >= 2)
    for (int m = -2; m <= 2; ++m) out(2, m) = f(2, m) * (-8.0 * kPi * alpha / 15.0);
  return out;
}

double stationarity_residual(const EquilibriumField& h) {
  const int L = h.field.l_max;
  SphereTransform t(grid_for_degree(2 * L + 2, L), L);
  GridField hv = t.synthesize(h.field);
  HarmonicField u = apply_U(h.field, h.branch.alpha);
  HarmonicField r = apply_laplacian(h.field);
  for (int a = 1; a <= 3; ++a) r += apply_R(t.analyze(hv * t.synthesize(apply_R(u, a))), a);
  return r.norm();
}

double free_energy(const HarmonicField& f, double alpha, const SphereGrid& grid) {
  SphereTransform t(grid, f.l_max);
  GridField v = t.synthesize(f);
  GridField u = t.synthesize(apply_U(f, alpha));
  double vmin = *std::min_element(v.values.begin(), v.values.end());
  if (!(vmin > 0.0)) {
    std::ostringstream os;
    os << "free_energy: density is not positive on the grid (min = " << vmin << ")";
    throw DomainError(os.str());
  }
  GridField e(grid);
  for (std::size_t i = 0; i < e.values.size(); ++i) e.values[i] = v.values[i] * (std::log(v.values[i]) + 0.5 * u.values[i]);
  return integrate(e, grid);
}

Stability classify_stability(const EquilibriumBranch& b) {
  Stability s;
  if (b.branch == Branch::isotropic) {
    // eigenvalue -6 + 4 alpha / 5 of the degree-2 block
    s.boundary = std::abs(b.alpha - 7.5) <= 1e-12;
    s.stable = b.alpha < 7.5 && !s.boundary;
    return s;
  }
  auto [as, es] = alpha_star();
  s.near_fold = b.near_fold || b.alpha - as < kFoldTolerance;
  s.stable = b.branch == Branch::eta1;
  return s;
}

std::vector<BifurcationRow> bifurcation_diagram(double alpha_min, double alpha_max, int steps) {
  if (steps < 1) throw DomainError("bifurcation: steps must be >= 1");
  if (!(alpha_min > 0.0) || alpha_max < alpha_min) throw DomainError("bifurcation: need 0 < alpha_min <= alpha_max");
  std::vector<BifurcationRow> rows;
  for (int i = 0; i < steps; ++i) {
    double a = steps == 1 ? alpha_min : alpha_min + (alpha_max - alpha_min) * i / (steps - 1);
    for (const EquilibriumBranch& b : solve_eta_branches(a)) rows.push_back({a, b, classify_stability(b).stable});
  }
  return rows;
}

}  // namespace nematic
