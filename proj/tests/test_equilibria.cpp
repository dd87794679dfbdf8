#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nematic/equilibria.hpp"
#include "nematic/errors.hpp"
#include "support.hpp"

using namespace nematic;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent high-precision values of the fold and of a few branch roots
// (40-digit quadrature of A0 = alpha (A2 - A4), computed offline).
constexpr double kAlphaStar = 6.731486396483357;
constexpr double kEtaStar = 2.178287974844518;
constexpr double kEta1At8 = 5.400692660956537;
constexpr double kEta2At8 = -0.6151359808435;

double midpoint_a0(double eta, int n) {
  double h = 2.0 / n, s = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = -1.0 + (i + 0.5) * h;
    s += std::exp(eta * z * z);
  }
  return s * h;
}

}  // namespace

TEST_CASE("a_k basics") {
  for (int k = 0; k <= 12; k += 2) CHECK(a_k(0.0, k) == doctest::Approx(2.0 / (k + 1)).epsilon(1e-14));
  CHECK_THROWS_AS(a_k(1.0, 3), DomainError);
  CHECK_THROWS_AS(a_k(1.0, 14), DomainError);
  CHECK_THROWS_AS(a_k(250.0, 0), DomainError);
  // brute-force midpoint oracle; its own error is ~1e-11 at this n
  CHECK(std::abs(a_k(5.0, 0) - midpoint_a0(5.0, 1000000)) <= 1e-9 * a_k(5.0, 0));
  CHECK(std::isfinite(a_k(200.0, 12)));
  CHECK(a_k(-200.0, 0) > 0.0);
}

TEST_CASE("a_k recursion") {
  double A2 = a_k(3.0, 2), A4 = a_k(3.0, 4);
  CHECK(std::abs(A4 - (std::exp(3.0) / 3.0 - 3.0 * A2 / 6.0)) <= 1e-10 * A4);
  for (double eta : {0.5, 1.0, 3.0, 10.0, 50.0})
    for (int k : {0, 2, 4, 6}) {
      double lhs = a_k(eta, k + 2);
      double rhs = std::exp(eta) / eta - (k + 1) * a_k(eta, k) / (2.0 * eta);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(lhs));
    }
}

TEST_CASE("alpha(eta)") {
  CHECK_THROWS_AS(alpha_of_eta(0.0), DomainError);
  CHECK(std::abs(alpha_of_eta(1e-6) - 7.5) <= 1e-3);
  // small-eta expansion alpha = 7.5 - 5 eta / 7 + O(eta^2)
  CHECK(std::abs(alpha_of_eta(1e-4) - (7.5 - 5e-4 / 7.0)) <= 1e-7);
  auto [as, es] = alpha_star();
  auto fd = [](double e) { return (alpha_of_eta(e + 1e-5) - alpha_of_eta(e - 1e-5)) / 2e-5; };
  CHECK(fd(es + 1.0) > 0.0);
  CHECK(fd(es - 0.5) < 0.0);
  CHECK(std::abs(dalpha_deta(1.3) - fd(1.3)) <= 1e-8);
  // strictly monotone on each side of the fold
  double prev = alpha_of_eta(-5.0);
  for (double e = -4.95; e < es; e += 0.05) {
    if (std::abs(e) < 1e-9) continue;
    double a = alpha_of_eta(e);
    CHECK(a < prev);
    prev = a;
  }
  prev = alpha_of_eta(es + 1e-3);
  for (double e = es + 0.05; e < 40.0; e += 0.25) {
    double a = alpha_of_eta(e);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("fold point") {
  auto [as, es] = alpha_star();
  CHECK(std::abs(as - kAlphaStar) <= 1e-10);
  CHECK(std::abs(es - kEtaStar) <= 1e-7);
  CHECK(alpha_of_eta(es + 0.1) > as);
  CHECK(alpha_of_eta(es - 0.1) > as);
  CHECK(std::abs((alpha_of_eta(es + 1e-4) - alpha_of_eta(es - 1e-4)) / 2e-4) <= 1e-6);
}

TEST_CASE("branch roots") {
  CHECK(solve_eta_branches(5.0).size() == 1);
  CHECK_THROWS_AS(solve_eta_branches(-1.0), DomainError);

  auto at75 = solve_eta_branches(7.5);
  REQUIRE(at75.size() == 3);
  CHECK(std::abs(at75[2].eta) <= 1e-6);

  auto [as, es] = alpha_star();
  auto fold = solve_eta_branches(as);
  REQUIRE(fold.size() == 2);
  CHECK(fold[1].near_fold);
  CHECK(std::abs(fold[1].eta - es) <= 1e-12);

  auto near = solve_eta_branches(as * (1.0 + 1e-14) + 1e-13);
  CHECK(near.back().near_fold);

  auto at8 = solve_eta_branches(8.0);
  REQUIRE(at8.size() == 3);
  CHECK(std::abs(at8[1].eta - kEta1At8) <= 1e-9);
  CHECK(std::abs(at8[2].eta - kEta2At8) <= 1e-9);
  CHECK(at8[2].oblate);
  CHECK(!at8[1].oblate);

  for (double a : {6.8, 7.0, 7.4, 7.6, 8.0, 10.0, 15.0, 25.0, 60.0}) {
    for (const auto& b : solve_eta_branches(a)) {
      if (b.branch == Branch::isotropic) {
        CHECK(b.eta == 0.0);
        CHECK(b.S2 == 0.0);
        continue;
      }
      CHECK(std::abs(alpha_of_eta(b.eta) - a) <= 1e-10 * a);
    }
    auto bs = solve_eta_branches(a);
    CHECK(bs[1].eta > es);
    CHECK(bs[2].eta < es);
  }
}

TEST_CASE("order parameters near eta = 0") {
  // 40-digit quadrature values of <P2>, <P4> under e^{eta z^2}
  struct Ref { double eta, S2, S4; };
  const Ref refs[] = {{1e-6, 1.3333334603174433862e-7, 1.2698414237614008707e-14},
                      {-3e-3, -0.00039988566861298784153, 1.1424413731950392056e-7},
                      {0.0099, 0.0013212429236661269186, 1.2460627088388538178e-6}};
  for (const Ref& r : refs) {
    auto [s2, s4] = order_params(r.eta);
    CHECK(std::abs(s2 - r.S2) <= 1e-13 * std::abs(r.S2));
    CHECK(std::abs(s4 - r.S4) <= 1e-10 * r.S4);
  }
  // no jump where the evaluation switches method
  auto [s2a, s4a] = order_params(0.0099999999);
  auto [s2b, s4b] = order_params(0.0100000001);
  // slopes dS2/deta, dS4/deta at 0.01 over a step of 2e-10
  CHECK(std::abs(s2b - s2a - 2e-10 * 0.13358679) <= 1e-15);
  CHECK(std::abs(s4b - s4a - 2e-10 * 2.544291e-4) <= 1e-16);
}

TEST_CASE("order parameters") {
  auto [s2z, s4z] = order_params(0.0);
  CHECK(s2z == 0.0);
  CHECK(s4z == 0.0);

  EquilibriumBranch b = find_branch(8.0, Branch::eta1);
  // 2-D sphere quadrature of <P2(m.n)> and <P4(m.n)> with the exact density
  SphereGrid g = build_grid(80, 8);
  EquilibriumField h = equilibrium_field(b, Vec3::UnitZ(), 8);
  GridField hv = h.on_grid(g);
  GridField p2 = sample(g, [](const Vec3& m) { return 0.5 * (3 * m.z() * m.z() - 1); });
  GridField p4 = sample(g, [](const Vec3& m) {
    double z2 = m.z() * m.z();
    return (35 * z2 * z2 - 30 * z2 + 3) / 8.0;
  });
  CHECK(std::abs(inner(hv, p2, g) - b.S2) <= 1e-10);
  CHECK(std::abs(inner(hv, p4, g) - b.S4) <= 1e-10);
  // eta = alpha S2 at a critical point
  CHECK(std::abs(b.eta - 8.0 * b.S2) <= 1e-9);

  for (double a : {7.0, 10.0, 20.0}) {
    EquilibriumBranch e = find_branch(a, Branch::eta1);
    CHECK(e.S4 > 0.0);
    CHECK(e.S2 - e.S4 > 0.0);
    CHECK(e.S4 / 35.0 - 3.0 * e.S2 / 7.0 + 0.4 > 0.0);
  }
}

TEST_CASE("equilibrium field") {
  CHECK_THROWS_AS(equilibrium_field(find_branch(8.0, Branch::eta1), Vec3(1, 1, 0), 16), DomainError);

  EquilibriumField iso = equilibrium_field(solve_eta_branches(8.0)[0], Vec3::UnitZ(), 8);
  CHECK(std::abs(iso.field(0, 0).real() - 1.0 / std::sqrt(4.0 * kPi)) <= 1e-15);
  CHECK(iso.field.norm() == doctest::Approx(1.0 / std::sqrt(4.0 * kPi)));

  EquilibriumBranch b = find_branch(8.0, Branch::eta1);
  EquilibriumField h = equilibrium_field(b, Vec3::UnitZ(), 16);
  CHECK(std::abs(integrate(h.field) - 1.0) <= 1e-12);
  for (int l = 0; l <= 16; ++l)
    for (int m = -l; m <= l; ++m)
      if (m != 0) CHECK(std::abs(h.field(l, m)) <= 1e-14);
  SphereGrid g = build_grid(24, 48);
  GridField v = sh_synthesize(h.field, g);
  CHECK(*std::min_element(v.values.begin(), v.values.end()) >= 0.0);

  // rotating the director rotates the truncated field
  std::mt19937_64 rng(17);
  Vec3 n = nematic::testing::random_unit(rng);
  EquilibriumField hn = equilibrium_field(b, n, 16);
  Eigen::Matrix3d Q = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), n).toRotationMatrix();
  double worst = 0.0;
  for (int j = 0; j < g.n_theta; j += 2)
    for (int k = 0; k < g.n_phi; k += 3) {
      Vec3 m = g.point(j, k);
      worst = std::max(worst, std::abs(evaluate(hn.field, m) - evaluate(h.field, Q.transpose() * m)));
    }
  CHECK(worst <= 1e-10);
}

TEST_CASE("stationarity residual falls with L") {
  EquilibriumBranch b = find_branch(8.0, Branch::eta1);
  double prev = 1e300;
  for (int L : {8, 12, 16, 24, 32}) {
    double r = stationarity_residual(equilibrium_field(b, Vec3::UnitZ(), L));
    MESSAGE("L = " << L << "  residual = " << r);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev <= 1e-8);
  CHECK(stationarity_residual(equilibrium_field(solve_eta_branches(8.0)[0], Vec3::UnitZ(), 8)) <= 1e-14);
}

TEST_CASE("free energy") {
  SphereGrid g = build_grid(40, 80);
  const double alpha = 8.0;
  EquilibriumField iso = equilibrium_field(solve_eta_branches(alpha)[0], Vec3::UnitZ(), 16);
  double a_iso = free_energy(iso.field, alpha, g);
  CHECK(std::abs(a_iso - (-std::log(4.0 * kPi) + alpha / 3.0)) <= 1e-12);

  EquilibriumBranch b = find_branch(alpha, Branch::eta1);
  double a1 = free_energy(equilibrium_field(b, Vec3::UnitZ(), 24).field, alpha, g);
  CHECK(a1 < a_iso);
  double a1r = free_energy(equilibrium_field(b, Vec3(0.6, 0.0, 0.8), 24).field, alpha, g);
  CHECK(std::abs(a1 - a1r) <= 1e-10);

  HarmonicField bad(4);
  bad(0, 0) = 0.1;
  bad(2, 0) = 1.0;
  CHECK_THROWS_AS(free_energy(bad, alpha, g), DomainError);
}

TEST_CASE("potential") {
  HarmonicField c(4);
  c(0, 0) = std::sqrt(4.0 * kPi) / (4.0 * kPi);
  CHECK(std::abs(integrate(apply_U(c, 3.0)) / (4.0 * kPi) - 2.0) <= 1e-14);
  HarmonicField y3 = nematic::testing::random_field(4, 9);
  HarmonicField u = apply_U(y3, 2.0);
  for (int l : {1, 3, 4})
    for (int m = -l; m <= l; ++m) CHECK(u(l, m) == cplx(0.0));
}

TEST_CASE("stability classification") {
  CHECK(classify_stability(solve_eta_branches(5.0)[0]).stable);
  CHECK(!classify_stability(solve_eta_branches(8.0)[0]).stable);
  Stability b75 = classify_stability(solve_eta_branches(7.5)[0]);
  CHECK(!b75.stable);
  CHECK(b75.boundary);
  CHECK(!classify_stability(find_branch(8.0, Branch::eta2)).stable);
  CHECK(classify_stability(find_branch(8.0, Branch::eta1)).stable);
  auto [as, es] = alpha_star();
  CHECK(classify_stability(find_branch(as + 1e-9, Branch::eta1)).near_fold);
}

TEST_CASE("bifurcation diagram rows") {
  auto rows = bifurcation_diagram(5.0, 10.0, 100);
  int iso = 0;
  for (const auto& r : rows) iso += r.branch.branch == Branch::isotropic;
  CHECK(iso == 100);
  CHECK(rows.size() > 100);
}
