#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nematic/sphere.hpp"

namespace nematic {

enum class Branch { isotropic, eta1, eta2 };
std::string to_string(Branch b);
Branch branch_from_string(const std::string& s);

struct EquilibriumBranch {
  double alpha = 0.0;
  double eta = 0.0;
  Branch branch = Branch::isotropic;
  double S2 = 0.0;
  double S4 = 0.0;
  bool oblate = false;     // eta < 0, only on the eta2 side for alpha > 7.5
  bool near_fold = false;  // eta1 and eta2 closer than the fold tolerance
};

// A_k(eta) = int_{-1}^{1} z^k e^{eta z^2} dz, k even in [0, 12], |eta| <= 200.
double a_k(double eta, int k);
// Same integral times e^{-max(eta, 0)}; ratios of these are what everything uses.
double a_k_scaled(double eta, int k);

double alpha_of_eta(double eta);
double dalpha_deta(double eta);

// (alpha*, eta*), the minimum of alpha(eta) over eta > 0. Cached.
std::pair<double, double> alpha_star();

constexpr double kFoldTolerance = 1e-6;

std::vector<EquilibriumBranch> solve_eta_branches(double alpha);
// The branch of the given kind at alpha; throws DomainError if it does not exist.
EquilibriumBranch find_branch(double alpha, Branch which);

std::pair<double, double> order_params(double eta);

struct EquilibriumField {
  EquilibriumBranch branch;
  Vec3 director;
  HarmonicField field;
  double Z = 0.0;  // int e^{eta (m.n)^2} over the sphere

  // Exact density value (not the truncated expansion).
  double value(const Vec3& m) const;
  GridField on_grid(const SphereGrid& g) const;
};

EquilibriumField equilibrium_field(const EquilibriumBranch& b, const Vec3& n, int L);

// || P_L R.(R h + h R U h) ||_2 for the truncated field.
double stationarity_residual(const EquilibriumField& h);

// Action of the Maier-Saupe potential; only degrees 0 and 2 survive.
HarmonicField apply_U(const HarmonicField& f, double alpha);

double free_energy(const HarmonicField& f, double alpha, const SphereGrid& grid);

struct Stability {
  bool stable = false;
  bool near_fold = false;
  bool boundary = false;  // isotropic at exactly alpha = 7.5
};
Stability classify_stability(const EquilibriumBranch& b);

struct BifurcationRow {
  double alpha;
  EquilibriumBranch branch;
  bool stable;
};
std::vector<BifurcationRow> bifurcation_diagram(double alpha_min, double alpha_max, int steps);

}  // namespace nematic
