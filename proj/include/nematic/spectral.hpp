#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nematic/equilibria.hpp"
#include "nematic/sphere.hpp"

namespace nematic {

enum class OpLabel { U, A_h, H_h, G_h, G_h_star };
std::string to_string(OpLabel l);

// Dense operator in the real orthonormal harmonic basis.
struct OperatorMatrix {
  OpLabel label = OpLabel::U;
  Eigen::MatrixXd matrix;
  double alpha = 0.0;
  double eta = 0.0;
  int L = 0;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

// Matrix-free actions of A_h, H_h, G_h with the exact density sampled on an
// oversampled grid. Truncation to degree L happens only at the output.
class OperatorContext {
 public:
  OperatorContext(const EquilibriumField& h, int L);

  int L() const { return L_; }
  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  // Director along e3: operators keep azimuthal order, which the assembly exploits.
  bool aligned() const { return aligned_; }
  const SphereTransform& transform() const { return t_; }

  // A phi = -R.(h R phi)
  HarmonicField apply_A(const HarmonicField& phi) const;
  // H f = f/h + U f
  HarmonicField apply_H(const HarmonicField& f) const;
  // G f = R.(R f + h R U f + f R U h)
  HarmonicField apply_G(const HarmonicField& f) const;

 private:
  int order_lo(const HarmonicField& f) const;
  int order_hi(const HarmonicField& f) const;

  int L_;
  double alpha_, eta_;
  bool aligned_;
  SphereTransform t_;
  GridField h_, inv_h_;
  GridField ruh_[3];  // R_k U h
};

OperatorMatrix assemble_U(int L, double alpha);
OperatorMatrix assemble_A_h(const OperatorContext& ctx);
OperatorMatrix assemble_H_h(const OperatorContext& ctx);
OperatorMatrix assemble_G_h(const OperatorContext& ctx);
OperatorMatrix assemble_A_h(const EquilibriumField& h, int L);
OperatorMatrix assemble_H_h(const EquilibriumField& h, int L);
OperatorMatrix assemble_G_h(const EquilibriumField& h, int L);
OperatorMatrix adjoint(const OperatorMatrix& g);

// Index groups of the real basis by signed azimuthal order. In the aligned
// frame every operator here is block diagonal over these groups.
std::vector<std::vector<int>> order_blocks(int L, bool drop_mean);
double off_block_norm(const Eigen::MatrixXd& M, const std::vector<std::vector<int>>& blocks);

// Solve A x = b on mean-zero functions (the constant mode is pinned to 0).
Eigen::VectorXd solve_A(const OperatorMatrix& A, const Eigen::VectorXd& b);

enum class Subspace { mean_zero, all };

constexpr double kKernelTol = 1e-7;
constexpr double kCrossCheckWindow = 0.05;

struct SpectrumReport {
  std::vector<double> eigenvalues;  // real parts, ascending
  double max_real = 0.0;
  double max_imag = 0.0;
  double norm = 0.0;               // spectral norm of the operator
  double kernel_tol = kKernelTol;  // relative to norm
  int kernel_dim = 0;
  std::vector<HarmonicField> kernel_basis;
  // For G: largest relative gap from a pencil eigenvalue with
  // |mu| <= kCrossCheckWindow * norm to the nearest direct eigenvalue of G.
  double cross_check = 0.0;
};

// Dense eigenvalues of any assembled operator (symmetric ones use the
// self-adjoint solver). Blocks by azimuthal order when the matrix allows it.
SpectrumReport spectrum(const OperatorMatrix& op, Subspace sub);

struct LinearizedOperators {
  OperatorMatrix A, H, G;
};
LinearizedOperators assemble_all(const EquilibriumField& h, int L);

// ||G + A H|| / (||A|| ||H||) in the Frobenius norm, with the intermediate
// f/h kept to degree L + extra so that only the final output is truncated.
// extra = 0 gives the plain Galerkin product, which keeps a truncation error.
double factorization_residual(const LinearizedOperators& ops, const EquilibriumField& h, int extra = 32);

// Spectrum of G through the symmetric pencil (-H, A^{-1}) on mean-zero
// functions, with kernel vectors, cross-checked against G itself.
SpectrumReport spectrum_G(const LinearizedOperators& ops);

// Stable branch only.
std::vector<HarmonicField> kernel_basis(const EquilibriumField& h, int L);

// psi_i = A^{-1} R_i h (truncated), i = 1, 2, 3.
std::vector<HarmonicField> adjoint_kernel(const OperatorMatrix& A, const EquilibriumField& h);
std::vector<HarmonicField> adjoint_kernel(const EquilibriumField& h, int L);

// Smallest eigenvalue of H on {f : int f = 0, <f, psi_i> = 0}.
double lower_bound_c0(const LinearizedOperators& ops, const EquilibriumField& h);
double lower_bound_c0(const EquilibriumField& h, int L);
// Smallest eigenvalue of H on mean-zero functions, no constraint.
double min_eig_H(const OperatorMatrix& H);

void require_stable(const EquilibriumField& h, const char* what);

}  // namespace nematic
