#include "nematic/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nematic/errors.hpp"

namespace nematic {

namespace {

constexpr double kPi = std::numbers::pi;

// Range of |m| carried by nonzero coefficients of f; (1, 0) if f is zero.
std::pair<int, int> order_range(const HarmonicField& f) {
  int lo = f.l_max + 1, hi = -1;
  for (int l = 0; l <= f.l_max; ++l)
    for (int m = 0; m <= l; ++m)
      if (f(l, m) != cplx(0.0)) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
  return {lo, hi};
}

bool is_zero(const HarmonicField& f) {
  for (const cplx& c : f.coeffs)
    if (c != cplx(0.0)) return false;
  return true;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& M, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = M(idx[i], idx[j]);
  return out;
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

bool symmetric_label(OpLabel l) { return l == OpLabel::U || l == OpLabel::A_h || l == OpLabel::H_h; }

std::vector<std::vector<int>> blocks_for(const Eigen::MatrixXd& M, int L, bool drop_mean) {
  auto blocks = order_blocks(L, drop_mean);
  double nrm = M.norm();
  if (off_block_norm(M, blocks) <= 1e-12 * std::max(nrm, 1.0)) return blocks;
  std::vector<int> all;
  for (int i = drop_mean ? 1 : 0; i < M.rows(); ++i) all.push_back(i);
  return {all};
}

template <class Apply>
Eigen::MatrixXd assemble_columns(int L, Apply&& apply) {
  const int N = sh_size(L);
  Eigen::MatrixXd M(N, N);
  for (int j = 0; j < N; ++j) M.col(j) = to_real(apply(from_real(L, Eigen::VectorXd::Unit(N, j))));
  return M;
}

}  // namespace

std::string to_string(OpLabel l) {
  switch (l) {
    case OpLabel::U: return "U";
    case OpLabel::A_h: return "A_h";
    case OpLabel::H_h: return "H_h";
    case OpLabel::G_h: return "G_h";
    case OpLabel::G_h_star: return "G_h_star";
  }
  return "?";
}

void require_stable(const EquilibriumField& h, const char* what) {
  if (h.branch.branch != Branch::eta1)
    throw DomainError(std::string(what) + ": only defined on the stable eta1 branch; the kernel structure is not established elsewhere");
}

// ---------------------------------------------------------------------------

OperatorContext::OperatorContext(const EquilibriumField& h, int L)
    : L_(L),
      alpha_(h.branch.alpha),
      eta_(h.branch.eta),
      aligned_(h.branch.eta == 0.0 || (h.director - Vec3::UnitZ()).norm() == 0.0),
      t_([&] {
        if (L < 2) throw DomainError("operators need L >= 2");
        // The exact density is not band limited; 40 extra Gauss nodes push its
        // quadrature error below roundoff for |eta| up to ~25.
        int nt = 3 * L / 2 + 40;
        int np = aligned_ ? 2 * L + 4 : 2 * nt;
        return SphereTransform(build_grid(nt, np), L);
      }()) {
  const SphereGrid& g = t_.grid();
  h_ = h.on_grid(g);
  inv_h_ = GridField(g);
  for (std::size_t i = 0; i < h_.values.size(); ++i) {
    if (!(h_.values[i] > 1e-12)) throw DomainError("operators need a density bounded away from zero on the grid");
    inv_h_.values[i] = 1.0 / h_.values[i];
  }
  HarmonicField uh = apply_U(h.field.truncated(2), alpha_);
  for (int k = 0; k < 3; ++k) ruh_[k] = t_.synthesize(apply_R(uh, k + 1).truncated(L_));
}

int OperatorContext::order_lo(const HarmonicField& f) const { return aligned_ ? order_range(f).first : 0; }
int OperatorContext::order_hi(const HarmonicField& f) const { return aligned_ ? order_range(f).second : L_; }

HarmonicField OperatorContext::apply_A(const HarmonicField& phi) const {
  HarmonicField p = phi.truncated(L_);
  HarmonicField out(L_);
  if (is_zero(p)) return out;
  int lo = order_lo(p) - 1, hi = order_hi(p) + 1;
  for (int k = 1; k <= 3; ++k) {
    GridField v = t_.synthesize(apply_R(p, k)) * h_;
    out -= apply_R(t_.analyze(v, lo, hi), k);
  }
  return out;
}

HarmonicField OperatorContext::apply_H(const HarmonicField& f) const {
  HarmonicField p = f.truncated(L_);
  HarmonicField out = apply_U(p, alpha_);
  if (is_zero(p)) return out;
  out += t_.analyze(t_.synthesize(p) * inv_h_, order_lo(p), order_hi(p));
  return out;
}

HarmonicField OperatorContext::apply_G(const HarmonicField& f) const {
  HarmonicField p = f.truncated(L_);
  HarmonicField out = apply_laplacian(p);
  if (is_zero(p)) return out;
  GridField fv = t_.synthesize(p);
  int lo = order_lo(p) - 1, hi = order_hi(p) + 1;
  HarmonicField uf = apply_U(p, alpha_);
  bool has_u = !is_zero(uf);
  for (int k = 1; k <= 3; ++k) {
    HarmonicField acc = t_.analyze(fv * ruh_[k - 1], lo, hi);
    if (has_u) {
      HarmonicField ru = apply_R(uf, k);
      acc += t_.analyze(t_.synthesize(ru) * h_, order_lo(ru), order_hi(ru));
    }
    out += apply_R(acc, k);
  }
  return out;
}

// ---------------------------------------------------------------------------

OperatorMatrix assemble_U(int L, double alpha) {
  if (L < 2) throw DomainError("assemble_U: L must be >= 2");
  OperatorMatrix op{OpLabel::U, Eigen::MatrixXd::Zero(sh_size(L), sh_size(L)), alpha, 0.0, L};
  op.matrix(0, 0) = 8.0 * kPi * alpha / 3.0;
  for (int m = -2; m <= 2; ++m) op.matrix(sh_index(2, m), sh_index(2, m)) = -8.0 * kPi * alpha / 15.0;
  return op;
}

OperatorMatrix assemble_A_h(const OperatorContext& ctx) {
  OperatorMatrix op{OpLabel::A_h, assemble_columns(ctx.L(), [&](const HarmonicField& f) { return ctx.apply_A(f); }),
                    ctx.alpha(), ctx.eta(), ctx.L()};
  // Galerkin form of a self-adjoint operator; remove the roundoff asymmetry.
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();
  return op;
}

OperatorMatrix assemble_H_h(const OperatorContext& ctx) {
  OperatorMatrix op{OpLabel::H_h, assemble_columns(ctx.L(), [&](const HarmonicField& f) { return ctx.apply_H(f); }),
                    ctx.alpha(), ctx.eta(), ctx.L()};
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();
  return op;
}

OperatorMatrix assemble_G_h(const OperatorContext& ctx) {
  return {OpLabel::G_h, assemble_columns(ctx.L(), [&](const HarmonicField& f) { return ctx.apply_G(f); }),
          ctx.alpha(), ctx.eta(), ctx.L()};
}

OperatorMatrix assemble_A_h(const EquilibriumField& h, int L) { return assemble_A_h(OperatorContext(h, L)); }
OperatorMatrix assemble_H_h(const EquilibriumField& h, int L) { return assemble_H_h(OperatorContext(h, L)); }
OperatorMatrix assemble_G_h(const EquilibriumField& h, int L) { return assemble_G_h(OperatorContext(h, L)); }

OperatorMatrix adjoint(const OperatorMatrix& g) {
  OperatorMatrix op = g;
  op.label = OpLabel::G_h_star;
  op.matrix.transposeInPlace();
  return op;
}

LinearizedOperators assemble_all(const EquilibriumField& h, int L) {
  OperatorContext ctx(h, L);
  return {assemble_A_h(ctx), assemble_H_h(ctx), assemble_G_h(ctx)};
}

double factorization_residual(const LinearizedOperators& ops, const EquilibriumField& h, int extra) {
  if (extra < 0) throw DomainError("factorization_residual: extra degree must be >= 0");
  const int L = ops.G.L, N = ops.G.dim();
  OperatorContext wide(h, L + extra);
  Eigen::MatrixXd AH(N, N);
  for (int j = 0; j < N; ++j) {
    HarmonicField e = from_real(L, Eigen::VectorXd::Unit(N, j));
    AH.col(j) = to_real(wide.apply_A(wide.apply_H(e)).truncated(L));
  }
  return (ops.G.matrix + AH).norm() / (ops.A.matrix.norm() * ops.H.matrix.norm());
}

std::vector<std::vector<int>> order_blocks(int L, bool drop_mean) {
  std::vector<std::vector<int>> blocks;
  for (int s = -L; s <= L; ++s) {
    std::vector<int> b;
    for (int l = std::abs(s); l <= L; ++l)
      if (!(drop_mean && l == 0)) b.push_back(sh_index(l, s));
    if (!b.empty()) blocks.push_back(std::move(b));
  }
  return blocks;
}

double off_block_norm(const Eigen::MatrixXd& M, const std::vector<std::vector<int>>& blocks) {
  std::vector<int> owner(M.rows(), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int i : blocks[b]) owner[i] = static_cast<int>(b);
  double s = 0.0;
  for (int j = 0; j < M.cols(); ++j)
    for (int i = 0; i < M.rows(); ++i)
      if (owner[i] >= 0 && owner[j] >= 0 && owner[i] != owner[j]) s += M(i, j) * M(i, j);
  return std::sqrt(s);
}

Eigen::VectorXd solve_A(const OperatorMatrix& A, const Eigen::VectorXd& b) {
  const int n = A.dim() - 1;
  Eigen::LLT<Eigen::MatrixXd> llt(A.matrix.bottomRightCorner(n, n));
  if (llt.info() != Eigen::Success)
    throw NumericalError("A_h is not positive definite on mean-zero functions (is h positive?)");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.dim());
  x.tail(n) = llt.solve(b.tail(n));
  return x;
}

// ---------------------------------------------------------------------------

SpectrumReport spectrum(const OperatorMatrix& op, Subspace subspace) {
  const Eigen::MatrixXd& M = op.matrix;
  if (!M.allFinite()) throw NumericalError("spectrum: operator has non-finite entries");
  bool drop = subspace == Subspace::mean_zero;
  SpectrumReport rep;
  const bool sym = symmetric_label(op.label);
  std::vector<std::tuple<std::vector<int>, Eigen::VectorXd, Eigen::MatrixXd>> evecs;
  auto blocks = blocks_for(M, op.L, drop);
  for (const auto& idx : blocks) {
    Eigen::MatrixXd B = sub(M, idx);
    rep.norm = std::max(rep.norm, spectral_norm(B));
    if (sym) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
      for (int i = 0; i < es.eigenvalues().size(); ++i) rep.eigenvalues.push_back(es.eigenvalues()(i));
      evecs.emplace_back(idx, es.eigenvalues(), es.eigenvectors());
    } else {
      Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        rep.eigenvalues.push_back(es.eigenvalues()(i).real());
        rep.max_imag = std::max(rep.max_imag, std::abs(es.eigenvalues()(i).imag()));
      }
    }
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
  rep.max_real = rep.eigenvalues.empty() ? 0.0 : rep.eigenvalues.back();
  for (double e : rep.eigenvalues) rep.kernel_dim += std::abs(e) < rep.kernel_tol * rep.norm;
  for (const auto& [idx, vals, V] : evecs)
    for (int c = 0; c < V.cols(); ++c)
      if (std::abs(vals(c)) < rep.kernel_tol * rep.norm) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(M.rows());
        for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = V(i, c);
        rep.kernel_basis.push_back(from_real(op.L, full));
      }
  return rep;
}

SpectrumReport spectrum_G(const LinearizedOperators& ops) {
  const int L = ops.G.L, N = ops.G.dim();
  if (!ops.G.matrix.allFinite()) throw NumericalError("spectrum: G has non-finite entries");
  SpectrumReport rep;
  auto blocks = blocks_for(ops.G.matrix, L, true);
  std::vector<Eigen::VectorXd> kernel;
  std::vector<std::pair<double, Eigen::VectorXd>> pencil;
  std::vector<double> direct_all;
  for (const auto& idx : blocks) {
    Eigen::MatrixXd Ab = sub(ops.A.matrix, idx), Hb = sub(ops.H.matrix, idx), Gb = sub(ops.G.matrix, idx);
    rep.norm = std::max(rep.norm, spectral_norm(Gb));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(Ab);
    if (ea.eigenvalues().minCoeff() <= 0.0) throw NumericalError("A_h lost positivity on mean-zero functions");
    Eigen::MatrixXd R = ea.eigenvectors() * ea.eigenvalues().cwiseSqrt().asDiagonal() * ea.eigenvectors().transpose();
    Eigen::MatrixXd S = -R * Hb * R;
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    std::vector<double> mu(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    for (int c = 0; c < S.cols(); ++c) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(N);
      Eigen::VectorXd v = R * es.eigenvectors().col(c);
      for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = v[i];
      pencil.emplace_back(mu[c], std::move(full));
    }

    Eigen::EigenSolver<Eigen::MatrixXd> direct(Gb, false);
    std::vector<double> dr;
    for (int i = 0; i < direct.eigenvalues().size(); ++i) {
      dr.push_back(direct.eigenvalues()(i).real());
      rep.max_imag = std::max(rep.max_imag, std::abs(direct.eigenvalues()(i).imag()));
    }
    direct_all.insert(direct_all.end(), dr.begin(), dr.end());
  }
  for (const auto& [mu, v] : pencil) {
    rep.eigenvalues.push_back(mu);
    if (std::abs(mu) < rep.kernel_tol * rep.norm) kernel.push_back(v);
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
  rep.max_real = rep.eigenvalues.back();
  // The strongly damped end differs between the two forms (G keeps f/h to
  // full degree, the pencil truncates it); compare only the resolved part.
  for (double mu : rep.eigenvalues) {
    if (std::abs(mu) > kCrossCheckWindow * rep.norm) continue;
    double best = std::numeric_limits<double>::infinity();
    for (double d : direct_all) best = std::min(best, std::abs(mu - d));
    rep.cross_check = std::max(rep.cross_check, best / std::max(1.0, std::abs(mu)));
  }
  rep.kernel_dim = static_cast<int>(kernel.size());
  if (!kernel.empty()) {
    Eigen::MatrixXd K(N, kernel.size());
    for (std::size_t c = 0; c < kernel.size(); ++c) K.col(c) = kernel[c];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, K.cols());
    for (int c = 0; c < Q.cols(); ++c) rep.kernel_basis.push_back(from_real(L, Q.col(c)));
  }
  return rep;
}

std::vector<HarmonicField> kernel_basis(const EquilibriumField& h, int L) {
  require_stable(h, "kernel_basis");
  return spectrum_G(assemble_all(h, L)).kernel_basis;
}

std::vector<HarmonicField> adjoint_kernel(const OperatorMatrix& A, const EquilibriumField& h) {
  std::vector<HarmonicField> out;
  HarmonicField ht = h.field.truncated(A.L);
  for (int i = 1; i <= 3; ++i) out.push_back(from_real(A.L, solve_A(A, to_real(apply_R(ht, i)))));
  return out;
}

std::vector<HarmonicField> adjoint_kernel(const EquilibriumField& h, int L) {
  require_stable(h, "adjoint_kernel");
  return adjoint_kernel(assemble_A_h(OperatorContext(h, L)), h);
}

double min_eig_H(const OperatorMatrix& H) { return spectrum(H, Subspace::mean_zero).eigenvalues.front(); }

double lower_bound_c0(const LinearizedOperators& ops, const EquilibriumField& h) {
  const int N = ops.H.dim();
  std::vector<HarmonicField> psi = adjoint_kernel(ops.A, h);
  Eigen::MatrixXd C(N, 4);
  C.col(0) = Eigen::VectorXd::Unit(N, 0);
  for (int i = 0; i < 3; ++i) C.col(i + 1) = to_real(psi[i]);
  // drop numerically dependent constraints (R_3 h vanishes in the aligned frame)
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cqr(C);
  cqr.setThreshold(1e-10);
  const int r = static_cast<int>(cqr.rank());
  Eigen::MatrixXd basis = cqr.householderQ() * Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd Q2 = basis.rightCols(N - r);
  Eigen::MatrixXd M = Q2.transpose() * ops.H.matrix * Q2;
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lower_bound_c0(const EquilibriumField& h, int L) {
  require_stable(h, "lower_bound_c0");
  OperatorContext ctx(h, L);
  LinearizedOperators ops{assemble_A_h(ctx), assemble_H_h(ctx), OperatorMatrix{}};
  return lower_bound_c0(ops, h);
}

}  // namespace nematic
