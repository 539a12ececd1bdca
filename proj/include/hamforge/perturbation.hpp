#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hamforge/spectral.hpp"

namespace hamforge {

/// Split of the unperturbed spectrum at a cutoff lambda_star with a gap
/// Delta: all eigenvalues lie in (-inf, lambda_-] u [lambda_+, inf) where
/// lambda_+- = lambda_star +- Delta/2. Operators on the blocks are kept in
/// the eigenbasis coordinates of the stored basis columns.
struct BlockSplit {
  MatC basis_minus;  // ambient x d-, eigenvector columns of H
  MatC basis_plus;   // ambient x d+
  VecR eigs_minus;   // matching eigenvalues, ascending
  VecR eigs_plus;
  double cutoff = 0;        // the requested split point
  double lambda_star = 0;   // midpoint of the actual spectral gap
  double delta = 0;         // lambda_plus - lambda_minus
  double lambda_minus = 0;  // largest eigenvalue below the cutoff
  double lambda_plus = 0;   // smallest eigenvalue above the cutoff
};

namespace pertdetail {

/// Delta is read off the actual spectrum: the gap edges become lambda_+-
/// and lambda_star sits at their midpoint, so that the spectrum lies in
/// (-inf, lambda_* - Delta/2] u [lambda_* + Delta/2, inf).
inline void finalize_window(BlockSplit& s) {
  if (s.eigs_minus.size() == 0 || s.eigs_plus.size() == 0)
    throw PreconditionError("cutoff leaves an empty spectral block");
  s.lambda_minus = s.eigs_minus.maxCoeff();
  s.lambda_plus = s.eigs_plus.minCoeff();
  s.delta = s.lambda_plus - s.lambda_minus;
  s.lambda_star = (s.lambda_plus + s.lambda_minus) / 2;
}

}  // namespace pertdetail

/// Eigendecomposition split of H at lambda_star.
inline BlockSplit block_split(const OperatorMatrix& h, double lambda_star) {
  if (h.rows() > dense_limit())
    throw PreconditionError("block split above the dense limit");
  Eigen::SelfAdjointEigenSolver<MatC> es{MatC(h)};
  const VecR& evs = es.eigenvalues();
  for (Eigen::Index i = 0; i < evs.size(); ++i)
    if (std::abs(evs(i) - lambda_star) <= 1e-9)
      throw PreconditionError("eigenvalue at the cutoff lambda_star");
  Eigen::Index d_minus = 0;
  while (d_minus < evs.size() && evs(d_minus) < lambda_star) ++d_minus;

  BlockSplit s;
  s.cutoff = lambda_star;
  s.basis_minus = es.eigenvectors().leftCols(d_minus);
  s.basis_plus = es.eigenvectors().rightCols(evs.size() - d_minus);
  s.eigs_minus = evs.head(d_minus);
  s.eigs_plus = evs.tail(evs.size() - d_minus);
  pertdetail::finalize_window(s);
  return s;
}

/// Split from caller-chosen eigenvector bases (useful when H has large
/// degenerate eigenspaces and a canonical basis ordering matters). Each
/// column must be an eigenvector of H; ordering is preserved.
inline BlockSplit block_split_with_basis(const OperatorMatrix& h,
                                         double lambda_star, MatC minus,
                                         MatC plus) {
  if (minus.rows() != h.rows() || plus.rows() != h.rows())
    throw PreconditionError("basis dimension mismatch");
  if (minus.cols() + plus.cols() != h.rows())
    throw PreconditionError("bases do not span the space");
  BlockSplit s;
  s.cutoff = lambda_star;
  auto rayleigh = [&](const MatC& basis) {
    VecR evs(basis.cols());
    for (Eigen::Index i = 0; i < basis.cols(); ++i) {
      const VecC v = basis.col(i);
      const VecC hv = h * v;
      const double lam = std::real(v.dot(hv));
      if ((hv - lam * v).norm() > 1e-9 * std::max(1.0, std::abs(lam)))
        throw PreconditionError("basis column is not an eigenvector of H");
      evs(i) = lam;
    }
    return evs;
  };
  s.eigs_minus = rayleigh(minus);
  s.eigs_plus = rayleigh(plus);
  if (s.eigs_minus.size() && s.eigs_minus.maxCoeff() >= lambda_star)
    throw PreconditionError("minus block crosses the cutoff");
  if (s.eigs_plus.size() && s.eigs_plus.minCoeff() < lambda_star)
    throw PreconditionError("plus block crosses the cutoff");
  s.basis_minus = std::move(minus);
  s.basis_plus = std::move(plus);
  pertdetail::finalize_window(s);
  return s;
}

/// Perturbation context: block components of V plus the spectrum of the
/// perturbed Hamiltonian, all in split coordinates.
struct SelfEnergyContext {
  BlockSplit split;
  MatC v_mm, v_mp, v_pm, v_pp;
  double v_norm = 0;      // ||V||
  MatC h_tilde;           // dense H + V
  VecR h_tilde_eigs;      // full spectrum of H + V

  Eigen::Index dim_minus() const { return split.basis_minus.cols(); }
  Eigen::Index dim_plus() const { return split.basis_plus.cols(); }

  MatC h_minus() const {
    return MatC(split.eigs_minus.cast<cplx>().asDiagonal());
  }
  /// Unperturbed upper-block resolvent G_+(z) = (z I - H_+)^{-1}.
  MatC g_plus(double z) const {
    VecC d(dim_plus());
    for (Eigen::Index i = 0; i < d.size(); ++i)
      d(i) = 1.0 / (z - split.eigs_plus(i));
    return MatC(d.asDiagonal());
  }
};

/// Builds the context and enforces the ||V|| < Delta/2 hypothesis.
inline SelfEnergyContext make_context(BlockSplit split,
                                      const OperatorMatrix& v) {
  SelfEnergyContext ctx;
  const MatC vm = MatC(v);
  ctx.v_norm = hermitian_norm(vm);
  if (ctx.v_norm >= split.delta / 2)
    throw PreconditionError("perturbation norm reaches Delta/2");
  ctx.v_mm = split.basis_minus.adjoint() * vm * split.basis_minus;
  ctx.v_mp = split.basis_minus.adjoint() * vm * split.basis_plus;
  ctx.v_pm = split.basis_plus.adjoint() * vm * split.basis_minus;
  ctx.v_pp = split.basis_plus.adjoint() * vm * split.basis_plus;

  MatC h = split.basis_minus *
               split.eigs_minus.cast<cplx>().asDiagonal() *
               split.basis_minus.adjoint() +
           split.basis_plus * split.eigs_plus.cast<cplx>().asDiagonal() *
               split.basis_plus.adjoint();
  ctx.h_tilde = ((h + vm + (h + vm).adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<MatC> es(ctx.h_tilde, Eigen::EigenvaluesOnly);
  ctx.h_tilde_eigs = es.eigenvalues();
  ctx.split = std::move(split);
  return ctx;
}

/// Self-energy via the full resolvent: project (zI - H-tilde)^{-1} to the
/// minus block, invert, and return z I_- minus that inverse. Requires z
/// away from the spectrum of H-tilde.
inline MatC self_energy_exact(const SelfEnergyContext& ctx, double z) {
  for (Eigen::Index i = 0; i < ctx.h_tilde_eigs.size(); ++i)
    if (std::abs(z - ctx.h_tilde_eigs(i)) <= 1e-9)
      throw PreconditionError("resolvent singular: z at an eigenvalue");
  const Eigen::Index dim = ctx.h_tilde.rows();
  const MatC g =
      (z * MatC::Identity(dim, dim) - ctx.h_tilde).partialPivLu().inverse();
  const MatC g_mm =
      ctx.split.basis_minus.adjoint() * g * ctx.split.basis_minus;
  Eigen::FullPivLU<MatC> lu(g_mm);
  if (!lu.isInvertible())
    throw PreconditionError("projected resolvent is singular");
  MatC sigma =
      z * MatC::Identity(g_mm.rows(), g_mm.cols()) - lu.inverse();
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (!is_hermitian(sigma, 1e-10 * scale))
    throw Error("self-energy drifted from Hermitian");
  return ((sigma + sigma.adjoint()) / 2.0).eval();
}

/// Same operator through the Schur complement
///   Sigma_-(z) = H_- + V_-- + V_-+ (z I_+ - H_+ - V_++)^{-1} V_+-,
/// finite across eigenvalues of H-tilde below the cutoff (its poles all lie
/// in [lambda_+ - ||V||, inf)).
inline MatC self_energy_schur(const SelfEnergyContext& ctx, double z) {
  const Eigen::Index dp = ctx.dim_plus();
  MatC a = z * MatC::Identity(dp, dp) -
           MatC(ctx.split.eigs_plus.cast<cplx>().asDiagonal()) - ctx.v_pp;
  MatC sigma = ctx.h_minus() + ctx.v_mm +
               ctx.v_mp * a.partialPivLu().solve(ctx.v_pm);
  return ((sigma + sigma.adjoint()) / 2.0).eval();
}

/// Truncated expansion: order k keeps every term with total V-count <= k,
///   H_- (order 0), + V_-- (1), + V_-+ G_+ V_+- (2),
///   + V_-+ G_+ V_++ G_+ V_+- (3), ...
inline MatC self_energy_series(const SelfEnergyContext& ctx, double z,
                               int order) {
  if (order < 0) throw PreconditionError("series order must be >= 0");
  const MatC g = ctx.g_plus(z);
  if (order >= 3 && op_norm(ctx.v_pp * g) >= 1.0)
    throw PreconditionError("series divergent: ||V_++ G_+|| >= 1");
  MatC sigma = ctx.h_minus();
  if (order >= 1) sigma += ctx.v_mm;
  if (order >= 2) {
    MatC chain = g * ctx.v_pm;  // G (V_++ G)^{j-2} V_+-
    sigma += ctx.v_mp * chain;
    for (int k = 3; k <= order; ++k) {
      chain = g * (ctx.v_pp * chain);
      sigma += ctx.v_mp * chain;
    }
  }
  return sigma;
}

/// Certification that H_eff reproduces the low spectrum of H + V.
struct Theorem3Report {
  double eps_claimed = 0;
  double sup_grid = 0;         // max_z ||Sigma_-(z) - H_eff|| on the grid
  double lipschitz_slack = 0;  // ||dSigma/dz|| * spacing / 2
  double eps_measured = 0;     // sup_grid + lipschitz_slack
  bool eps_ok = false;         // eps_measured <= eps_claimed
  double max_eig_dist = 0;     // max_j |tilde-lambda_j - lambda_eff_j|
  bool certified = false;      // max_eig_dist <= sup_grid + 1e-9
  bool monotone_ok = true;     // Sigma_- decreasing along the grid
  bool dim_match = true;       // # eigenvalues of H-tilde below cutoff = d-
  std::vector<std::pair<double, double>> per_z;  // (z, distance)
  std::vector<VecR> sigma_eigs;  // spectrum of Sigma_-(z) per grid point
  std::vector<double> eff_eigs;
  std::vector<double> tilde_low_eigs;
};

inline Theorem3Report effective_hamiltonian_check(const SelfEnergyContext& ctx,
                                                  const MatC& h_eff, double c,
                                                  double d, double eps,
                                                  int z_grid = 64) {
  if (h_eff.rows() != ctx.dim_minus())
    throw PreconditionError("H_eff dimension does not match the minus block");
  if (ctx.v_norm >= ctx.split.delta / 2)
    throw PreconditionError("perturbation norm reaches Delta/2");
  if (!(d < ctx.split.lambda_star - eps))
    throw PreconditionError("window violates d < lambda_star - eps");
  Eigen::SelfAdjointEigenSolver<MatC> eff_es(h_eff);
  const VecR eff = eff_es.eigenvalues();
  if (eff.minCoeff() < c - 1e-9 || eff.maxCoeff() > d + 1e-9)
    throw PreconditionError("spectrum of H_eff escapes [c, d]");
  if (z_grid < 2) throw PreconditionError("z grid needs at least 2 points");

  Theorem3Report rep;
  rep.eps_claimed = eps;
  rep.eff_eigs.assign(eff.data(), eff.data() + eff.size());

  const double lo = c - eps, hi = d + eps;
  const double spacing = (hi - lo) / (z_grid - 1);
  MatC prev;
  double max_deriv = 0;
  for (int i = 0; i < z_grid; ++i) {
    const double z = lo + spacing * i;
    const MatC sigma = self_energy_schur(ctx, z);
    const double dist = op_norm(sigma - h_eff);
    rep.per_z.emplace_back(z, dist);
    Eigen::SelfAdjointEigenSolver<MatC> sig_es(sigma, Eigen::EigenvaluesOnly);
    rep.sigma_eigs.push_back(sig_es.eigenvalues());
    rep.sup_grid = std::max(rep.sup_grid, dist);
    // derivative bound -V_-+ (zI - H_+ - V_++)^{-2} V_+- for the grid slack
    const Eigen::Index dp = ctx.dim_plus();
    MatC a = z * MatC::Identity(dp, dp) -
             MatC(ctx.split.eigs_plus.cast<cplx>().asDiagonal()) - ctx.v_pp;
    const MatC ainv_v = a.partialPivLu().solve(ctx.v_pm);
    max_deriv = std::max(max_deriv, op_norm(MatC(ainv_v.adjoint() * ainv_v)));
    if (i > 0) {
      Eigen::SelfAdjointEigenSolver<MatC> mono(prev - sigma,
                                               Eigen::EigenvaluesOnly);
      if (mono.eigenvalues().minCoeff() < -1e-9) rep.monotone_ok = false;
    }
    prev = sigma;
  }
  rep.lipschitz_slack = max_deriv * spacing / 2;
  rep.eps_measured = rep.sup_grid + rep.lipschitz_slack;
  rep.eps_ok = rep.eps_measured <= eps;

  for (Eigen::Index i = 0; i < ctx.h_tilde_eigs.size(); ++i)
    if (ctx.h_tilde_eigs(i) < ctx.split.lambda_star)
      rep.tilde_low_eigs.push_back(ctx.h_tilde_eigs(i));
  rep.dim_match =
      static_cast<Eigen::Index>(rep.tilde_low_eigs.size()) == ctx.dim_minus();
  const std::size_t count =
      std::min(rep.tilde_low_eigs.size(), rep.eff_eigs.size());
  for (std::size_t j = 0; j < count; ++j)
    rep.max_eig_dist = std::max(
        rep.max_eig_dist, std::abs(rep.tilde_low_eigs[j] - rep.eff_eigs[j]));
  rep.certified = rep.max_eig_dist <= rep.sup_grid + 1e-9;
  return rep;
}

inline std::string format_theorem3_row(const Theorem3Report& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "theorem3 eps_measured " << rep.eps_measured << " max_eig_dist "
     << rep.max_eig_dist << " hypotheses_ok true";
  return os.str();
}

/// Summary row followed by the per-z distance and spectrum table.
inline std::string format_theorem3_report(const Theorem3Report& rep) {
  std::ostringstream os;
  os.precision(12);
  os << format_theorem3_row(rep) << "\n";
  for (std::size_t i = 0; i < rep.per_z.size(); ++i) {
    os << "z " << rep.per_z[i].first << " dist " << rep.per_z[i].second
       << " eigs";
    for (Eigen::Index j = 0; j < rep.sigma_eigs[i].size(); ++j)
      os << ' ' << rep.sigma_eigs[i](j);
    os << "\n";
  }
  return os.str();
}

}  // namespace hamforge
