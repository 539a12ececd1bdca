#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hamforge/common.hpp"

namespace hamforge {

/// Orthonormal basis of a subspace of the 2^n-dimensional state space.
class Subspace {
 public:
  explicit Subspace(MatC basis) : basis_(std::move(basis)) {
    if (basis_.cols() < 1)
      throw PreconditionError("subspace dimension must be at least 1");
    const MatC gram = basis_.adjoint() * basis_;
    const double err =
        (gram - MatC::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-10)
      throw PreconditionError("subspace basis is not orthonormal");
  }

  static Subspace full(Eigen::Index ambient) {
    return Subspace(MatC::Identity(ambient, ambient));
  }

  /// Orthonormalize arbitrary spanning columns (QR with rank check).
  static Subspace span_of(const MatC& columns) {
    Eigen::HouseholderQR<MatC> qr(columns);
    MatC q = qr.householderQ() * MatC::Identity(columns.rows(), columns.cols());
    return Subspace(std::move(q));
  }

  Eigen::Index ambient() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const MatC& basis() const { return basis_; }

  Subspace complement() const {
    const Eigen::Index d = dim(), a = ambient();
    if (d >= a) throw PreconditionError("complement of the full space is empty");
    Eigen::HouseholderQR<MatC> qr(basis_);
    MatC q = qr.householderQ() * MatC::Identity(a, a);
    return Subspace(q.rightCols(a - d));
  }

 private:
  MatC basis_;
};

enum class EigenMethod { dense, iterative };

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending
  MatC vectors;                     // matching columns
  EigenMethod method = EigenMethod::dense;
  std::vector<double> residual_norms;  // per pair ||Hv - lambda v||
};

struct EigenLowOptions {
  std::optional<EigenMethod> method;  // default: dense iff dim <= 2^10
  double residual_tol = 1e-8;
  int max_restarts = 3;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

namespace detail {

inline double one_norm_bound(const OperatorMatrix& h) {
  VecR col_sums = VecR::Zero(h.cols());
  for (int k = 0; k < h.outerSize(); ++k)
    for (OperatorMatrix::InnerIterator it(h, k); it; ++it)
      col_sums(it.col()) += std::abs(it.value());
  return col_sums.size() ? col_sums.maxCoeff() : 0.0;
}

inline void certify_residuals(const OperatorMatrix& h, SpectralReport& rep,
                              double tol) {
  // backward-stable solvers cannot push residuals below ~ eps * ||H||;
  // the floor term keeps certification meaningful for huge-norm operators
  const double fp_floor = 64 * h.rows() *
                          std::numeric_limits<double>::epsilon() *
                          one_norm_bound(h);
  rep.residual_norms.resize(rep.eigenvalues.size());
  for (std::size_t j = 0; j < rep.eigenvalues.size(); ++j) {
    const VecC v = rep.vectors.col(static_cast<Eigen::Index>(j));
    const double res = (h * v - rep.eigenvalues[j] * v).norm();
    rep.residual_norms[j] = res;
    if (res > tol * std::max(1.0, std::abs(rep.eigenvalues[j])) + fp_floor)
      throw ConvergenceError("eigenpair residual " + std::to_string(res) +
                             " exceeds certification tolerance");
  }
}

struct RitzPair {
  double value;
  VecC vector;
};

/// One Lanczos pass (full reorthogonalization) in the orthogonal complement
/// of `deflated`; returns the maximal converged ascending prefix of Ritz
/// pairs of H restricted to that complement.
inline std::vector<RitzPair> lanczos_pass(const OperatorMatrix& h,
                                          const MatC& deflated, int m,
                                          double tol, double fp_floor,
                                          std::mt19937_64& rng) {
  const Eigen::Index dim = h.rows();
  std::normal_distribution<double> gauss(0.0, 1.0);
  VecC v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(gauss(rng), gauss(rng));
  auto project_out = [&](VecC& w) {
    if (deflated.cols() > 0) w -= deflated * (deflated.adjoint() * w);
  };
  project_out(v);
  if (v.norm() < 1e-12) return {};
  v.normalize();

  MatC basis(dim, m);
  std::vector<double> alpha, beta;
  basis.col(0) = v;
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    VecC w = h * basis.col(j);
    const double a = std::real(basis.col(j).dot(w));
    alpha.push_back(a);
    ++steps;
    w -= a * basis.col(j);
    if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * basis.col(j - 1);
    // two-pass reorthogonalization against the Krylov basis and deflated set
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      project_out(w);
    }
    const double b = w.norm();
    if (j + 1 == m || b < 1e-13) break;
    beta.push_back(b);
    basis.col(j + 1) = w / b;
  }

  MatR tri = MatR::Zero(steps, steps);
  for (int j = 0; j < steps; ++j) {
    tri(j, j) = alpha[static_cast<std::size_t>(j)];
    if (j + 1 < steps)
      tri(j, j + 1) = tri(j + 1, j) = beta[static_cast<std::size_t>(j)];
  }
  Eigen::SelfAdjointEigenSolver<MatR> es(tri);

  std::vector<RitzPair> converged;
  for (int i = 0; i < steps; ++i) {
    const double lam = es.eigenvalues()(i);
    VecC u = basis.leftCols(steps) * es.eigenvectors().col(i).cast<cplx>();
    u.normalize();
    const double res = (h * u - lam * u).norm();
    if (res > tol * std::max(1.0, std::abs(lam)) + fp_floor)
      break;  // keep the converged prefix only
    converged.push_back({lam, std::move(u)});
  }
  return converged;
}

inline SpectralReport eigen_low_iterative(const OperatorMatrix& h,
                                          Eigen::Index k,
                                          const EigenLowOptions& opts) {
  const Eigen::Index dim = h.rows();
  std::mt19937_64 rng(opts.seed);
  int m = static_cast<int>(
      std::min<Eigen::Index>(dim, std::max<Eigen::Index>(64, 4 * k + 32)));
  int restarts = 0;
  MatC deflated(dim, 0);
  std::vector<double> values;
  const double fp_floor = 64 * dim * std::numeric_limits<double>::epsilon() *
                          one_norm_bound(h);

  while (static_cast<Eigen::Index>(values.size()) < k) {
    if (deflated.cols() == dim)
      throw ConvergenceError("requested more eigenpairs than dimension");
    auto pairs =
        lanczos_pass(h, deflated, m, opts.residual_tol, fp_floor, rng);
    if (pairs.empty()) {
      if (++restarts > opts.max_restarts)
        throw ConvergenceError(
            "Lanczos failed to converge after " +
            std::to_string(opts.max_restarts) + " restarts");
      m = static_cast<int>(std::min<Eigen::Index>(dim, 2 * m));
      continue;
    }
    // take only the lowest converged pair: a single Krylov space holds one
    // vector per eigenspace, so further copies of a degenerate eigenvalue
    // only show up after deflating this one
    deflated.conservativeResize(dim, deflated.cols() + 1);
    deflated.col(deflated.cols() - 1) = pairs.front().vector;
    values.push_back(pairs.front().value);
  }

  SpectralReport rep;
  rep.method = EigenMethod::iterative;
  rep.eigenvalues = std::move(values);
  rep.vectors = deflated.leftCols(k);
  // deflation can return near-degenerate pairs marginally out of order
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return rep.eigenvalues[static_cast<std::size_t>(a)] <
           rep.eigenvalues[static_cast<std::size_t>(b)];
  });
  SpectralReport sorted = rep;
  for (Eigen::Index i = 0; i < k; ++i) {
    sorted.eigenvalues[static_cast<std::size_t>(i)] =
        rep.eigenvalues[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    sorted.vectors.col(i) = rep.vectors.col(order[static_cast<std::size_t>(i)]);
  }
  certify_residuals(h, sorted, opts.residual_tol);
  return sorted;
}

}  // namespace detail

/// k smallest eigenvalues with eigenvectors and certified residuals.
/// Dense path is mandatory for dim <= 2^10; Krylov above (or on request).
inline SpectralReport eigen_low(const OperatorMatrix& h, Eigen::Index k,
                                const EigenLowOptions& opts = {}) {
  const Eigen::Index dim = h.rows();
  if (k < 1 || k > dim)
    throw PreconditionError("requested eigenpair count out of range");
  EigenMethod method = opts.method.value_or(
      dim <= kDenseEigenThreshold ? EigenMethod::dense : EigenMethod::iterative);
  if (method == EigenMethod::dense && dim > dense_limit())
    throw PreconditionError("dense eigensolve above the dense limit");

  if (method == EigenMethod::iterative)
    return detail::eigen_low_iterative(h, k, opts);

  Eigen::SelfAdjointEigenSolver<MatC> es{MatC(h)};
  SpectralReport rep;
  rep.method = EigenMethod::dense;
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
  rep.vectors = es.eigenvectors().leftCols(k);
  detail::certify_residuals(h, rep, opts.residual_tol);
  return rep;
}

/// Restriction of H to S: entry (i,j) = <b_i| H |b_j>.
inline MatC restrict_to(const OperatorMatrix& h, const Subspace& s) {
  if (h.rows() != s.ambient())
    throw PreconditionError("restriction dimension mismatch");
  MatC m = s.basis().adjoint() * (h * s.basis());
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!is_hermitian(m, 1e-10 * scale))
    throw PreconditionError("restriction of a non-Hermitian operator");
  return ((m + m.adjoint()) / 2.0).eval();
}

namespace detail {

inline VecR full_spectrum(const OperatorMatrix& h) {
  if (h.rows() > dense_limit())
    throw PreconditionError("full spectrum above the dense limit");
  Eigen::SelfAdjointEigenSolver<MatC> es(MatC(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace detail

/// Difference between the lowest eigenvalue and the lowest one exceeding it
/// by more than degeneracy_tol.
inline double spectral_gap(const OperatorMatrix& h,
                           double degeneracy_tol = 1e-9) {
  if (h.rows() < 2) throw PreconditionError("spectral gap needs dim >= 2");
  const VecR evs = detail::full_spectrum(h);
  const double ground = evs(0);
  for (Eigen::Index i = 1; i < evs.size(); ++i)
    if (evs(i) > ground + degeneracy_tol) return evs(i) - ground;
  throw Error("spectrum is fully degenerate within tolerance");
}

/// Least eigenvalue above zero_tol of a positive semidefinite operator.
inline double smallest_nonzero(const OperatorMatrix& h, double zero_tol = 1e-9) {
  const VecR evs = detail::full_spectrum(h);
  if (evs(0) < -zero_tol)
    throw PreconditionError("operator is not positive semidefinite");
  for (Eigen::Index i = 0; i < evs.size(); ++i)
    if (evs(i) > zero_tol) return evs(i);
  throw Error("no eigenvalue above the zero tolerance");
}

/// max_j |mu_j - sigma_j| over ascending spectra; bounded by ||H1 - H2||.
inline double weyl_distance(const OperatorMatrix& h1, const OperatorMatrix& h2) {
  if (h1.rows() != h2.rows())
    throw PreconditionError("weyl distance dimension mismatch");
  const VecR a = detail::full_spectrum(h1);
  const VecR b = detail::full_spectrum(h2);
  return (a - b).cwiseAbs().maxCoeff();
}

/// Real part of <psi| H |psi>.
inline double expectation(const OperatorMatrix& h, const VecC& psi) {
  return std::real(psi.dot(h * psi));
}

}  // namespace hamforge
