#pragma once

#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "hamforge/spectral.hpp"

namespace hamforge {

/// Instance of the sandwich bound: H2 vanishes on S and penalizes its
/// complement by at least J, with J > 2 ||H1||.
struct ProjectionInstance {
  OperatorMatrix h1;
  OperatorMatrix h2;
  Subspace s;
  double j = 0;
  /// Upper bound on ||H1|| supplied by the caller (e.g. a Pauli-sum norm
  /// bound); consulted only above the dense threshold.
  std::optional<double> norm_hint;
};

struct ProjectionBounds {
  double lower = 0;              // lambda_restricted - K^2 / (J - 2K)
  double upper = 0;              // lambda_restricted
  double lambda_h = 0;           // lambda(H1 + H2)
  double lambda_restricted = 0;  // lambda(H1|_S)
  double k_norm = 0;             // the ||H1|| used
  double j = 0;
  bool k_from_dense = true;
  bool ok = false;               // sandwich certified within 1e-9
};

/// Both sides of the sandwich bound
///   lambda(H1|_S) - ||H1||^2 / (J - 2||H1||) <= lambda(H) <= lambda(H1|_S)
/// with the instance invariants checked up front.
inline ProjectionBounds projection_bounds(const ProjectionInstance& inst) {
  const Eigen::Index dim = inst.h1.rows();
  if (inst.h2.rows() != dim || inst.s.ambient() != dim)
    throw PreconditionError("projection instance dimension mismatch");

  for (Eigen::Index i = 0; i < inst.s.dim(); ++i) {
    const double r = (inst.h2 * inst.s.basis().col(i)).norm();
    if (r > 1e-9)
      throw PreconditionError(
          "H2 does not annihilate S: basis residual " + std::to_string(r));
  }
  if (inst.s.dim() < dim) {
    const Subspace comp = inst.s.complement();
    const MatC h2_perp = restrict_to(inst.h2, comp);
    Eigen::SelfAdjointEigenSolver<MatC> es(h2_perp, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < inst.j - 1e-9)
      throw PreconditionError(
          "H2 penalty on the complement of S falls below J");
  }

  ProjectionBounds out;
  out.j = inst.j;
  if (dim <= kDenseEigenThreshold) {
    out.k_norm = hermitian_norm(MatC(inst.h1));
    out.k_from_dense = true;
  } else if (inst.norm_hint) {
    out.k_norm = *inst.norm_hint;
    out.k_from_dense = false;
  } else {
    // certified iterative extremes of the spectrum
    const auto low = eigen_low(inst.h1, 1);
    OperatorMatrix neg = -inst.h1;
    const auto high = eigen_low(neg, 1);
    out.k_norm = std::max(std::abs(low.eigenvalues[0]),
                          std::abs(high.eigenvalues[0]));
    out.k_from_dense = false;
  }
  if (inst.j <= 2 * out.k_norm)
    throw PreconditionError("penalty J must exceed 2 ||H1||");

  OperatorMatrix h = inst.h1 + inst.h2;
  out.lambda_h = eigen_low(h, 1).eigenvalues[0];
  const MatC h1s = restrict_to(inst.h1, inst.s);
  Eigen::SelfAdjointEigenSolver<MatC> es(h1s, Eigen::EigenvaluesOnly);
  out.lambda_restricted = es.eigenvalues().minCoeff();
  out.upper = out.lambda_restricted;
  out.lower =
      out.lambda_restricted - out.k_norm * out.k_norm / (inst.j - 2 * out.k_norm);
  out.ok = out.lower - 1e-9 <= out.lambda_h &&
           out.lambda_h <= out.lambda_restricted + 1e-9;
  return out;
}

/// Random Hermitian matrix of operator norm <= 1.
inline MatC random_hermitian_unit(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatC a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
  MatC h = (a + a.adjoint()) / 2.0;
  const double norm = hermitian_norm(h);
  if (norm > 0) h /= norm;
  return h;
}

/// Seeded instance: random H1 of norm <= 1, random subspace of random
/// dimension, penalty J drawn in (2K, 100K], and H2 vanishing on S with
/// either a flat or a graded penalty on the complement.
inline ProjectionInstance random_projection_instance(std::mt19937_64& rng,
                                                     Eigen::Index dim) {
  const MatC h1 = random_hermitian_unit(rng, dim);
  const double k = hermitian_norm(h1);

  std::normal_distribution<double> gauss(0.0, 1.0);
  MatC raw(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      raw(i, j) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<MatC> qr(raw);
  const MatC q = qr.householderQ() * MatC::Identity(dim, dim);
  std::uniform_int_distribution<Eigen::Index> dpick(1, dim - 1);
  const Eigen::Index d = dpick(rng);

  std::uniform_real_distribution<double> upick(
      std::nextafter(0.0, 1.0), 1.0);
  const double j = 2 * k + upick(rng) * 98 * k;

  MatC h2 = MatC::Zero(dim, dim);
  std::uniform_real_distribution<double> grade(0.0, 1.0);
  const bool graded = grade(rng) < 0.5;
  for (Eigen::Index i = d; i < dim; ++i) {
    const double penalty = graded ? j * (1.0 + grade(rng)) : j;
    h2 += penalty * q.col(i) * q.col(i).adjoint();
  }
  ProjectionInstance inst{OperatorMatrix(MatC((h1 + h1.adjoint()) / 2.0)
                                             .sparseView()),
                          OperatorMatrix(MatC((h2 + h2.adjoint()) / 2.0)
                                             .sparseView()),
                          Subspace(q.leftCols(d)), j, {}};
  return inst;
}

inline std::string format_projection_row(const ProjectionBounds& b) {
  std::ostringstream os;
  os.precision(12);
  os << "projlemma lower " << b.lower << " lambda " << b.lambda_h
     << " restricted " << b.lambda_restricted << " J " << b.j << " K "
     << b.k_norm << " ok " << (b.ok ? "true" : "false");
  return os.str();
}

}  // namespace hamforge
