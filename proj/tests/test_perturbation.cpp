#include <catch2/catch_amalgamated.hpp>

#include "hamforge/gadget.hpp"
#include "hamforge/perturbation.hpp"

using namespace hamforge;

namespace {

OperatorMatrix sparse_of(const MatC& m) {
  return OperatorMatrix(m.sparseView());
}

OperatorMatrix diag3(double a, double b, double c) {
  MatC m = MatC::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return sparse_of(m);
}

SelfEnergyContext toy_context(double gap, double v) {
  // H = diag(0, gap) perturbed by v sigma_x
  MatC h = MatC::Zero(2, 2);
  h(1, 1) = gap;
  BlockSplit split = block_split(sparse_of(h), gap / 2);
  return make_context(std::move(split),
                      realize(PauliSum(1, {{v, PauliString::single(
                                                   1, 0, Axis::X)}})));
}

GadgetOperators unit_gadget(double delta) {
  PauliSum y(1);
  const Eigen::Matrix2cd b = 0.125 * Eigen::Matrix2cd::Identity();
  return three_qubit_gadget(GadgetInstance(1, y, {b, b, b}, {0, 0, 0}, delta));
}

SelfEnergyContext gadget_context(const GadgetOperators& ops, double delta) {
  const double big = 1.0 / (delta * delta * delta);
  BlockSplit split = block_split(realize(ops.h), big / 2);
  return make_context(std::move(split), realize(ops.v));
}

/// Same split but in the canonical (system, effective-qubit) ordering.
SelfEnergyContext canonical_gadget_context(const GadgetOperators& ops,
                                           double delta) {
  const double big = 1.0 / (delta * delta * delta);
  const MatC minus = gadget_minus_basis(1, 1);
  std::vector<Eigen::Index> mixed;
  for (Eigen::Index idx = 0; idx < 16; ++idx) {
    const auto bits = idx & 7;
    if (bits != 0 && bits != 7) mixed.push_back(idx);
  }
  MatC plus = MatC::Zero(16, static_cast<Eigen::Index>(mixed.size()));
  for (std::size_t i = 0; i < mixed.size(); ++i)
    plus(mixed[i], static_cast<Eigen::Index>(i)) = 1.0;
  BlockSplit split = block_split_with_basis(realize(ops.h), big / 2,
                                            minus, plus);
  return make_context(std::move(split), realize(ops.v));
}

}  // namespace

TEST_CASE("block split at a cutoff") {
  const BlockSplit s = block_split(diag3(0, 0, 5), 2.0);
  REQUIRE(s.basis_minus.cols() == 2);
  REQUIRE(s.basis_plus.cols() == 1);
  REQUIRE(s.delta == Catch::Approx(5.0));
  REQUIRE(s.lambda_minus == Catch::Approx(0.0));
  REQUIRE(s.lambda_plus == Catch::Approx(5.0));
  REQUIRE(s.lambda_star == Catch::Approx(2.5));

  REQUIRE_THROWS_AS(block_split(diag3(0, 2.0, 5), 2.0), PreconditionError);
  REQUIRE_THROWS_AS(block_split(diag3(3, 4, 5), 2.0), PreconditionError);
}

TEST_CASE("gadget penalty splits into the expected sectors") {
  const GadgetOperators ops = unit_gadget(0.1);
  const BlockSplit s = block_split(realize(ops.h), 500.0);
  // dim L_- = 2 * dim(system) for a single gadget on one system qubit
  REQUIRE(s.basis_minus.cols() == 4);
  REQUIRE(s.delta == Catch::Approx(1000.0));
}

TEST_CASE("multi-gadget penalty spectrum is a Delta ladder") {
  PauliSum h3(3);
  h3.add(0.8, PauliString(3, {{0, Axis::Z}, {1, Axis::Z}, {2, Axis::Z}}));
  h3.add(-0.4, PauliString(3, {{0, Axis::X}, {1, Axis::Y}, {2, Axis::Z}}));
  const ReductionOutput red = reduce_3to2(h3, 0.2);
  REQUIRE(red.decomposition.gadget_count() == 2);
  const double big = std::pow(0.2, -3);
  Eigen::SelfAdjointEigenSolver<MatC> es(realize_dense(red.h_unperturbed),
                                         Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ratio = es.eigenvalues()(i) / big;
    REQUIRE(std::abs(ratio - std::round(ratio)) < 1e-10);
    REQUIRE(std::round(ratio) <= 2.0);
  }
}

TEST_CASE("self-energy with V = 0 is the lower block") {
  MatC h = MatC::Zero(4, 4);
  h(1, 1) = -0.5;
  h(2, 2) = 7;
  h(3, 3) = 9;
  BlockSplit split = block_split(sparse_of(h), 3.0);
  auto ctx = make_context(std::move(split), OperatorMatrix(4, 4));
  for (const double z : {-2.0, 0.4, 1.7}) {
    const MatC sig = self_energy_exact(ctx, z);
    REQUIRE((sig - ctx.h_minus()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("two-level toy: exact, Schur, and series all give v^2/(z-Delta)") {
  const double gap = 10, v = 0.5;
  const auto ctx = toy_context(gap, v);
  for (const double z : {-1.0, 0.0, 2.0}) {
    const double expect = v * v / (z - gap);
    REQUIRE(self_energy_exact(ctx, z)(0, 0).real() ==
            Catch::Approx(expect).margin(1e-12));
    REQUIRE(self_energy_schur(ctx, z)(0, 0).real() ==
            Catch::Approx(expect).margin(1e-12));
    // V_++ = 0 so the series terminates at order 2
    REQUIRE(self_energy_series(ctx, z, 2)(0, 0).real() ==
            Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("series truncation orders") {
  const auto ctx = toy_context(10, 0.5);
  const MatC s0 = self_energy_series(ctx, 0.0, 0);
  REQUIRE(s0.cwiseAbs().maxCoeff() < 1e-14);  // H_- = 0 here
  const MatC s1 = self_energy_series(ctx, 0.0, 1);
  REQUIRE((s1 - ctx.v_mm).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("series increments carry the expected gadget processes") {
  // scalar B = b I: the second-order increment is the (z-Delta)^{-1}
  // delta^{-4} (B1^2+B2^2+B3^2) return process, the third-order one adds
  // the within-gadget X insertion and the triple flip onto sigma^x_eff
  const double delta = 0.1, b = 0.125, big = 1e3;
  const GadgetOperators ops = unit_gadget(delta);
  const auto ctx = canonical_gadget_context(ops, delta);
  const double z = 0.005;
  const double d4 = std::pow(delta, -4), d6 = std::pow(delta, -6);
  const Eigen::Index dm = ctx.dim_minus();

  const MatC inc2 = self_energy_series(ctx, z, 2) - self_energy_series(ctx, z, 1);
  const MatC expect2 =
      (3 * b * b * d4 / (z - big)) * MatC::Identity(dm, dm);
  REQUIRE((inc2 - expect2).cwiseAbs().maxCoeff() < 1e-10);

  const MatC inc3 = self_energy_series(ctx, z, 3) - self_energy_series(ctx, z, 2);
  // X = Y + delta^{-1} 3 b^2 with Y = 0, so sum_i B_i X B_i = 3 b^2 X
  const double xval = 3 * b * b / delta;
  MatC expect3 = (3 * b * b * xval * d4 / ((z - big) * (z - big))) *
                 MatC::Identity(dm, dm);
  // effective qubit is the least significant index bit of the minus block
  for (Eigen::Index s = 0; s < dm / 2; ++s)
    for (int e = 0; e < 2; ++e)
      expect3(2 * s + e, 2 * s + (1 - e)) -=
          6 * b * b * b * d6 / ((z - big) * (z - big));
  REQUIRE((inc3 - expect3).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gadget series matches the exact self-energy within the tail budget",
          "[property]") {
  for (const double delta : {0.2, 0.1, 0.05}) {
    const GadgetOperators ops = unit_gadget(delta);
    const auto ctx = gadget_context(ops, delta);
    const double norm_eff = hermitian_norm(ops.h_eff);
    double max_g = 0;
    for (int i = 0; i <= 16; ++i) {
      const double z = -2 * norm_eff + i * (4 * norm_eff / 16);
      const MatC exact = self_energy_schur(ctx, z);
      const MatC series = self_energy_series(ctx, z, 3);
      const double g_norm = op_norm(ctx.g_plus(z));
      max_g = std::max(max_g, g_norm);
      const double budget =
          2 * std::pow(ctx.v_norm, 4) * std::pow(g_norm, 3);
      REQUIRE(op_norm(exact - series) <= budget);
    }
    // exact and resolvent routes agree away from the perturbed spectrum
    const MatC a = self_energy_exact(ctx, 3 * norm_eff);
    const MatC b = self_energy_schur(ctx, 3 * norm_eff);
    REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("self-energy is operator monotone decreasing") {
  const GadgetOperators ops = unit_gadget(0.1);
  const auto ctx = gadget_context(ops, 0.1);
  MatC prev;
  for (int i = 0; i <= 12; ++i) {
    const double z = -0.05 + i * (0.1 / 12);
    const MatC sig = self_energy_schur(ctx, z);
    if (i > 0) {
      Eigen::SelfAdjointEigenSolver<MatC> es(prev - sig,
                                             Eigen::EigenvaluesOnly);
      REQUIRE(es.eigenvalues().minCoeff() >= -1e-9);
    }
    prev = sig;
  }
}

TEST_CASE("poles of the projected resolvent line up with eigenvalues") {
  // the j-th eigenvalue of Sigma_-(lambda_j) is lambda_j itself
  const GadgetOperators ops = unit_gadget(0.1);
  const auto ctx = gadget_context(ops, 0.1);
  int j = 0;
  for (Eigen::Index i = 0; i < ctx.h_tilde_eigs.size(); ++i) {
    const double lam = ctx.h_tilde_eigs(i);
    if (lam >= ctx.split.lambda_star) continue;
    Eigen::SelfAdjointEigenSolver<MatC> es(self_energy_schur(ctx, lam),
                                           Eigen::EigenvaluesOnly);
    REQUIRE(std::abs(es.eigenvalues()(j) - lam) < 1e-7);
    ++j;
  }
  REQUIRE(j == ctx.dim_minus());
}

TEST_CASE("theorem-3 certification on the V = 0 instance") {
  MatC h = MatC::Zero(4, 4);
  h(2, 2) = h(3, 3) = 20;
  BlockSplit split = block_split(sparse_of(h), 10.0);
  auto ctx = make_context(std::move(split), OperatorMatrix(4, 4));
  const MatC h_eff = MatC::Zero(2, 2);
  const auto rep = effective_hamiltonian_check(ctx, h_eff, -0.5, 0.5, 0.25);
  REQUIRE(rep.sup_grid < 1e-12);
  REQUIRE(rep.max_eig_dist < 1e-12);
  REQUIRE(rep.certified);
  REQUIRE(rep.eps_ok);
}

TEST_CASE("theorem-3 certification on the unit gadget") {
  const GadgetOperators ops = unit_gadget(0.1);
  const auto ctx = gadget_context(ops, 0.1);
  const double norm_eff = hermitian_norm(ops.h_eff);
  const auto rep = effective_hamiltonian_check(ctx, ops.h_eff, -norm_eff,
                                               norm_eff, norm_eff);
  REQUIRE(rep.certified);
  REQUIRE(rep.monotone_ok);
  REQUIRE(rep.dim_match);
  // lambda_eff,1 = -6 b^3 with b = 1/8
  REQUIRE(rep.eff_eigs.front() ==
          Catch::Approx(-6.0 / 512).margin(1e-12));
  REQUIRE(std::abs(rep.tilde_low_eigs.front() - rep.eff_eigs.front()) <=
          rep.eps_measured);
}

TEST_CASE("violated hypotheses are rejected up front") {
  // ||V|| >= Delta/2
  MatC h = MatC::Zero(2, 2);
  h(1, 1) = 1.0;
  BlockSplit split = block_split(sparse_of(h), 0.5);
  REQUIRE_THROWS_AS(
      make_context(std::move(split),
                   realize(PauliSum(1, {{0.9, PauliString::single(
                                                  1, 0, Axis::X)}}))),
      PreconditionError);

  // spectrum of H_eff escaping [c, d]
  const auto ctx = toy_context(10, 0.5);
  MatC h_eff = MatC::Zero(1, 1);
  h_eff(0, 0) = 2.0;
  REQUIRE_THROWS_AS(effective_hamiltonian_check(ctx, h_eff, -0.5, 0.5, 0.25),
                    PreconditionError);
}

TEST_CASE("resolvent route refuses z at an eigenvalue") {
  const auto ctx = toy_context(10, 0.5);
  REQUIRE_THROWS_AS(self_energy_exact(ctx, ctx.h_tilde_eigs(0)),
                    PreconditionError);
}
