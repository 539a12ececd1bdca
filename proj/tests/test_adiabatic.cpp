#include <catch2/catch_amalgamated.hpp>

#include "hamforge/adiabatic.hpp"

using namespace hamforge;

namespace {

HamiltonianPath two_level_path() {
  // H(s) = (1-s) sigma_z + s sigma_x
  PauliSum a(1);
  a.add(1.0, PauliString::single(1, 0, Axis::Z));
  PauliSum b(1);
  b.add(-1.0, PauliString::single(1, 0, Axis::Z));
  b.add(1.0, PauliString::single(1, 0, Axis::X));
  return HamiltonianPath(a, b);
}

HamiltonianPath toy_3local_path() {
  // H(s) = (1-s)(-X_0) + s (Z Z Z)
  PauliSum a(3);
  a.add(-1.0, PauliString::single(3, 0, Axis::X));
  PauliSum b(3);
  b.add(1.0, PauliString::single(3, 0, Axis::X));
  b.add(1.0, PauliString(3, {{0, Axis::Z}, {1, Axis::Z}, {2, Axis::Z}}));
  return HamiltonianPath(a, b);
}

HamiltonianPath gapped_3local_path() {
  // transverse-field start, non-degenerate diagonal end
  PauliSum a(3);
  for (int q = 0; q < 3; ++q) a.add(-1.0, PauliString::single(3, q, Axis::X));
  PauliSum b = a.scaled(-1.0);
  b.add(1.0, PauliString(3, {{0, Axis::Z}, {1, Axis::Z}, {2, Axis::Z}}));
  b.add(0.2, PauliString(3, {{0, Axis::Z}, {1, Axis::Z}}));
  b.add(0.1, PauliString::single(3, 0, Axis::Z));
  return HamiltonianPath(a, b);
}

}  // namespace

TEST_CASE("path evaluation and norm report") {
  const HamiltonianPath p = two_level_path();
  REQUIRE(p.degree == 1);
  const PauliSum mid = p.at(0.5);
  const MatC m = realize_dense(mid);
  REQUIRE(std::abs(m(0, 0).real() - 0.5) < 1e-14);

  const PathNormReport norms = path_norm_report(p);
  REQUIRE(norms.h_sup == Catch::Approx(3.0));
  REQUIRE(norms.dh_sup == Catch::Approx(2.0));
  REQUIRE(norms.d2h_sup == Catch::Approx(0.0));

  PauliSum flat(1);
  flat.add(0.5, PauliString::single(1, 0, Axis::Z));
  const PathNormReport constant = path_norm_report(
      HamiltonianPath(flat, PauliSum(1)));
  REQUIRE(constant.dh_sup == 0.0);
  REQUIRE(constant.d2h_sup == 0.0);
}

TEST_CASE("gap sweep on a constant two-level Hamiltonian") {
  PauliSum a(1);
  a.add(0.5, PauliString::identity(1));
  a.add(-0.5, PauliString::single(1, 0, Axis::Z));  // diag(0, 1)
  const HamiltonianPath p(a, PauliSum(1));
  const GapSweepResult sweep = gap_sweep(p, 11);
  for (const double g : sweep.gaps) REQUIRE(g == Catch::Approx(1.0));
  REQUIRE(sweep.min_gap == Catch::Approx(1.0));
}

TEST_CASE("gap sweep matches the two-level closed form") {
  const HamiltonianPath p = two_level_path();
  const GapSweepResult sweep = gap_sweep(p, 101);
  for (std::size_t i = 0; i < sweep.schedule.size(); ++i) {
    const double s = sweep.schedule[i];
    const double expect = 2 * std::sqrt((1 - s) * (1 - s) + s * s);
    REQUIRE(sweep.gaps[i] == Catch::Approx(expect).margin(1e-10));
  }
  REQUIRE(sweep.min_gap == Catch::Approx(std::numbers::sqrt2).margin(1e-9));
  REQUIRE(sweep.argmin == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("gap sweep consistency against independent assembly") {
  const HamiltonianPath p = toy_3local_path();
  const OperatorMatrix a = realize(p.a);
  const OperatorMatrix b = realize(p.b);
  for (const double s : {0.0, 0.3, 0.71, 1.0}) {
    const MatC direct = realize_dense(p.at(s));
    const MatC assembled = MatC(a) + s * MatC(b);
    REQUIRE((direct - assembled).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(spectral_gap(OperatorMatrix(assembled.sparseView())) ==
            Catch::Approx(spectral_gap(realize(p.at(s)))).margin(1e-10));
  }
}

TEST_CASE("evolution under a constant Hamiltonian matches the exponential") {
  PauliSum a(1);
  a.add(0.7, PauliString::single(1, 0, Axis::X));
  const HamiltonianPath p(a, PauliSum(1));
  VecC init(2);
  init << 1, 0;
  const double t = 2.3;
  const EvolutionResult res = evolve(p, t, 16, init);
  Eigen::SelfAdjointEigenSolver<MatC> es(realize_dense(a));
  VecC phases(2);
  for (int i = 0; i < 2; ++i)
    phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  const VecC expect = es.eigenvectors() *
                      (phases.asDiagonal() * (es.eigenvectors().adjoint() * init));
  REQUIRE((res.final_state - expect).norm() < 1e-8);
}

TEST_CASE("zero evolution time returns the initial state") {
  const HamiltonianPath p = two_level_path();
  VecC init(2);
  init << 0, 1;
  const EvolutionResult res = evolve(p, 0.0, 5, init);
  REQUIRE((res.final_state - init).norm() < 1e-14);
  // fidelity is the overlap with the ground space of H(1) = sigma_x
  REQUIRE(res.fidelity == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("slow two-level sweep reaches the target ground state") {
  const HamiltonianPath p = two_level_path();
  VecC init(2);
  init << 0, 1;  // ground state of sigma_z
  const double t = 100.0 / 2.0;  // 100 / min-gap^2
  const EvolutionResult coarse = evolve(p, t, 1500, init);
  const EvolutionResult fine = evolve(p, t, 3000, init);
  REQUIRE(coarse.fidelity >= 0.99);
  REQUIRE(std::abs(coarse.fidelity - fine.fidelity) < 1e-4);
  REQUIRE(std::abs(fine.final_state.norm() - 1.0) < 1e-10);
  REQUIRE(fine.min_gap == Catch::Approx(std::numbers::sqrt2).margin(1e-3));
}

TEST_CASE("lift of a path without cubic terms is bookkeeping only") {
  PauliSum a(2);
  a.add(-1.0, PauliString::single(2, 0, Axis::X));
  PauliSum b(2);
  b.add(1.0, PauliString(2, {{0, Axis::Z}, {1, Axis::Z}}));
  const LiftedPath lift = gadget_lift_path(HamiltonianPath(a, b), 0.1);
  REQUIRE(lift.gadget_count() == 0);
  REQUIRE(lift.path.qubits() == 2);
  REQUIRE(lift.path.degree == 1);
  PauliSum back = lift.path.at(0.37).scaled(1.0 / lift.c_r);
  PauliSum direct = a;
  direct.add_scaled(0.37, b);
  REQUIRE(max_term_difference(back.scaled(lift.c_r), direct) < 1e-12);
}

TEST_CASE("lifted toy path structure and endpoint spectra") {
  const HamiltonianPath p3 = toy_3local_path();
  const LiftedPath lift = gadget_lift_path(p3, 0.05);
  REQUIRE(lift.path.degree == 2);
  REQUIRE(lift.gadget_count() == 1);
  REQUIRE(lift.path.qubits() == 3 + 3);
  REQUIRE(lift.path.a.locality() <= 2);
  REQUIRE(lift.path.b.locality() <= 2);
  REQUIRE(lift.path.c.locality() <= 2);

  // polynomial evaluation identity at s = 1/2
  PauliSum direct = lift.path.at(0.5);
  PauliSum manual = lift.path.a;
  manual.add_scaled(0.5, lift.path.b);
  manual.add_scaled(0.25, lift.path.c);
  REQUIRE(max_term_difference(direct, manual) < 1e-12);

  // endpoint ground energies track the 3-local path within c_r * O(delta)
  for (const double s : {0.0, 0.5, 1.0}) {
    const double lam3 = eigen_low(realize(p3.at(s)), 1).eigenvalues[0];
    PauliSum unscaled = lift.path.at(s).scaled(1.0 / lift.c_r);
    const double lam2 =
        lift.c_r * eigen_low(realize(unscaled), 1).eigenvalues[0];
    REQUIRE(std::abs(lam2 - lam3) < lift.c_r * 0.05);
  }
}

TEST_CASE("lifted gaps track the effective path within the certified window") {
  const HamiltonianPath p3 = gapped_3local_path();
  const double delta = 0.05;
  const LiftedPath lift = gadget_lift_path(p3, delta);
  const PauliSum h_pen = lift.unperturbed();
  for (const double s : {0.0, 0.5, 1.0}) {
    const MatC minus = gadget_minus_basis(3, 1);
    std::vector<Eigen::Index> mixed;
    const Eigen::Index full = Eigen::Index(1) << 6;
    for (Eigen::Index idx = 0; idx < full; ++idx) {
      const auto bits = idx & 7;
      if (bits != 0 && bits != 7) mixed.push_back(idx);
    }
    MatC plus = MatC::Zero(full, static_cast<Eigen::Index>(mixed.size()));
    for (std::size_t i = 0; i < mixed.size(); ++i)
      plus(mixed[i], static_cast<Eigen::Index>(i)) = 1.0;
    const double big = 1.0 / (delta * delta * delta);
    BlockSplit split =
        block_split_with_basis(realize(h_pen), big / 2, minus, plus);
    auto ctx = make_context(std::move(split), realize(lift.perturbation(s)));
    const MatC h_eff = lift.h_eff(s);
    const double norm_eff = hermitian_norm(h_eff);
    const auto rep = effective_hamiltonian_check(ctx, h_eff, -norm_eff,
                                                 norm_eff, norm_eff);
    REQUIRE(rep.certified);
    // spectral transfer bounds the gap drift by twice the measured window
    const double gap_tilde =
        rep.tilde_low_eigs[1] - rep.tilde_low_eigs[0];
    const double gap_eff = rep.eff_eigs[1] - rep.eff_eigs[0];
    REQUIRE(std::abs(gap_tilde - gap_eff) <= 2 * rep.eps_measured + 1e-9);
  }
}

TEST_CASE("lift refuses invalid inputs") {
  PauliSum a(1);
  a.add(1.0, PauliString::single(1, 0, Axis::Z));
  PauliSum b(1);
  b.add(1.0, PauliString::single(1, 0, Axis::X));
  PauliSum c(1);
  c.add(1.0, PauliString::single(1, 0, Axis::Y));
  REQUIRE_THROWS_AS(gadget_lift_path(HamiltonianPath(a, b, c), 0.1),
                    PreconditionError);
}

TEST_CASE("lifted endpoint ground state concentrates on the plus sector") {
  // needs a non-degenerate endpoint ground state to compare against
  const HamiltonianPath p3 = gapped_3local_path();
  const double delta = 0.05;
  const LiftedPath lift = gadget_lift_path(p3, delta);
  PauliSum unscaled = lift.path.at(1.0).scaled(1.0 / lift.c_r);
  Eigen::SelfAdjointEigenSolver<MatC> es(realize_dense(unscaled));
  const VecC ground = es.eigenvectors().col(0);
  // overlap with (ground of H3(1)) ⊗ |effective +>
  Eigen::SelfAdjointEigenSolver<MatC> sys(realize_dense(p3.at(1.0)));
  const VecC sys_ground = sys.eigenvectors().col(0);
  VecC target = VecC::Zero(ground.size());
  for (Eigen::Index s = 0; s < sys_ground.size(); ++s) {
    target(s * 8 + 0) += sys_ground(s) / std::numbers::sqrt2;
    target(s * 8 + 7) += sys_ground(s) / std::numbers::sqrt2;
  }
  const double overlap = std::abs(target.dot(ground));
  REQUIRE(overlap >= 1.0 - 10 * delta);
}

TEST_CASE("groundstate fidelity bound with V = 0") {
  MatC h = MatC::Zero(4, 4);
  h(1, 1) = 1.0;
  h(2, 2) = h(3, 3) = 50.0;
  BlockSplit split = block_split(OperatorMatrix(h.sparseView()), 25.0);
  auto ctx = make_context(std::move(split), OperatorMatrix(4, 4));
  MatC h_eff = MatC::Zero(2, 2);
  h_eff(1, 1) = 1.0;
  const FidelityCertificate cert = groundstate_fidelity_bound(ctx, h_eff, 0.0);
  REQUIRE(cert.bound == Catch::Approx(1.0));
  REQUIRE(cert.overlap == Catch::Approx(1.0));
  REQUIRE(cert.ok);
}

TEST_CASE("groundstate fidelity bound arithmetic") {
  // ||V|| = 1, lambda_+ = 100, lambda_eff = diag(0, 1), eps = 0.01
  MatC h = MatC::Zero(4, 4);
  h(1, 1) = 1.0;
  h(2, 2) = 100.0;
  h(3, 3) = 101.0;
  BlockSplit split = block_split(OperatorMatrix(h.sparseView()), 50.0);
  MatC v = MatC::Zero(4, 4);
  v(2, 3) = v(3, 2) = 1.0;  // acts inside L_+ only
  auto ctx = make_context(std::move(split), OperatorMatrix(v.sparseView()));
  MatC h_eff = MatC::Zero(2, 2);
  h_eff(1, 1) = 1.0;
  const FidelityCertificate cert =
      groundstate_fidelity_bound(ctx, h_eff, 0.01);
  const double expect = 1.0 - 2.0 / (99.99 * 99.99) - 0.04;
  REQUIRE(cert.bound == Catch::Approx(expect).margin(1e-12));
  REQUIRE(cert.overlap >= cert.bound - 1e-9);
}

TEST_CASE("gadget instance certificate", "[property]") {
  PauliSum y(1);
  y.add(0.02, PauliString::single(1, 0, Axis::Z));  // unique effective ground
  const Eigen::Matrix2cd b = 0.125 * Eigen::Matrix2cd::Identity();
  for (const double delta : {0.1, 0.05}) {
    const GadgetOperators ops =
        three_qubit_gadget(GadgetInstance(1, y, {b, b, b}, {0, 0, 0}, delta));
    const double big = 1.0 / (delta * delta * delta);
    BlockSplit split = block_split(realize(ops.h), big / 2);
    auto ctx = make_context(std::move(split), realize(ops.v));
    const double norm_eff = hermitian_norm(ops.h_eff);
    const auto t3 = effective_hamiltonian_check(ctx, ops.h_eff, -norm_eff,
                                                norm_eff, norm_eff);
    const FidelityCertificate cert =
        groundstate_fidelity_bound(ctx, ops.h_eff, t3.eps_measured);
    REQUIRE(cert.overlap >= cert.bound - 1e-9);
    if (cert.bound > 0) REQUIRE(cert.ok);
  }
}
