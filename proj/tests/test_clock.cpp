#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamforge/clock.hpp"

using namespace hamforge;

namespace {

VecC basis_state(int qubits, int index) {
  VecC v = VecC::Zero(Eigen::Index(1) << qubits);
  v(index) = 1.0;
  return v;
}

VecC zero_proof(int m) { return basis_state(std::max(m, 0), 0); }

// expectation of every component of a two-local build in one pass
struct TwoLocalExpectations {
  double in, out, clock, prop1, prop2;
};

TwoLocalExpectations history_expectations(const TwoLocalHamiltonian& h,
                                          const VecC& eta) {
  return {expectation(realize(h.h_in), eta), expectation(realize(h.h_out), eta),
          expectation(realize(h.h_clock), eta),
          expectation(realize(h.h_prop1), eta),
          expectation(realize(h.h_prop2), eta)};
}

}  // namespace

TEST_CASE("log-local build of the accepting one-gate circuit") {
  const Circuit c(1, 1, {gates::x(0)});
  const LogLocalHamiltonian h = build_log_local_auto(c);
  REQUIRE(h.qubits() == 1 + 1);  // N + ceil(log2(T+1))

  const auto rep = eigen_low(realize(h.total()), 1);
  REQUIRE(std::abs(rep.eigenvalues[0]) < 1e-9);

  const HistoryState eta =
      build_history_state(c, zero_proof(1), ClockEncoding::binary);
  REQUIRE((realize(h.total()) * eta.amplitudes).norm() < 1e-9);
}

TEST_CASE("log-local clock register size") {
  std::vector<Gate> gs;
  for (int i = 0; i < 5; ++i) gs.push_back(gates::hadamard(0));
  const LogLocalHamiltonian h = build_log_local_auto(Circuit(2, 1, gs));
  REQUIRE(h.clock_qubits == 3);  // ceil(log2 6)
  REQUIRE(h.qubits() == 5);
}

TEST_CASE("norm bound of the input penalty counts the ancilla qubits") {
  // N = 3, m = 1: two ancilla projectors, each of unit norm bound
  const Circuit c(3, 1, {gates::hadamard(0)});
  const LogLocalHamiltonian h = build_log_local(c, 1, 1);
  REQUIRE(h.h_in.norm_bound() == Catch::Approx(2.0));
  REQUIRE(hermitian_norm(realize_dense(h.h_in)) <= 2.0 + 1e-12);
}

TEST_CASE("log-local rejecting circuit separates from zero") {
  const Circuit c(1, 0, {gates::z(0)});
  const LogLocalHamiltonian h = build_log_local_auto(c);
  const auto rep = eigen_low(realize(h.total()), 1);
  REQUIRE(rep.eigenvalues[0] >= 0.25);
}

TEST_CASE("history state identities for the binary clock") {
  const Circuit c(2, 1, {gates::hadamard(0), gates::x(1), gates::hadamard(0)});
  const LogLocalHamiltonian h = build_log_local(c, 2.0, 3.0);
  const VecC proof = zero_proof(1);
  const HistoryState eta =
      build_history_state(c, proof, ClockEncoding::binary);
  REQUIRE(std::abs(eta.amplitudes.norm() - 1.0) < 1e-12);
  REQUIRE(std::abs(expectation(realize(h.h_prop), eta.amplitudes)) < 1e-12);
  REQUIRE(std::abs(expectation(realize(h.h_in), eta.amplitudes)) < 1e-12);
  const double p = acceptance_probability(c, proof);
  REQUIRE(expectation(realize(h.h_out), eta.amplitudes) ==
          Catch::Approx(1.0 - p).margin(1e-12));
}

TEST_CASE("log-local components are positive semidefinite") {
  const Circuit c(2, 1, {gates::hadamard(0), gates::cphase(0, 1)});
  const LogLocalHamiltonian h = build_log_local(c, 1.0, 1.0);
  for (const PauliSum* comp : {&h.h_in, &h.h_out, &h.h_prop}) {
    Eigen::SelfAdjointEigenSolver<MatC> es(realize_dense(*comp),
                                           Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("unary clock states and the legal subspace") {
  REQUIRE(unary_clock_bits(2, 3) == 0b110);
  REQUIRE(unary_clock_bits(2, 4) == 0b1100);
  REQUIRE(unary_clock_bits(0, 3) == 0);
  REQUIRE_THROWS_AS(unary_clock_bits(4, 3), PreconditionError);

  const Subspace legal = legal_clock_subspace(3);
  REQUIRE(legal.dim() == 4);

  // the clock penalty annihilates every legal word
  PauliSum h_clock(3);
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j)
      h_clock.add(clockdetail::proj_pair(3, clock_qubit(0, i), 0,
                                         clock_qubit(0, j), 1));
  const MatC restricted = restrict_to(realize(h_clock), legal);
  REQUIRE(restricted.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-local build structure") {
  const CanonicalCircuit cc =
      canonicalize(Circuit(2, 2, {gates::hadamard(0), gates::cphase(0, 1)}));
  const TwoLocalHamiltonian h = build_two_local(cc, 1, 1, 1, 1);
  const int t = h.steps;
  REQUIRE(h.clock_summands ==
          static_cast<std::size_t>(t * (t - 1) / 2));
  REQUIRE(h.prop2_summands == 2u);
  REQUIRE(h.prop1_summands == static_cast<std::size_t>(t - 1));
  REQUIRE(h.total().locality() == 2);
  REQUIRE(h.qubits() == 2 + t);
}

TEST_CASE("two-local history identities, including the cphase checks") {
  const Circuit raw(2, 2, {gates::hadamard(0), gates::cphase(0, 1)});
  const CanonicalCircuit cc = canonicalize(raw);
  const TwoLocalHamiltonian h = build_two_local_auto(cc);
  const OptimalAcceptance best = optimal_proof(raw);
  const HistoryState eta =
      build_history_state(cc.circuit(), best.proof, ClockEncoding::unary);

  const auto e = history_expectations(h, eta.amplitudes);
  REQUIRE(std::abs(e.clock) < 1e-12);
  REQUIRE(std::abs(e.prop1) < 1e-12);
  REQUIRE(std::abs(e.prop2) < 1e-12);
  REQUIRE(std::abs(e.in) < 1e-12);
  REQUIRE(e.out == Catch::Approx(1.0 - best.probability).margin(1e-10));
}

TEST_CASE("two-local accepting and rejecting one-qubit circuits") {
  {
    const Circuit c(1, 1, {gates::x(0)});
    const TwoLocalHamiltonian h = build_two_local_auto(canonicalize(c));
    const auto rep = eigen_low(realize(h.total()), 1);
    REQUIRE(rep.eigenvalues[0] <= 1e-9);
  }
  {
    const Circuit c(1, 0, {gates::z(0)});
    const TwoLocalHamiltonian h = build_two_local_auto(canonicalize(c));
    const auto rep = eigen_low(realize(h.total()), 1);
    REQUIRE(rep.eigenvalues[0] >= 0.25);
  }
}

TEST_CASE("prop1 subspace basis") {
  const CanonicalCircuit cc =
      canonicalize(Circuit(2, 2, {gates::hadamard(0), gates::cphase(0, 1)}));
  const Subspace s = prop1_subspace(cc);
  REQUIRE(s.dim() == (1 << 2) * (cc.cphase_count() + 1));

  // every basis vector is a zero eigenvector of H_prop1 inside S_legal
  const TwoLocalHamiltonian h = build_two_local(cc, 1, 1, 1, 1);
  const Subspace legal = legal_subspace(2, cc.steps());
  const MatC p1_legal = restrict_to(realize(h.h_prop1), legal);
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const VecC coords = legal.basis().adjoint() * s.basis().col(i);
    REQUIRE((p1_legal * coords).norm() < 1e-10);
    // and the vector lives entirely inside the legal space
    REQUIRE(std::abs(coords.norm() - 1.0) < 1e-12);
  }

  const MatC gram = s.basis().adjoint() * s.basis();
  REQUIRE((gram - MatC::Identity(s.dim(), s.dim())).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("restriction identities for an N=2 one-cphase circuit") {
  const CanonicalCircuit cc =
      canonicalize(Circuit(2, 2, {gates::hadamard(0), gates::cphase(0, 1)}));
  const RestrictionIdentityReport rep = verify_restriction_identities(cc);
  CAPTURE(rep.detail);
  REQUIRE(rep.ok());
  REQUIRE(rep.time_projector_max_diff < 1e-9);
  REQUIRE(rep.effective_prop_max_diff < 1e-9);
  REQUIRE(rep.slack_min_eigenvalue > -1e-9);
  REQUIRE(rep.time_reflection_symmetric);
}

TEST_CASE("restriction identities at the minimal interval L = 3") {
  // a bare cphase canonicalizes to L = 3, exercising both clock boundaries
  const CanonicalCircuit cc = canonicalize(Circuit(2, 2, {gates::cphase(0, 1)}));
  REQUIRE(cc.interval() == 3);
  const RestrictionIdentityReport rep = verify_restriction_identities(cc);
  CAPTURE(rep.detail);
  REQUIRE(rep.ok());
}

TEST_CASE("two cphase gates: history identities and the dense cap") {
  const CanonicalCircuit cc = canonicalize(
      Circuit(2, 2, {gates::cphase(0, 1), gates::hadamard(1),
                     gates::cphase(1, 0)}));
  REQUIRE(cc.cphase_count() == 2);
  // two cphase gates force T = 14, and N + T = 16 exceeds the dense
  // verification cap
  REQUIRE_THROWS_AS(verify_restriction_identities(cc), PreconditionError);

  const TwoLocalHamiltonian h = build_two_local(cc, 1, 1, 1, 1);
  REQUIRE(h.total().locality() == 2);
  const OptimalAcceptance best = optimal_proof(cc.circuit());
  const HistoryState eta =
      build_history_state(cc.circuit(), best.proof, ClockEncoding::unary);
  const auto e = history_expectations(h, eta.amplitudes);
  REQUIRE(std::abs(e.clock) < 1e-12);
  REQUIRE(std::abs(e.prop1) < 1e-12);
  REQUIRE(std::abs(e.prop2) < 1e-12);
  REQUIRE(e.out == Catch::Approx(1.0 - best.probability).margin(1e-10));
}

TEST_CASE("change of basis block-diagonalizes the binary propagation term") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Gate> gs;
    const int t_steps = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < t_steps; ++i) {
      if (i % 2 == 0) gs.push_back(gates::hadamard(static_cast<int>(rng() % 2)));
      else gs.push_back(gates::cphase(0, 1));
    }
    const auto chk = verify_propagation_blocks(Circuit(2, 1, gs));
    REQUIRE(chk.ok);
    REQUIRE(chk.max_diff < 1e-10);
  }
}

TEST_CASE("ground-energy dichotomy holds variationally", "[property]") {
  const std::vector<Circuit> circuits = {
      Circuit(1, 1, {gates::x(0)}),
      Circuit(1, 0, {gates::z(0)}),
      Circuit(1, 1, {gates::hadamard(0), gates::z(0), gates::hadamard(0)}),
      Circuit(2, 2, {gates::hadamard(0), gates::cphase(0, 1)}),
      Circuit(3, 2, {gates::hadamard(0), gates::cphase(0, 1), gates::x(2)}),
  };
  // ⟨eta|H|eta⟩ bounds lambda(H) for any positive weights; unit weights
  // keep the float noise of the weighted sum below the 1e-9 tolerance
  for (const Circuit& c : circuits) {
    const OptimalAcceptance best = optimal_proof(c);
    {
      const LogLocalHamiltonian h = build_log_local(c, 1.0, 1.0);
      const HistoryState eta =
          build_history_state(c, best.proof, ClockEncoding::binary);
      const double value = expectation(realize(h.total()), eta.amplitudes);
      REQUIRE(value <= 1.0 - best.probability + 1e-9);
    }
    {
      const CanonicalCircuit cc = canonicalize(c);
      const TwoLocalHamiltonian h = build_two_local(cc, 1, 1, 1, 1);
      const HistoryState eta = build_history_state(cc.circuit(), best.proof,
                                                   ClockEncoding::unary);
      const double value = expectation(realize(h.total()), eta.amplitudes);
      REQUIRE(value <= 1.0 - best.probability + 1e-9);
    }
  }
}

TEST_CASE("history state for a unary clock lives on legal words") {
  const Circuit c(2, 1, {gates::hadamard(0), gates::x(1)});
  const HistoryState eta =
      build_history_state(c, zero_proof(1), ClockEncoding::unary);
  const Eigen::Index cdim = Eigen::Index(1) << c.steps();
  for (Eigen::Index idx = 0; idx < eta.amplitudes.size(); ++idx) {
    if (std::abs(eta.amplitudes(idx)) < 1e-15) continue;
    const auto clock_bits = static_cast<std::uint64_t>(idx % cdim);
    bool legal = false;
    for (int t = 0; t <= c.steps(); ++t)
      legal = legal || clock_bits == unary_clock_bits(t, c.steps());
    REQUIRE(legal);
  }
}
