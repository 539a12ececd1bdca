#pragma once

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "hamforge/common.hpp"

namespace hamforge {

struct OneQubitGate {
  Eigen::Matrix2cd u;
  int target;
};

/// Controlled-phase gate: diagonal, flips the sign of |11>.
struct CPhaseGate {
  int first;
  int second;
};

using Gate = std::variant<OneQubitGate, CPhaseGate>;

namespace gates {

inline bool is_unitary(const Eigen::Matrix2cd& u, double tol = 1e-10) {
  return ((u.adjoint() * u) - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <=
         tol;
}

inline Gate one_qubit(const Eigen::Matrix2cd& u, int target) {
  if (!is_unitary(u))
    throw PreconditionError("one-qubit gate matrix is not unitary");
  return OneQubitGate{u, target};
}

inline Gate identity(int target) {
  return OneQubitGate{Eigen::Matrix2cd::Identity(), target};
}
inline Gate x(int target) {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return OneQubitGate{m, target};
}
inline Gate y(int target) {
  Eigen::Matrix2cd m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return OneQubitGate{m, target};
}
inline Gate z(int target) {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return OneQubitGate{m, target};
}
inline Gate hadamard(int target) {
  const double s = 1.0 / std::numbers::sqrt2;
  Eigen::Matrix2cd m;
  m << s, s, s, -s;
  return OneQubitGate{m, target};
}
inline Gate phase(double theta, int target) {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, std::polar(1.0, theta);
  return OneQubitGate{m, target};
}
inline Gate cphase(int first, int second) {
  if (first == second)
    throw PreconditionError("cphase qubits must be distinct");
  return CPhaseGate{first, second};
}

inline bool is_z(const Gate& g) {
  const auto* oq = std::get_if<OneQubitGate>(&g);
  if (!oq) return false;
  Eigen::Matrix2cd z;
  z << 1, 0, 0, -1;
  return (oq->u - z).cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace gates

/// Verifier circuit: the first m qubits carry the proof, the remaining
/// N - m start as |0>, and the output is read from qubit 0.
class Circuit {
 public:
  Circuit(int n, int m, std::vector<Gate> gate_list)
      : n_(n), m_(m), gates_(std::move(gate_list)) {
    if (n < 1) throw PreconditionError("circuit needs at least one qubit");
    if (m < 0 || m > n)
      throw PreconditionError("proof qubit count out of range");
    if (gates_.empty()) throw PreconditionError("circuit needs at least one gate");
    for (const auto& g : gates_) {
      if (const auto* oq = std::get_if<OneQubitGate>(&g)) {
        if (oq->target < 0 || oq->target >= n)
          throw PreconditionError("gate target out of range");
        if (!gates::is_unitary(oq->u))
          throw PreconditionError("one-qubit gate matrix is not unitary");
      } else {
        const auto& cp = std::get<CPhaseGate>(g);
        if (cp.first < 0 || cp.first >= n || cp.second < 0 || cp.second >= n)
          throw PreconditionError("cphase qubit out of range");
        if (cp.first == cp.second)
          throw PreconditionError("cphase qubits must be distinct");
      }
    }
  }

  int qubits() const { return n_; }
  int proof_qubits() const { return m_; }
  const std::vector<Gate>& gates() const { return gates_; }
  int steps() const { return static_cast<int>(gates_.size()); }
  /// Gate applied at time step t (1-based).
  const Gate& gate_at(int t) const { return gates_[static_cast<std::size_t>(t - 1)]; }

 private:
  int n_;
  int m_;
  std::vector<Gate> gates_;
};

namespace detail {

inline void apply_gate(VecC& psi, const Gate& g, int n) {
  if (const auto* oq = std::get_if<OneQubitGate>(&g)) {
    const int bit = n - 1 - oq->target;
    const Eigen::Index mask = Eigen::Index(1) << bit;
    for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
      if (idx & mask) continue;
      const cplx a = psi(idx), b = psi(idx | mask);
      psi(idx) = oq->u(0, 0) * a + oq->u(0, 1) * b;
      psi(idx | mask) = oq->u(1, 0) * a + oq->u(1, 1) * b;
    }
  } else {
    const auto& cp = std::get<CPhaseGate>(g);
    const Eigen::Index fmask = Eigen::Index(1) << (n - 1 - cp.first);
    const Eigen::Index smask = Eigen::Index(1) << (n - 1 - cp.second);
    for (Eigen::Index idx = 0; idx < psi.size(); ++idx)
      if ((idx & fmask) && (idx & smask)) psi(idx) = -psi(idx);
  }
}

}  // namespace detail

/// Extend a proof on the first m qubits with |0...0> ancillas.
inline VecC proof_input(const Circuit& c, const VecC& proof) {
  const Eigen::Index pdim = Eigen::Index(1) << c.proof_qubits();
  if (proof.size() != pdim)
    throw PreconditionError("proof dimension does not match proof qubits");
  if (std::abs(proof.norm() - 1.0) > 1e-10)
    throw PreconditionError("proof state is not normalized");
  VecC psi = VecC::Zero(Eigen::Index(1) << c.qubits());
  const int shift = c.qubits() - c.proof_qubits();
  for (Eigen::Index p = 0; p < pdim; ++p) psi(p << shift) = proof(p);
  return psi;
}

/// U_T ... U_1 (proof ⊗ |0...0>).
inline VecC simulate(const Circuit& c, const VecC& proof) {
  VecC psi = proof_input(c, proof);
  for (const auto& g : c.gates()) detail::apply_gate(psi, g, c.qubits());
  return psi;
}

/// Probability of measuring |1> on the output qubit after the run.
inline double acceptance_probability(const Circuit& c, const VecC& proof) {
  const VecC psi = simulate(c, proof);
  const Eigen::Index outmask = Eigen::Index(1) << (c.qubits() - 1);
  double p = 0;
  for (Eigen::Index idx = 0; idx < psi.size(); ++idx)
    if (idx & outmask) p += std::norm(psi(idx));
  return p;
}

struct OptimalAcceptance {
  double probability;
  VecC proof;  // maximizing proof state
};

/// Largest eigenvalue (with maximizer) of the acceptance operator
/// restricted to ancilla = |0>; equals the max over proofs.
inline OptimalAcceptance optimal_proof(const Circuit& c) {
  const Eigen::Index dim = Eigen::Index(1) << c.qubits();
  if (dim > dense_limit())
    throw PreconditionError("circuit too large for the dense acceptance path");
  const Eigen::Index pdim = Eigen::Index(1) << c.proof_qubits();
  MatC outputs(dim, pdim);
  for (Eigen::Index p = 0; p < pdim; ++p) {
    VecC e = VecC::Zero(pdim);
    e(p) = 1.0;
    outputs.col(p) = simulate(c, e);
  }
  const Eigen::Index outmask = Eigen::Index(1) << (c.qubits() - 1);
  MatC m = MatC::Zero(pdim, pdim);
  for (Eigen::Index idx = 0; idx < dim; ++idx)
    if (idx & outmask) m += outputs.row(idx).adjoint() * outputs.row(idx);
  Eigen::SelfAdjointEigenSolver<MatC> es(m);
  const Eigen::Index top = pdim - 1;
  OptimalAcceptance best;
  best.probability = std::clamp(es.eigenvalues()(top), 0.0, 1.0);
  best.proof = es.eigenvectors().col(top);
  return best;
}

inline double optimal_acceptance(const Circuit& c) {
  return optimal_proof(c).probability;
}

/// Circuit normalized so controlled-phase gates sit at steps L, 2L, ...,
/// T2*L, each wrapped by Z gates at t-2, t-1, t+1, t+2, with identity
/// padding elsewhere; the unitary is unchanged.
class CanonicalCircuit {
 public:
  CanonicalCircuit(Circuit circuit, int interval, int cphase_count)
      : circuit_(std::move(circuit)), interval_(interval),
        cphase_count_(cphase_count) {
    const int t_total = circuit_.steps();
    if (cphase_count_ == 0) {
      if (interval_ != t_total + 1)
        throw PreconditionError("interval must be T+1 when no cphase gates");
      for (const auto& g : circuit_.gates())
        if (std::holds_alternative<CPhaseGate>(g))
          throw PreconditionError("unexpected cphase gate");
      return;
    }
    if (interval_ < 3)
      throw PreconditionError("canonical interval must be at least 3");
    if (t_total != (cphase_count_ + 1) * interval_ - 1)
      throw PreconditionError("total steps do not match (T2+1)L - 1");
    for (int t = 1; t <= t_total; ++t) {
      const bool expect_cphase = (t % interval_ == 0);
      const bool got = std::holds_alternative<CPhaseGate>(circuit_.gate_at(t));
      if (expect_cphase != got)
        throw PreconditionError("cphase gates are not at regular intervals");
      if (expect_cphase) {
        const auto& cp = std::get<CPhaseGate>(circuit_.gate_at(t));
        const int want[4][2] = {{t - 2, cp.first}, {t - 1, cp.second},
                                {t + 1, cp.first}, {t + 2, cp.second}};
        for (const auto& [step, qubit] : want) {
          const Gate& g = circuit_.gate_at(step);
          if (!gates::is_z(g) || std::get<OneQubitGate>(g).target != qubit)
            throw PreconditionError("cphase gate is missing its Z padding");
        }
      }
    }
  }

  const Circuit& circuit() const { return circuit_; }
  int interval() const { return interval_; }          // L
  int cphase_count() const { return cphase_count_; }  // T2
  int steps() const { return circuit_.steps(); }      // T

  bool is_cphase_step(int t) const {
    return cphase_count_ > 0 && t % interval_ == 0 &&
           t <= cphase_count_ * interval_;
  }
  /// Time steps carrying one-qubit gates (the set T1).
  std::vector<int> one_qubit_steps() const {
    std::vector<int> out;
    for (int t = 1; t <= steps(); ++t)
      if (!is_cphase_step(t)) out.push_back(t);
    return out;
  }

 private:
  Circuit circuit_;
  int interval_;
  int cphase_count_;
};

/// Wrap every cphase gate in Z pairs (they commute, so the action is
/// unchanged) and pad runs with identity gates to a common interval.
inline CanonicalCircuit canonicalize(const Circuit& c) {
  std::vector<Gate> expanded;
  std::vector<std::size_t> cphase_pos;
  for (const auto& g : c.gates()) {
    if (const auto* cp = std::get_if<CPhaseGate>(&g)) {
      expanded.push_back(gates::z(cp->first));
      expanded.push_back(gates::z(cp->second));
      cphase_pos.push_back(expanded.size());
      expanded.push_back(g);
      expanded.push_back(gates::z(cp->first));
      expanded.push_back(gates::z(cp->second));
    } else {
      expanded.push_back(g);
    }
  }
  const int t2 = static_cast<int>(cphase_pos.size());
  if (t2 == 0) {
    Circuit out(c.qubits(), c.proof_qubits(), std::move(expanded));
    const int l = out.steps() + 1;
    return CanonicalCircuit(std::move(out), l, 0);
  }

  // runs of one-qubit gates: before, between, after the cphase gates
  std::vector<int> runs;
  std::size_t prev = 0;
  for (std::size_t pos : cphase_pos) {
    runs.push_back(static_cast<int>(pos - prev));
    prev = pos + 1;
  }
  runs.push_back(static_cast<int>(expanded.size() - prev));
  int l = 0;
  for (int r : runs) l = std::max(l, r + 1);

  // identity padding goes before the trailing Z pair of each run that
  // leads into a cphase, so the Z gates stay adjacent to their gate
  std::vector<Gate> padded;
  std::size_t src = 0;
  for (std::size_t block = 0; block < runs.size(); ++block) {
    const bool leads_into_cphase = block < cphase_pos.size();
    const int keep_back = leads_into_cphase ? 2 : 0;
    for (int i = 0; i < runs[block] - keep_back; ++i)
      padded.push_back(expanded[src++]);
    for (int i = runs[block]; i < l - 1; ++i)
      padded.push_back(gates::identity(0));
    for (int i = 0; i < keep_back; ++i) padded.push_back(expanded[src++]);
    if (leads_into_cphase) padded.push_back(expanded[src++]);
  }
  Circuit out(c.qubits(), c.proof_qubits(), std::move(padded));
  return CanonicalCircuit(std::move(out), l, t2);
}

/// Dense unitary of the whole circuit (small registers only).
inline MatC circuit_unitary(const Circuit& c) {
  const Eigen::Index dim = Eigen::Index(1) << c.qubits();
  if (dim > dense_limit())
    throw PreconditionError("circuit too large for a dense unitary");
  MatC u(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    VecC e = VecC::Zero(dim);
    e(b) = 1.0;
    for (const auto& g : c.gates()) detail::apply_gate(e, g, c.qubits());
    u.col(b) = e;
  }
  return u;
}

}  // namespace hamforge
