#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hamforge/circuit.hpp"
#include "hamforge/pauli.hpp"
#include "hamforge/spectral.hpp"

namespace hamforge {

inline double sufficient_penalty(double k) { return 8 * k * k + 2 * k; }

/// Tridiagonal block of the propagation Hamiltonian after the change of
/// basis: diag(1/2, 1, ..., 1, 1/2) with -1/2 off-diagonals, size T+1.
/// Its spectrum is {1 - cos(pi k / (T+1)) : k = 0..T}.
inline MatR propagation_block(int t_steps) {
  const int d = t_steps + 1;
  MatR m = MatR::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = (i == 0 || i == d - 1) ? 0.5 : 1.0;
    if (i + 1 < d) m(i, i + 1) = m(i + 1, i) = -0.5;
  }
  return m;
}

inline double propagation_gap_closed_form(int t_steps) {
  return 1.0 - std::cos(std::numbers::pi / (t_steps + 1));
}

namespace clockdetail {

inline int ceil_log2(int v) {
  int c = 0;
  while ((1 << c) < v) ++c;
  return c;
}

inline MatC unit_outer(int dim, int i, int j) {
  MatC m = MatC::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

/// |bit><bit|_q as a PauliSum: (I +/- Z_q) / 2.
inline PauliSum proj_bit(int n, int q, int bit) {
  PauliSum p(n);
  p.add(0.5, PauliString::identity(n));
  p.add(bit == 0 ? 0.5 : -0.5, PauliString::single(n, q, Axis::Z));
  return p;
}

/// |b1 b2><b1 b2| on two distinct qubits, expanded into four Pauli words.
inline PauliSum proj_pair(int n, int q1, int b1, int q2, int b2) {
  const double s1 = b1 == 0 ? 1.0 : -1.0;
  const double s2 = b2 == 0 ? 1.0 : -1.0;
  PauliSum p(n);
  p.add(0.25, PauliString::identity(n));
  p.add(0.25 * s1, PauliString::single(n, q1, Axis::Z));
  p.add(0.25 * s2, PauliString::single(n, q2, Axis::Z));
  p.add(0.25 * s1 * s2, PauliString(n, {{q1, Axis::Z}, {q2, Axis::Z}}));
  return p;
}

/// |1><0|_q + |0><1|_q = X_q.
inline PauliSum x_flip(int n, int q) {
  PauliSum p(n);
  p.add(1.0, PauliString::single(n, q, Axis::X));
  return p;
}

/// |11><00| + |00><11| = (X X - Y Y) / 2 on two qubits.
inline PauliSum double_flip(int n, int q1, int q2) {
  PauliSum p(n);
  p.add(0.5, PauliString(n, {{q1, Axis::X}, {q2, Axis::X}}));
  p.add(-0.5, PauliString(n, {{q1, Axis::Y}, {q2, Axis::Y}}));
  return p;
}

/// U ⊗ |1><0|_c + U^dag ⊗ |0><1|_c on a computation/clock qubit pair.
inline PauliSum gate_bridge(int n, const Eigen::Matrix2cd& u, int target,
                            int clock_q) {
  MatC lower = MatC::Zero(2, 2), upper = MatC::Zero(2, 2);
  lower(1, 0) = 1.0;
  upper(0, 1) = 1.0;
  const MatC block = kron(u, lower) + kron(u.adjoint(), upper);
  return embed_hermitian(n, {target, clock_q}, block);
}

}  // namespace clockdetail

// ---------------------------------------------------------------------------
// Log-local construction (binary clock register)
// ---------------------------------------------------------------------------

struct LogLocalHamiltonian {
  int comp_qubits = 0;   // N
  int clock_qubits = 0;  // ceil(log2(T+1))
  int steps = 0;         // T
  PauliSum h_in{0}, h_out{0}, h_prop{0};
  double j_in = 1.0, j_prop = 1.0;

  int qubits() const { return comp_qubits + clock_qubits; }
  PauliSum total() const {
    PauliSum h = h_out;
    h.add_scaled(j_in, h_in);
    h.add_scaled(j_prop, h_prop);
    return h;
  }
};

namespace clockdetail {

/// Gate matrix and its (sorted, ascending) qubit support.
inline std::pair<MatC, std::vector<int>> gate_block(const Gate& g) {
  if (const auto* oq = std::get_if<OneQubitGate>(&g))
    return {MatC(oq->u), {oq->target}};
  const auto& cp = std::get<CPhaseGate>(g);
  MatC m = MatC::Identity(4, 4);
  m(3, 3) = -1.0;  // symmetric under qubit swap
  return {m, {std::min(cp.first, cp.second), std::max(cp.first, cp.second)}};
}

}  // namespace clockdetail

/// Clock Hamiltonian with a binary clock register of ceil(log2(T+1)) qubits.
inline LogLocalHamiltonian build_log_local(const Circuit& c, double j_in,
                                           double j_prop) {
  using namespace clockdetail;
  if (j_in <= 0 || j_prop <= 0)
    throw PreconditionError("weights must be positive");
  const int n_comp = c.qubits();
  const int t_steps = c.steps();
  const int n_clock = std::max(1, ceil_log2(t_steps + 1));
  const int n = n_comp + n_clock;
  const int cdim = 1 << n_clock;

  std::vector<int> clock_qubits(static_cast<std::size_t>(n_clock));
  for (int j = 0; j < n_clock; ++j)
    clock_qubits[static_cast<std::size_t>(j)] = n_comp + j;

  LogLocalHamiltonian out;
  out.comp_qubits = n_comp;
  out.clock_qubits = n_clock;
  out.steps = t_steps;
  out.j_in = j_in;
  out.j_prop = j_prop;
  out.h_in = PauliSum(n);
  out.h_out = PauliSum(n);
  out.h_prop = PauliSum(n);

  const MatC p0 = unit_outer(2, 0, 0), p1 = unit_outer(2, 1, 1);
  for (int q = c.proof_qubits(); q < n_comp; ++q) {
    std::vector<int> where{q};
    where.insert(where.end(), clock_qubits.begin(), clock_qubits.end());
    out.h_in.add(embed_hermitian(n, where, kron(p1, unit_outer(cdim, 0, 0))));
  }
  {
    std::vector<int> where{0};
    where.insert(where.end(), clock_qubits.begin(), clock_qubits.end());
    out.h_out.add(embed_hermitian(
        n, where,
        (t_steps + 1.0) * kron(p0, unit_outer(cdim, t_steps, t_steps))));
  }
  for (int t = 1; t <= t_steps; ++t) {
    auto [u, gate_qubits] = gate_block(c.gate_at(t));
    const Eigen::Index gdim = u.rows();
    std::vector<int> where = gate_qubits;
    where.insert(where.end(), clock_qubits.begin(), clock_qubits.end());
    const MatC block =
        0.5 * (kron(MatC::Identity(gdim, gdim),
                    unit_outer(cdim, t, t) + unit_outer(cdim, t - 1, t - 1)) -
               kron(u, unit_outer(cdim, t, t - 1)) -
               kron(u.adjoint(), unit_outer(cdim, t - 1, t)));
    out.h_prop.add(embed_hermitian(n, where, block));
  }
  return out;
}

struct LogLocalWeights {
  double j_in;
  double j_prop;
};

/// Sufficient penalties J >= 8 K^2 + 2 K (a 1/8 sandwich slack per level),
/// innermost level first, with the triangle-inequality norm bound as K.
inline LogLocalWeights auto_log_weights(const LogLocalHamiltonian& h) {
  const double out_norm = h.h_out.norm_bound();
  const double j_in = (h.steps + 1.0) * sufficient_penalty(out_norm);
  const double k1 = out_norm + j_in * h.h_in.norm_bound();
  const double j_prop = sufficient_penalty(k1) / propagation_gap_closed_form(h.steps);
  return {j_in, j_prop};
}

inline LogLocalHamiltonian build_log_local_auto(const Circuit& c) {
  LogLocalHamiltonian h = build_log_local(c, 1.0, 1.0);
  const auto w = auto_log_weights(h);
  h.j_in = w.j_in;
  h.j_prop = w.j_prop;
  return h;
}

// ---------------------------------------------------------------------------
// Two-local construction (unary clock of T qubits)
// ---------------------------------------------------------------------------

/// Global index of clock qubit j (1-based) behind N computation qubits.
inline int clock_qubit(int n_comp, int j) { return n_comp + j - 1; }

inline std::uint64_t unary_clock_bits(int t, int t_steps) {
  if (t < 0 || t > t_steps) throw PreconditionError("clock value out of range");
  std::uint64_t v = 0;
  for (int j = 1; j <= t; ++j) v |= std::uint64_t(1) << (t_steps - j);
  return v;
}

/// |t-hat> = |1...1 0...0> on the T-qubit clock factor.
inline VecC unary_clock_state(int t, int t_steps) {
  VecC v = VecC::Zero(Eigen::Index(1) << t_steps);
  v(static_cast<Eigen::Index>(unary_clock_bits(t, t_steps))) = 1.0;
  return v;
}

struct TwoLocalHamiltonian {
  int comp_qubits = 0;  // N; clock adds T more qubits
  int steps = 0;        // T
  int interval = 0;     // L
  int cphase_count = 0; // T2
  PauliSum h_in{0}, h_out{0}, h_clock{0}, h_prop1{0}, h_prop2{0};
  double j_in = 1.0, j_2 = 1.0, j_1 = 1.0, j_clock = 1.0;
  std::size_t in_summands = 0;     // N - m
  std::size_t clock_summands = 0;  // T(T-1)/2
  std::size_t prop1_summands = 0;  // |T1|
  std::size_t prop2_summands = 0;  // 2 T2

  int qubits() const { return comp_qubits + steps; }
  PauliSum total() const {
    PauliSum h = h_out;
    h.add_scaled(j_in, h_in);
    h.add_scaled(j_2, h_prop2);
    h.add_scaled(j_1, h_prop1);
    h.add_scaled(j_clock, h_clock);
    return h;
  }
};

namespace clockdetail {

/// |10><10| on unary clock positions (a, a+1) with the boundary convention
/// that position 0 reads as the constant 1 and position T+1 as constant 0.
inline PauliSum clock_10(int n, int n_comp, int t_steps, int a) {
  if (a < 0 || a > t_steps)
    throw PreconditionError("clock pair index out of range");
  if (a == 0) return proj_bit(n, clock_qubit(n_comp, 1), 0);
  if (a == t_steps) return proj_bit(n, clock_qubit(n_comp, t_steps), 1);
  return proj_pair(n, clock_qubit(n_comp, a), 1, clock_qubit(n_comp, a + 1), 0);
}

/// Unary-clock propagation term for a one-qubit gate at step t, with the
/// one-sided forms at t = 1 and t = T.
inline PauliSum prop_term_unary(int n, int n_comp, int t_steps,
                                const OneQubitGate& g, int t) {
  PauliSum left = (t < t_steps)
                      ? proj_pair(n, clock_qubit(n_comp, t), 1,
                                  clock_qubit(n_comp, t + 1), 0)
                      : proj_bit(n, clock_qubit(n_comp, t_steps), 1);
  PauliSum right = (t > 1) ? proj_pair(n, clock_qubit(n_comp, t - 1), 1,
                                       clock_qubit(n_comp, t), 0)
                           : proj_bit(n, clock_qubit(n_comp, 1), 0);
  PauliSum bridge = gate_bridge(n, g.u, g.target, clock_qubit(n_comp, t));
  PauliSum out(n);
  out.add_scaled(0.5, left);
  out.add_scaled(0.5, right);
  out.add_scaled(-0.5, bridge);
  return out;
}

inline PauliSum h_qubit_term(int n, int n_comp, const CPhaseGate& cp, int t) {
  PauliSum comp(n);
  comp.add_scaled(-1.0, proj_bit(n, cp.first, 0));
  comp.add_scaled(-1.0, proj_bit(n, cp.second, 0));
  comp.add_scaled(0.5, proj_bit(n, cp.first, 1));
  comp.add_scaled(0.5, proj_bit(n, cp.second, 1));
  return mul_disjoint(comp, x_flip(n, clock_qubit(n_comp, t)));
}

inline PauliSum h_time_term(int n, int n_comp, int t_steps, int t) {
  auto ten10 = [&](int a) { return clock_10(n, n_comp, t_steps, a); };
  auto cq = [&](int j) { return clock_qubit(n_comp, j); };
  PauliSum s(n);
  s.add_scaled(1.0, ten10(t));
  s.add_scaled(6.0, ten10(t + 1));
  s.add_scaled(1.0, ten10(t + 2));
  s.add_scaled(2.0, double_flip(n, cq(t + 1), cq(t + 2)));
  s.add_scaled(1.0, x_flip(n, cq(t + 1)));
  s.add_scaled(1.0, x_flip(n, cq(t + 2)));
  s.add_scaled(1.0, ten10(t - 3));
  s.add_scaled(6.0, ten10(t - 2));
  s.add_scaled(1.0, ten10(t - 1));
  s.add_scaled(2.0, double_flip(n, cq(t - 2), cq(t - 1)));
  s.add_scaled(1.0, x_flip(n, cq(t - 2)));
  s.add_scaled(1.0, x_flip(n, cq(t - 1)));
  return s.scaled(1.0 / 8.0);
}

}  // namespace clockdetail

/// Two-local clock Hamiltonian on N + T qubits; every emitted term acts on
/// at most two qubits.
inline TwoLocalHamiltonian build_two_local(const CanonicalCircuit& cc,
                                           double j_in, double j_2, double j_1,
                                           double j_clock) {
  using namespace clockdetail;
  if (j_in <= 0 || j_2 <= 0 || j_1 <= 0 || j_clock <= 0)
    throw PreconditionError("weights must be positive");
  const Circuit& c = cc.circuit();
  const int n_comp = c.qubits();
  const int t_steps = cc.steps();
  const int n = n_comp + t_steps;

  TwoLocalHamiltonian out;
  out.comp_qubits = n_comp;
  out.steps = t_steps;
  out.interval = cc.interval();
  out.cphase_count = cc.cphase_count();
  out.j_in = j_in;
  out.j_2 = j_2;
  out.j_1 = j_1;
  out.j_clock = j_clock;
  out.h_in = PauliSum(n);
  out.h_out = PauliSum(n);
  out.h_clock = PauliSum(n);
  out.h_prop1 = PauliSum(n);
  out.h_prop2 = PauliSum(n);

  for (int q = c.proof_qubits(); q < n_comp; ++q) {
    out.h_in.add(proj_pair(n, q, 1, clock_qubit(n_comp, 1), 0));
    ++out.in_summands;
  }
  out.h_out.add_scaled(
      t_steps + 1.0,
      proj_pair(n, 0, 0, clock_qubit(n_comp, t_steps), 1));

  for (int i = 1; i <= t_steps; ++i)
    for (int j = i + 1; j <= t_steps; ++j) {
      out.h_clock.add(
          proj_pair(n, clock_qubit(n_comp, i), 0, clock_qubit(n_comp, j), 1));
      ++out.clock_summands;
    }

  for (int t = 1; t <= t_steps; ++t) {
    if (cc.is_cphase_step(t)) {
      const auto& cp = std::get<CPhaseGate>(c.gate_at(t));
      out.h_prop2.add(h_qubit_term(n, n_comp, cp, t));
      out.h_prop2.add(h_time_term(n, n_comp, t_steps, t));
      out.prop2_summands += 2;
    } else {
      const auto& g = std::get<OneQubitGate>(c.gate_at(t));
      out.h_prop1.add(prop_term_unary(n, n_comp, t_steps, g, t));
      ++out.prop1_summands;
    }
  }

  for (const PauliSum* comp :
       {&out.h_in, &out.h_out, &out.h_clock, &out.h_prop1, &out.h_prop2})
    if (comp->locality() > 2)
      throw Error("two-local compiler emitted a term of locality > 2");
  return out;
}

struct TwoLocalWeights {
  double j_in, j_2, j_1, j_clock;
};

/// Same sufficient-penalty recipe as the binary construction, innermost-out:
/// J_in, then J_2, J_1, J_clock. Penalty gaps: 1/(T+1) for H_in on the
/// history space, (1/L)(1 - cos(pi/(T2+1))) for the effective cphase
/// propagation, 1 - cos(pi/L) for H_prop1 blocks, and 1 for H_clock.
inline TwoLocalWeights auto_two_local_weights(const TwoLocalHamiltonian& h) {
  const double nb_out = h.h_out.norm_bound();
  const double nb_in = h.h_in.norm_bound();
  const double nb_p2 = h.h_prop2.norm_bound();
  const double nb_p1 = h.h_prop1.norm_bound();
  const double j_in = (h.steps + 1.0) * sufficient_penalty(nb_out);
  double j_2 = 1.0;
  if (h.cphase_count > 0) {
    const double gap =
        propagation_gap_closed_form(h.cphase_count) / h.interval;
    j_2 = sufficient_penalty(nb_out + j_in * nb_in) / gap;
  }
  const double j_1 =
      sufficient_penalty(nb_out + j_in * nb_in + j_2 * nb_p2) /
      propagation_gap_closed_form(h.interval - 1);
  double j_clock = 1.0;
  if (h.steps >= 2)
    j_clock =
        sufficient_penalty(nb_out + j_in * nb_in + j_2 * nb_p2 + j_1 * nb_p1);
  return {j_in, j_2, j_1, j_clock};
}

inline TwoLocalHamiltonian build_two_local_auto(const CanonicalCircuit& cc) {
  TwoLocalHamiltonian h = build_two_local(cc, 1, 1, 1, 1);
  const auto w = auto_two_local_weights(h);
  h.j_in = w.j_in;
  h.j_2 = w.j_2;
  h.j_1 = w.j_1;
  h.j_clock = w.j_clock;
  return h;
}

// ---------------------------------------------------------------------------
// History states and subspaces
// ---------------------------------------------------------------------------

enum class ClockEncoding { binary, unary };

struct HistoryState {
  VecC amplitudes;
  ClockEncoding encoding = ClockEncoding::binary;
  int comp_qubits = 0;
  int steps = 0;
};

/// Uniform superposition over t of the partial computations tensored with
/// the clock state |t> (binary) or |t-hat> (unary).
inline HistoryState build_history_state(const Circuit& c, const VecC& proof,
                                        ClockEncoding enc) {
  const int n_comp = c.qubits();
  const int t_steps = c.steps();
  VecC psi = proof_input(c, proof);

  HistoryState hs;
  hs.encoding = enc;
  hs.comp_qubits = n_comp;
  hs.steps = t_steps;
  const int n_clock = enc == ClockEncoding::binary
                          ? std::max(1, clockdetail::ceil_log2(t_steps + 1))
                          : t_steps;
  const Eigen::Index cdim = Eigen::Index(1) << n_clock;
  hs.amplitudes = VecC::Zero((Eigen::Index(1) << n_comp) * cdim);

  const double w = 1.0 / std::sqrt(t_steps + 1.0);
  for (int t = 0; t <= t_steps; ++t) {
    if (t > 0) detail::apply_gate(psi, c.gate_at(t), n_comp);
    const Eigen::Index clock_idx =
        enc == ClockEncoding::binary
            ? Eigen::Index(t)
            : static_cast<Eigen::Index>(unary_clock_bits(t, t_steps));
    for (Eigen::Index i = 0; i < psi.size(); ++i)
      hs.amplitudes(i * cdim + clock_idx) += w * psi(i);
  }
  return hs;
}

/// Span of the legal unary clock words on the T-qubit clock factor.
inline Subspace legal_clock_subspace(int t_steps) {
  MatC basis(Eigen::Index(1) << t_steps, t_steps + 1);
  for (int t = 0; t <= t_steps; ++t)
    basis.col(t) = unary_clock_state(t, t_steps);
  return Subspace(std::move(basis));
}

/// S_legal on the full N + T register; column index = i (T+1) + t.
inline Subspace legal_subspace(int n_comp, int t_steps) {
  const Eigen::Index cdim = Eigen::Index(1) << t_steps;
  const Eigen::Index comp_dim = Eigen::Index(1) << n_comp;
  MatC basis = MatC::Zero(comp_dim * cdim, comp_dim * (t_steps + 1));
  for (Eigen::Index i = 0; i < comp_dim; ++i)
    for (int t = 0; t <= t_steps; ++t)
      basis(i * cdim + static_cast<Eigen::Index>(unary_clock_bits(t, t_steps)),
            i * (t_steps + 1) + t) = 1.0;
  return Subspace(std::move(basis));
}

/// Partial computations of all 2^N initial basis states: entry t holds the
/// dense matrix U_t ... U_1.
inline std::vector<MatC> partial_products(const Circuit& c) {
  const Eigen::Index dim = Eigen::Index(1) << c.qubits();
  std::vector<MatC> prods;
  prods.reserve(static_cast<std::size_t>(c.steps()) + 1);
  MatC cur = MatC::Identity(dim, dim);
  prods.push_back(cur);
  for (int t = 1; t <= c.steps(); ++t) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      VecC v = cur.col(col);
      detail::apply_gate(v, c.gate_at(t), c.qubits());
      cur.col(col) = v;
    }
    prods.push_back(cur);
  }
  return prods;
}

/// Basis {|eta_{l,i}>} of the space with correct one-qubit-gate propagation;
/// column index = l 2^N + i. These are zero modes of H_prop1 restricted to
/// the legal clock space (the raw operator still carries transitions into
/// illegal clock words).
inline Subspace prop1_subspace(const CanonicalCircuit& cc) {
  const Circuit& c = cc.circuit();
  const int n_comp = c.qubits();
  const int t_steps = cc.steps();
  if (n_comp + t_steps > 14)
    throw PreconditionError("dense verification capped at N + T <= 14");
  const Eigen::Index comp_dim = Eigen::Index(1) << n_comp;
  const Eigen::Index cdim = Eigen::Index(1) << t_steps;
  const int l_count = cc.cphase_count() + 1;
  const int interval = cc.interval();

  const auto prods = partial_products(c);
  MatC basis = MatC::Zero(comp_dim * cdim, l_count * comp_dim);
  const double w = 1.0 / std::sqrt(static_cast<double>(interval));
  for (int l = 0; l < l_count; ++l)
    for (int t = l * interval; t < (l + 1) * interval && t <= t_steps; ++t) {
      const Eigen::Index clock_idx =
          static_cast<Eigen::Index>(unary_clock_bits(t, t_steps));
      const MatC& p = prods[static_cast<std::size_t>(t)];
      for (Eigen::Index i = 0; i < comp_dim; ++i)
        for (Eigen::Index row = 0; row < comp_dim; ++row)
          basis(row * cdim + clock_idx, Eigen::Index(l) * comp_dim + i) +=
              w * p(row, i);
    }
  return Subspace(std::move(basis));
}

/// History-state basis of S_prop (all steps propagate correctly).
inline Subspace prop_subspace(const Circuit& c) {
  const int n_comp = c.qubits();
  const int t_steps = c.steps();
  if (n_comp + t_steps > 14)
    throw PreconditionError("dense verification capped at N + T <= 14");
  const Eigen::Index comp_dim = Eigen::Index(1) << n_comp;
  const Eigen::Index cdim = Eigen::Index(1) << t_steps;
  const auto prods = partial_products(c);
  MatC basis = MatC::Zero(comp_dim * cdim, comp_dim);
  const double w = 1.0 / std::sqrt(t_steps + 1.0);
  for (int t = 0; t <= t_steps; ++t) {
    const Eigen::Index clock_idx =
        static_cast<Eigen::Index>(unary_clock_bits(t, t_steps));
    for (Eigen::Index i = 0; i < comp_dim; ++i)
      for (Eigen::Index row = 0; row < comp_dim; ++row)
        basis(row * cdim + clock_idx, i) +=
            w * prods[static_cast<std::size_t>(t)](row, i);
  }
  return Subspace(std::move(basis));
}

// ---------------------------------------------------------------------------
// Identity checks from the two-local analysis
// ---------------------------------------------------------------------------

/// Sum-of-projectors form of the time-check term restricted to the legal
/// clock space, as a (T+1) x (T+1) matrix in the clock-value basis.
inline MatC time_check_projector_form(int t, int t_steps) {
  const int d = t_steps + 1;
  auto e = [&](int a) {
    VecC v = VecC::Zero(d);
    v(a) = 1.0;
    return v;
  };
  auto outer = [](const VecC& v) { return MatC(v * v.adjoint()); };
  MatC m = MatC::Zero(d, d);
  m += 2.0 * outer(e(t) + e(t + 1));
  m += 2.0 * outer(e(t + 1) + e(t + 2));
  m += outer(e(t) - e(t + 1));
  m += outer(e(t + 1) - e(t + 2));
  m -= 2.0 * outer(e(t) - e(t + 2));
  m += 2.0 * outer(e(t - 3) + e(t - 2));
  m += 2.0 * outer(e(t - 2) + e(t - 1));
  m += outer(e(t - 3) - e(t - 2));
  m += outer(e(t - 2) - e(t - 1));
  m -= 2.0 * outer(e(t - 3) - e(t - 1));
  return m / 8.0;
}

struct RestrictionIdentityReport {
  double tol = 1e-9;
  double time_projector_max_diff = 0;   // projector-form identity per cphase step
  double clock_projector_max_diff = 0;  // I ⊗ |t-hat><t-hat| on S_prop1
  double effective_prop_max_diff = 0;   // H' against its history-basis form
  double slack_min_eigenvalue = 0;      // H_prop2|_{S_prop1} - H' >= 0
  bool time_reflection_symmetric = true;
  std::string detail;

  bool ok() const {
    return time_projector_max_diff <= tol && clock_projector_max_diff <= tol &&
           effective_prop_max_diff <= tol && slack_min_eigenvalue >= -tol &&
           time_reflection_symmetric;
  }
};

/// Certifies, entrywise, the three restriction identities behind the
/// two-local soundness argument.
inline RestrictionIdentityReport verify_restriction_identities(
    const CanonicalCircuit& cc) {
  using namespace clockdetail;
  RestrictionIdentityReport rep;
  const Circuit& c = cc.circuit();
  const int n_comp = c.qubits();
  const int t_steps = cc.steps();
  const int t2 = cc.cphase_count();
  const int interval = cc.interval();
  if (n_comp + t_steps > 14)
    throw PreconditionError("dense verification capped at N + T <= 14");
  if (t2 == 0) {
    rep.detail = "no cphase steps; nothing to check";
    return rep;
  }
  const int n = n_comp + t_steps;
  const Eigen::Index comp_dim = Eigen::Index(1) << n_comp;

  const Subspace legal = legal_subspace(n_comp, t_steps);
  const Subspace prop1 = prop1_subspace(cc);
  const MatC identity_comp = MatC::Identity(comp_dim, comp_dim);

  // (a) time-check terms equal their sum-of-projectors form on S_legal
  for (int l = 1; l <= t2; ++l) {
    const int t = l * interval;
    const MatC lhs = restrict_to(realize(h_time_term(n, n_comp, t_steps, t)), legal);
    const MatC rhs = kron(identity_comp, time_check_projector_form(t, t_steps));
    const double diff = (lhs - rhs).cwiseAbs().maxCoeff();
    rep.time_projector_max_diff = std::max(rep.time_projector_max_diff, diff);

    // reflection symmetry around t - 1/2 of the projector form
    const MatC m = time_check_projector_form(t, t_steps);
    double sym = 0;
    for (int a = t - 3; a <= t + 2; ++a)
      for (int b = t - 3; b <= t + 2; ++b)
        sym = std::max(sym, std::abs(m(a, b) - m(2 * t - 1 - a, 2 * t - 1 - b)));
    if (sym > rep.tol) rep.time_reflection_symmetric = false;
  }

  // clock projector on S_prop1: I ⊗ |t-hat><t-hat| = (1/L) sum_i |eta_{l,i}><eta_{l,i}|
  const Eigen::Index p1dim = prop1.dim();
  for (int l = 1; l <= t2; ++l) {
    const int t = l * interval;
    const Eigen::Index cdim = Eigen::Index(1) << t_steps;
    const Eigen::Index clock_idx =
        static_cast<Eigen::Index>(unary_clock_bits(t, t_steps));
    OperatorMatrix proj(comp_dim * cdim, comp_dim * cdim);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index i = 0; i < comp_dim; ++i)
      trip.emplace_back(i * cdim + clock_idx, i * cdim + clock_idx, 1.0);
    proj.setFromTriplets(trip.begin(), trip.end());
    const MatC lhs = restrict_to(proj, prop1);
    MatC rhs = MatC::Zero(p1dim, p1dim);
    for (Eigen::Index i = 0; i < comp_dim; ++i) {
      const Eigen::Index col = Eigen::Index(l) * comp_dim + i;
      rhs(col, col) = 1.0 / interval;
    }
    rep.clock_projector_max_diff = std::max(
        rep.clock_projector_max_diff, (lhs - rhs).cwiseAbs().maxCoeff());
  }

  // (b) effective cphase propagation H' on S_prop1 equals the history-basis
  // quadratic form with 2^N identical tridiagonal blocks
  MatC hprime_full =
      MatC::Zero(comp_dim * (Eigen::Index(1) << t_steps),
                 comp_dim * (Eigen::Index(1) << t_steps));
  for (int l = 1; l <= t2; ++l) {
    const int t = l * interval;
    const auto& cp = std::get<CPhaseGate>(c.gate_at(t));
    MatC cphi = MatC::Identity(comp_dim, comp_dim);
    const Eigen::Index fmask = Eigen::Index(1) << (n_comp - 1 - cp.first);
    const Eigen::Index smask = Eigen::Index(1) << (n_comp - 1 - cp.second);
    for (Eigen::Index i = 0; i < comp_dim; ++i)
      if ((i & fmask) && (i & smask)) cphi(i, i) = -1.0;
    const VecC cur = unary_clock_state(t, t_steps);
    const VecC prev = unary_clock_state(t - 1, t_steps);
    hprime_full += 0.5 * (kron(identity_comp, MatC(cur * cur.adjoint())) +
                          kron(identity_comp, MatC(prev * prev.adjoint())) -
                          kron(cphi, MatC(cur * prev.adjoint())) -
                          kron(cphi.adjoint(), MatC(prev * cur.adjoint())));
  }
  const MatC hprime = prop1.basis().adjoint() * hprime_full * prop1.basis();
  MatC expected = kron(MatC((1.0 / interval) *
                            propagation_block(t2).cast<cplx>()),
                       identity_comp);
  rep.effective_prop_max_diff = (hprime - expected).cwiseAbs().maxCoeff();

  // (c) H' is dominated by H_prop2 on S_prop1
  PauliSum h_prop2(n);
  for (int l = 1; l <= t2; ++l) {
    const int t = l * interval;
    const auto& cp = std::get<CPhaseGate>(c.gate_at(t));
    h_prop2.add(h_qubit_term(n, n_comp, cp, t));
    h_prop2.add(h_time_term(n, n_comp, t_steps, t));
  }
  const MatC slack = restrict_to(realize(h_prop2), prop1) - hprime;
  Eigen::SelfAdjointEigenSolver<MatC> es(slack, Eigen::EigenvaluesOnly);
  rep.slack_min_eigenvalue = es.eigenvalues().minCoeff();

  if (!rep.ok()) {
    std::ostringstream os;
    os << "restriction identity failure:"
       << " time_projector=" << rep.time_projector_max_diff
       << " clock_projector=" << rep.clock_projector_max_diff
       << " effective_prop=" << rep.effective_prop_max_diff
       << " slack_min=" << rep.slack_min_eigenvalue;
    rep.detail = os.str();
  }
  return rep;
}

/// Change-of-basis check: W^dag H_prop W for the binary construction is
/// block-diagonal with 2^N identical propagation blocks.
struct PropagationBlockCheck {
  double max_diff = 0;
  bool ok = false;
};

inline PropagationBlockCheck verify_propagation_blocks(const Circuit& c,
                                                       double tol = 1e-10) {
  const LogLocalHamiltonian h = build_log_local(c, 1.0, 1.0);
  const Eigen::Index comp_dim = Eigen::Index(1) << h.comp_qubits;
  const Eigen::Index cdim = Eigen::Index(1) << h.clock_qubits;
  if (comp_dim * cdim > dense_limit())
    throw PreconditionError("change-of-basis check above the dense limit");
  const auto prods = partial_products(c);

  MatC w = MatC::Zero(comp_dim * cdim, comp_dim * cdim);
  for (Eigen::Index t = 0; t < cdim; ++t) {
    const MatC& p = t <= h.steps ? prods[static_cast<std::size_t>(t)]
                                 : MatC(MatC::Identity(comp_dim, comp_dim));
    for (Eigen::Index i = 0; i < comp_dim; ++i)
      for (Eigen::Index j = 0; j < comp_dim; ++j)
        w(i * cdim + t, j * cdim + t) = p(i, j);
  }
  MatC block = MatC::Zero(cdim, cdim);
  block.topLeftCorner(h.steps + 1, h.steps + 1) =
      propagation_block(h.steps).cast<cplx>();
  const MatC expected = kron(MatC::Identity(comp_dim, comp_dim), block);
  const MatC got = w.adjoint() * MatC(realize(h.h_prop)) * w;

  PropagationBlockCheck chk;
  chk.max_diff = (got - expected).cwiseAbs().maxCoeff();
  chk.ok = chk.max_diff <= tol;
  return chk;
}

}  // namespace hamforge
