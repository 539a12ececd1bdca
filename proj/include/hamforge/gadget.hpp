#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hamforge/pauli.hpp"
#include "hamforge/perturbation.hpp"

namespace hamforge {

namespace gadgetdetail {

inline void require_psd(const Eigen::Matrix2cd& b, const char* name) {
  if (!is_hermitian(MatC(b), 1e-10))
    throw PreconditionError(std::string(name) + " is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(b, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw PreconditionError(std::string(name) +
                            " is not positive semidefinite");
}

/// -(delta^-3 / 4) (Z Z + Z Z + Z Z - 3 I) on one gadget triple; eigenvalue
/// 0 on {|000>, |111>} and delta^-3 on the mixed configurations.
inline PauliSum penalty_triple(int n, int g0, double delta_pow3_inv) {
  PauliSum h(n);
  const double w = -delta_pow3_inv / 4.0;
  h.add(w, PauliString(n, {{g0, Axis::Z}, {g0 + 1, Axis::Z}}));
  h.add(w, PauliString(n, {{g0, Axis::Z}, {g0 + 2, Axis::Z}}));
  h.add(w, PauliString(n, {{g0 + 1, Axis::Z}, {g0 + 2, Axis::Z}}));
  h.add(-3.0 * w, PauliString::identity(n));
  return h;
}

/// B ⊗ sigma^x on a (system qubit, gadget qubit) pair.
inline PauliSum coupling(int n, const Eigen::Matrix2cd& b, int target,
                         int gadget_qubit) {
  return embed_hermitian(n, {target, gadget_qubit},
                         kron(MatC(b), axis_matrix(Axis::X)));
}

}  // namespace gadgetdetail

/// One application of the three-qubit construction: Y - 6 B1 B2 B3 realized
/// through three auxiliary qubits.
struct GadgetInstance {
  int system_qubits = 0;
  PauliSum y{0};                        // 2-local on the system
  std::array<Eigen::Matrix2cd, 3> b;    // positive semidefinite one-qubit terms
  std::array<int, 3> targets{};         // system qubit each B acts on
  double delta = 0;

  GadgetInstance(int n, PauliSum y_in, std::array<Eigen::Matrix2cd, 3> b_in,
                 std::array<int, 3> targets_in, double delta_in)
      : system_qubits(n), y(std::move(y_in)), b(b_in), targets(targets_in),
        delta(delta_in) {
    if (delta <= 0 || delta >= 1)
      throw PreconditionError("delta must lie in (0, 1)");
    if (y.qubits() != n) throw PreconditionError("Y register mismatch");
    if (y.locality() > 2) throw PreconditionError("Y must be 2-local");
    for (int i = 0; i < 3; ++i) {
      gadgetdetail::require_psd(b[static_cast<std::size_t>(i)], "B");
      if (targets[static_cast<std::size_t>(i)] < 0 ||
          targets[static_cast<std::size_t>(i)] >= n)
        throw PreconditionError("B target out of range");
    }
  }
};

struct GadgetOperators {
  PauliSum h{0};  // unperturbed penalty on system + 3 qubits
  PauliSum v{0};  // perturbation
  MatC h_eff;     // on system ⊗ effective qubit, index = s * 2 + e
};

/// Emits H, V (both 2-local) and the effective Hamiltonian
/// Y ⊗ I - 6 B1 B2 B3 ⊗ sigma^x_eff on the (|000>, |111>) qubit.
inline GadgetOperators three_qubit_gadget(const GadgetInstance& g) {
  using namespace gadgetdetail;
  const int n_sys = g.system_qubits;
  const int n = n_sys + 3;
  const double d3 = 1.0 / (g.delta * g.delta * g.delta);
  const double d2 = 1.0 / (g.delta * g.delta);
  const double d1 = 1.0 / g.delta;

  GadgetOperators out;
  out.h = penalty_triple(n, n_sys, d3);

  PauliSum v = g.y.widened(n);
  for (int i = 0; i < 3; ++i) {
    const auto& bi = g.b[static_cast<std::size_t>(i)];
    const int ti = g.targets[static_cast<std::size_t>(i)];
    v.add_scaled(d1, embed_hermitian(n, {ti}, MatC(bi * bi)));
    v.add_scaled(-d2, coupling(n, bi, ti, n_sys + i));
  }
  out.v = std::move(v);

  const Eigen::Index sdim = Eigen::Index(1) << n_sys;
  MatC prod = MatC::Identity(sdim, sdim);
  for (int i = 0; i < 3; ++i)
    prod = prod * MatC(realize_dense(embed_hermitian(
               n_sys, {g.targets[static_cast<std::size_t>(i)]},
               MatC(g.b[static_cast<std::size_t>(i)]))));
  if (!is_hermitian(prod, 1e-9 * std::max(1.0, prod.cwiseAbs().maxCoeff())))
    throw PreconditionError("B1 B2 B3 is not Hermitian (factors must commute)");
  const MatC y_dense = realize_dense(g.y);
  MatC h_eff = MatC::Zero(sdim * 2, sdim * 2);
  for (Eigen::Index s = 0; s < sdim; ++s)
    for (Eigen::Index sp = 0; sp < sdim; ++sp)
      for (int e = 0; e < 2; ++e) {
        h_eff(s * 2 + e, sp * 2 + e) += y_dense(s, sp);
        h_eff(s * 2 + e, sp * 2 + (1 - e)) -= 6.0 * prod(s, sp);
      }
  out.h_eff = std::move(h_eff);
  return out;
}

// ---------------------------------------------------------------------------
// Triple decomposition of a 3-local Hamiltonian
// ---------------------------------------------------------------------------

struct GadgetTriple {
  std::array<Eigen::Matrix2cd, 3> b;
  std::array<int, 3> targets;
};

struct GadgetDecomposition {
  int system_qubits = 0;
  double c_r = 1.0;
  PauliSum y{0};                     // 2-local remainder, on the system
  std::vector<GadgetTriple> triples;
  int scaling_n = 2;                 // the n used in the n^3 / n^6 / n^9 scalings
  double max_b_norm = 0;

  int gadget_count() const { return static_cast<int>(triples.size()); }
};

/// H3 = c_r (Y - 6 sum_m B_m1 B_m2 B_m3) with every B_mi >= n^-3 I. The
/// coefficient recipe is
///   B_m1 = (2/n^3) I + n^6 c_m sigma^alpha,
///   B_m2 = (2/n^3) I + (1/n^3) sigma^beta,
///   B_m3 = (2/n^3) I + (1/n^3) sigma^gamma,
/// with c_r a power of two large enough that |c_m| <= 1/n^9.
inline GadgetDecomposition decompose_3local(const PauliSum& h3) {
  if (h3.locality() > 3)
    throw PreconditionError("input locality exceeds 3");
  const int n_sys = h3.qubits();
  const int ns = std::max(n_sys, 2);
  const double n3 = std::pow(ns, 3), n6 = std::pow(ns, 6),
               n9 = std::pow(ns, 9);

  GadgetDecomposition out;
  out.system_qubits = n_sys;
  out.scaling_n = ns;
  out.y = PauliSum(n_sys);

  std::vector<PauliTerm> cubic;
  PauliSum low(n_sys);
  double max_abs = 0;
  for (const auto& t : h3.terms()) {
    if (t.string.locality() == 3) {
      cubic.push_back(t);
      max_abs = std::max(max_abs, std::abs(t.coeff));
    } else {
      low.add(t.coeff, t.string);
    }
  }
  out.c_r = 1.0;
  while (out.c_r < 6.0 * n9 * max_abs) out.c_r *= 2.0;

  out.y.add_scaled(1.0 / out.c_r, low);
  for (const auto& term : cubic) {
    const auto& f = term.string.factors();
    const double cm = -term.coeff / (6.0 * out.c_r);

    GadgetTriple triple;
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    std::array<double, 3> a_coef{2.0 / n3, 2.0 / n3, 2.0 / n3};
    std::array<double, 3> b_coef{n6 * cm, 1.0 / n3, 1.0 / n3};
    for (int i = 0; i < 3; ++i) {
      triple.targets[static_cast<std::size_t>(i)] =
          f[static_cast<std::size_t>(i)].first;
      triple.b[static_cast<std::size_t>(i)] =
          a_coef[static_cast<std::size_t>(i)] * id +
          b_coef[static_cast<std::size_t>(i)] *
              axis_matrix(f[static_cast<std::size_t>(i)].second);
      out.max_b_norm = std::max(
          out.max_b_norm,
          hermitian_norm(MatC(triple.b[static_cast<std::size_t>(i)])));
    }
    // cross terms of the product (everything except the full sigma sigma
    // sigma word) fold back into Y
    for (int mask = 0; mask < 7; ++mask) {
      double coeff = 6.0;
      PauliString::Factors factors;
      for (int i = 0; i < 3; ++i) {
        if (mask & (1 << i)) {
          coeff *= b_coef[static_cast<std::size_t>(i)];
          factors.push_back(f[static_cast<std::size_t>(i)]);
        } else {
          coeff *= a_coef[static_cast<std::size_t>(i)];
        }
      }
      out.y.add(coeff, PauliString(n_sys, std::move(factors)));
    }
    out.triples.push_back(std::move(triple));
  }
  return out;
}

/// c_r (Y - 6 sum_m B_m1 B_m2 B_m3) as a PauliSum on the system register.
inline PauliSum reconstruct_decomposition(const GadgetDecomposition& dec) {
  const int n_sys = dec.system_qubits;
  PauliSum out = dec.y.scaled(dec.c_r);
  for (const auto& triple : dec.triples) {
    // expand the commuting one-qubit product symbolically
    std::array<PauliSum, 3> factors{PauliSum(n_sys), PauliSum(n_sys),
                                    PauliSum(n_sys)};
    for (int i = 0; i < 3; ++i)
      factors[static_cast<std::size_t>(i)] = embed_hermitian(
          n_sys, {triple.targets[static_cast<std::size_t>(i)]},
          MatC(triple.b[static_cast<std::size_t>(i)]));
    PauliSum prod = factors[0];
    prod = mul_disjoint(prod, factors[1]);
    prod = mul_disjoint(prod, factors[2]);
    out.add_scaled(-6.0 * dec.c_r, prod);
  }
  return out;
}

/// All-plus effective sector of the decomposition, equal to realize(H3)/c_r.
inline MatC all_plus_sector(const GadgetDecomposition& dec) {
  const Eigen::Index sdim = Eigen::Index(1) << dec.system_qubits;
  MatC m = realize_dense(dec.y);
  for (const auto& triple : dec.triples) {
    MatC prod = MatC::Identity(sdim, sdim);
    for (int i = 0; i < 3; ++i)
      prod = prod * realize_dense(embed_hermitian(
                 dec.system_qubits,
                 {triple.targets[static_cast<std::size_t>(i)]},
                 MatC(triple.b[static_cast<std::size_t>(i)])));
    m -= 6.0 * prod;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Full 3-local -> 2-local reduction
// ---------------------------------------------------------------------------

struct ReductionOutput {
  PauliSum h2{0};             // c_r (H + V) on n + 3M qubits
  PauliSum h_unperturbed{0};  // H (unscaled)
  PauliSum v_perturbation{0}; // V (unscaled)
  GadgetDecomposition decomposition;
  double delta = 0;
  int qubits = 0;             // n + 3M

  std::string report() const {
    std::ostringstream os;
    os.precision(12);
    os << "gadget-reduce c_r " << decomposition.c_r << " M "
       << decomposition.gadget_count() << " delta " << delta << " qubits "
       << qubits << " terms " << h2.size();
    return os.str();
  }
};

/// Replace every strictly 3-local term by a three-qubit gadget; the result
/// is 2-local on n + 3M qubits.
inline ReductionOutput reduce_3to2(const PauliSum& h3, double delta) {
  using namespace gadgetdetail;
  if (delta <= 0 || delta >= 1)
    throw PreconditionError("delta must lie in (0, 1)");
  GadgetDecomposition dec = decompose_3local(h3);
  const int n_sys = dec.system_qubits;
  const int m_count = dec.gadget_count();
  const int n = n_sys + 3 * m_count;
  const double d3 = 1.0 / (delta * delta * delta);
  const double d2 = 1.0 / (delta * delta);
  const double d1 = 1.0 / delta;

  ReductionOutput out;
  out.delta = delta;
  out.qubits = n;
  out.h_unperturbed = PauliSum(n);
  out.v_perturbation = dec.y.widened(n);
  for (int m = 0; m < m_count; ++m) {
    const auto& triple = dec.triples[static_cast<std::size_t>(m)];
    const int g0 = n_sys + 3 * m;
    out.h_unperturbed.add(penalty_triple(n, g0, d3));
    for (int i = 0; i < 3; ++i) {
      const auto& bi = triple.b[static_cast<std::size_t>(i)];
      const int ti = triple.targets[static_cast<std::size_t>(i)];
      out.v_perturbation.add_scaled(d1,
                                    embed_hermitian(n, {ti}, MatC(bi * bi)));
      out.v_perturbation.add_scaled(-d2, coupling(n, bi, ti, g0 + i));
    }
  }
  out.h2 = PauliSum(n);
  out.h2.add_scaled(dec.c_r, out.h_unperturbed);
  out.h2.add_scaled(dec.c_r, out.v_perturbation);
  out.decomposition = std::move(dec);
  if (out.h2.locality() > 2)
    throw Error("reduction emitted a term of locality > 2");
  return out;
}

/// Columns of the gadget ground sector: |s> ⊗ (each triple |000> or |111>),
/// column index = s * 2^M + e.
inline MatC gadget_minus_basis(int n_sys, int m_count) {
  const Eigen::Index sdim = Eigen::Index(1) << n_sys;
  const Eigen::Index edim = Eigen::Index(1) << m_count;
  const Eigen::Index full = Eigen::Index(1) << (n_sys + 3 * m_count);
  MatC basis = MatC::Zero(full, sdim * edim);
  for (Eigen::Index s = 0; s < sdim; ++s)
    for (Eigen::Index e = 0; e < edim; ++e) {
      std::uint64_t gadget_bits = 0;
      for (int m = 0; m < m_count; ++m)
        if ((e >> (m_count - 1 - m)) & 1)
          gadget_bits |= std::uint64_t(7) << (3 * (m_count - 1 - m));
      basis(s * (Eigen::Index(1) << (3 * m_count)) +
                static_cast<Eigen::Index>(gadget_bits),
            s * edim + e) = 1.0;
    }
  return basis;
}

/// H_eff = Y ⊗ I - 6 sum_m B_m1 B_m2 B_m3 ⊗ sigma^x on effective qubit m;
/// index = s * 2^M + e, gadget m toggling bit m of e (most significant
/// first).
inline MatC multi_gadget_h_eff(const GadgetDecomposition& dec) {
  const int m_count = dec.gadget_count();
  const Eigen::Index sdim = Eigen::Index(1) << dec.system_qubits;
  const Eigen::Index edim = Eigen::Index(1) << m_count;
  const MatC y_dense = realize_dense(dec.y);
  MatC h_eff = MatC::Zero(sdim * edim, sdim * edim);
  for (Eigen::Index e = 0; e < edim; ++e)
    for (Eigen::Index s = 0; s < sdim; ++s)
      for (Eigen::Index sp = 0; sp < sdim; ++sp)
        h_eff(s * edim + e, sp * edim + e) += y_dense(s, sp);
  for (int m = 0; m < m_count; ++m) {
    const auto& triple = dec.triples[static_cast<std::size_t>(m)];
    MatC prod = MatC::Identity(sdim, sdim);
    for (int i = 0; i < 3; ++i)
      prod = prod * realize_dense(embed_hermitian(
                 dec.system_qubits,
                 {triple.targets[static_cast<std::size_t>(i)]},
                 MatC(triple.b[static_cast<std::size_t>(i)])));
    const Eigen::Index flip = Eigen::Index(1) << (m_count - 1 - m);
    for (Eigen::Index e = 0; e < edim; ++e)
      for (Eigen::Index s = 0; s < sdim; ++s)
        for (Eigen::Index sp = 0; sp < sdim; ++sp)
          h_eff(s * edim + e, sp * edim + (e ^ flip)) -= 6.0 * prod(s, sp);
  }
  return h_eff;
}

/// Theorem-3 context for a reduction: split at Delta/2 with the canonical
/// gadget-sector bases.
inline SelfEnergyContext reduction_context(const ReductionOutput& red) {
  const int n_sys = red.decomposition.system_qubits;
  const int m_count = red.decomposition.gadget_count();
  const double d3 = 1.0 / (red.delta * red.delta * red.delta);
  const OperatorMatrix h = realize(red.h_unperturbed);
  const MatC minus = gadget_minus_basis(n_sys, m_count);

  // complement: computational basis states with at least one mixed triple
  const Eigen::Index full = Eigen::Index(1) << (n_sys + 3 * m_count);
  std::vector<Eigen::Index> plus_cols;
  for (Eigen::Index idx = 0; idx < full; ++idx) {
    bool mixed = false;
    for (int m = 0; m < m_count && !mixed; ++m) {
      const auto bits = (idx >> (3 * (m_count - 1 - m))) & 7;
      if (bits != 0 && bits != 7) mixed = true;
    }
    if (mixed) plus_cols.push_back(idx);
  }
  MatC plus = MatC::Zero(full, static_cast<Eigen::Index>(plus_cols.size()));
  for (std::size_t i = 0; i < plus_cols.size(); ++i)
    plus(plus_cols[i], static_cast<Eigen::Index>(i)) = 1.0;

  BlockSplit split = block_split_with_basis(h, d3 / 2.0, minus, plus);
  return make_context(std::move(split), realize(red.v_perturbation));
}

struct GadgetVerification {
  double lambda_h3 = 0;
  double lambda_h2 = 0;
  double difference = 0;
  double c_r = 1;
  int gadget_count = 0;
  double delta = 0;
  double reconstruction_residual = 0;
  Theorem3Report theorem3;
  bool bound_ok = false;  // |lambda(H2) - lambda(H3)| <= c_r * eps_measured
};

/// Spectral closeness certificate for a 3->2 reduction. The H2 argument is
/// checked against a fresh reduction of H3 at the same delta.
inline GadgetVerification verify_reduction(const PauliSum& h3,
                                           const PauliSum& h2, double delta) {
  ReductionOutput red = reduce_3to2(h3, delta);
  if (red.qubits > 12)
    throw PreconditionError("dense verification capped at n + 3M <= 12");
  if (max_term_difference(red.h2, h2) > 1e-9 * std::max(1.0, red.h2.norm_bound()))
    throw PreconditionError("H2 does not match the reduction of H3");

  GadgetVerification ver;
  ver.c_r = red.decomposition.c_r;
  ver.gadget_count = red.decomposition.gadget_count();
  ver.delta = delta;
  ver.lambda_h3 = eigen_low(realize(h3), 1).eigenvalues[0];
  // spectrum of the unscaled H + V, rescaled by c_r, sidesteps the
  // precision loss of diagonalizing the c_r-times-larger H2 directly
  PauliSum h_tilde = red.h_unperturbed;
  h_tilde.add(red.v_perturbation);
  ver.lambda_h2 = ver.c_r * eigen_low(realize(h_tilde), 1).eigenvalues[0];
  ver.difference = std::abs(ver.lambda_h2 - ver.lambda_h3);
  ver.reconstruction_residual =
      max_term_difference(reconstruct_decomposition(red.decomposition), h3);

  if (ver.gadget_count > 0) {
    SelfEnergyContext ctx = reduction_context(red);
    const MatC h_eff = multi_gadget_h_eff(red.decomposition);
    const double norm_eff = hermitian_norm(h_eff);
    const double eps_window = std::max(norm_eff, delta);
    ver.theorem3 = effective_hamiltonian_check(ctx, h_eff, -norm_eff,
                                               norm_eff, eps_window);
    ver.bound_ok =
        ver.difference <= ver.c_r * ver.theorem3.eps_measured + 1e-9;
  } else {
    ver.bound_ok = ver.difference <= 1e-9;
  }
  return ver;
}

}  // namespace hamforge
