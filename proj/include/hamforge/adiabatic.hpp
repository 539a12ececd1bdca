#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hamforge/gadget.hpp"
#include "hamforge/spectral.hpp"

namespace hamforge {

/// Time-dependent Hamiltonian H(s) = A + s B + s^2 C on s in [0, 1].
struct HamiltonianPath {
  int degree = 1;  // 1 or 2; degree-1 paths keep C empty
  PauliSum a{0}, b{0}, c{0};

  HamiltonianPath() = default;
  HamiltonianPath(PauliSum a_in, PauliSum b_in)
      : degree(1), a(std::move(a_in)), b(std::move(b_in)),
        c(PauliSum(a.qubits())) {
    validate();
  }
  HamiltonianPath(PauliSum a_in, PauliSum b_in, PauliSum c_in)
      : degree(c_in.empty() ? 1 : 2), a(std::move(a_in)), b(std::move(b_in)),
        c(std::move(c_in)) {
    validate();
  }

  int qubits() const { return a.qubits(); }

  PauliSum at(double s) const {
    PauliSum h = a;
    h.add_scaled(s, b);
    if (!c.empty()) h.add_scaled(s * s, c);
    return h;
  }

 private:
  void validate() const {
    if (b.qubits() != a.qubits() || c.qubits() != a.qubits())
      throw PreconditionError("path coefficient registers disagree");
  }
};

// ---------------------------------------------------------------------------
// Lifting a linear 3-local path to a quadratic 2-local one
// ---------------------------------------------------------------------------

struct LiftedTriple {
  Eigen::Matrix2cd b1_const, b1_lin;  // B_m1(s) = b1_const + s b1_lin
  Eigen::Matrix2cd b2, b3;            // independent of s
  std::array<int, 3> targets;
};

struct LiftedPath {
  HamiltonianPath path;  // on n + 3M qubits, degree <= 2
  int system_qubits = 0;
  double c_r = 1.0;
  double delta = 0;
  int scaling_n = 2;
  PauliSum y_const{0}, y_lin{0};  // Y(s) = y_const + s y_lin on the system
  std::vector<LiftedTriple> triples;

  int gadget_count() const { return static_cast<int>(triples.size()); }

  /// Unscaled penalty Hamiltonian H shared by every s.
  PauliSum unperturbed() const {
    const int n = path.qubits();
    PauliSum h(n);
    const double d3 = 1.0 / (delta * delta * delta);
    for (int m = 0; m < gadget_count(); ++m)
      h.add(gadgetdetail::penalty_triple(n, system_qubits + 3 * m, d3));
    return h;
  }
  /// Unscaled perturbation V(s) = H2(s)/c_r - H.
  PauliSum perturbation(double s) const {
    PauliSum v = path.at(s).scaled(1.0 / c_r);
    v.add_scaled(-1.0, unperturbed());
    return v;
  }
  /// Effective Hamiltonian at schedule point s (system ⊗ effective qubits).
  MatC h_eff(double s) const {
    GadgetDecomposition dec;
    dec.system_qubits = system_qubits;
    dec.c_r = c_r;
    dec.scaling_n = scaling_n;
    dec.y = y_const;
    dec.y.add_scaled(s, y_lin);
    for (const auto& t : triples) {
      GadgetTriple g;
      g.targets = t.targets;
      g.b[0] = t.b1_const + s * t.b1_lin;
      g.b[1] = t.b2;
      g.b[2] = t.b3;
      dec.triples.push_back(g);
    }
    return multi_gadget_h_eff(dec);
  }
};

/// Lift a degree-1 path of locality <= 3 to a degree-2 path of locality
/// <= 2 on n + 3M qubits. A single rescaling c_r is chosen from the
/// coefficient magnitudes at the endpoints (valid on all of [0,1] by
/// linearity); B_m1 varies linearly in s, B_m2 and B_m3 are constant.
inline LiftedPath gadget_lift_path(const HamiltonianPath& p3, double delta) {
  using namespace gadgetdetail;
  if (p3.degree != 1)
    throw PreconditionError("lift requires a degree-1 path");
  if (p3.a.locality() > 3 || p3.b.locality() > 3)
    throw PreconditionError("lift requires locality <= 3");
  if (delta <= 0 || delta >= 1)
    throw PreconditionError("delta must lie in (0, 1)");

  const int n_sys = p3.qubits();
  const int ns = std::max(n_sys, 2);
  const double n3 = std::pow(ns, 3), n6 = std::pow(ns, 6),
               n9 = std::pow(ns, 9);

  // strictly 3-local words with their (constant, slope) coefficients
  std::map<PauliString, std::pair<double, double>> cubic;
  PauliSum low_const(n_sys), low_lin(n_sys);
  for (const auto& t : p3.a.terms()) {
    if (t.string.locality() == 3) cubic[t.string].first += t.coeff;
    else low_const.add(t.coeff, t.string);
  }
  for (const auto& t : p3.b.terms()) {
    if (t.string.locality() == 3) cubic[t.string].second += t.coeff;
    else low_lin.add(t.coeff, t.string);
  }
  double max_abs = 0;
  for (const auto& [s, cc] : cubic)
    max_abs = std::max({max_abs, std::abs(cc.first),
                        std::abs(cc.first + cc.second)});

  LiftedPath lift;
  lift.system_qubits = n_sys;
  lift.delta = delta;
  lift.scaling_n = ns;
  lift.c_r = 1.0;
  while (lift.c_r < 6.0 * n9 * max_abs) lift.c_r *= 2.0;

  lift.y_const = low_const.scaled(1.0 / lift.c_r);
  lift.y_lin = low_lin.scaled(1.0 / lift.c_r);
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  for (const auto& [word, cc] : cubic) {
    const auto& f = word.factors();
    const double cm_const = -cc.first / (6.0 * lift.c_r);
    const double cm_lin = -cc.second / (6.0 * lift.c_r);
    LiftedTriple triple;
    for (int i = 0; i < 3; ++i)
      triple.targets[static_cast<std::size_t>(i)] =
          f[static_cast<std::size_t>(i)].first;
    triple.b1_const = (2.0 / n3) * id + n6 * cm_const * axis_matrix(f[0].second);
    triple.b1_lin = n6 * cm_lin * axis_matrix(f[0].second);
    triple.b2 = (2.0 / n3) * id + (1.0 / n3) * axis_matrix(f[1].second);
    triple.b3 = (2.0 / n3) * id + (1.0 / n3) * axis_matrix(f[2].second);

    // cross terms of B1(s) B2 B3: subsets containing the B1 word pick up a
    // linear s-dependence, everything else is constant
    std::array<double, 3> a_coef{2.0 / n3, 2.0 / n3, 2.0 / n3};
    std::array<double, 3> b_const{n6 * cm_const, 1.0 / n3, 1.0 / n3};
    for (int mask = 0; mask < 7; ++mask) {
      double coeff = 6.0;
      PauliString::Factors factors;
      for (int i = 1; i < 3; ++i) {
        if (mask & (1 << i)) {
          coeff *= b_const[static_cast<std::size_t>(i)];
          factors.push_back(f[static_cast<std::size_t>(i)]);
        } else {
          coeff *= a_coef[static_cast<std::size_t>(i)];
        }
      }
      if (mask & 1) {
        PauliString::Factors with_first = factors;
        with_first.push_back(f[0]);
        lift.y_const.add(coeff * n6 * cm_const,
                         PauliString(n_sys, with_first));
        lift.y_lin.add(coeff * n6 * cm_lin,
                       PauliString(n_sys, std::move(with_first)));
      } else {
        lift.y_const.add(coeff * a_coef[0], PauliString(n_sys, factors));
      }
    }
    lift.triples.push_back(std::move(triple));
  }

  // assemble the quadratic coefficients of c_r (H + V(s))
  const int m_count = lift.gadget_count();
  const int n = n_sys + 3 * m_count;
  const double d3 = 1.0 / (delta * delta * delta);
  const double d2 = 1.0 / (delta * delta);
  const double d1 = 1.0 / delta;
  PauliSum p_const = lift.y_const.widened(n);
  PauliSum p_lin = lift.y_lin.widened(n);
  PauliSum p_quad(n);
  for (int m = 0; m < m_count; ++m) {
    const auto& t = lift.triples[static_cast<std::size_t>(m)];
    const int g0 = n_sys + 3 * m;
    p_const.add(penalty_triple(n, g0, d3));
    const int t1 = t.targets[0], t2 = t.targets[1], t3 = t.targets[2];
    p_const.add_scaled(
        d1, embed_hermitian(n, {t1}, MatC(t.b1_const * t.b1_const)));
    p_lin.add_scaled(d1,
                     embed_hermitian(n, {t1}, MatC(t.b1_const * t.b1_lin +
                                                   t.b1_lin * t.b1_const)));
    if (t.b1_lin.cwiseAbs().maxCoeff() > 0)
      p_quad.add_scaled(d1,
                        embed_hermitian(n, {t1}, MatC(t.b1_lin * t.b1_lin)));
    p_const.add_scaled(d1, embed_hermitian(n, {t2}, MatC(t.b2 * t.b2)));
    p_const.add_scaled(d1, embed_hermitian(n, {t3}, MatC(t.b3 * t.b3)));
    p_const.add_scaled(-d2, coupling(n, t.b1_const, t1, g0));
    if (t.b1_lin.cwiseAbs().maxCoeff() > 0)
      p_lin.add_scaled(-d2, coupling(n, t.b1_lin, t1, g0));
    p_const.add_scaled(-d2, coupling(n, t.b2, t2, g0 + 1));
    p_const.add_scaled(-d2, coupling(n, t.b3, t3, g0 + 2));
  }
  lift.path = HamiltonianPath(p_const.scaled(lift.c_r),
                              p_lin.scaled(lift.c_r),
                              p_quad.scaled(lift.c_r));
  if (lift.path.a.locality() > 2 || lift.path.b.locality() > 2 ||
      lift.path.c.locality() > 2)
    throw Error("lifted path emitted a term of locality > 2");
  return lift;
}

// ---------------------------------------------------------------------------
// Gap sweeps and Schrodinger evolution
// ---------------------------------------------------------------------------

struct GapSweepResult {
  std::vector<double> schedule;  // grid points in [0, 1]
  std::vector<double> gaps;      // 0 where flagged
  std::vector<bool> degenerate;  // flagged grid points
  double min_gap = 0;
  double argmin = 0;
};

/// Spectral gap of H(s) on a uniform grid including both endpoints;
/// degenerate points are flagged and skipped in the minimum.
inline GapSweepResult gap_sweep(const HamiltonianPath& p, int grid = 101) {
  if (grid < 2) throw PreconditionError("gap sweep needs at least 2 points");
  GapSweepResult out;
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double s = static_cast<double>(i) / (grid - 1);
    out.schedule.push_back(s);
    try {
      const double g = spectral_gap(realize(p.at(s)));
      out.gaps.push_back(g);
      out.degenerate.push_back(false);
      if (g < out.min_gap) {
        out.min_gap = g;
        out.argmin = s;
      }
    } catch (const Error&) {
      out.gaps.push_back(0);
      out.degenerate.push_back(true);
    }
  }
  if (!std::isfinite(out.min_gap))
    throw Error("every grid point is degenerate");
  return out;
}

struct EvolutionResult {
  VecC final_state;
  double fidelity = 0;  // squared overlap with the ground space of H(1)
  double min_gap = 0;   // minimum gap seen at the step midpoints
  int steps = 0;
};

/// Piecewise-constant midpoint propagator: each slice applies the exact
/// unitary exp(-i H(s_mid) dt).
inline EvolutionResult evolve(
    const HamiltonianPath& p, double total_time, int steps, const VecC& initial,
    const std::function<void(int, double, const VecC&)>& observer = {}) {
  if (steps < 1) throw PreconditionError("evolution needs at least one step");
  if (std::abs(initial.norm() - 1.0) > 1e-10)
    throw PreconditionError("initial state is not normalized");
  const Eigen::Index dim = Eigen::Index(1) << p.qubits();
  if (initial.size() != dim)
    throw PreconditionError("initial state dimension mismatch");

  EvolutionResult out;
  out.steps = steps;
  out.min_gap = std::numeric_limits<double>::infinity();
  VecC psi = initial;
  const double dt = total_time / steps;
  for (int k = 0; k < steps && total_time > 0; ++k) {
    const double s_mid = (k + 0.5) * dt / total_time;
    Eigen::SelfAdjointEigenSolver<MatC> es{realize_dense(p.at(s_mid))};
    const VecR& evs = es.eigenvalues();
    for (Eigen::Index i = 1; i < evs.size(); ++i)
      if (evs(i) > evs(0) + 1e-9) {
        out.min_gap = std::min(out.min_gap, evs(i) - evs(0));
        break;
      }
    VecC phases(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      phases(i) = std::polar(1.0, -evs(i) * dt);
    psi = es.eigenvectors() *
          (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi));
    if (observer) observer(k, s_mid, psi);
  }
  if (!std::isfinite(out.min_gap)) out.min_gap = 0;

  Eigen::SelfAdjointEigenSolver<MatC> fin{realize_dense(p.at(1.0))};
  const double ground = fin.eigenvalues()(0);
  double fid = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (fin.eigenvalues()(i) <= ground + 1e-9)
      fid += std::norm(fin.eigenvectors().col(i).dot(psi));
  out.fidelity = fid;
  out.final_state = std::move(psi);
  return out;
}

// ---------------------------------------------------------------------------
// Groundstate fidelity certificate
// ---------------------------------------------------------------------------

struct FidelityCertificate {
  double bound = 0;    // 1 - 2||V||^2/(lambda_+ - l_eff1 - eps)^2 - 4 eps/gap
  double overlap = 0;  // measured |<v-tilde | v_eff>|
  bool ok = false;     // overlap >= bound - 1e-9
  double v_norm = 0;
  double lambda_plus = 0;
  double eff_ground = 0;
  double eff_gap = 0;
};

/// Evaluates the groundstate-overlap bound and checks it against the dense
/// overlap of the perturbed ground state with the effective one.
inline FidelityCertificate groundstate_fidelity_bound(
    const SelfEnergyContext& ctx, const MatC& h_eff, double eps) {
  if (h_eff.rows() != ctx.dim_minus())
    throw PreconditionError("H_eff dimension does not match the minus block");
  Eigen::SelfAdjointEigenSolver<MatC> eff(h_eff);
  if (h_eff.rows() < 2)
    throw PreconditionError("H_eff has no spectral gap to certify");
  const double l1 = eff.eigenvalues()(0);
  const double l2 = eff.eigenvalues()(1);
  if (l2 - l1 <= 1e-12)
    throw PreconditionError("H_eff ground space is degenerate");

  FidelityCertificate cert;
  cert.v_norm = ctx.v_norm;
  cert.lambda_plus = ctx.split.lambda_plus;
  cert.eff_ground = l1;
  cert.eff_gap = l2 - l1;
  const double denom = cert.lambda_plus - l1 - eps;
  cert.bound =
      1.0 - 2.0 * cert.v_norm * cert.v_norm / (denom * denom) -
      4.0 * eps / cert.eff_gap;

  Eigen::SelfAdjointEigenSolver<MatC> pert(ctx.h_tilde);
  const VecC v_tilde = pert.eigenvectors().col(0);
  const VecC v_eff_full = ctx.split.basis_minus * eff.eigenvectors().col(0);
  cert.overlap = std::abs(v_tilde.dot(v_eff_full));
  cert.ok = cert.overlap >= cert.bound - 1e-9;
  return cert;
}

struct PathNormReport {
  double h_sup = 0;    // sup_s ||H(s)||   (norm-bound composition)
  double dh_sup = 0;   // sup_s ||H'(s)||, H' = B + 2 s C
  double d2h_sup = 0;  // ||H''|| = 2 ||C||
};

inline PathNormReport path_norm_report(const HamiltonianPath& p) {
  PathNormReport rep;
  rep.h_sup = p.a.norm_bound() + p.b.norm_bound() + p.c.norm_bound();
  rep.dh_sup = p.b.norm_bound() + 2 * p.c.norm_bound();
  rep.d2h_sup = 2 * p.c.norm_bound();
  return rep;
}

}  // namespace hamforge
