#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hamforge/common.hpp"

namespace hamforge {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    default: return 'Z';
  }
}

inline Eigen::Matrix2cd axis_matrix(Axis a) {
  Eigen::Matrix2cd m;
  switch (a) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// A single Pauli word on n qubits: a sparse map qubit -> {X,Y,Z}.
/// Qubit 0 is the most significant bit of the basis index; the empty
/// map is the identity word.
class PauliString {
 public:
  using Factors = std::vector<std::pair<int, Axis>>;

  explicit PauliString(int n, Factors factors = {})
      : n_(n), factors_(std::move(factors)) {
    if (n_ < 0) throw PreconditionError("qubit count must be non-negative");
    std::sort(factors_.begin(), factors_.end());
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const auto [q, a] = factors_[i];
      (void)a;
      if (q < 0 || q >= n_)
        throw PreconditionError("pauli factor index out of range: " +
                                std::to_string(q));
      if (i > 0 && factors_[i - 1].first == q)
        throw PreconditionError("duplicate qubit in pauli string");
    }
  }

  static PauliString identity(int n) { return PauliString(n); }
  static PauliString single(int n, int qubit, Axis a) {
    return PauliString(n, {{qubit, a}});
  }

  int qubits() const { return n_; }
  const Factors& factors() const { return factors_; }
  int locality() const { return static_cast<int>(factors_.size()); }
  bool is_identity() const { return factors_.empty(); }

  /// Same factor list, indices relocated onto a register of `n` qubits.
  PauliString remapped(int n, std::span<const int> where) const {
    Factors out;
    out.reserve(factors_.size());
    for (const auto& [q, a] : factors_)
      out.emplace_back(where[static_cast<std::size_t>(q)], a);
    return PauliString(n, std::move(out));
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) os << ' ';
      os << factors_[i].first << ':' << axis_char(factors_[i].second);
    }
    return os.str();
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.factors_ == b.factors_;
  }
  /// Canonical order: ascending qubit index, axis order X < Y < Z.
  friend bool operator<(const PauliString& a, const PauliString& b) {
    return a.factors_ < b.factors_;
  }

 private:
  int n_;
  Factors factors_;
};

struct PauliTerm {
  double coeff;
  PauliString string;
};

/// Real-weighted sum of Pauli words; Hermitian by construction. Terms are
/// kept merged, sorted, and pruned below the merge tolerance.
class PauliSum {
 public:
  static constexpr double kMergeTol = 1e-14;

  explicit PauliSum(int n) : n_(n) {
    if (n < 0) throw PreconditionError("qubit count must be non-negative");
  }
  PauliSum(int n, const std::vector<PauliTerm>& terms) : PauliSum(n) {
    for (const auto& t : terms) add(t.coeff, t.string);
  }

  int qubits() const { return n_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int locality() const {
    int k = 0;
    for (const auto& t : terms_) k = std::max(k, t.string.locality());
    return k;
  }

  /// Triangle-inequality bound sum |c_i|; never below the operator norm.
  double norm_bound() const {
    double s = 0;
    for (const auto& t : terms_) s += std::abs(t.coeff);
    return s;
  }

  void add(double coeff, const PauliString& ps) {
    if (ps.qubits() > n_ || (ps.locality() > 0 &&
                             ps.factors().back().first >= n_))
      throw PreconditionError("pauli string does not fit register");
    auto it = std::lower_bound(
        terms_.begin(), terms_.end(), ps,
        [](const PauliTerm& t, const PauliString& s) { return t.string < s; });
    if (it != terms_.end() && it->string == ps) {
      it->coeff += coeff;
      if (std::abs(it->coeff) < kMergeTol) terms_.erase(it);
    } else if (std::abs(coeff) >= kMergeTol) {
      terms_.insert(it, PauliTerm{coeff, PauliString(n_, ps.factors())});
    }
  }

  void add(const PauliSum& other) {
    if (other.n_ != n_)
      throw PreconditionError("qubit count mismatch in pauli sum addition");
    for (const auto& t : other.terms_) add(t.coeff, t.string);
  }

  void add_scaled(double factor, const PauliSum& other) {
    if (other.n_ != n_)
      throw PreconditionError("qubit count mismatch in pauli sum addition");
    for (const auto& t : other.terms_) add(factor * t.coeff, t.string);
  }

  PauliSum scaled(double factor) const {
    PauliSum out(n_);
    for (const auto& t : terms_) out.add(factor * t.coeff, t.string);
    return out;
  }

  /// Same terms re-declared on a register of n qubits (indices unchanged).
  PauliSum widened(int n) const {
    PauliSum out(n);
    for (const auto& t : terms_)
      out.add(t.coeff, PauliString(n, t.string.factors()));
    return out;
  }

  friend PauliSum operator+(PauliSum a, const PauliSum& b) {
    a.add(b);
    return a;
  }
  friend PauliSum operator*(double f, const PauliSum& s) { return s.scaled(f); }

 private:
  int n_;
  std::vector<PauliTerm> terms_;  // sorted by string, merged
};

/// Product of two sums with disjoint qubit supports (factor lists merge).
inline PauliSum mul_disjoint(const PauliSum& a, const PauliSum& b) {
  const int n = a.qubits();
  if (b.qubits() != n)
    throw PreconditionError("qubit count mismatch in pauli product");
  PauliSum out(n);
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      PauliString::Factors f = ta.string.factors();
      for (const auto& g : tb.string.factors()) f.push_back(g);
      out.add(ta.coeff * tb.coeff, PauliString(n, std::move(f)));
    }
  return out;
}

/// Largest |coefficient difference| between two sums over the union of
/// their Pauli words.
inline double max_term_difference(const PauliSum& a, const PauliSum& b) {
  std::map<PauliString, double> diff;
  for (const auto& t : a.terms()) diff[t.string] += t.coeff;
  for (const auto& t : b.terms()) diff[t.string] -= t.coeff;
  double m = 0;
  for (const auto& [s, c] : diff) m = std::max(m, std::abs(c));
  return m;
}

namespace detail {

struct PauliAction {
  std::uint64_t flip_mask = 0;            // bits toggled by X/Y factors
  std::vector<std::pair<int, Axis>> yz;   // phase-carrying factors
};

inline PauliAction pauli_action(const PauliString& ps, int n) {
  PauliAction act;
  for (const auto& [q, a] : ps.factors()) {
    if (q >= n) throw PreconditionError("pauli index out of range");
    const int bit = n - 1 - q;
    if (a != Axis::Z) act.flip_mask |= std::uint64_t(1) << bit;
    if (a != Axis::X) act.yz.emplace_back(bit, a);
  }
  return act;
}

/// Phase picked up on basis state b: product over Z factors of (-1)^bit and
/// Y factors of (i on bit 0, -i on bit 1), matching sigma_y = [[0,-i],[i,0]].
inline cplx pauli_phase(const PauliAction& act, std::uint64_t b) {
  cplx phase(1.0, 0.0);
  for (const auto& [bit, a] : act.yz) {
    const bool one = (b >> bit) & 1;
    if (a == Axis::Z) {
      if (one) phase = -phase;
    } else {
      phase *= one ? cplx(0, -1) : cplx(0, 1);
    }
  }
  return phase;
}

}  // namespace detail

/// coefficient * tensor product of the designated Pauli factors, identity
/// elsewhere, on a register of n qubits.
inline OperatorMatrix term_matrix(double coeff, const PauliString& ps, int n) {
  if (n < 0 || n > 26) throw PreconditionError("qubit count out of range");
  const Eigen::Index dim = Eigen::Index(1) << n;
  const auto act = detail::pauli_action(ps, n);
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(dim));
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
    const auto row = static_cast<Eigen::Index>(b ^ act.flip_mask);
    trip.emplace_back(row, static_cast<Eigen::Index>(b),
                      coeff * detail::pauli_phase(act, b));
  }
  OperatorMatrix m(dim, dim);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

inline OperatorMatrix term_matrix(const PauliTerm& t, int n) {
  return term_matrix(t.coeff, t.string, n);
}

/// Sparse matrix realization of a PauliSum on its declared register.
inline OperatorMatrix realize(const PauliSum& h) {
  const int n = h.qubits();
  if (n > 26) throw PreconditionError("register too large to realize");
  const Eigen::Index dim = Eigen::Index(1) << n;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(h.size() * static_cast<std::size_t>(dim));
  for (const auto& t : h.terms()) {
    const auto act = detail::pauli_action(t.string, n);
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
      trip.emplace_back(static_cast<Eigen::Index>(b ^ act.flip_mask),
                        static_cast<Eigen::Index>(b),
                        t.coeff * detail::pauli_phase(act, b));
    }
  }
  OperatorMatrix m(dim, dim);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

inline MatC realize_dense(const PauliSum& h) { return MatC(realize(h)); }

/// Pauli-basis coefficients of a Hermitian matrix on k qubits via the
/// normalized trace inner products <P, M> / 2^k.
inline PauliSum decompose_hermitian(const MatC& m) {
  const Eigen::Index dim = m.rows();
  if (dim == 0 || (dim & (dim - 1)) != 0 || m.cols() != dim)
    throw PreconditionError("matrix dimension is not a power of two");
  int k = 0;
  while ((Eigen::Index(1) << k) < dim) ++k;
  if (k > 10) throw PreconditionError("dense decomposition capped at 10 qubits");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!is_hermitian(m, 1e-10 * scale))
    throw PreconditionError("matrix is not Hermitian within tolerance");

  PauliSum out(k);
  const std::uint64_t strings = std::uint64_t(1) << (2 * k);
  for (std::uint64_t code = 0; code < strings; ++code) {
    PauliString::Factors factors;
    for (int q = 0; q < k; ++q) {
      const auto digit = (code >> (2 * q)) & 3;
      if (digit) factors.emplace_back(q, static_cast<Axis>(digit - 1));
    }
    const PauliString ps(k, std::move(factors));
    const auto act = detail::pauli_action(ps, k);
    cplx tr(0, 0);
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b)
      tr += detail::pauli_phase(act, b) *
            m(static_cast<Eigen::Index>(b),
              static_cast<Eigen::Index>(b ^ act.flip_mask));
    const cplx coeff = tr / static_cast<double>(dim);
    if (std::abs(coeff.imag()) > 1e-9 * scale)
      throw PreconditionError("non-real pauli coefficient from decomposition");
    if (std::abs(coeff.real()) >= PauliSum::kMergeTol)
      out.add(coeff.real(), ps);
  }
  return out;
}

/// Decompose a Hermitian block living on `where` (distinct qubit indices,
/// block qubit j -> where[j]) and re-emit it on a register of n qubits.
inline PauliSum embed_hermitian(int n, std::span<const int> where,
                                const MatC& block) {
  for (std::size_t i = 0; i < where.size(); ++i) {
    if (where[i] < 0 || where[i] >= n)
      throw PreconditionError("embed target out of range");
    for (std::size_t j = i + 1; j < where.size(); ++j)
      if (where[i] == where[j])
        throw PreconditionError("embed targets must be distinct");
  }
  if (block.rows() != Eigen::Index(1) << where.size())
    throw PreconditionError("embed block size does not match target count");
  const PauliSum local = decompose_hermitian(block);
  PauliSum out(n);
  for (const auto& t : local.terms())
    out.add(t.coeff, t.string.remapped(n, where));
  return out;
}

inline PauliSum embed_hermitian(int n, std::initializer_list<int> where,
                                const MatC& block) {
  return embed_hermitian(n, std::span<const int>(where.begin(), where.size()),
                         block);
}

inline double norm_bound(const PauliSum& h) { return h.norm_bound(); }

}  // namespace hamforge
