#pragma once

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace hamforge {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;

/// Sparse Hermitian realization of an operator on n qubits (dim = 2^n).
using OperatorMatrix = Eigen::SparseMatrix<cplx>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stated precondition does not hold; the message names the condition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to certify its result within budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Cap on dense-matrix materialization; HAMFORGE_DENSE_LIMIT overrides.
inline Eigen::Index dense_limit() {
  if (const char* s = std::getenv("HAMFORGE_DENSE_LIMIT")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v > 1) return static_cast<Eigen::Index>(v);
  }
  return Eigen::Index(1) << 12;
}

/// Dimension at or below which eigen_low always takes the dense path.
inline constexpr Eigen::Index kDenseEigenThreshold = Eigen::Index(1) << 10;

inline MatC kron(const MatC& a, const MatC& b) {
  MatC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline bool is_hermitian(const MatC& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Spectral norm via the largest eigenvalue of A^dag A.
inline double op_norm(const MatC& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatC> es(m.adjoint() * m,
                                         Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0 ? std::sqrt(top) : 0.0;
}

/// Norm of a Hermitian matrix: max |eigenvalue|.
inline double hermitian_norm(const MatC& m) {
  Eigen::SelfAdjointEigenSolver<MatC> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace hamforge
