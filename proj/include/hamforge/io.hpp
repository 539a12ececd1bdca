#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hamforge/adiabatic.hpp"
#include "hamforge/circuit.hpp"
#include "hamforge/pauli.hpp"
#include "hamforge/spectral.hpp"

namespace hamforge {

namespace iodetail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && tok.size() > 0;
}

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

inline bool skippable(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

}  // namespace iodetail

// ---------------------------------------------------------------------------
// Pauli-sum text format
//   qubits <n>
//   <coefficient> <i>:<P> <j>:<P> ...     (blank axis list = identity term)
// ---------------------------------------------------------------------------

inline PauliSum parse_pauli_sum(std::istream& in) {
  std::string line;
  int lineno = 0;
  int n = -1;
  std::vector<PauliTerm> terms;
  while (std::getline(in, line)) {
    ++lineno;
    if (iodetail::skippable(line)) continue;
    const auto toks = iodetail::tokens(line);
    if (n < 0) {
      if (toks.size() != 2 || toks[0] != "qubits")
        throw ParseError(lineno, "expected header 'qubits <n>'");
      n = std::atoi(toks[1].c_str());
      if (n < 1 || n > 26) throw ParseError(lineno, "qubit count out of range");
      continue;
    }
    double coeff;
    if (!iodetail::parse_double(toks[0], coeff))
      throw ParseError(lineno, "malformed coefficient '" + toks[0] + "'");
    PauliString::Factors factors;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const auto colon = toks[i].find(':');
      if (colon == std::string::npos || colon + 2 != toks[i].size())
        throw ParseError(lineno, "malformed factor '" + toks[i] + "'");
      const int q = std::atoi(toks[i].substr(0, colon).c_str());
      const char p = toks[i].back();
      Axis a;
      if (p == 'X') a = Axis::X;
      else if (p == 'Y') a = Axis::Y;
      else if (p == 'Z') a = Axis::Z;
      else throw ParseError(lineno, "axis must be one of X, Y, Z");
      if (q < 0 || q >= n) throw ParseError(lineno, "qubit index out of range");
      factors.emplace_back(q, a);
    }
    try {
      terms.push_back({coeff, PauliString(n, std::move(factors))});
    } catch (const PreconditionError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (n < 0) throw ParseError(lineno, "missing 'qubits <n>' header");
  return PauliSum(n, terms);
}

inline void serialize(std::ostream& out, const PauliSum& h) {
  out << "qubits " << h.qubits() << "\n";
  for (const auto& t : h.terms()) {
    out << iodetail::fmt(t.coeff);
    const std::string s = t.string.str();
    if (!s.empty()) out << ' ' << s;
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Circuit text format
//   circuit N <n> m <m>
//   u1 <qubit> <8 reals, row-major re/im pairs>
//   cphase <f> <s>
// ---------------------------------------------------------------------------

inline Circuit parse_circuit(std::istream& in) {
  std::string line;
  int lineno = 0;
  int n = -1, m = -1;
  std::vector<Gate> gate_list;
  while (std::getline(in, line)) {
    ++lineno;
    if (iodetail::skippable(line)) continue;
    const auto toks = iodetail::tokens(line);
    if (n < 0) {
      if (toks.size() != 5 || toks[0] != "circuit" || toks[1] != "N" ||
          toks[3] != "m")
        throw ParseError(lineno, "expected header 'circuit N <n> m <m>'");
      n = std::atoi(toks[2].c_str());
      m = std::atoi(toks[4].c_str());
      if (n < 1 || n > 24) throw ParseError(lineno, "qubit count out of range");
      if (m < 0 || m > n)
        throw ParseError(lineno, "proof qubit count out of range");
      continue;
    }
    if (toks[0] == "u1") {
      if (toks.size() != 10)
        throw ParseError(lineno, "u1 needs a qubit and 8 matrix entries");
      const int q = std::atoi(toks[1].c_str());
      double v[8];
      for (int i = 0; i < 8; ++i)
        if (!iodetail::parse_double(toks[static_cast<std::size_t>(2 + i)], v[i]))
          throw ParseError(lineno, "malformed matrix entry");
      Eigen::Matrix2cd u;
      u << cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5]),
          cplx(v[6], v[7]);
      if (q < 0 || q >= n) throw ParseError(lineno, "gate qubit out of range");
      if (!gates::is_unitary(u))
        throw ParseError(lineno, "gate matrix is not unitary");
      gate_list.push_back(OneQubitGate{u, q});
    } else if (toks[0] == "cphase") {
      if (toks.size() != 3) throw ParseError(lineno, "cphase needs two qubits");
      const int f = std::atoi(toks[1].c_str());
      const int s = std::atoi(toks[2].c_str());
      if (f < 0 || f >= n || s < 0 || s >= n)
        throw ParseError(lineno, "cphase qubit out of range");
      if (f == s) throw ParseError(lineno, "cphase qubits must be distinct");
      gate_list.push_back(CPhaseGate{f, s});
    } else {
      throw ParseError(lineno, "unknown gate '" + toks[0] + "'");
    }
  }
  if (n < 0) throw ParseError(lineno, "missing circuit header");
  if (gate_list.empty()) throw ParseError(lineno, "circuit has no gates");
  return Circuit(n, m, std::move(gate_list));
}

inline void serialize(std::ostream& out, const Circuit& c) {
  out << "circuit N " << c.qubits() << " m " << c.proof_qubits() << "\n";
  for (const auto& g : c.gates()) {
    if (const auto* oq = std::get_if<OneQubitGate>(&g)) {
      out << "u1 " << oq->target;
      for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 2; ++col)
          out << ' ' << iodetail::fmt(oq->u(r, col).real()) << ' '
              << iodetail::fmt(oq->u(r, col).imag());
      out << "\n";
    } else {
      const auto& cp = std::get<CPhaseGate>(g);
      out << "cphase " << cp.first << ' ' << cp.second << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Path file format: header then labeled Pauli blocks A, B, C (C optional)
//   path qubits <n>
//   A
//   <term lines>
//   B
//   ...
// ---------------------------------------------------------------------------

inline HamiltonianPath parse_path(std::istream& in) {
  std::string line;
  int lineno = 0;
  int n = -1;
  int block = -1;  // 0 = A, 1 = B, 2 = C
  std::vector<std::vector<PauliTerm>> terms(3);
  while (std::getline(in, line)) {
    ++lineno;
    if (iodetail::skippable(line)) continue;
    const auto toks = iodetail::tokens(line);
    if (n < 0) {
      if (toks.size() != 3 || toks[0] != "path" || toks[1] != "qubits")
        throw ParseError(lineno, "expected header 'path qubits <n>'");
      n = std::atoi(toks[2].c_str());
      if (n < 1 || n > 26) throw ParseError(lineno, "qubit count out of range");
      continue;
    }
    if (toks.size() == 1 &&
        (toks[0] == "A" || toks[0] == "B" || toks[0] == "C")) {
      const int want = toks[0][0] - 'A';
      if (want != block + 1)
        throw ParseError(lineno, "path blocks must appear in order A, B, C");
      block = want;
      continue;
    }
    if (block < 0) throw ParseError(lineno, "term before the first block label");
    // reuse the pauli term grammar
    std::istringstream one("qubits " + std::to_string(n) + "\n" + line);
    try {
      const PauliSum single = parse_pauli_sum(one);
      for (const auto& t : single.terms())
        terms[static_cast<std::size_t>(block)].push_back(t);
    } catch (const ParseError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (n < 0) throw ParseError(lineno, "missing path header");
  if (block < 1) throw ParseError(lineno, "path needs at least blocks A and B");
  return HamiltonianPath(PauliSum(n, terms[0]), PauliSum(n, terms[1]),
                         PauliSum(n, terms[2]));
}

inline void serialize(std::ostream& out, const HamiltonianPath& p) {
  out << "path qubits " << p.qubits() << "\n";
  const PauliSum* blocks[3] = {&p.a, &p.b, &p.c};
  const char* names = "ABC";
  for (int i = 0; i < 3; ++i) {
    if (i == 2 && blocks[2]->empty()) break;
    out << names[i] << "\n";
    for (const auto& t : blocks[i]->terms()) {
      out << iodetail::fmt(t.coeff);
      const std::string s = t.string.str();
      if (!s.empty()) out << ' ' << s;
      out << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string format_spectral_report(const SpectralReport& rep) {
  std::ostringstream os;
  os << "method "
     << (rep.method == EigenMethod::dense ? "dense" : "iterative") << "\n";
  for (std::size_t j = 0; j < rep.eigenvalues.size(); ++j)
    os << "lambda_" << j << ' ' << iodetail::fmt(rep.eigenvalues[j])
       << " residual " << iodetail::fmt(rep.residual_norms[j]) << "\n";
  return os.str();
}

// file-based conveniences

template <typename T>
T parse_file(const std::string& path, T (*parser)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parser(in);
}

inline PauliSum load_pauli_sum(const std::string& path) {
  return parse_file(path, parse_pauli_sum);
}
inline Circuit load_circuit(const std::string& path) {
  return parse_file(path, parse_circuit);
}
inline HamiltonianPath load_path(const std::string& path) {
  return parse_file(path, parse_path);
}

}  // namespace hamforge
