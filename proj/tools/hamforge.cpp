// hamforge: compile verifier circuits into clock Hamiltonians, reduce
// 3-local Hamiltonians to 2-local form through three-qubit gadgets, and
// certify the spectral bounds behind both constructions.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hamforge/hamforge.hpp"

namespace {

using namespace hamforge;

constexpr int kExitOk = 0;
constexpr int kExitCertificationFailure = 1;
constexpr int kExitInputError = 2;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

void emit(const std::string& report_path, const std::string& text) {
  if (report_path.empty())
    std::cout << text;
  else
    write_text(report_path, text);
}

std::string fmt(double v) { return iodetail::fmt(v); }

// FNV-1a of the input file, so reports carry a deterministic descriptor
std::string file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unreadable";
  std::uint64_t h = 0xcbf29ce484222325ull;
  char ch;
  while (in.get(ch)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

/// Prints wall time to stderr so report files stay byte-deterministic.
class StageTimer {
 public:
  explicit StageTimer(std::string label)
      : label_(std::move(label)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const double ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start_)
            .count();
    std::fprintf(stderr, "# %s took %.1f ms\n", label_.c_str(), ms);
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------

int run_compile(const std::string& in, const std::string& form,
                const std::string& weights, const std::string& out,
                const std::string& report_path) {
  const StageTimer timer("compile");
  const Circuit circuit = load_circuit(in);
  std::ostringstream rep;
  std::ostringstream ham;
  rep.precision(12);
  rep << "input " << in << " fnv1a " << file_fingerprint(in) << "\n";

  std::vector<double> weight_values;
  if (weights != "auto") {
    std::stringstream ss(weights);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      double v;
      if (!iodetail::parse_double(tok, v) || v <= 0)
        throw Error("malformed --weights value '" + tok + "'");
      weight_values.push_back(v);
    }
  }

  const OptimalAcceptance best = optimal_proof(circuit);

  if (form == "log-local") {
    LogLocalHamiltonian h = build_log_local_auto(circuit);
    if (!weight_values.empty()) {
      if (weight_values.size() != 2)
        throw Error("--weights for log-local takes J_in,J_prop");
      h.j_in = weight_values[0];
      h.j_prop = weight_values[1];
    }
    const PauliSum total = h.total();
    ham << "# hamforge compile form=log-local circuit=" << in << "\n";
    ham << "# qubits computation=" << h.comp_qubits
        << " clock=" << h.clock_qubits << " steps=" << h.steps << "\n";
    ham << "# component H_out weight 1\n";
    ham << "# component H_in weight " << fmt(h.j_in) << "\n";
    ham << "# component H_prop weight " << fmt(h.j_prop) << "\n";
    serialize(ham, total);

    const HistoryState eta =
        build_history_state(circuit, best.proof, ClockEncoding::binary);
    rep << "compile form log-local qubits " << h.qubits() << " locality "
        << total.locality() << "\n";
    rep << "weights J_in " << fmt(h.j_in) << " J_prop " << fmt(h.j_prop)
        << "\n";
    rep << "p_opt " << fmt(best.probability) << "\n";
    const double e_out = expectation(realize(h.h_out), eta.amplitudes);
    const double e_in = expectation(realize(h.h_in), eta.amplitudes);
    const double e_prop = expectation(realize(h.h_prop), eta.amplitudes);
    rep << "expect H_out " << fmt(e_out) << " H_in " << fmt(e_in)
        << " H_prop " << fmt(e_prop) << "\n";
    rep << "expect total "
        << fmt(e_out + h.j_in * e_in + h.j_prop * e_prop) << "\n";
  } else if (form == "two-local") {
    const CanonicalCircuit cc = canonicalize(circuit);
    TwoLocalHamiltonian h = build_two_local_auto(cc);
    if (!weight_values.empty()) {
      if (weight_values.size() != 4)
        throw Error("--weights for two-local takes J_in,J_1,J_2,J_clock");
      h.j_in = weight_values[0];
      h.j_1 = weight_values[1];
      h.j_2 = weight_values[2];
      h.j_clock = weight_values[3];
    }
    const PauliSum total = h.total();
    ham << "# hamforge compile form=two-local circuit=" << in << "\n";
    ham << "# qubits computation=" << h.comp_qubits << " clock=" << h.steps
        << " interval=" << h.interval << " cphase=" << h.cphase_count << "\n";
    ham << "# component H_out weight 1 summands 1\n";
    ham << "# component H_in weight " << fmt(h.j_in) << " summands "
        << h.in_summands << "\n";
    ham << "# component H_prop1 weight " << fmt(h.j_1) << " summands "
        << h.prop1_summands << "\n";
    ham << "# component H_prop2 weight " << fmt(h.j_2) << " summands "
        << h.prop2_summands << "\n";
    ham << "# component H_clock weight " << fmt(h.j_clock) << " summands "
        << h.clock_summands << "\n";
    serialize(ham, total);

    const HistoryState eta = build_history_state(cc.circuit(), best.proof,
                                                 ClockEncoding::unary);
    rep << "compile form two-local qubits " << h.qubits() << " locality "
        << total.locality() << "\n";
    rep << "weights J_in " << fmt(h.j_in) << " J_1 " << fmt(h.j_1) << " J_2 "
        << fmt(h.j_2) << " J_clock " << fmt(h.j_clock) << "\n";
    rep << "p_opt " << fmt(best.probability) << "\n";
    const double e_out = expectation(realize(h.h_out), eta.amplitudes);
    const double e_in = expectation(realize(h.h_in), eta.amplitudes);
    const double e_p1 = expectation(realize(h.h_prop1), eta.amplitudes);
    const double e_p2 = expectation(realize(h.h_prop2), eta.amplitudes);
    const double e_clk = expectation(realize(h.h_clock), eta.amplitudes);
    rep << "expect H_out " << fmt(e_out) << " H_in " << fmt(e_in)
        << " H_prop1 " << fmt(e_p1) << " H_prop2 " << fmt(e_p2) << " H_clock "
        << fmt(e_clk) << "\n";
    rep << "expect total "
        << fmt(e_out + h.j_in * e_in + h.j_1 * e_p1 + h.j_2 * e_p2 +
               h.j_clock * e_clk)
        << "\n";
  } else {
    throw Error("--form must be log-local or two-local");
  }

  if (!out.empty()) write_text(out, ham.str());
  emit(report_path, rep.str());
  return kExitOk;
}

int run_spectrum(const std::string& in, int k, const std::string& method,
                 std::uint64_t seed, const std::string& out) {
  const PauliSum h = load_pauli_sum(in);
  EigenLowOptions opts;
  opts.seed = seed;
  if (method == "dense") opts.method = EigenMethod::dense;
  else if (method == "iterative") opts.method = EigenMethod::iterative;
  else if (!method.empty() && method != "auto")
    throw Error("--method must be dense or iterative");
  const SpectralReport rep = eigen_low(realize(h), k, opts);
  emit(out, format_spectral_report(rep));
  return kExitOk;
}

int run_gadget_reduce(const std::string& in, double delta,
                      const std::string& out, const std::string& report_path) {
  const StageTimer timer("gadget-reduce");
  const PauliSum h3 = load_pauli_sum(in);
  const ReductionOutput red = reduce_3to2(h3, delta);
  std::ostringstream rep;
  rep.precision(12);
  rep << "input " << in << " fnv1a " << file_fingerprint(in) << "\n";
  rep << red.report() << "\n";
  for (std::size_t m = 0; m < red.decomposition.triples.size(); ++m) {
    const auto& t = red.decomposition.triples[m];
    rep << "triple " << m;
    for (int i = 0; i < 3; ++i)
      rep << " q" << i << " " << t.targets[static_cast<std::size_t>(i)];
    rep << "\n";
    for (int i = 0; i < 3; ++i) {
      const auto& b = t.b[static_cast<std::size_t>(i)];
      rep << "  B" << (i + 1);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          rep << ' ' << fmt(b(r, c).real()) << ' ' << fmt(b(r, c).imag());
      rep << "\n";
    }
  }
  if (red.decomposition.system_qubits <= 10) {
    const double residual = max_term_difference(
        reconstruct_decomposition(red.decomposition), h3);
    rep << "reconstruction_residual " << fmt(residual) << "\n";
  }
  if (!out.empty()) {
    std::ostringstream ham;
    ham << "# hamforge gadget-reduce input=" << in << " delta=" << delta
        << " c_r=" << fmt(red.decomposition.c_r) << " M="
        << red.decomposition.gadget_count() << "\n";
    serialize(ham, red.h2);
    write_text(out, ham.str());
  }
  emit(report_path, rep.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify subcommand
// ---------------------------------------------------------------------------

struct CheckList {
  std::ostringstream out;
  bool all_ok = true;

  void check(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "ok " : "FAIL ") << name;
    if (!detail.empty()) out << ' ' << detail;
    out << "\n";
    all_ok = all_ok && ok;
  }
};

int run_verify_projection(std::uint64_t seed, int count) {
  CheckList list;
  {
    OperatorMatrix h1 =
        realize(PauliSum(1, {{1.0, PauliString::single(1, 0, Axis::X)}}));
    PauliSum pen(1);
    pen.add(5.0, PauliString::identity(1));
    pen.add(-5.0, PauliString::single(1, 0, Axis::Z));  // 10 |1><1|
    MatC basis(2, 1);
    basis << 1, 0;
    ProjectionInstance inst{h1, realize(pen), Subspace(basis), 10.0, {}};
    const ProjectionBounds b = projection_bounds(inst);
    list.check("projection canned", b.ok && std::abs(b.lower + 0.125) < 1e-12,
               format_projection_row(b));
  }
  std::mt19937_64 rng(seed);
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    const auto inst = random_projection_instance(rng, 16);
    const ProjectionBounds b = projection_bounds(inst);
    if (!b.ok) ++failures;
  }
  if (count > 0)
    list.check("projection random", failures == 0,
               "instances " + std::to_string(count) + " failures " +
                   std::to_string(failures));
  std::cout << list.out.str();
  return list.all_ok ? kExitOk : kExitCertificationFailure;
}

int run_verify_kitaev(const std::string& in) {
  const Circuit c = load_circuit(in);
  CheckList list;
  const LogLocalHamiltonian h = build_log_local_auto(c);
  const OptimalAcceptance best = optimal_proof(c);
  const HistoryState eta =
      build_history_state(c, best.proof, ClockEncoding::binary);

  const double e_prop = expectation(realize(h.h_prop), eta.amplitudes);
  const double e_in = expectation(realize(h.h_in), eta.amplitudes);
  const double e_out = expectation(realize(h.h_out), eta.amplitudes);
  list.check("history H_prop", std::abs(e_prop) <= 1e-10, fmt(e_prop));
  list.check("history H_in", std::abs(e_in) <= 1e-10, fmt(e_in));
  list.check("history H_out",
             std::abs(e_out - (1.0 - best.probability)) <= 1e-10,
             fmt(e_out) + " vs 1-p=" + fmt(1.0 - best.probability));

  const auto blocks = verify_propagation_blocks(c);
  list.check("propagation blocks", blocks.ok, fmt(blocks.max_diff));

  const double variational =
      e_out + h.j_in * e_in + h.j_prop * e_prop;
  list.check("variational dichotomy",
             variational <= 1.0 - best.probability + 1e-9, fmt(variational));
  std::cout << list.out.str();
  return list.all_ok ? kExitOk : kExitCertificationFailure;
}

int run_verify_two_local(const std::string& in) {
  const Circuit c = load_circuit(in);
  CheckList list;
  const CanonicalCircuit cc = canonicalize(c);
  const TwoLocalHamiltonian h = build_two_local_auto(cc);
  const OptimalAcceptance best = optimal_proof(c);
  const HistoryState eta =
      build_history_state(cc.circuit(), best.proof, ClockEncoding::unary);

  list.check("locality", h.total().locality() <= 2,
             std::to_string(h.total().locality()));
  const double e_clk = expectation(realize(h.h_clock), eta.amplitudes);
  const double e_p1 = expectation(realize(h.h_prop1), eta.amplitudes);
  const double e_p2 = expectation(realize(h.h_prop2), eta.amplitudes);
  const double e_in = expectation(realize(h.h_in), eta.amplitudes);
  const double e_out = expectation(realize(h.h_out), eta.amplitudes);
  list.check("history H_clock", std::abs(e_clk) <= 1e-10, fmt(e_clk));
  list.check("history H_prop1", std::abs(e_p1) <= 1e-10, fmt(e_p1));
  list.check("history H_prop2", std::abs(e_p2) <= 1e-10, fmt(e_p2));
  list.check("history H_in", std::abs(e_in) <= 1e-10, fmt(e_in));
  list.check("history H_out",
             std::abs(e_out - (1.0 - best.probability)) <= 1e-10,
             fmt(e_out) + " vs 1-p=" + fmt(1.0 - best.probability));
  const double variational = e_out + h.j_in * e_in + h.j_1 * e_p1 +
                             h.j_2 * e_p2 + h.j_clock * e_clk;
  list.check("variational dichotomy",
             variational <= 1.0 - best.probability + 1e-9, fmt(variational));
  std::cout << list.out.str();
  return list.all_ok ? kExitOk : kExitCertificationFailure;
}

int run_verify_restriction(const std::string& in) {
  const Circuit c = load_circuit(in);
  const CanonicalCircuit cc = canonicalize(c);
  const RestrictionIdentityReport rep = verify_restriction_identities(cc);
  CheckList list;
  list.check("time projector form", rep.time_projector_max_diff <= rep.tol,
             fmt(rep.time_projector_max_diff));
  list.check("clock projector on prop1",
             rep.clock_projector_max_diff <= rep.tol,
             fmt(rep.clock_projector_max_diff));
  list.check("effective propagation form",
             rep.effective_prop_max_diff <= rep.tol,
             fmt(rep.effective_prop_max_diff));
  list.check("prop2 dominates", rep.slack_min_eigenvalue >= -rep.tol,
             fmt(rep.slack_min_eigenvalue));
  list.check("time reflection symmetry", rep.time_reflection_symmetric, "");
  std::cout << list.out.str();
  return list.all_ok ? kExitOk : kExitCertificationFailure;
}

int run_verify_gadget(const std::string& in, double delta) {
  const PauliSum h3 = load_pauli_sum(in);
  const ReductionOutput red = reduce_3to2(h3, delta);
  const GadgetVerification ver = verify_reduction(h3, red.h2, delta);
  CheckList list;
  list.check("reconstruction", ver.reconstruction_residual <= 1e-9,
             fmt(ver.reconstruction_residual));
  list.check("theorem3 certified", ver.theorem3.certified,
             format_theorem3_row(ver.theorem3));
  list.check("eigenvalue closeness", ver.bound_ok,
             "lambda3 " + fmt(ver.lambda_h3) + " lambda2 " +
                 fmt(ver.lambda_h2) + " diff " + fmt(ver.difference) +
                 " budget " + fmt(ver.c_r * ver.theorem3.eps_measured));
  list.check("monotone self-energy", ver.theorem3.monotone_ok, "");
  std::cout << list.out.str();
  std::cout << format_theorem3_report(ver.theorem3);
  return list.all_ok ? kExitOk : kExitCertificationFailure;
}

int run_adiabatic(const std::string& path_file, double total_time, int steps,
                  double delta, const std::string& report_path) {
  HamiltonianPath p = load_path(path_file);
  std::ostringstream summary;
  summary.precision(12);
  if (delta > 0) {
    const LiftedPath lift = gadget_lift_path(p, delta);
    summary << "lift c_r " << fmt(lift.c_r) << " gadgets "
            << lift.gadget_count() << " qubits " << lift.path.qubits()
            << "\n";
    p = lift.path;
  }
  const auto norms = path_norm_report(p);
  summary << "norms H " << fmt(norms.h_sup) << " dH " << fmt(norms.dh_sup)
          << " d2H " << fmt(norms.d2h_sup) << "\n";

  Eigen::SelfAdjointEigenSolver<MatC> init_es{realize_dense(p.at(0.0))};
  const VecC initial = init_es.eigenvectors().col(0);

  std::ostringstream csv;
  csv.precision(12);
  csv << "step,s,gap,instantaneous_fidelity\n";
  const auto observer = [&](int step, double s_mid, const VecC& psi) {
    Eigen::SelfAdjointEigenSolver<MatC> es{realize_dense(p.at(s_mid))};
    const double ground = es.eigenvalues()(0);
    double gap = 0;
    double fid = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (gap == 0 && es.eigenvalues()(i) > ground + 1e-9)
        gap = es.eigenvalues()(i) - ground;
      if (es.eigenvalues()(i) <= ground + 1e-9)
        fid += std::norm(es.eigenvectors().col(i).dot(psi));
    }
    csv << step << ',' << fmt(s_mid) << ',' << fmt(gap) << ',' << fmt(fid)
        << "\n";
  };
  const EvolutionResult res = evolve(p, total_time, steps, initial, observer);
  summary << "evolve steps " << res.steps << " min_gap " << fmt(res.min_gap)
          << " final_fidelity " << fmt(res.fidelity) << "\n";

  if (!report_path.empty()) write_text(report_path, csv.str());
  std::cout << summary.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clock-Hamiltonian compiler and spectral certification toolkit"};
  app.require_subcommand(1);

  std::string in, out, report, form = "two-local", weights = "auto";
  std::string method = "auto", kind;
  std::string path_file;
  int k = 1, steps = 1000, count = 0;
  double delta = 0, total_time = 1.0;
  std::uint64_t seed = 0;

  auto* compile = app.add_subcommand("compile", "circuit -> clock Hamiltonian");
  compile->add_option("--in", in, "circuit file")->required();
  compile->add_option("--form", form, "log-local|two-local");
  compile->add_option("--weights", weights, "auto or comma-separated values");
  compile->add_option("--out", out, "Hamiltonian output file");
  compile->add_option("--report", report, "report file (default stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues");
  spectrum->add_option("--in", in, "Pauli-sum file")->required();
  spectrum->add_option("-k", k, "number of eigenvalues");
  spectrum->add_option("--method", method, "dense|iterative");
  spectrum->add_option("--seed", seed, "iterative solver seed");
  spectrum->add_option("--out", out, "report file (default stdout)");

  auto* reduce = app.add_subcommand("gadget-reduce", "3-local -> 2-local");
  reduce->add_option("--in", in, "Pauli-sum file")->required();
  reduce->add_option("--delta", delta, "gadget strength parameter")->required();
  reduce->add_option("--out", out, "reduced Hamiltonian file");
  reduce->add_option("--report", report, "report file (default stdout)");

  auto* verify = app.add_subcommand("verify", "certify construction bounds");
  verify->add_option("--kind", kind,
                     "kitaev|two-local|gadget|restriction|projection")
      ->required();
  verify->add_option("--in", in, "instance file");
  verify->add_option("--delta", delta, "gadget strength parameter");
  verify->add_option("--seed", seed, "random instance seed");
  verify->add_option("--count", count, "random instance count");

  auto* adiabatic = app.add_subcommand("adiabatic-run", "evolve a path");
  adiabatic->add_option("--path", path_file, "path file")->required();
  adiabatic->add_option("--time", total_time, "total evolution time")
      ->required();
  adiabatic->add_option("--steps", steps, "time slices");
  adiabatic->add_option("--delta", delta, "lift 3-local paths first");
  adiabatic->add_option("--report", report, "per-step CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed()) return run_compile(in, form, weights, out, report);
    if (spectrum->parsed()) return run_spectrum(in, k, method, seed, out);
    if (reduce->parsed()) return run_gadget_reduce(in, delta, out, report);
    if (verify->parsed()) {
      if (kind == "projection") return run_verify_projection(seed, count);
      if (kind == "kitaev") return run_verify_kitaev(in);
      if (kind == "two-local") return run_verify_two_local(in);
      if (kind == "restriction") return run_verify_restriction(in);
      if (kind == "gadget") return run_verify_gadget(in, delta);
      throw Error("unknown verify kind '" + kind + "'");
    }
    if (adiabatic->parsed())
      return run_adiabatic(path_file, total_time, steps, delta, report);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const PreconditionError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ConvergenceError& e) {
    std::cerr << "certification failure: " << e.what() << "\n";
    return kExitCertificationFailure;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
