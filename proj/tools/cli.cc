// Copyright 2026 The cbq Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>

#include <fmt/format.h>

#include "cbq/boolean.h"
#include "cbq/cbnorm.h"
#include "cbq/error.h"
#include "cbq/oracle.h"
#include "cbq/query_degree.h"
#include "cbq/report.h"
#include "cbq/tensor.h"
#include "cbq/text.h"
#include "cbq/witness.h"

namespace cbq::cli {
namespace {

// Bad invocation: unreadable input, inconsistent flags.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadInput(const std::string& path) {
  try {
    return text::ReadFile(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::string StatusWord(conic::Status status) {
  switch (status) {
    case conic::Status::kOptimal:
      return "OPTIMAL";
    case conic::Status::kInfeasibleEvidence:
      return "INFEASIBLE_EVIDENCE";
    case conic::Status::kGapNotReached:
      return "GAP_NOT_REACHED";
  }
  return "UNKNOWN";
}

std::string SubsetKey(std::string_view name, const Subset& s) {
  return fmt::format("{}[{}]", name, fmt::join(s, ","));
}

struct SolverFlags {
  double gap_tol = 1e-8;
  double feas_tol = 1e-9;
  int max_iter = 200;

  conic::SolverOptions options() const {
    conic::SolverOptions o;
    o.gap_tol = gap_tol;
    o.feas_tol = feas_tol;
    o.max_iter = max_iter;
    return o;
  }
};

void AddSolverFlags(CLI::App* app, SolverFlags* flags) {
  app->add_option("--tol,--gap-tol", flags->gap_tol, "duality gap tolerance")
      ->capture_default_str();
  app->add_option("--feas-tol", flags->feas_tol, "primal and dual feasibility tolerance")
      ->capture_default_str();
  app->add_option("--max-iter", flags->max_iter, "interior-point iteration cap")
      ->capture_default_str();
}

void AddSolution(Report& rep, const conic::Solution& sol) {
  rep.AddNumber("gap", sol.gap);
  rep.AddNumber("primal_infeas", sol.primal_infeas);
  rep.AddNumber("dual_infeas", sol.dual_infeas);
  rep.AddInt("iterations", sol.iterations);
}

struct Inputs {
  std::string tensor;
  std::string fn;
  std::string cert;
};

struct Loaded {
  std::string text;
  std::string digest;
};

Loaded Load(const std::string& path) {
  Loaded l;
  l.text = ReadInput(path);
  l.digest = Sha256Hex(l.text);
  return l;
}

void AddFunctionInfo(Report& rep, const std::string& path, const Loaded& in,
                     const BooleanFunction& f) {
  rep.Add("fn_file", path);
  rep.Add("fn_sha256", in.digest);
  rep.AddInt("n", f.n());
  rep.AddInt("domain_size", static_cast<long long>(f.domain_size()));
}

// ---- cbnorm compute ----

struct ComputeFlags {
  std::string tensor;
  std::optional<int> split;
  SolverFlags solver;
  std::string witness;
  std::string dual;
};

int RunCompute(const ComputeFlags& flags, Report& rep) {
  const Loaded in = Load(flags.tensor);
  const Tensor tensor = ParseTensor(in.text);
  const int t = tensor.order();
  const int n = tensor.dim();
  const int s = flags.split ? *flags.split : t / 2;
  rep.Add("tensor_file", flags.tensor);
  rep.Add("tensor_sha256", in.digest);
  rep.AddInt("t", t);
  rep.AddInt("n", n);
  rep.AddInt("split", s);
  const CbResult r = ComputeCbNorm(tensor, s, flags.solver.options());
  rep.AddInt("gram_order", r.layout.order());
  rep.AddInt("family_size", r.family_size);
  rep.AddInt("rows_solved", r.rows_solved);
  rep.AddNumber("value", r.value);
  rep.AddNumber("dual_value", r.dual_value);
  rep.AddNumber("upper_bound", r.upper_bound);
  AddSolution(rep, r.solution);
  if (!flags.dual.empty()) {
    text::WriteFile(flags.dual, FormatDual(r.dual));
    rep.Add("dual_file", flags.dual);
  }
  if (!flags.witness.empty()) {
    WitnessDiagnostics diag;
    const CbWitness w = RecoverWitnessFromGram(r.gram, n, t, s, &diag);
    text::WriteFile(flags.witness, FormatWitness(w));
    rep.Add("witness_file", flags.witness);
    rep.AddInt("witness_dimension", w.d);
    rep.AddNumber("witness_objective", WitnessObjective(tensor, w));
    rep.AddNumber("witness_operator_norm", WitnessOperatorNorm(tensor, w));
    rep.AddNumber("consistency_residual", diag.consistency_residual);
    rep.AddNumber("repair_change", diag.repair_change);
    rep.AddNumber("reproduction_error", diag.reproduction_error);
    rep.AddNumber("orthogonality_residual", diag.orthogonality_residual);
  }
  rep.Add("status", StatusWord(r.solution.status));
  return r.solution.status == conic::Status::kOptimal ? kExitOk : kExitFail;
}

// ---- cbnorm ascent ----

struct AscentFlags {
  std::string tensor;
  AscentConfig config;
  double orth_tol = 1e-10;
};

int RunAscent(const AscentFlags& flags, Report& rep) {
  const Loaded in = Load(flags.tensor);
  const Tensor tensor = ParseTensor(in.text);
  rep.Add("tensor_file", flags.tensor);
  rep.Add("tensor_sha256", in.digest);
  rep.AddInt("t", tensor.order());
  rep.AddInt("n", tensor.dim());
  const int d = flags.config.d > 0 ? flags.config.d
                                   : DefaultAscentDimension(tensor.dim(), tensor.order());
  rep.AddInt("d", d);
  rep.AddInt("restarts", flags.config.restarts);
  rep.AddInt("seed", static_cast<long long>(flags.config.seed));
  const AscentResult r = AscentLowerBound(tensor, flags.config);
  rep.AddNumber("value", r.value);
  rep.AddInt("best_restart", r.best_restart);
  for (std::size_t k = 0; k < r.restart_values.size(); ++k) {
    rep.AddNumber(fmt::format("restart_value[{}]", k), r.restart_values[k]);
  }
  const double orth = OrthogonalityResidual(r.witness);
  rep.AddNumber("orthogonality_residual", orth);
  const bool ok = orth <= flags.orth_tol;
  rep.Add("status", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitFail;
}

// ---- qdeg cbdeg ----

struct CbDegFlags {
  std::string fn;
  double eps = 0.0;
  int tmax = 4;
  std::optional<int> split;
  SolverFlags solver;
};

int RunCbDeg(const CbDegFlags& flags, Report& rep) {
  const Loaded in = Load(flags.fn);
  const BooleanFunction f = ParseBooleanFunction(in.text);
  AddFunctionInfo(rep, flags.fn, in, f);
  rep.AddNumber("eps", flags.eps);
  rep.AddInt("tmax", flags.tmax);
  rep.Add("split", flags.split ? std::to_string(*flags.split) : std::string("floor(t/2)"));
  const CbDegResult r = CbDeg(f, flags.eps, flags.tmax, flags.split, flags.solver.options());
  rep.AddNumber("tol", r.tol);
  bool all_optimal = true;
  for (const MinEpsResult& m : r.table) {
    rep.AddNumber(fmt::format("eps_star[t={}]", m.t), m.eps);
    rep.Add(fmt::format("solve_status[t={}]", m.t), StatusWord(m.solution.status));
    all_optimal = all_optimal && m.solution.status == conic::Status::kOptimal;
  }
  if (r.found) {
    rep.AddInt("t_star", r.t_star);
    rep.AddInt("Q_eps", r.q_eps);
  } else {
    rep.Add("t_star", fmt::format("> {}", flags.tmax));
    rep.Add("Q_eps", "unknown");
  }
  rep.Add("Q_eps_rule", "Q_eps(f) = ceil(cbdeg(f)/2)");
  rep.Add("status", all_optimal ? "OPTIMAL" : "GAP_NOT_REACHED");
  return all_optimal ? kExitOk : kExitFail;
}

// ---- qdeg cert / approxdeg / socp ----

struct CertFlags {
  std::string fn;
  int t = 1;
  std::string kind = "sdp";
  std::string variant = "restricted";
  std::string out;
  SolverFlags solver;
};

void AddStatus(Report& rep, const CertificateStatus& st) {
  rep.AddNumber("value", st.value);
  rep.AddNumber("two_eps", st.primal_value);
  AddSolution(rep, st.solution);
  rep.AddNumber("phi_mass", st.phi_mass);
  rep.AddNumber("split_overlap", st.split_overlap);
  rep.AddBool("certificate", st.has_certificate);
}

// Writes the certificate (when one exists) and reports its objective.
int FinishCertificate(const CertificateStatus& st, const Certificate& cert,
                      const BooleanFunction& f, const std::string& out, Report& rep) {
  if (st.has_certificate) {
    const SdpCertificate lifted = LiftToSdp(cert);
    rep.AddNumber("certificate_objective", CertificateObjective(f, lifted.phi, lifted.w));
    if (!out.empty()) {
      text::WriteFile(out, FormatCertificate(cert));
      rep.Add("certificate_file", out);
    }
  }
  const bool optimal = st.solution.status == conic::Status::kOptimal;
  if (!optimal) {
    rep.Add("status", StatusWord(st.solution.status));
    return kExitFail;
  }
  if (!st.has_certificate && !out.empty()) {
    rep.Add("status", "NO_CERTIFICATE");
    return kExitFail;
  }
  rep.Add("status", "OPTIMAL");
  return kExitOk;
}

int RunCert(const CertFlags& flags, Report& rep) {
  const Loaded in = Load(flags.fn);
  const BooleanFunction f = ParseBooleanFunction(in.text);
  AddFunctionInfo(rep, flags.fn, in, f);
  rep.AddInt("t", flags.t);
  rep.Add("kind", flags.kind);
  const conic::SolverOptions opts = flags.solver.options();
  if (flags.kind == "lp") {
    const LpResult r = ApproxDegreeLp(f, flags.t, opts);
    AddStatus(rep, r.status);
    return FinishCertificate(r.status, r.certificate, f, flags.out, rep);
  }
  if (flags.kind == "socp") {
    const SocpResult r = SolveSocp(f, flags.t, opts);
    AddStatus(rep, r.status);
    return FinishCertificate(r.status, r.certificate, f, flags.out, rep);
  }
  rep.Add("variant", flags.variant);
  const SdpVariant variant =
      flags.variant == "extended" ? SdpVariant::kExtended : SdpVariant::kRestricted;
  const SdpCertificateResult r = SolveSdpCertificate(f, flags.t, variant, opts);
  AddStatus(rep, r.status);
  return FinishCertificate(r.status, r.certificate, f, flags.out, rep);
}

int RunApproxDeg(const CertFlags& flags, Report& rep) {
  const Loaded in = Load(flags.fn);
  const BooleanFunction f = ParseBooleanFunction(in.text);
  AddFunctionInfo(rep, flags.fn, in, f);
  rep.AddInt("t", flags.t);
  const LpResult r = ApproxDegreeLp(f, flags.t, flags.solver.options());
  rep.AddNumber("eps_star", 0.5 * r.status.primal_value);
  AddStatus(rep, r.status);
  for (std::size_t k = 0; k < r.subsets.size(); ++k) {
    rep.AddNumber(SubsetKey("c", r.subsets[k]), r.c(static_cast<Eigen::Index>(k)));
  }
  return FinishCertificate(r.status, r.certificate, f, flags.out, rep);
}

int RunSocp(const CertFlags& flags, Report& rep) {
  const Loaded in = Load(flags.fn);
  const BooleanFunction f = ParseBooleanFunction(in.text);
  AddFunctionInfo(rep, flags.fn, in, f);
  rep.AddInt("t", flags.t);
  const SocpResult r = SolveSocp(f, flags.t, flags.solver.options());
  rep.AddNumber("eps_star", 0.5 * r.status.primal_value);
  AddStatus(rep, r.status);
  for (std::size_t k = 0; k < r.subsets.size(); ++k) {
    rep.AddNumber(SubsetKey("c", r.subsets[k]), r.c(static_cast<Eigen::Index>(k)));
  }
  rep.AddNumber("c_tilde_norm", r.c_tilde.norm());
  return FinishCertificate(r.status, r.certificate, f, flags.out, rep);
}

// ---- qdeg verify ----

struct VerifyFlags {
  std::string fn;
  std::string cert;
  double eps = 0.0;
  VerifyTolerances tol;
};

int RunVerify(const VerifyFlags& flags, Report& rep) {
  const Loaded fin = Load(flags.fn);
  const BooleanFunction f = ParseBooleanFunction(fin.text);
  const Loaded cin = Load(flags.cert);
  const Certificate cert = ParseCertificate(cin.text);
  AddFunctionInfo(rep, flags.fn, fin, f);
  rep.Add("cert_file", flags.cert);
  rep.Add("cert_sha256", cin.digest);
  rep.Add("cert_kind", CertificateKindName(cert));
  const int t = std::visit([](const auto& c) { return c.t; }, cert);
  rep.AddInt("t", t);
  rep.AddNumber("eps", flags.eps);

  SdpCertificate lifted;
  try {
    lifted = LiftToSdp(cert);
  } catch (const NumericalError& e) {
    rep.Add("lift", "rejected");
    rep.Add("failure[0]", e.what());
    rep.Add("status", "FAIL");
    return kExitFail;
  }
  const VerifyReport v = VerifyCertificate(lifted, f, t, flags.eps, flags.tol);
  rep.AddNumber("normalization_residual", v.normalization_residual);
  rep.AddNumber("diagonal_residual", v.diagonal_residual);
  rep.AddNumber("consistency_residual", v.consistency_residual);
  rep.AddNumber("moment_residual", v.moment_residual);
  rep.AddNumber("min_eigenvalue", v.min_eigenvalue);
  rep.AddNumber("objective", v.objective);
  rep.AddNumber("two_eps", 2.0 * flags.eps);
  rep.AddBool("feasible", v.feasible);
  rep.AddBool("certifies", v.certifies);
  for (std::size_t k = 0; k < v.failures.size(); ++k) {
    rep.Add(fmt::format("failure[{}]", k), v.failures[k]);
  }
  if (v.pass) rep.Add("claim", fmt::format("cbdeg(f) > {} at eps = {}", t, FormatNumber(flags.eps)));
  rep.Add("status", v.pass ? "PASS" : "FAIL");
  return v.pass ? kExitOk : kExitFail;
}

std::string Echo(const std::vector<std::string>& args) {
  std::string s;
  for (const std::string& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Completely bounded norms and quantum query degree bounds", "cbtool"};
  app.require_subcommand(1);
  bool timing = false;
  app.add_flag("--time", timing, "append wall time to the report");

  CLI::App* cbnorm = app.add_subcommand("cbnorm", "completely bounded norm of a tensor");
  cbnorm->require_subcommand(1);
  CLI::App* qdeg = app.add_subcommand("qdeg", "query degree programs and certificates");
  qdeg->require_subcommand(1);
  for (CLI::App* tool : {cbnorm, qdeg}) tool->add_flag("--time", timing, "append wall time");

  ComputeFlags compute;
  CLI::App* c_compute = cbnorm->add_subcommand("compute", "solve the cb-norm SDP");
  c_compute->add_option("--tensor", compute.tensor, "tensor file")->required();
  c_compute->add_option("--split", compute.split, "split s, 0 <= s <= t/2 (default floor(t/2))");
  c_compute->add_option("--witness", compute.witness, "write a recovered witness here");
  c_compute->add_option("--dual", compute.dual, "write the dual certificate here");
  AddSolverFlags(c_compute, &compute.solver);

  AscentFlags ascent;
  CLI::App* c_ascent = cbnorm->add_subcommand("ascent", "feasible-point lower bound");
  c_ascent->add_option("--tensor", ascent.tensor, "tensor file")->required();
  c_ascent->add_option("--d", ascent.config.d, "matrix dimension (0: default)")
      ->capture_default_str();
  c_ascent->add_option("--restarts", ascent.config.restarts, "number of restarts")
      ->capture_default_str()->check(CLI::PositiveNumber);
  c_ascent->add_option("--seed", ascent.config.seed, "random seed")->capture_default_str();
  c_ascent->add_option("--max-iter", ascent.config.max_iter, "iterations per restart")
      ->capture_default_str();
  c_ascent->add_option("--step", ascent.config.initial_step, "initial step")
      ->capture_default_str();
  c_ascent->add_option("--orth-tol", ascent.orth_tol, "orthogonality tolerance for PASS")
      ->capture_default_str();

  CbDegFlags cbdeg;
  CLI::App* q_cbdeg = qdeg->add_subcommand("cbdeg", "scan t for the cb approximate degree");
  q_cbdeg->add_option("--fn", cbdeg.fn, "Boolean function file")->required();
  q_cbdeg->add_option("--eps", cbdeg.eps, "error level")->required()->check(CLI::NonNegativeNumber);
  q_cbdeg->add_option("--tmax", cbdeg.tmax, "largest t to try")->required()->check(CLI::PositiveNumber);
  q_cbdeg->add_option("--split", cbdeg.split, "fixed split s for every t");
  AddSolverFlags(q_cbdeg, &cbdeg.solver);

  CertFlags cert;
  CLI::App* q_cert = qdeg->add_subcommand("cert", "certificate that cbdeg(f) > t");
  q_cert->add_option("--fn", cert.fn, "Boolean function file")->required();
  q_cert->add_option("--t", cert.t, "degree")->required()->check(CLI::PositiveNumber);
  q_cert->add_option("--kind", cert.kind, "lp, socp or sdp")
      ->required()->check(CLI::IsMember({"lp", "socp", "sdp"}));
  q_cert->add_option("--variant", cert.variant, "sdp: restricted or extended")
      ->capture_default_str()->check(CLI::IsMember({"restricted", "extended"}));
  q_cert->add_option("--out", cert.out, "certificate output file")->required();
  AddSolverFlags(q_cert, &cert.solver);

  CertFlags approx;
  CLI::App* q_approx = qdeg->add_subcommand("approxdeg", "approximate-degree LP");
  q_approx->add_option("--fn", approx.fn, "Boolean function file")->required();
  q_approx->add_option("--t", approx.t, "degree")->required()->check(CLI::PositiveNumber);
  q_approx->add_option("--out", approx.out, "write the dual polynomial certificate here");
  AddSolverFlags(q_approx, &approx.solver);

  CertFlags socp;
  CLI::App* q_socp = qdeg->add_subcommand("socp", "second-order cone program pair");
  q_socp->add_option("--fn", socp.fn, "Boolean function file")->required();
  q_socp->add_option("--t", socp.t, "degree")->required()->check(CLI::PositiveNumber);
  q_socp->add_option("--out", socp.out, "write the SOCP certificate here");
  AddSolverFlags(q_socp, &socp.solver);

  VerifyFlags verify;
  CLI::App* q_verify = qdeg->add_subcommand("verify", "check a certificate from scratch");
  q_verify->add_option("--fn", verify.fn, "Boolean function file")->required();
  q_verify->add_option("--eps", verify.eps, "error level")->required()->check(CLI::NonNegativeNumber);
  q_verify->add_option("--cert", verify.cert, "certificate file")->required();
  q_verify->add_option("--tol-normalization", verify.tol.normalization)->capture_default_str();
  q_verify->add_option("--tol-diagonal", verify.tol.diagonal)->capture_default_str();
  q_verify->add_option("--tol-consistency", verify.tol.consistency)->capture_default_str();
  q_verify->add_option("--tol-moment", verify.tol.moment)->capture_default_str();
  q_verify->add_option("--tol-eigenvalue", verify.tol.eigenvalue)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);  // help of the innermost subcommand named
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.Add("command", Echo(args));
  int code = kExitOk;
  try {
    if (c_compute->parsed()) {
      code = RunCompute(compute, rep);
    } else if (c_ascent->parsed()) {
      code = RunAscent(ascent, rep);
    } else if (q_cbdeg->parsed()) {
      code = RunCbDeg(cbdeg, rep);
    } else if (q_cert->parsed()) {
      code = RunCert(cert, rep);
    } else if (q_approx->parsed()) {
      code = RunApproxDeg(approx, rep);
    } else if (q_socp->parsed()) {
      code = RunSocp(socp, rep);
    } else {
      code = RunVerify(verify, rep);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    out << rep.str();
    out << "status: ERROR\n";
    err << "error: " << e.what() << "\n";
    return kExitFail;
  }
  if (timing) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    rep.AddNumber("wall_time_s", elapsed.count());
  }
  out << rep.str();
  return code;
}

int Main(int argc, char** argv) {
  std::vector<std::string> args;
  const std::string self = argc > 0 ? std::filesystem::path(argv[0]).filename().string() : "";
  if (self == "cbnorm" || self == "qdeg") args.push_back(self);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return Run(args, std::cout, std::cerr);
}

}  // namespace cbq::cli
