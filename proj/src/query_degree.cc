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

#include "cbq/query_degree.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "cbq/error.h"
#include "cbq/text.h"

namespace cbq {
namespace {

using conic::ScalarKind;

// Odd-support mask of every tuple in [n+1]^t, in rank order.
std::vector<SubsetMask> TupleMasks(int n, int t) {
  std::vector<SubsetMask> masks;
  masks.reserve(static_cast<std::size_t>(TupleCount(n + 1, t)));
  ForEachTuple(n + 1, t, [&](const IndexTuple& index) {
    SubsetMask mask = 0;
    for (int k : index) {
      if (k <= n) mask ^= SubsetMask{1} << (n - k);
    }
    masks.push_back(mask);
  });
  return masks;
}

void CheckDegree(const BooleanFunction& f, int t) {
  if (t < 1) throw DimensionError(fmt::format("degree t must be at least 1, got {}", t));
  if (f.n() < 1) throw DimensionError("function must have at least one input bit");
}

// phi = phi_plus - phi_minus over a list of cube points, with the
// normalization row sum(phi_plus + phi_minus) = 1.
struct SplitMeasure {
  std::vector<CubeIndex> support;
  int plus = 0;
  int minus = 0;
  int norm_row = 0;
};

SplitMeasure AddSplitMeasure(conic::Problem& problem, const BooleanFunction& f,
                             bool whole_cube) {
  SplitMeasure m;
  for (CubeIndex x = 0; x < CubeSize(f.n()); ++x) {
    if (whole_cube || f.InDomain(x)) m.support.push_back(x);
  }
  const int k = static_cast<int>(m.support.size());
  m.plus = problem.AddScalars(ScalarKind::kNonnegative, k);
  m.minus = problem.AddScalars(ScalarKind::kNonnegative, k);
  m.norm_row = problem.AddRow(1.0, "normalization");
  for (int j = 0; j < k; ++j) {
    problem.AddScalarTerm(m.norm_row, m.plus + j, 1.0);
    problem.AddScalarTerm(m.norm_row, m.minus + j, 1.0);
    const CubeIndex x = m.support[j];
    if (f.InDomain(x)) {
      problem.AddScalarObjective(m.plus + j, f.value(x));
      problem.AddScalarObjective(m.minus + j, -f.value(x));
    } else {
      problem.AddScalarObjective(m.plus + j, -1.0);
      problem.AddScalarObjective(m.minus + j, -1.0);
    }
  }
  return m;
}

// Adds coeff * sum_x chi_S(x) phi(x) to a row.
void AddCharacterTerms(conic::Problem& problem, int row, const SplitMeasure& m, SubsetMask s,
                       double coeff) {
  for (std::size_t j = 0; j < m.support.size(); ++j) {
    const double v = coeff * Character(s, m.support[j]);
    problem.AddScalarTerm(row, m.plus + static_cast<int>(j), v);
    problem.AddScalarTerm(row, m.minus + static_cast<int>(j), -v);
  }
}

SignedMeasure ExtractPhi(const conic::Solution& sol, const SplitMeasure& m, int n,
                         double* overlap) {
  SignedMeasure phi(n);
  *overlap = 0.0;
  for (std::size_t j = 0; j < m.support.size(); ++j) {
    const double p = sol.x_scalar(m.plus + static_cast<int>(j));
    const double q = sol.x_scalar(m.minus + static_cast<int>(j));
    phi[m.support[j]] = p - q;
    *overlap = std::max(*overlap, std::min(p, q));
  }
  return phi;
}

// Fills the shared status fields and returns the rescaling factor to apply
// to the certificate (0 when no certificate is produced).
double FinishStatus(CertificateStatus& status, const SignedMeasure& phi,
                    const conic::SolverOptions& options) {
  const conic::Solution& sol = status.solution;
  status.value = sol.primal_value;
  status.primal_value = sol.dual_value;
  status.phi_mass = phi.L1Norm();
  status.has_certificate = status.value > 10.0 * options.gap_tol && status.phi_mass > 0.0;
  return status.has_certificate ? 1.0 / status.phi_mass : 0.0;
}

SignedMeasure Scaled(const SignedMeasure& phi, double alpha) {
  SignedMeasure out(phi.n());
  for (CubeIndex x = 0; x < CubeSize(phi.n()); ++x) out[x] = alpha * phi[x];
  return out;
}

double MinEigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double DirectMoment(const SignedMeasure& phi, SubsetMask s) {
  double sum = 0.0;
  for (CubeIndex x = 0; x < CubeSize(phi.n()); ++x) sum += phi[x] * Character(s, x);
  return sum;
}

}  // namespace

MinEpsResult MinEpsSdp(const BooleanFunction& f, int t, int s,
                       const conic::SolverOptions& options) {
  CheckDegree(f, t);
  const int n = f.n();
  const CbLayout layout = MakeLayout(n + 1, t, s);
  const std::vector<GramEquality> family = BuildConstraints(n + 1, t, s);
  const std::vector<SubsetMask> masks = TupleMasks(n, t);
  const int order = layout.order();
  const int tuples = static_cast<int>(masks.size());

  conic::Problem problem(conic::Sense::kMinimize);
  const int z = problem.AddPsdBlock(order);
  const int tvar = problem.AddScalars(ScalarKind::kFree, tuples);
  const int lvar = problem.AddScalars(ScalarKind::kFree, order);
  std::vector<int> yvar(family.size(), -1);
  for (std::size_t r = 0; r < family.size(); ++r) {
    if (family[r].independent) yvar[r] = problem.AddScalars(ScalarKind::kFree);
  }
  const int e2 = problem.AddScalars(ScalarKind::kFree);
  problem.AddScalarObjective(e2, 1.0);

  // Z = Diag(lambda) + A*(y) - C_s(T), one row per upper-triangular entry.
  std::vector<int> entry_row(static_cast<std::size_t>(order) * order, -1);
  auto row_of = [&](int p, int q) {
    if (p > q) std::swap(p, q);
    return entry_row[static_cast<std::size_t>(p) * order + q];
  };
  for (int p = 0; p < order; ++p) {
    for (int q = p; q < order; ++q) {
      const int row = problem.AddRow(0.0, fmt::format("slack[{},{}]", p, q));
      entry_row[static_cast<std::size_t>(p) * order + q] = row;
      problem.AddPsdTerm(row, z, p, q, p == q ? 1.0 : 0.5);
    }
  }
  for (int p = 0; p < order; ++p) problem.AddScalarTerm(row_of(p, p), lvar + p, -1.0);
  for (std::size_t r = 0; r < family.size(); ++r) {
    if (yvar[r] < 0) continue;
    const GramEquality& eq = family[r];
    problem.AddScalarTerm(row_of(eq.a, eq.b), yvar[r], -0.5);
    problem.AddScalarTerm(row_of(eq.ref_a, eq.ref_b), yvar[r], 0.5);
  }
  const int vc = layout.v_count();
  for (int r = 0; r < tuples; ++r) {
    problem.AddScalarTerm(row_of(r / vc, layout.v_offset() + r % vc), tvar + r, 0.5);
  }

  // |T(z_x) - f(x)| <= 2 eps on D.
  for (CubeIndex x = 0; x < CubeSize(n); ++x) {
    if (!f.InDomain(x)) continue;
    const int lo = problem.AddRow(-f.value(x), fmt::format("fit- {}", CubeString(x, n)));
    const int hi = problem.AddRow(f.value(x), fmt::format("fit+ {}", CubeString(x, n)));
    const int slo = problem.AddScalars(ScalarKind::kNonnegative);
    const int shi = problem.AddScalars(ScalarKind::kNonnegative);
    problem.AddScalarTerm(lo, e2, 1.0);
    problem.AddScalarTerm(lo, slo, -1.0);
    problem.AddScalarTerm(hi, e2, 1.0);
    problem.AddScalarTerm(hi, shi, -1.0);
    for (int r = 0; r < tuples; ++r) {
      const double chi = Character(masks[r], x);
      problem.AddScalarTerm(lo, tvar + r, -chi);
      problem.AddScalarTerm(hi, tvar + r, chi);
    }
  }

  // <e, lambda> <= 1.
  const int budget = problem.AddRow(1.0, "lambda budget");
  for (int p = 0; p < order; ++p) problem.AddScalarTerm(budget, lvar + p, 1.0);
  problem.AddScalarTerm(budget, problem.AddScalars(ScalarKind::kNonnegative), 1.0);

  MinEpsResult result;
  result.t = t;
  result.s = s;
  result.solution = conic::Solve(problem, options);
  const conic::Solution& sol = result.solution;
  result.eps = 0.5 * sol.primal_value;

  std::vector<double> dense(static_cast<std::size_t>(tuples));
  for (int r = 0; r < tuples; ++r) dense[r] = sol.x_scalar(tvar + r);
  result.tensor = Tensor::FromDense(t, n + 1, dense);

  result.dual.n = n + 1;
  result.dual.t = t;
  result.dual.s = s;
  result.dual.lambda = sol.x_scalar.segment(lvar, order);
  result.dual.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family.size()));
  for (std::size_t r = 0; r < family.size(); ++r) {
    if (yvar[r] >= 0) result.dual.y(static_cast<Eigen::Index>(r)) = sol.x_scalar(yvar[r]);
  }
  result.lambda_sum = result.dual.lambda.sum();
  result.slack_min_eigenvalue = MinEigenvalue(DualSlack(result.tensor, result.dual));

  for (CubeIndex x = 0; x < CubeSize(n); ++x) {
    if (!f.InDomain(x)) continue;
    const std::vector<int> point = CubePoint(x, n);
    result.fit_error =
        std::max(result.fit_error, std::abs(EvalDiagonal(result.tensor, point) - f.value(x)));
  }
  return result;
}

CbDegResult CbDeg(const BooleanFunction& f, double eps, int t_max, std::optional<int> split,
                  const conic::SolverOptions& options) {
  if (t_max < 1) throw DimensionError("t_max must be at least 1");
  if (eps < 0.0) throw DimensionError("eps must be nonnegative");
  CbDegResult result;
  result.tol = 10.0 * options.gap_tol;
  for (int t = 1; t <= t_max; ++t) {
    const int s = split ? *split : DefaultSplit(t);
    result.table.push_back(MinEpsSdp(f, t, s, options));
    if (result.table.back().eps <= eps + result.tol) {
      result.found = true;
      result.t_star = t;
      result.q_eps = (t + 1) / 2;
      break;
    }
  }
  return result;
}

double CertificateObjective(const BooleanFunction& f, const SignedMeasure& phi, double w) {
  if (phi.n() != f.n()) throw DimensionError("certificate and function differ in n");
  double obj = -w;
  for (CubeIndex x = 0; x < CubeSize(f.n()); ++x) {
    obj += f.InDomain(x) ? phi[x] * f.value(x) : -std::abs(phi[x]);
  }
  return obj;
}

SdpCertificateResult SolveSdpCertificate(const BooleanFunction& f, int t, SdpVariant variant,
                                         const conic::SolverOptions& options) {
  CheckDegree(f, t);
  const int n = f.n();
  const CbLayout layout = MakeLayout(n + 1, t, 0);
  const std::vector<GramEquality> family = BuildConstraints(n + 1, t, 0);
  const std::vector<SubsetMask> masks = TupleMasks(n, t);
  const int order = layout.order();

  conic::Problem problem(conic::Sense::kMaximize);
  const int xb = problem.AddPsdBlock(order);
  const int w = problem.AddScalars(ScalarKind::kFree);
  problem.AddScalarObjective(w, -1.0);
  const SplitMeasure m = AddSplitMeasure(problem, f, variant == SdpVariant::kExtended);

  for (int k = 0; k < order; ++k) {
    const int row = problem.AddRow(0.0, fmt::format("diag[{}]", k));
    problem.AddPsdTerm(row, xb, k, k, 1.0);
    problem.AddScalarTerm(row, w, -1.0);
  }
  for (const GramEquality& eq : family) {
    if (!eq.independent) continue;
    const int row = problem.AddRow(
        0.0, fmt::format("gram l={} X[{},{}]-X[{},{}]", eq.level, eq.a, eq.b, eq.ref_a, eq.ref_b));
    problem.AddPsdTerm(row, xb, eq.a, eq.b, 0.5);
    problem.AddPsdTerm(row, xb, eq.ref_a, eq.ref_b, -0.5);
  }
  for (std::size_t r = 0; r < masks.size(); ++r) {
    const int i = 1 + static_cast<int>(r);
    const int row = problem.AddRow(0.0, fmt::format("moment[{}]", r));
    problem.AddPsdTerm(row, xb, 0, i, 0.5);
    AddCharacterTerms(problem, row, m, masks[r], -1.0);
  }

  SdpCertificateResult result;
  result.status.solution = conic::Solve(problem, options);
  const conic::Solution& sol = result.status.solution;
  const SignedMeasure phi = ExtractPhi(sol, m, n, &result.status.split_overlap);
  const double scale = FinishStatus(result.status, phi, options);

  SdpCertificate& cert = result.certificate;
  cert.n = n;
  cert.t = t;
  const double a = result.status.has_certificate ? scale : 1.0;
  cert.phi = Scaled(phi, a);
  cert.x = a * sol.x_psd[0];
  cert.w = a * sol.x_scalar(w);
  return result;
}

LpResult ApproxDegreeLp(const BooleanFunction& f, int t, const conic::SolverOptions& options) {
  CheckDegree(f, t);
  const int n = f.n();
  LpResult result;
  result.subsets = LowDegreeSubsets(n, t);

  conic::Problem problem(conic::Sense::kMaximize);
  const SplitMeasure m = AddSplitMeasure(problem, f, true);
  std::vector<int> rows;
  for (const Subset& s : result.subsets) {
    const int row = problem.AddRow(0.0, fmt::format("fourier[{}]", fmt::join(s, ",")));
    AddCharacterTerms(problem, row, m, MaskOf(s, n), 1.0);
    rows.push_back(row);
  }

  result.status.solution = conic::Solve(problem, options);
  const conic::Solution& sol = result.status.solution;
  result.c.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) result.c(static_cast<Eigen::Index>(k)) = sol.y(rows[k]);

  const SignedMeasure phi = ExtractPhi(sol, m, n, &result.status.split_overlap);
  FinishStatus(result.status, phi, options);

  // Remove the residual low-degree part left by the solver, then renormalize.
  const FourierTable table = Fourier(phi);
  std::vector<double> coeffs(table.coefficients().begin(), table.coefficients().end());
  for (const Subset& s : result.subsets) coeffs[MaskOf(s, n)] = 0.0;
  SignedMeasure projected = InverseFourier(FourierTable(n, std::move(coeffs)));
  const double mass = projected.L1Norm();

  result.certificate.n = n;
  result.certificate.t = t;
  result.certificate.phi =
      result.status.has_certificate && mass > 0.0 ? Scaled(projected, 1.0 / mass) : phi;
  return result;
}

Eigen::VectorXd SocpVector(const SignedMeasure& phi, int t, const std::vector<Subset>& subsets) {
  const int n = phi.n();
  const FourierTable table = Fourier(phi);
  const double cube = std::ldexp(1.0, n);
  Eigen::VectorXd v(static_cast<Eigen::Index>(subsets.size()));
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    const double mult = static_cast<double>(Multiplicity(subsets[k], n, t));
    v(static_cast<Eigen::Index>(k)) = cube * std::sqrt(mult) * table.at(subsets[k]);
  }
  return v;
}

SocpResult SolveSocp(const BooleanFunction& f, int t, const conic::SolverOptions& options) {
  CheckDegree(f, t);
  const int n = f.n();
  SocpResult result;
  result.subsets = LowDegreeSubsets(n, t);
  const int count = static_cast<int>(result.subsets.size());

  // w >= ||v|| as 2x2 blocks [[w, v_S], [v_S, r_S]] PSD with sum_S r_S <= w.
  conic::Problem problem(conic::Sense::kMaximize);
  const int w = problem.AddScalars(ScalarKind::kFree);
  problem.AddScalarObjective(w, -1.0);
  const SplitMeasure m = AddSplitMeasure(problem, f, true);
  const int slack = problem.AddScalars(ScalarKind::kNonnegative);
  std::vector<int> blocks(count);
  std::vector<int> link_rows(count);
  std::vector<double> roots(count);
  for (int k = 0; k < count; ++k) {
    const Subset& s = result.subsets[k];
    blocks[k] = problem.AddPsdBlock(2);
    roots[k] = std::sqrt(static_cast<double>(Multiplicity(s, n, t)));
    const int head = problem.AddRow(0.0, fmt::format("head[{}]", fmt::join(s, ",")));
    problem.AddPsdTerm(head, blocks[k], 0, 0, 1.0);
    problem.AddScalarTerm(head, w, -1.0);
    link_rows[k] = problem.AddRow(0.0, fmt::format("link[{}]", fmt::join(s, ",")));
    problem.AddPsdTerm(link_rows[k], blocks[k], 0, 1, 0.5);
    AddCharacterTerms(problem, link_rows[k], m, MaskOf(s, n), -roots[k]);
  }
  const int tail = problem.AddRow(0.0, "tail budget");
  for (int k = 0; k < count; ++k) problem.AddPsdTerm(tail, blocks[k], 1, 1, 1.0);
  problem.AddScalarTerm(tail, slack, 1.0);
  problem.AddScalarTerm(tail, w, -1.0);

  result.status.solution = conic::Solve(problem, options);
  const conic::Solution& sol = result.status.solution;
  result.c.resize(count);
  result.c_tilde.resize(count);
  for (int k = 0; k < count; ++k) {
    result.c_tilde(k) = -sol.y(link_rows[k]);
    result.c(k) = roots[k] * result.c_tilde(k);
  }

  const SignedMeasure phi = ExtractPhi(sol, m, n, &result.status.split_overlap);
  const double scale = FinishStatus(result.status, phi, options);
  const double a = result.status.has_certificate ? scale : 1.0;
  SocpCertificate& cert = result.certificate;
  cert.n = n;
  cert.t = t;
  cert.phi = Scaled(phi, a);
  cert.w = a * sol.x_scalar(w);
  cert.subsets = result.subsets;
  cert.v = SocpVector(cert.phi, t, cert.subsets);
  return result;
}

SdpCertificate LiftToSdp(const LpCertificate& cert) {
  const int n = cert.phi.n();
  for (const Subset& s : LowDegreeSubsets(n, cert.t)) {
    const double m = DirectMoment(cert.phi, MaskOf(s, n));
    if (std::abs(m) > 1e-9) {
      throw NumericalError(fmt::format("LP certificate: low-degree moment of {{{}}} is {:.3e}",
                                       fmt::join(s, ","), m));
    }
  }
  SdpCertificate out;
  out.n = n;
  out.t = cert.t;
  out.phi = cert.phi;
  const auto order = 1 + TupleCount(n + 1, cert.t);
  out.x = Eigen::MatrixXd::Zero(order, order);
  out.w = 0.0;
  return out;
}

SdpCertificate LiftToSdp(const SocpCertificate& cert) {
  const int n = cert.phi.n();
  const std::vector<Subset> subsets = LowDegreeSubsets(n, cert.t);
  const Eigen::VectorXd v = SocpVector(cert.phi, cert.t, subsets);
  if (cert.w < v.norm() - 1e-9) {
    throw NumericalError(
        fmt::format("SOCP certificate: w = {:.9g} is below ||v|| = {:.9g}", cert.w, v.norm()));
  }
  for (std::size_t k = 0; k < cert.subsets.size(); ++k) {
    const auto it = std::find(subsets.begin(), subsets.end(), cert.subsets[k]);
    if (it == subsets.end()) {
      throw NumericalError(fmt::format("SOCP certificate: subset {{{}}} has degree above t",
                                       fmt::join(cert.subsets[k], ",")));
    }
    const double stored = cert.v(static_cast<Eigen::Index>(k));
    const double fresh = v(it - subsets.begin());
    if (std::abs(stored - fresh) > 1e-8) {
      throw NumericalError(fmt::format("SOCP certificate: v[{{{}}}] = {:.9g} but phi gives {:.9g}",
                                       fmt::join(cert.subsets[k], ","), stored, fresh));
    }
  }

  SdpCertificate out;
  out.n = n;
  out.t = cert.t;
  out.phi = cert.phi;
  out.w = cert.w;
  const std::vector<double> moments = MomentVector(cert.phi, cert.t);
  const auto order = 1 + static_cast<Eigen::Index>(moments.size());
  out.x = cert.w * Eigen::MatrixXd::Identity(order, order);
  for (Eigen::Index i = 1; i < order; ++i) {
    out.x(0, i) = moments[i - 1];
    out.x(i, 0) = moments[i - 1];
  }
  return out;
}

SdpCertificate LiftToSdp(const Certificate& cert) {
  return std::visit(
      [](const auto& c) -> SdpCertificate {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, SdpCertificate>) {
          return c;
        } else {
          return LiftToSdp(c);
        }
      },
      cert);
}

VerifyReport VerifyCertificate(const SdpCertificate& cert, const BooleanFunction& f, int t,
                               double eps, const VerifyTolerances& tol) {
  const int n = f.n();
  if (cert.phi.n() != n || cert.n != n) {
    throw DimensionError(fmt::format("certificate has n = {}, function has n = {}", cert.n, n));
  }
  if (cert.t != t) {
    throw DimensionError(fmt::format("certificate has t = {}, expected {}", cert.t, t));
  }
  const int n1 = n + 1;
  const std::int64_t tuples = TupleCount(n1, t);
  if (cert.x.rows() != 1 + tuples || cert.x.cols() != 1 + tuples) {
    throw DimensionError(fmt::format("certificate matrix must have order {}", 1 + tuples));
  }
  const Eigen::MatrixXd& x = cert.x;
  VerifyReport rep;
  rep.normalization_residual = std::abs(cert.phi.L1Norm() - 1.0);
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    rep.diagonal_residual = std::max(rep.diagonal_residual, std::abs(x(k, k) - cert.w));
  }

  // <v_{pj}, v_{pk}> must not depend on the prefix p, for every prefix length.
  for (int level = 1; level < t; ++level) {
    const std::int64_t prefixes = TupleCount(n1, level);
    const std::int64_t suffixes = TupleCount(n1, t - level);
    for (std::int64_t j = 0; j < suffixes; ++j) {
      for (std::int64_t k = j; k < suffixes; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::int64_t p = 0; p < prefixes; ++p) {
          const double v = x(1 + p * suffixes + j, 1 + p * suffixes + k);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        rep.consistency_residual = std::max(rep.consistency_residual, hi - lo);
      }
    }
  }

  // X_{0,i} against sum_x phi(x) prod_k z_{i_k}, summed directly.
  std::int64_t rank = 0;
  ForEachTuple(n1, t, [&](const IndexTuple& index) {
    double sum = 0.0;
    for (CubeIndex pt = 0; pt < CubeSize(n); ++pt) {
      double prod = cert.phi[pt];
      for (int k : index) {
        if (k <= n && ((pt >> (n - k)) & 1U)) prod = -prod;
      }
      sum += prod;
    }
    const double r = std::max(std::abs(x(0, 1 + rank) - sum), std::abs(x(1 + rank, 0) - sum));
    rep.moment_residual = std::max(rep.moment_residual, r);
    ++rank;
  });

  rep.min_eigenvalue = MinEigenvalue(0.5 * (x + x.transpose()));
  rep.objective = CertificateObjective(f, cert.phi, cert.w);

  auto check = [&](const char* name, double value, double limit) {
    if (value > limit) {
      rep.failures.push_back(fmt::format("{} {:.3e} exceeds {:.1e}", name, value, limit));
    }
  };
  check("normalization residual", rep.normalization_residual, tol.normalization);
  check("diagonal residual", rep.diagonal_residual, tol.diagonal);
  check("consistency residual", rep.consistency_residual, tol.consistency);
  check("moment residual", rep.moment_residual, tol.moment);
  check("negative eigenvalue", -rep.min_eigenvalue, tol.eigenvalue);
  rep.feasible = rep.failures.empty();
  rep.certifies = rep.objective > 2.0 * eps;
  if (!rep.certifies) {
    rep.failures.push_back(
        fmt::format("objective {:.9g} does not exceed 2 eps = {:.9g}", rep.objective, 2.0 * eps));
  }
  rep.pass = rep.feasible && rep.certifies;
  return rep;
}

std::string_view CertificateKindName(const Certificate& cert) {
  switch (cert.index()) {
    case 0:
      return "lp";
    case 1:
      return "socp";
    default:
      return "sdp";
  }
}

namespace {

void AppendPhi(std::string& out, const SignedMeasure& phi) {
  for (CubeIndex x = 0; x < CubeSize(phi.n()); ++x) {
    if (phi[x] != 0.0) out += fmt::format("phi {} {}\n", CubeString(x, phi.n()), text::Exact(phi[x]));
  }
}

std::string SubsetToken(const Subset& s) {
  return s.empty() ? std::string("empty") : fmt::format("{}", fmt::join(s, ","));
}

Subset ParseSubsetToken(std::string_view token, int n, int line) {
  Subset s;
  if (token == "empty") return s;
  std::size_t start = 0;
  while (start <= token.size()) {
    const std::size_t end = std::min(token.find(',', start), token.size());
    const long long k = text::ParseInt(token.substr(start, end - start), line);
    if (k < 1 || k > n) throw ParseError(fmt::format("subset element {} out of range", k), line);
    if (!s.empty() && k <= s.back()) throw ParseError("subset must be strictly increasing", line);
    s.push_back(static_cast<int>(k));
    start = end + 1;
  }
  return s;
}

}  // namespace

std::string FormatCertificate(const Certificate& cert) {
  std::string out;
  std::visit(
      [&](const auto& c) {
        out += fmt::format("cert kind={} n={} t={}\n", CertificateKindName(cert), c.n, c.t);
        AppendPhi(out, c.phi);
      },
      cert);
  if (const auto* c = std::get_if<SocpCertificate>(&cert)) {
    out += fmt::format("w {}\n", text::Exact(c->w));
    for (std::size_t k = 0; k < c->subsets.size(); ++k) {
      out += fmt::format("v {} {}\n", SubsetToken(c->subsets[k]),
                         text::Exact(c->v(static_cast<Eigen::Index>(k))));
    }
  } else if (const auto* c = std::get_if<SdpCertificate>(&cert)) {
    out += fmt::format("w {}\nX\n", text::Exact(c->w));
    for (Eigen::Index i = 0; i < c->x.rows(); ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        if (j > 0) out += ' ';
        out += text::Exact(c->x(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

Certificate ParseCertificate(std::string_view contents) {
  const std::vector<text::Line> lines = text::Tokenize(contents);
  if (lines.empty()) throw ParseError("empty certificate", 0);
  const text::Line& head = lines[0];
  if (head.tokens.size() != 4 || head.tokens[0] != "cert") {
    throw ParseError("expected 'cert kind=<lp|socp|sdp> n=<n> t=<t>'", head.number);
  }
  const std::string_view kind_tok = head.tokens[1];
  if (kind_tok.substr(0, 5) != "kind=") throw ParseError("expected kind=", head.number);
  const std::string_view kind = kind_tok.substr(5);
  if (kind != "lp" && kind != "socp" && kind != "sdp") {
    throw ParseError(fmt::format("unknown certificate kind '{}'", kind), head.number);
  }
  const long long n = text::ParseKeyInt(head.tokens[2], "n", head.number);
  const long long t = text::ParseKeyInt(head.tokens[3], "t", head.number);
  if (n < 1 || n > kMaxBits) throw ParseError("n out of range", head.number);
  if (t < 1) throw ParseError("t must be at least 1", head.number);

  SignedMeasure phi(static_cast<int>(n));
  std::set<CubeIndex> seen;
  std::optional<double> w;
  std::vector<Subset> subsets;
  std::vector<double> v;
  Eigen::MatrixXd x;
  std::size_t k = 1;
  for (; k < lines.size(); ++k) {
    const text::Line& line = lines[k];
    const std::string_view key = line.tokens[0];
    if (key == "phi") {
      if (line.tokens.size() != 3) throw ParseError("expected 'phi <point> <value>'", line.number);
      const std::string_view point = line.tokens[1];
      if (static_cast<long long>(point.size()) != n) {
        throw ParseError(fmt::format("point '{}' must have {} signs", point, n), line.number);
      }
      const CubeIndex idx = ParseCubeString(point, line.number);
      if (!seen.insert(idx).second) {
        throw ParseError(fmt::format("duplicate point {}", point), line.number);
      }
      phi[idx] = text::ParseDouble(line.tokens[2], line.number);
    } else if (key == "w") {
      if (kind == "lp") throw ParseError("lp certificates carry no w", line.number);
      if (line.tokens.size() != 2 || w) throw ParseError("expected a single 'w <value>'", line.number);
      w = text::ParseDouble(line.tokens[1], line.number);
    } else if (key == "v") {
      if (kind != "socp") throw ParseError("only socp certificates carry v", line.number);
      if (line.tokens.size() != 3) throw ParseError("expected 'v <subset> <value>'", line.number);
      subsets.push_back(ParseSubsetToken(line.tokens[1], static_cast<int>(n), line.number));
      v.push_back(text::ParseDouble(line.tokens[2], line.number));
    } else if (key == "X") {
      if (kind != "sdp") throw ParseError("only sdp certificates carry X", line.number);
      if (line.tokens.size() != 1) throw ParseError("'X' stands on its own line", line.number);
      break;
    } else {
      throw ParseError(fmt::format("unexpected keyword '{}'", key), line.number);
    }
  }

  if (kind == "lp") {
    return LpCertificate{static_cast<int>(n), static_cast<int>(t), std::move(phi)};
  }
  if (!w) throw ParseError("missing 'w' line", 0);
  if (kind == "socp") {
    SocpCertificate c{static_cast<int>(n), static_cast<int>(t), std::move(phi), *w,
                      std::move(subsets), Eigen::VectorXd::Map(v.data(), static_cast<Eigen::Index>(v.size()))};
    return c;
  }
  if (k == lines.size()) throw ParseError("missing 'X' block", 0);
  const std::int64_t order = 1 + TupleCount(static_cast<int>(n) + 1, static_cast<int>(t));
  if (static_cast<std::int64_t>(lines.size() - k - 1) != order) {
    throw ParseError(fmt::format("X block must have {} rows, found {}", order, lines.size() - k - 1),
                     lines.back().number);
  }
  x.resize(order, order);
  for (std::int64_t i = 0; i < order; ++i) {
    const text::Line& line = lines[k + 1 + static_cast<std::size_t>(i)];
    if (static_cast<std::int64_t>(line.tokens.size()) != i + 1) {
      throw ParseError(fmt::format("X row {} must have {} entries", i, i + 1), line.number);
    }
    for (std::int64_t j = 0; j <= i; ++j) {
      const double val = text::ParseDouble(line.tokens[j], line.number);
      x(i, j) = val;
      x(j, i) = val;
    }
  }
  return SdpCertificate{static_cast<int>(n), static_cast<int>(t), std::move(phi), std::move(x), *w};
}

}  // namespace cbq
