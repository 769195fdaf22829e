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

#include "cbq/cbnorm.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cbq/error.h"
#include "cbq/text.h"

namespace cbq {
namespace {

std::int64_t Pow(int base, int exp) { return TupleCount(base, exp); }

std::int64_t Choose2(std::int64_t k) { return k * (k - 1) / 2; }

void CheckSplit(int t, int s) {
  if (t < 1) throw DimensionError("tensor order must be at least 1");
  if (s < 0 || s > t / 2) {
    throw DimensionError(fmt::format("split s={} out of range [0, {}] for order {}", s, t / 2, t));
  }
}

// Reference-prefix family on vectors indexed by [n]^len stored from 'offset'
// on. Fixed parts sit in front (prefix) or behind (suffix) of the free part.
void AppendFamily(int n, int len, int offset, bool suffix_fixed, std::vector<GramEquality>* out) {
  for (int level = 1; level < len; ++level) {
    const std::int64_t fixed_count = Pow(n, level);
    const std::int64_t free_count = Pow(n, len - level);
    // Element of the free part adjacent to the fixed part.
    auto adjacent = [&](std::int64_t j) {
      return suffix_fixed ? j % n : j / Pow(n, len - level - 1);
    };
    auto index = [&](std::int64_t fixed, std::int64_t free) {
      return static_cast<int>(offset + (suffix_fixed ? free * fixed_count + fixed
                                                     : fixed * free_count + free));
    };
    for (std::int64_t fixed = 1; fixed < fixed_count; ++fixed) {
      for (std::int64_t j = 0; j < free_count; ++j) {
        for (std::int64_t k = j + 1; k < free_count; ++k) {
          out->push_back(GramEquality{suffix_fixed, level, index(fixed, j), index(fixed, k),
                                      index(0, j), index(0, k), adjacent(j) != adjacent(k)});
        }
      }
    }
  }
}

std::int64_t FamilyCount(int n, int len) {
  std::int64_t total = 0;
  for (int level = 1; level < len; ++level) {
    total += (Pow(n, level) - 1) * Choose2(Pow(n, len - level));
  }
  return total;
}

std::int64_t IndependentFamilyCount(int n, int len) {
  std::int64_t total = 0;
  for (int level = 1; level < len; ++level) {
    total += (Pow(n, level) - 1) * Choose2(n) * Pow(n, 2 * (len - level - 1));
  }
  return total;
}

}  // namespace

int CbLayout::order() const { return u_count() + v_count(); }
int CbLayout::u_count() const { return s == 0 ? 1 : static_cast<int>(Pow(n, s)); }
int CbLayout::v_count() const { return static_cast<int>(Pow(n, t - s)); }

CbLayout MakeLayout(int n, int t, int s) {
  CheckSplit(t, s);
  if (n < 1) throw DimensionError("dimension must be positive");
  const CbLayout layout{n, t, s};
  if (Pow(n, t - s) + Pow(n, s) > 20000) throw DimensionError("Gram matrix order too large");
  return layout;
}

std::vector<GramEquality> BuildConstraints(int n, int t, int s) {
  const CbLayout layout = MakeLayout(n, t, s);
  std::vector<GramEquality> family;
  if (s >= 1) AppendFamily(n, s, 0, /*suffix_fixed=*/true, &family);
  AppendFamily(n, t - s, layout.v_offset(), /*suffix_fixed=*/false, &family);
  return family;
}

std::int64_t ConstraintCount(int n, int t, int s) {
  CheckSplit(t, s);
  return FamilyCount(n, s) + FamilyCount(n, t - s);
}

std::int64_t IndependentConstraintCount(int n, int t, int s) {
  CheckSplit(t, s);
  return IndependentFamilyCount(n, s) + IndependentFamilyCount(n, t - s);
}

Eigen::MatrixXd BuildObjective(const Tensor& tensor, int s) {
  const CbLayout layout = MakeLayout(tensor.dim(), tensor.order(), s);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(layout.order(), layout.order());
  const std::int64_t v_count = layout.v_count();
  for (const auto& [index, value] : tensor.entries()) {
    const std::int64_t rank = TupleRank(index, tensor.dim());
    const int a = static_cast<int>(rank / v_count);
    const int b = layout.v_offset() + static_cast<int>(rank % v_count);
    c(a, b) = c(b, a) = 0.5 * value;
  }
  return c;
}

CbRows AddCbConstraints(conic::Problem& problem, int block, const CbLayout& layout,
                        const std::vector<GramEquality>& family) {
  CbRows rows;
  for (int i = 0; i < layout.order(); ++i) {
    const int row = problem.AddRow(1.0, fmt::format("diag[{}]", i));
    problem.AddPsdTerm(row, block, i, i, 1.0);
    rows.diagonal.push_back(row);
  }
  for (const GramEquality& eq : family) {
    if (!eq.independent) {
      rows.equality.push_back(-1);
      continue;
    }
    const int row = problem.AddRow(
        0.0, fmt::format("gram {} l={} X[{},{}]-X[{},{}]", eq.u_side ? "u" : "v", eq.level, eq.a,
                         eq.b, eq.ref_a, eq.ref_b));
    problem.AddPsdTerm(row, block, eq.a, eq.b, 0.5);
    problem.AddPsdTerm(row, block, eq.ref_a, eq.ref_b, -0.5);
    rows.equality.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd ApplyAdjoint(const std::vector<GramEquality>& family, const Eigen::VectorXd& y,
                             int order) {
  if (static_cast<std::size_t>(y.size()) != family.size()) {
    throw DimensionError("multiplier count does not match the constraint family");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(order, order);
  for (std::size_t r = 0; r < family.size(); ++r) {
    const GramEquality& eq = family[r];
    const double h = 0.5 * y(static_cast<Eigen::Index>(r));
    m(eq.a, eq.b) += h;
    m(eq.b, eq.a) += h;
    m(eq.ref_a, eq.ref_b) -= h;
    m(eq.ref_b, eq.ref_a) -= h;
  }
  return m;
}

double ConsistencyResidual(const std::vector<GramEquality>& family, const Eigen::MatrixXd& x) {
  double worst = 0.0;
  for (const GramEquality& eq : family) {
    worst = std::max(worst, std::fabs(x(eq.a, eq.b) - x(eq.ref_a, eq.ref_b)));
  }
  return worst;
}

CbResult ComputeCbNorm(const Tensor& tensor, int s, const conic::SolverOptions& options) {
  CbResult result;
  result.layout = MakeLayout(tensor.dim(), tensor.order(), s);
  const CbLayout& layout = result.layout;
  const std::vector<GramEquality> family = BuildConstraints(layout.n, layout.t, s);

  conic::Problem problem(conic::Sense::kMaximize);
  const int block = problem.AddPsdBlock(layout.order());
  const Eigen::MatrixXd c = BuildObjective(tensor, s);
  for (int col = 0; col < layout.order(); ++col) {
    for (int row = 0; row <= col; ++row) {
      if (c(row, col) != 0.0) problem.AddPsdObjective(block, row, col, c(row, col));
    }
  }
  const CbRows rows = AddCbConstraints(problem, block, layout, family);
  result.solution = conic::Solve(problem, options);
  const conic::Solution& sol = result.solution;

  result.family_size = static_cast<std::int64_t>(family.size());
  result.rows_solved = problem.num_rows() - layout.order();
  result.value = sol.primal_value;
  result.gram = sol.x_psd[0];
  result.dual.n = layout.n;
  result.dual.t = layout.t;
  result.dual.s = s;
  result.dual.lambda.resize(layout.order());
  for (int i = 0; i < layout.order(); ++i) result.dual.lambda(i) = sol.y(rows.diagonal[i]);
  result.dual.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family.size()));
  for (std::size_t r = 0; r < family.size(); ++r) {
    if (rows.equality[r] >= 0) result.dual.y(static_cast<Eigen::Index>(r)) = sol.y(rows.equality[r]);
  }
  result.dual_value = result.dual.lambda.sum();
  result.upper_bound = CertifiedUpperBound(tensor, result.dual);
  return result;
}

Eigen::MatrixXd DualSlack(const Tensor& tensor, const CbDual& dual) {
  const CbLayout layout = MakeLayout(tensor.dim(), tensor.order(), dual.s);
  if (dual.n != tensor.dim() || dual.t != tensor.order()) {
    throw DimensionError("dual point belongs to a different tensor shape");
  }
  if (dual.lambda.size() != layout.order()) throw DimensionError("lambda has the wrong length");
  const std::vector<GramEquality> family = BuildConstraints(layout.n, layout.t, dual.s);
  Eigen::MatrixXd slack = ApplyAdjoint(family, dual.y, layout.order());
  slack.diagonal() += dual.lambda;
  slack -= BuildObjective(tensor, dual.s);
  return slack;
}

namespace {
double MinEigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}
}  // namespace

double CbUpperBoundCheck(const Tensor& tensor, const CbDual& dual, double feas_tol) {
  const double lmin = MinEigenvalue(DualSlack(tensor, dual));
  if (lmin < -feas_tol) {
    throw NumericalError(fmt::format("dual slack is not PSD: minimum eigenvalue {:.3e}", lmin));
  }
  return dual.lambda.sum();
}

double CertifiedUpperBound(const Tensor& tensor, const CbDual& dual) {
  const Eigen::MatrixXd slack = DualSlack(tensor, dual);
  return dual.lambda.sum() + static_cast<double>(slack.rows()) * std::max(0.0, -MinEigenvalue(slack));
}

std::string FormatDual(const CbDual& dual) {
  std::string out = fmt::format("dual n={} t={} s={} N={} m={}\nlambda", dual.n, dual.t, dual.s,
                                dual.lambda.size(), dual.y.size());
  for (double v : dual.lambda) out += " " + text::Exact(v);
  out += "\ny";
  for (double v : dual.y) out += " " + text::Exact(v);
  out += "\n";
  return out;
}

CbDual ParseDual(std::string_view contents) {
  const std::vector<text::Line> lines = text::Tokenize(contents);
  if (lines.empty()) throw ParseError("empty dual file", 0);
  const text::Line& head = lines[0];
  if (head.tokens.size() != 6 || head.tokens[0] != "dual") {
    throw ParseError("expected 'dual n=<n> t=<t> s=<s> N=<order> m=<count>'", head.number);
  }
  CbDual dual;
  dual.n = static_cast<int>(text::ParseKeyInt(head.tokens[1], "n", head.number));
  dual.t = static_cast<int>(text::ParseKeyInt(head.tokens[2], "t", head.number));
  dual.s = static_cast<int>(text::ParseKeyInt(head.tokens[3], "s", head.number));
  const long long order = text::ParseKeyInt(head.tokens[4], "N", head.number);
  const long long m = text::ParseKeyInt(head.tokens[5], "m", head.number);
  if (lines.size() != 3) throw ParseError("expected a lambda line and a y line", head.number);
  auto read = [](const text::Line& line, std::string_view key, long long count) {
    if (line.tokens.empty() || line.tokens[0] != key) {
      throw ParseError(fmt::format("expected '{}' line", key), line.number);
    }
    if (static_cast<long long>(line.tokens.size()) != count + 1) {
      throw ParseError(fmt::format("expected {} values after '{}'", count, key), line.number);
    }
    Eigen::VectorXd v(count);
    for (long long k = 0; k < count; ++k) v(k) = text::ParseDouble(line.tokens[k + 1], line.number);
    return v;
  };
  dual.lambda = read(lines[1], "lambda", order);
  dual.y = read(lines[2], "y", m);
  return dual;
}

}  // namespace cbq
