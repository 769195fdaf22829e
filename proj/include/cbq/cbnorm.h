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

#ifndef CBQ_CBNORM_H_
#define CBQ_CBNORM_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cbq/conic.h"
#include "cbq/tensor.h"

// Semidefinite programs for the completely bounded norm of a real tensor.
//
// For a split s the Gram matrix is indexed by vectors
//   s = 0:  u, then v_i for i in [n]^t;
//   s >= 1: u_a for a in [n]^s, then v_b for b in [n]^(t-s);
// each family in lexicographic tuple order. The program is
//   max <C_s(T), X>  s.t.  diag(X) = e,  A_s(X) = 0,  X PSD,
// with dual
//   min <e, lambda>  s.t.  Diag(lambda) + A_s*(y) - C_s(T) PSD.
namespace cbq {

struct CbLayout {
  int n;
  int t;
  int s;

  int order() const;
  int u_count() const;  // 1 for s = 0, n^s otherwise
  int v_count() const;  // n^(t-s)
  int v_offset() const { return u_count(); }
};

CbLayout MakeLayout(int n, int t, int s);

// X[a][b] = X[ref_a][ref_b], 0-based matrix indices with a < b and
// ref_a < ref_b. The reference pair replaces the fixed part of both tuples by
// (1, ..., 1).
struct GramEquality {
  bool u_side;
  int level;  // length of the fixed part
  int a;
  int b;
  int ref_a;
  int ref_b;
  // Part of a linearly independent subset that implies the whole family:
  // pairs whose free parts differ next to the fixed part.
  bool independent;
};

// The complete reference-prefix family for split s (diag(X) = e excluded).
std::vector<GramEquality> BuildConstraints(int n, int t, int s);

// Closed-form size of that family.
std::int64_t ConstraintCount(int n, int t, int s);

// Size of the independent subset.
std::int64_t IndependentConstraintCount(int n, int t, int s);

// Symmetric objective with <C_s(T), X> = sum_i T_i <u-part, v-part>.
Eigen::MatrixXd BuildObjective(const Tensor& tensor, int s);

// Adds diag(X) = e and the independent consistency rows for the PSD block
// 'block' of the given layout, returning the row index of each family member
// (-1 for members left out).
struct CbRows {
  std::vector<int> diagonal;
  std::vector<int> equality;
};
CbRows AddCbConstraints(conic::Problem& problem, int block, const CbLayout& layout,
                        const std::vector<GramEquality>& family);

// sum_r y_r A_r for the family (A_r X = X[a][b] - X[ref_a][ref_b]).
Eigen::MatrixXd ApplyAdjoint(const std::vector<GramEquality>& family, const Eigen::VectorXd& y,
                             int order);

// Largest |X[a][b] - X[ref_a][ref_b]| over the family.
double ConsistencyResidual(const std::vector<GramEquality>& family, const Eigen::MatrixXd& x);

struct CbDual {
  int n = 0;
  int t = 0;
  int s = 0;
  Eigen::VectorXd lambda;  // one per Gram index
  Eigen::VectorXd y;       // one per family member (zero off the solved subset)
};

struct CbResult {
  CbLayout layout{};
  conic::Solution solution;
  double value = 0.0;       // primal objective
  double dual_value = 0.0;  // <e, lambda>
  double upper_bound = 0.0; // valid for any (lambda, y), see CertifiedUpperBound
  Eigen::MatrixXd gram;     // optimal X
  CbDual dual;
  std::int64_t family_size = 0;
  std::int64_t rows_solved = 0;
};

// Throws DimensionError unless 0 <= s <= t / 2.
CbResult ComputeCbNorm(const Tensor& tensor, int s, const conic::SolverOptions& options = {});

// Diag(lambda) + A_s*(y) - C_s(T).
Eigen::MatrixXd DualSlack(const Tensor& tensor, const CbDual& dual);

// Returns <e, lambda> when the dual slack is PSD up to feas_tol; otherwise
// throws NumericalError carrying its minimum eigenvalue.
double CbUpperBoundCheck(const Tensor& tensor, const CbDual& dual, double feas_tol = 1e-9);

// <e, lambda> + order * max(0, -lambda_min(slack)): an upper bound on the cb
// norm for any dual point, since Tr(X) equals the order on the feasible set.
double CertifiedUpperBound(const Tensor& tensor, const CbDual& dual);

// Dual file:
//   dual n=<n> t=<t> s=<s> N=<order> m=<family size>
//   lambda <v_1> ... <v_N>
//   y <v_1> ... <v_m>
std::string FormatDual(const CbDual& dual);
CbDual ParseDual(std::string_view text);

}  // namespace cbq

#endif  // CBQ_CBNORM_H_
