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

#ifndef CBQ_CONIC_H_
#define CBQ_CONIC_H_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

// A small primal-dual interior-point solver for conic programs over PSD
// blocks, a nonnegative orthant and free variables.
//
// Primal (maximize sense shown; minimize flips the inequalities):
//
//   max  sum_k <C_k, X_k> + c'x
//   s.t. sum_k <A_ik, X_k> + a_i'x = b_i     (i = 1..m)
//        X_k PSD,  x_j >= 0 (nonnegative) or x_j free
//
// Dual:
//
//   min  b'y
//   s.t. Z_k = sum_i y_i A_ik - C_k PSD,
//        z_j = a_{.j}'y - c_j >= 0 (nonnegative) or = 0 (free)
//
// All constraint matrices A_ik and objective blocks C_k are symmetric and are
// given entrywise: a term (r, c, v) sets both (r, c) and (c, r) to v, so the
// row X_rc - X_pq = 0 between off-diagonal entries is written with v = +-1/2.
namespace cbq::conic {

enum class Sense { kMinimize, kMaximize };
enum class ScalarKind { kNonnegative, kFree };

enum class Status {
  kOptimal,
  kInfeasibleEvidence,  // iterates diverged
  kGapNotReached,       // iteration cap or stalled; best iterate returned
};

std::string_view StatusName(Status status);

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-9;
  int max_iter = 200;
  bool verbose = false;  // iteration log on stderr
};

struct PsdTerm {
  int block;
  int r;
  int c;  // r <= c
  double value;
};

struct ScalarTerm {
  int var;
  double value;
};

struct Row {
  double rhs = 0.0;
  std::string label;
  std::vector<PsdTerm> psd;
  std::vector<ScalarTerm> scalar;
};

class Problem {
 public:
  explicit Problem(Sense sense = Sense::kMaximize) : sense_(sense) {}

  int AddPsdBlock(int order);
  // Returns the index of the first new scalar.
  int AddScalars(ScalarKind kind, int count = 1);
  int AddRow(double rhs, std::string label = {});

  // Coefficient terms accumulate; (r, c) may be given in either order.
  void AddPsdTerm(int row, int block, int r, int c, double value);
  void AddScalarTerm(int row, int var, double value);
  void AddPsdObjective(int block, int r, int c, double value);
  void AddScalarObjective(int var, double value);

  Sense sense() const { return sense_; }
  int num_blocks() const { return static_cast<int>(block_orders_.size()); }
  int block_order(int k) const { return block_orders_[k]; }
  int num_scalars() const { return static_cast<int>(scalar_kinds_.size()); }
  ScalarKind scalar_kind(int j) const { return scalar_kinds_[j]; }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Row& row(int i) const { return rows_[i]; }
  const Eigen::MatrixXd& objective_block(int k) const { return objective_blocks_[k]; }
  const Eigen::VectorXd& scalar_objective() const { return scalar_objective_; }

  // <A_i, X> + a_i'x for a single row.
  double RowActivity(int i, const std::vector<Eigen::MatrixXd>& x_psd,
                     const Eigen::VectorXd& x_scalar) const;

  // Human-readable standard form, one constraint per line.
  std::string Dump() const;

 private:
  Sense sense_;
  std::vector<int> block_orders_;
  std::vector<Eigen::MatrixXd> objective_blocks_;
  std::vector<ScalarKind> scalar_kinds_;
  Eigen::VectorXd scalar_objective_;
  std::vector<Row> rows_;
};

struct Solution {
  Status status = Status::kGapNotReached;
  std::vector<Eigen::MatrixXd> x_psd;
  Eigen::VectorXd x_scalar;
  Eigen::VectorXd y;                  // one multiplier per row
  std::vector<Eigen::MatrixXd> z_psd;  // dual slack, recomputed from y
  Eigen::VectorXd z_scalar;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // |primal_value - dual_value|
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  int iterations = 0;
  std::vector<int> dropped_rows;  // exact duplicates removed before solving
};

struct Residuals {
  double primal_infeas;  // max(|Ax - b|_inf, cone violation of x)
  double dual_infeas;    // max(free-column residual, cone violation of z)
  double gap;            // |primal value - dual value|
};

// Recomputes everything from the problem data and the returned point only.
Residuals ComputeResiduals(const Problem& problem, const Solution& solution);

// Throws SolverError when the equality rows are numerically rank deficient
// (naming the redundant rows) or contradict each other.
Solution Solve(const Problem& problem, const SolverOptions& options = {});

}  // namespace cbq::conic

#endif  // CBQ_CONIC_H_
