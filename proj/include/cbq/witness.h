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

#ifndef CBQ_WITNESS_H_
#define CBQ_WITNESS_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbq/cbnorm.h"
#include "cbq/tensor.h"

// Turns an optimal Gram matrix of the cb-norm program into unit vectors u, v
// and orthogonal matrices U_j(i) with
//   <u, U_1(i_1) ... U_t(i_t) v> = X[u-part of i][v-part of i].
namespace cbq {

struct GramFactor {
  int d = 0;
  Eigen::MatrixXd vectors;  // d x N; column k reproduces row/column k of X
  std::vector<std::string> labels;
};

// Eigenvalues below rank_tol * lambda_max are dropped (d = numerical rank).
// Throws NumericalError when lambda_min < -1e-7.
GramFactor GramFactorize(const Eigen::MatrixXd& x, double rank_tol = 1e-7);

// Names the Gram indices of a layout: "u", "u_<a>", "v_<b>" with tuples
// written as comma-separated indices.
std::vector<std::string> GramLabels(const CbLayout& layout);

// Orthogonal U with U xs.col(k) = ys.col(k). Requires equal Gram matrices to
// 1e-6 (NumericalError names the worst entry otherwise). The map is fixed on
// an independent subset, extended by orthonormal bases of the orthogonal
// complements, and finished with one polar correction.
Eigen::MatrixXd OrthogonalExtension(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys);

struct CbWitness {
  int d = 0;
  int n = 0;
  int t = 0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  std::vector<std::vector<Eigen::MatrixXd>> matrices;  // [j][i], 0-based

  const Eigen::MatrixXd& U(int j, int i) const { return matrices[j - 1][i - 1]; }
};

struct WitnessDiagnostics {
  double consistency_residual = 0.0;  // before repair
  double repair_change = 0.0;         // largest entry change made by repair
  double reproduction_error = 0.0;    // max |<u, U(i) v> - X entry|
  double orthogonality_residual = 0.0;
};

// Averages every class of entries the consistency family forces equal and
// resets the diagonal to one; returns the largest change.
double RepairGram(const std::vector<GramEquality>& family, Eigen::MatrixXd* x);

// Runs the induction on an exact factor (residual of the consistency family
// checked against 1e-6 first).
CbWitness RecoverWitness(const GramFactor& factor, int n, int t, int s);

// Check, repair, factor and recover from an optimal Gram matrix.
CbWitness RecoverWitnessFromGram(const Eigen::MatrixXd& x, int n, int t, int s,
                                 WitnessDiagnostics* diagnostics = nullptr);

// U(i) = U_1(i_1) ... U_t(i_t).
Eigen::MatrixXd WitnessProduct(const CbWitness& w, const IndexTuple& index);

// sum_i T_i <u, U(i) v>.
double WitnessObjective(const Tensor& tensor, const CbWitness& w);

// Spectral norm of sum_i T_i U(i).
double WitnessOperatorNorm(const Tensor& tensor, const CbWitness& w);

// max_{j,i} |U_j(i)' U_j(i) - I|_max.
double OrthogonalityResidual(const CbWitness& w);

// Text dump:
//   witness d=<d> n=<n> t=<t>
//   u <d values>
//   v <d values>
//   U j=<j> i=<i>
//   <d rows of d values>
std::string FormatWitness(const CbWitness& w);

}  // namespace cbq

#endif  // CBQ_WITNESS_H_
