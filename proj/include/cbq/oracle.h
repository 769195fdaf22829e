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

#ifndef CBQ_ORACLE_H_
#define CBQ_ORACLE_H_

#include <cstdint>
#include <vector>

#include "cbq/tensor.h"
#include "cbq/witness.h"

// Solver-free lower bounds on the cb norm, evaluated directly on orthogonal
// matrices.
namespace cbq {

struct AscentConfig {
  int d = 0;  // 0 selects DefaultAscentDimension
  int restarts = 10;
  int max_iter = 500;
  double initial_step = 1.0;  // scaled by 1 / sum |T_i|
  std::uint64_t seed = 0;
};

// min(n^floor(t/2) + n^ceil(t/2), 8).
int DefaultAscentDimension(int n, int t);

struct AscentResult {
  double value = 0.0;  // ||sum_i T_i U(i)|| at the best restart
  CbWitness witness;   // u, v are top singular vectors
  int best_restart = 0;
  std::vector<double> restart_values;
};

// Restart 0 starts from the best sign point (U_j(i) = z_j(i) I); the others
// from random orthogonal matrices. Iterates are gradient steps retracted to
// the orthogonal group by the polar factor, accepted only when the operator
// norm does not decrease.
AscentResult AscentLowerBound(const Tensor& tensor, const AscentConfig& config);

struct SignBound {
  double value = 0.0;
  std::vector<std::vector<int>> signs;  // [slot][i], +-1
};

// max over z_1, ..., z_t in {+-1}^n of |T(z_1, ..., z_t)|. Throws
// DimensionError when n * t > 20.
SignBound SignEnumerationBound(const Tensor& tensor);

}  // namespace cbq

#endif  // CBQ_ORACLE_H_
