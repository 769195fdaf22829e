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

#ifndef CBQ_TENSOR_H_
#define CBQ_TENSOR_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cbq {

// 1-based multi-index (i_1, ..., i_t), each entry in 1..dim.
using IndexTuple = std::vector<int>;

// Subset of [n] as a sorted list of 1-based elements.
using Subset = std::vector<int>;

// Order-t real tensor on the index set [dim]^t with sparse coordinate storage.
// Entries are kept in lexicographic tuple order; explicit zeros are never
// stored. Values are immutable after construction.
class Tensor {
 public:
  using Entries = std::map<IndexTuple, double>;

  // Zero tensor.
  Tensor(int order, int dim);

  // Throws DimensionError on a malformed tuple and Error on duplicates.
  static Tensor FromEntries(int order, int dim,
                            std::span<const std::pair<IndexTuple, double>> entries);

  // values has dim^order entries in lexicographic tuple order.
  static Tensor FromDense(int order, int dim, std::span<const double> values);

  int order() const { return order_; }
  int dim() const { return dim_; }
  const Entries& entries() const { return entries_; }
  std::size_t nonzeros() const { return entries_.size(); }

  double at(const IndexTuple& index) const;

  // Dense values in lexicographic tuple order (dim^order of them).
  std::vector<double> ToDense() const;

  Tensor Scaled(double alpha) const;

  // T'_{i_t, ..., i_1} = T_{i_1, ..., i_t}.
  Tensor Reversed() const;

 private:
  int order_;
  int dim_;
  Entries entries_;
};

// Number of tuples in [dim]^len, throws DimensionError on overflow.
std::int64_t TupleCount(int dim, int len);

// 0-based lexicographic rank of a 1-based tuple, and its inverse.
std::int64_t TupleRank(std::span<const int> tuple, int dim);
IndexTuple TupleFromRank(std::int64_t rank, int dim, int len);

// Calls fn on every tuple of [dim]^len in lexicographic order.
void ForEachTuple(int dim, int len, const std::function<void(const IndexTuple&)>& fn);

// sum_i T_i z_1(i_1) ... z_t(i_t). Throws DimensionError unless there are
// exactly t vectors of length dim.
double EvalMultilinear(const Tensor& tensor, std::span<const std::vector<double>> z);

// EvalMultilinear with every slot equal to (x, 1); x is a +-1 vector of
// length n and the tensor must have dim == n + 1.
double EvalDiagonal(const Tensor& tensor, std::span<const int> x);

// { k in [n] : k occurs an odd number of times in index }; entries equal to
// n + 1 never contribute.
Subset OddSupport(std::span<const int> index, int n);

// |I_S|: the number of tuples in [n+1]^t whose odd support is S. Returns 0
// when |S| > t.
std::uint64_t Multiplicity(const Subset& s, int n, int t);

// Order t+1 tensor with T'_{i, dim} = T_i and zero elsewhere.
Tensor PadSlot(const Tensor& tensor);

// Text format:
//   tensor t=<order> N=<dim>
//   <i_1> ... <i_t> <value>
// '#' starts a comment; absent entries are zero; duplicates are an error.
Tensor ParseTensor(std::string_view text);
Tensor ReadTensor(const std::string& path);
std::string FormatTensor(const Tensor& tensor);

}  // namespace cbq

#endif  // CBQ_TENSOR_H_
