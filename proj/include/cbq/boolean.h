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

#ifndef CBQ_BOOLEAN_H_
#define CBQ_BOOLEAN_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbq/tensor.h"

namespace cbq {

// Points of {+1,-1}^n are numbered by reading the sign string x_1 ... x_n as a
// binary number with '+' = 0 and '-' = 1, x_1 most significant. Subsets of
// [n] use the same bit positions (element k <-> bit n - k), so that
// chi_S(x) = (-1)^popcount(mask(S) & index(x)).
using CubeIndex = std::uint32_t;
using SubsetMask = std::uint32_t;

constexpr int kMaxBits = 24;

std::size_t CubeSize(int n);
std::vector<int> CubePoint(CubeIndex index, int n);
CubeIndex IndexOfPoint(std::span<const int> x);
std::string CubeString(CubeIndex index, int n);
CubeIndex ParseCubeString(std::string_view s, int line);

SubsetMask MaskOf(const Subset& s, int n);
Subset SubsetOf(SubsetMask mask, int n);
inline int Character(SubsetMask s, CubeIndex x) {
  return (__builtin_popcount(s & x) & 1) ? -1 : 1;
}

// All S subset of [n] with |S| <= t, ordered by size then lexicographically.
std::vector<Subset> LowDegreeSubsets(int n, int t);

// Partial Boolean function f : D -> {+1,-1}, D a nonempty subset of the cube.
class BooleanFunction {
 public:
  // values[x] is +1, -1, or 0 for x outside D; size must be 2^n.
  BooleanFunction(int n, std::vector<int> values);

  static BooleanFunction And(int n);
  static BooleanFunction Or(int n);
  static BooleanFunction Parity(int n);
  static BooleanFunction Constant(int n, int value);

  int n() const { return n_; }
  bool InDomain(CubeIndex x) const { return values_[x] != 0; }
  // +1 or -1 on D, 0 outside.
  int value(CubeIndex x) const { return values_[x]; }
  std::size_t domain_size() const { return domain_size_; }
  bool is_total() const { return domain_size_ == values_.size(); }
  // Returns a copy with D shrunk to the given points.
  BooleanFunction Restricted(std::span<const CubeIndex> keep) const;

 private:
  int n_;
  std::vector<int> values_;
  std::size_t domain_size_;
};

// Text format:
//   boolfn n=<bits>
//   <+-string> <+1|-1>
// Inputs that are not listed are outside D.
BooleanFunction ParseBooleanFunction(std::string_view text);
BooleanFunction LoadFunction(const std::string& path);
std::string FormatBooleanFunction(const BooleanFunction& f);

// Real function on the full cube, stored densely in cube order.
class SignedMeasure {
 public:
  explicit SignedMeasure(int n);
  SignedMeasure(int n, std::vector<double> values);

  int n() const { return n_; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  double operator[](CubeIndex x) const { return values_[x]; }
  double& operator[](CubeIndex x) { return values_[x]; }
  double L1Norm() const;

 private:
  int n_;
  std::vector<double> values_;
};

// Fourier coefficients phi_hat(S) = 2^-n sum_x phi(x) chi_S(x), indexed by
// subset mask.
class FourierTable {
 public:
  FourierTable(int n, std::vector<double> coefficients);

  int n() const { return n_; }
  double operator[](SubsetMask s) const { return coefficients_[s]; }
  double at(const Subset& s) const { return coefficients_[MaskOf(s, n_)]; }
  std::span<const double> coefficients() const { return coefficients_; }

 private:
  int n_;
  std::vector<double> coefficients_;
};

// Butterfly transform, cost n 2^n.
FourierTable Fourier(const SignedMeasure& phi);
SignedMeasure InverseFourier(const FourierTable& table);

// chi_S as a signed measure.
SignedMeasure CharacterMeasure(const Subset& s, int n);

// For every i in [n+1]^t (lexicographic rank order) the moment
// sum_x phi(x) z_{i_1} ... z_{i_t} with z = (x, 1), which equals
// 2^n phi_hat(odd_support(i)).
std::vector<double> MomentVector(const SignedMeasure& phi, int t);

}  // namespace cbq

#endif  // CBQ_BOOLEAN_H_
