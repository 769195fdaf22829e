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

#include "cbq/boolean.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "cbq/error.h"
#include "cbq/kernels.h"
#include "cbq/text.h"

namespace cbq {
namespace {

void CheckBits(int n) {
  if (n < 1 || n > kMaxBits) {
    throw DimensionError(fmt::format("number of bits must lie in 1..{}, got {}", kMaxBits, n));
  }
}

}  // namespace

std::size_t CubeSize(int n) { return std::size_t{1} << n; }

std::vector<int> CubePoint(CubeIndex index, int n) {
  std::vector<int> x(n);
  for (int k = 1; k <= n; ++k) x[k - 1] = (index >> (n - k)) & 1 ? -1 : 1;
  return x;
}

CubeIndex IndexOfPoint(std::span<const int> x) {
  const int n = static_cast<int>(x.size());
  CubeIndex index = 0;
  for (int k = 1; k <= n; ++k) {
    if (x[k - 1] == -1) {
      index |= CubeIndex{1} << (n - k);
    } else if (x[k - 1] != 1) {
      throw DimensionError("cube points have +-1 entries");
    }
  }
  return index;
}

std::string CubeString(CubeIndex index, int n) {
  std::string s(n, '+');
  for (int k = 1; k <= n; ++k) {
    if ((index >> (n - k)) & 1) s[k - 1] = '-';
  }
  return s;
}

CubeIndex ParseCubeString(std::string_view s, int line) {
  CubeIndex index = 0;
  const int n = static_cast<int>(s.size());
  for (int k = 1; k <= n; ++k) {
    const char c = s[k - 1];
    if (c == '-') {
      index |= CubeIndex{1} << (n - k);
    } else if (c != '+') {
      throw ParseError("input string may only contain '+' and '-': '" + std::string(s) + "'",
                       line);
    }
  }
  return index;
}

SubsetMask MaskOf(const Subset& s, int n) {
  SubsetMask mask = 0;
  for (int k : s) {
    if (k < 1 || k > n) throw DimensionError(fmt::format("subset element {} outside 1..{}", k, n));
    mask |= SubsetMask{1} << (n - k);
  }
  return mask;
}

Subset SubsetOf(SubsetMask mask, int n) {
  Subset s;
  for (int k = 1; k <= n; ++k) {
    if ((mask >> (n - k)) & 1) s.push_back(k);
  }
  return s;
}

std::vector<Subset> LowDegreeSubsets(int n, int t) {
  std::vector<Subset> out;
  for (int size = 0; size <= std::min(n, t); ++size) {
    // Lexicographic combinations of [n] of the given size.
    Subset s(size);
    for (int k = 0; k < size; ++k) s[k] = k + 1;
    while (true) {
      out.push_back(s);
      int k = size - 1;
      while (k >= 0 && s[k] == n - size + k + 1) --k;
      if (k < 0) break;
      ++s[k];
      for (int j = k + 1; j < size; ++j) s[j] = s[j - 1] + 1;
    }
  }
  return out;
}

BooleanFunction::BooleanFunction(int n, std::vector<int> values)
    : n_(n), values_(std::move(values)), domain_size_(0) {
  CheckBits(n);
  if (values_.size() != CubeSize(n)) {
    throw DimensionError("Boolean function table must have 2^n entries");
  }
  for (int v : values_) {
    if (v != 0 && v != 1 && v != -1) throw DimensionError("Boolean function values are +-1");
    if (v != 0) ++domain_size_;
  }
  if (domain_size_ == 0) throw DimensionError("Boolean function domain is empty");
}

BooleanFunction BooleanFunction::And(int n) {
  std::vector<int> v(CubeSize(n), -1);
  v[0] = 1;  // all '+'
  return BooleanFunction(n, std::move(v));
}

BooleanFunction BooleanFunction::Or(int n) {
  std::vector<int> v(CubeSize(n), 1);
  v.back() = -1;  // all '-'
  return BooleanFunction(n, std::move(v));
}

BooleanFunction BooleanFunction::Parity(int n) {
  std::vector<int> v(CubeSize(n));
  const SubsetMask all = static_cast<SubsetMask>(CubeSize(n) - 1);
  for (CubeIndex x = 0; x < v.size(); ++x) v[x] = Character(all, x);
  return BooleanFunction(n, std::move(v));
}

BooleanFunction BooleanFunction::Constant(int n, int value) {
  return BooleanFunction(n, std::vector<int>(CubeSize(n), value));
}

BooleanFunction BooleanFunction::Restricted(std::span<const CubeIndex> keep) const {
  std::vector<int> v(values_.size(), 0);
  for (CubeIndex x : keep) v.at(x) = values_.at(x);
  return BooleanFunction(n_, std::move(v));
}

BooleanFunction ParseBooleanFunction(std::string_view contents) {
  const auto lines = text::Tokenize(contents);
  if (lines.empty()) throw ParseError("missing 'boolfn n=<bits>' header", 0);
  const auto& header = lines.front();
  if (header.tokens.size() != 2 || header.tokens[0] != "boolfn") {
    throw ParseError("expected header 'boolfn n=<bits>'", header.number);
  }
  const long long n = text::ParseKeyInt(header.tokens[1], "n", header.number);
  if (n < 1 || n > kMaxBits) {
    throw ParseError(fmt::format("number of bits must lie in 1..{}", kMaxBits), header.number);
  }
  std::vector<int> values(CubeSize(static_cast<int>(n)), 0);
  std::vector<int> defined_on(values.size(), 0);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& line = lines[k];
    if (line.tokens.size() != 2) {
      throw ParseError("expected '<+-string> <+1|-1>'", line.number);
    }
    if (static_cast<long long>(line.tokens[0].size()) != n) {
      throw ParseError(fmt::format("input string must have length {}", n), line.number);
    }
    const CubeIndex x = ParseCubeString(line.tokens[0], line.number);
    const std::string_view v = line.tokens[1];
    int value = 0;
    if (v == "+1" || v == "1") {
      value = 1;
    } else if (v == "-1") {
      value = -1;
    } else {
      throw ParseError("value must be +1 or -1, got '" + std::string(v) + "'", line.number);
    }
    if (defined_on[x] != 0) {
      throw ParseError(fmt::format("duplicate input {} (first given on line {})",
                                   line.tokens[0], defined_on[x]),
                       line.number);
    }
    defined_on[x] = line.number;
    values[x] = value;
  }
  if (std::all_of(values.begin(), values.end(), [](int v) { return v == 0; })) {
    throw ParseError("function has an empty domain", 0);
  }
  return BooleanFunction(static_cast<int>(n), std::move(values));
}

BooleanFunction LoadFunction(const std::string& path) {
  return ParseBooleanFunction(text::ReadFile(path));
}

std::string FormatBooleanFunction(const BooleanFunction& f) {
  std::string out = fmt::format("boolfn n={}\n", f.n());
  for (CubeIndex x = 0; x < CubeSize(f.n()); ++x) {
    if (f.InDomain(x)) out += fmt::format("{} {}\n", CubeString(x, f.n()), f.value(x) > 0 ? "+1" : "-1");
  }
  return out;
}

SignedMeasure::SignedMeasure(int n) : n_(n), values_() {
  CheckBits(n);
  values_.assign(CubeSize(n), 0.0);
}

SignedMeasure::SignedMeasure(int n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  CheckBits(n);
  if (values_.size() != CubeSize(n)) throw DimensionError("signed measure needs 2^n values");
}

double SignedMeasure::L1Norm() const {
  double s = 0.0;
  for (double v : values_) s += std::fabs(v);
  return s;
}

FourierTable::FourierTable(int n, std::vector<double> coefficients)
    : n_(n), coefficients_(std::move(coefficients)) {
  CheckBits(n);
  if (coefficients_.size() != CubeSize(n)) throw DimensionError("Fourier table needs 2^n entries");
}

FourierTable Fourier(const SignedMeasure& phi) {
  std::vector<double> data(phi.values().begin(), phi.values().end());
  kernels::WalshHadamard(data);
  const double scale = std::ldexp(1.0, -phi.n());
  for (double& v : data) v *= scale;
  return FourierTable(phi.n(), std::move(data));
}

SignedMeasure InverseFourier(const FourierTable& table) {
  std::vector<double> data(table.coefficients().begin(), table.coefficients().end());
  kernels::WalshHadamard(data);
  return SignedMeasure(table.n(), std::move(data));
}

SignedMeasure CharacterMeasure(const Subset& s, int n) {
  SignedMeasure chi(n);
  const SubsetMask mask = MaskOf(s, n);
  for (CubeIndex x = 0; x < CubeSize(n); ++x) chi[x] = Character(mask, x);
  return chi;
}

std::vector<double> MomentVector(const SignedMeasure& phi, int t) {
  const int n = phi.n();
  const FourierTable table = Fourier(phi);
  const double scale = std::ldexp(1.0, n);
  std::vector<double> moments;
  moments.reserve(TupleCount(n + 1, t));
  ForEachTuple(n + 1, t, [&](const IndexTuple& index) {
    moments.push_back(scale * table.at(OddSupport(index, n)));
  });
  return moments;
}

}  // namespace cbq
