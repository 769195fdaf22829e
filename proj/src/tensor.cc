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

#include "cbq/tensor.h"

#include <algorithm>

#include <fmt/format.h>

#include "cbq/error.h"
#include "cbq/text.h"

namespace cbq {
namespace {

void CheckTuple(const IndexTuple& index, int order, int dim) {
  if (static_cast<int>(index.size()) != order) {
    throw DimensionError(fmt::format("index tuple has length {}, tensor order is {}",
                                     index.size(), order));
  }
  for (int i : index) {
    if (i < 1 || i > dim) {
      throw DimensionError(fmt::format("index {} outside 1..{}", i, dim));
    }
  }
}

}  // namespace

Tensor::Tensor(int order, int dim) : order_(order), dim_(dim) {
  if (order < 1) throw DimensionError("tensor order must be positive");
  if (dim < 1) throw DimensionError("tensor dimension must be positive");
}

Tensor Tensor::FromEntries(int order, int dim,
                           std::span<const std::pair<IndexTuple, double>> entries) {
  Tensor tensor(order, dim);
  std::map<IndexTuple, double> seen;
  for (const auto& [index, value] : entries) {
    CheckTuple(index, order, dim);
    if (!seen.emplace(index, value).second) {
      std::string joined;
      for (int i : index) joined += fmt::format("{} ", i);
      throw Error("duplicate tensor entry at (" + joined.substr(0, joined.size() - 1) + ")");
    }
    if (value != 0.0) tensor.entries_.emplace(index, value);
  }
  return tensor;
}

Tensor Tensor::FromDense(int order, int dim, std::span<const double> values) {
  Tensor tensor(order, dim);
  if (static_cast<std::int64_t>(values.size()) != TupleCount(dim, order)) {
    throw DimensionError("dense tensor data has the wrong length");
  }
  std::int64_t rank = 0;
  ForEachTuple(dim, order, [&](const IndexTuple& index) {
    if (values[rank] != 0.0) tensor.entries_.emplace(index, values[rank]);
    ++rank;
  });
  return tensor;
}

double Tensor::at(const IndexTuple& index) const {
  CheckTuple(index, order_, dim_);
  auto it = entries_.find(index);
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<double> Tensor::ToDense() const {
  std::vector<double> dense(TupleCount(dim_, order_), 0.0);
  for (const auto& [index, value] : entries_) dense[TupleRank(index, dim_)] = value;
  return dense;
}

Tensor Tensor::Scaled(double alpha) const {
  Tensor out(order_, dim_);
  if (alpha == 0.0) return out;
  for (const auto& [index, value] : entries_) out.entries_.emplace(index, alpha * value);
  return out;
}

Tensor Tensor::Reversed() const {
  Tensor out(order_, dim_);
  for (const auto& [index, value] : entries_) {
    out.entries_.emplace(IndexTuple(index.rbegin(), index.rend()), value);
  }
  return out;
}

std::int64_t TupleCount(int dim, int len) {
  std::int64_t count = 1;
  for (int k = 0; k < len; ++k) {
    if (__builtin_mul_overflow(count, static_cast<std::int64_t>(dim), &count)) {
      throw DimensionError("tuple count overflows");
    }
  }
  return count;
}

std::int64_t TupleRank(std::span<const int> tuple, int dim) {
  std::int64_t rank = 0;
  for (int i : tuple) rank = rank * dim + (i - 1);
  return rank;
}

IndexTuple TupleFromRank(std::int64_t rank, int dim, int len) {
  IndexTuple tuple(len);
  for (int k = len - 1; k >= 0; --k) {
    tuple[k] = static_cast<int>(rank % dim) + 1;
    rank /= dim;
  }
  return tuple;
}

void ForEachTuple(int dim, int len, const std::function<void(const IndexTuple&)>& fn) {
  IndexTuple tuple(len, 1);
  while (true) {
    fn(tuple);
    int k = len - 1;
    while (k >= 0 && tuple[k] == dim) tuple[k--] = 1;
    if (k < 0) return;
    ++tuple[k];
  }
}

double EvalMultilinear(const Tensor& tensor, std::span<const std::vector<double>> z) {
  if (static_cast<int>(z.size()) != tensor.order()) {
    throw DimensionError(fmt::format("expected {} slot vectors, got {}", tensor.order(),
                                     z.size()));
  }
  for (const auto& slot : z) {
    if (static_cast<int>(slot.size()) != tensor.dim()) {
      throw DimensionError(fmt::format("slot vector has length {}, expected {}",
                                       slot.size(), tensor.dim()));
    }
  }
  double sum = 0.0;
  for (const auto& [index, value] : tensor.entries()) {
    double term = value;
    for (std::size_t j = 0; j < index.size(); ++j) term *= z[j][index[j] - 1];
    sum += term;
  }
  return sum;
}

double EvalDiagonal(const Tensor& tensor, std::span<const int> x) {
  const int n = static_cast<int>(x.size());
  if (tensor.dim() != n + 1) {
    throw DimensionError(fmt::format("diagonal evaluation needs N = n + 1 = {}, tensor has N = {}",
                                     n + 1, tensor.dim()));
  }
  std::vector<double> slot(n + 1, 1.0);
  for (int k = 0; k < n; ++k) slot[k] = static_cast<double>(x[k]);
  std::vector<std::vector<double>> z(tensor.order(), slot);
  return EvalMultilinear(tensor, z);
}

Subset OddSupport(std::span<const int> index, int n) {
  std::vector<char> odd(n + 1, 0);
  for (int i : index) {
    if (i >= 1 && i <= n) odd[i] ^= 1;
  }
  Subset s;
  for (int k = 1; k <= n; ++k) {
    if (odd[k]) s.push_back(k);
  }
  return s;
}

std::uint64_t Multiplicity(const Subset& s, int n, int t) {
  const int odd_letters = static_cast<int>(s.size());
  if (odd_letters > t || odd_letters > n) return 0;
  // ways[j]: number of words of length j over the letters processed so far,
  // with the required parity for each letter. Adding a letter used c times
  // interleaves it in binom(j + c, c) ways.
  std::vector<std::vector<std::uint64_t>> binom(t + 1, std::vector<std::uint64_t>(t + 1, 0));
  for (int a = 0; a <= t; ++a) {
    binom[a][0] = 1;
    for (int b = 1; b <= a; ++b) binom[a][b] = binom[a - 1][b - 1] + binom[a - 1][b];
  }
  std::vector<std::uint64_t> ways(t + 1, 0);
  ways[0] = 1;
  auto add_letter = [&](int parity) {  // parity: 0 even, 1 odd, -1 any
    std::vector<std::uint64_t> next(t + 1, 0);
    for (int j = 0; j <= t; ++j) {
      if (ways[j] == 0) continue;
      for (int c = 0; j + c <= t; ++c) {
        if (parity >= 0 && c % 2 != parity) continue;
        std::uint64_t term = 0;
        if (__builtin_mul_overflow(ways[j], binom[j + c][c], &term) ||
            __builtin_add_overflow(next[j + c], term, &next[j + c])) {
          throw DimensionError("tuple multiplicity overflows 64 bits");
        }
      }
    }
    ways = std::move(next);
  };
  for (int k = 0; k < odd_letters; ++k) add_letter(1);
  for (int k = odd_letters; k < n; ++k) add_letter(0);
  add_letter(-1);  // the constant slot n + 1
  return ways[t];
}

Tensor PadSlot(const Tensor& tensor) {
  std::vector<std::pair<IndexTuple, double>> entries;
  for (const auto& [index, value] : tensor.entries()) {
    IndexTuple padded = index;
    padded.push_back(tensor.dim());
    entries.emplace_back(std::move(padded), value);
  }
  return Tensor::FromEntries(tensor.order() + 1, tensor.dim(), entries);
}

Tensor ParseTensor(std::string_view contents) {
  const auto lines = text::Tokenize(contents);
  if (lines.empty()) throw ParseError("missing 'tensor t=<order> N=<dim>' header", 0);
  const auto& header = lines.front();
  if (header.tokens.size() != 3 || header.tokens[0] != "tensor") {
    throw ParseError("expected header 'tensor t=<order> N=<dim>'", header.number);
  }
  const long long order = text::ParseKeyInt(header.tokens[1], "t", header.number);
  const long long dim = text::ParseKeyInt(header.tokens[2], "N", header.number);
  if (order < 1 || dim < 1 || order > 64 || dim > 1'000'000) {
    throw ParseError("tensor order and dimension must be positive", header.number);
  }
  std::vector<std::pair<IndexTuple, double>> entries;
  std::map<IndexTuple, int> first_line;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& line = lines[k];
    if (static_cast<long long>(line.tokens.size()) != order + 1) {
      throw ParseError(fmt::format("expected {} indices and a value", order), line.number);
    }
    IndexTuple index(order);
    for (long long j = 0; j < order; ++j) {
      const long long i = text::ParseInt(line.tokens[j], line.number);
      if (i < 1 || i > dim) {
        throw ParseError(fmt::format("index {} outside 1..{}", i, dim), line.number);
      }
      index[j] = static_cast<int>(i);
    }
    const double value = text::ParseDouble(line.tokens[order], line.number);
    auto [it, inserted] = first_line.emplace(index, line.number);
    if (!inserted) {
      throw ParseError(fmt::format("duplicate entry (first given on line {})", it->second),
                       line.number);
    }
    entries.emplace_back(std::move(index), value);
  }
  return Tensor::FromEntries(static_cast<int>(order), static_cast<int>(dim), entries);
}

Tensor ReadTensor(const std::string& path) { return ParseTensor(text::ReadFile(path)); }

std::string FormatTensor(const Tensor& tensor) {
  std::string out = fmt::format("tensor t={} N={}\n", tensor.order(), tensor.dim());
  for (const auto& [index, value] : tensor.entries()) {
    for (int i : index) out += fmt::format("{} ", i);
    out += text::Exact(value) + "\n";
  }
  return out;
}

}  // namespace cbq
