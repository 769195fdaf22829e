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

#include "cbq/oracle.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cbq/error.h"

namespace cbq {
namespace {

struct Entry {
  IndexTuple index;  // 0-based
  double value;
};

std::vector<Entry> EntriesOf(const Tensor& tensor) {
  std::vector<Entry> out;
  for (const auto& [index, value] : tensor.entries()) {
    IndexTuple zero_based = index;
    for (int& k : zero_based) --k;
    out.push_back({std::move(zero_based), value});
  }
  return out;
}

using Matrices = std::vector<std::vector<Eigen::MatrixXd>>;

Eigen::MatrixXd Operator(const std::vector<Entry>& entries, const Matrices& mats, int d) {
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const Entry& e : entries) {
    Eigen::MatrixXd prod = mats[0][e.index[0]];
    for (std::size_t j = 1; j < e.index.size(); ++j) prod = prod * mats[j][e.index[j]];
    total += e.value * prod;
  }
  return total;
}

struct TopPair {
  double sigma;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

TopPair TopSingular(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.singularValues()(0), svd.matrixU().col(0), svd.matrixV().col(0)};
}

Eigen::MatrixXd Polar(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// Gradient of u' (sum_i T_i U_1(i_1) ... U_t(i_t)) v with respect to every
// U_j(i): sum over tuples with i_j = i of T_i (L' u)(R v)'.
Matrices Gradient(const std::vector<Entry>& entries, const Matrices& mats, const Eigen::VectorXd& u,
                  const Eigen::VectorXd& v) {
  const int t = static_cast<int>(mats.size());
  Matrices grad(t);
  for (int j = 0; j < t; ++j) {
    for (const auto& m : mats[j]) grad[j].push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  }
  std::vector<Eigen::VectorXd> left(t), right(t);
  for (const Entry& e : entries) {
    // left[j] = (U_1 ... U_{j-1})' u, right[j] = U_{j+1} ... U_t v.
    left[0] = u;
    for (int j = 1; j < t; ++j) left[j] = mats[j - 1][e.index[j - 1]].transpose() * left[j - 1];
    right[t - 1] = v;
    for (int j = t - 2; j >= 0; --j) right[j] = mats[j + 1][e.index[j + 1]] * right[j + 1];
    for (int j = 0; j < t; ++j) grad[j][e.index[j]] += e.value * left[j] * right[j].transpose();
  }
  return grad;
}

Eigen::MatrixXd RandomOrthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

void Contract(const std::vector<double>& dense, int n, int remaining, std::vector<std::vector<int>>* signs,
              SignBound* best) {
  const std::int64_t rest = dense.size() / n;
  if (remaining == 1) {
    double sum = 0.0;
    for (double c : dense) sum += std::fabs(c);
    if (sum > best->value) {
      best->value = sum;
      best->signs = *signs;
      std::vector<int> last(n);
      for (int i = 0; i < n; ++i) last[i] = dense[i] < 0 ? -1 : 1;
      best->signs.push_back(last);
    }
    return;
  }
  std::vector<int> z(n, 1);
  std::vector<double> next(rest);
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    for (int i = 0; i < n; ++i) z[i] = (bits >> (n - 1 - i)) & 1 ? -1 : 1;
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (std::int64_t r = 0; r < rest; ++r) next[r] += z[i] * dense[i * rest + r];
    }
    signs->push_back(z);
    Contract(next, n, remaining - 1, signs, best);
    signs->pop_back();
  }
}

}  // namespace

int DefaultAscentDimension(int n, int t) {
  const std::int64_t d = TupleCount(n, t / 2) + TupleCount(n, (t + 1) / 2);
  return static_cast<int>(std::min<std::int64_t>(d, 8));
}

SignBound SignEnumerationBound(const Tensor& tensor) {
  const int n = tensor.dim(), t = tensor.order();
  if (n * t > 20) {
    throw DimensionError(fmt::format("sign enumeration needs n*t <= 20, got {}", n * t));
  }
  SignBound best;
  best.signs.assign(t, std::vector<int>(n, 1));
  best.value = -1.0;
  std::vector<std::vector<int>> prefix;
  Contract(tensor.ToDense(), n, t, &prefix, &best);
  return best;
}

AscentResult AscentLowerBound(const Tensor& tensor, const AscentConfig& config) {
  const int n = tensor.dim(), t = tensor.order();
  const int d = config.d > 0 ? config.d : DefaultAscentDimension(n, t);
  const std::vector<Entry> entries = EntriesOf(tensor);
  double l1 = 0.0;
  for (const Entry& e : entries) l1 += std::fabs(e.value);

  std::mt19937_64 rng(config.seed);
  AscentResult result;
  result.value = -1.0;
  for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
    Matrices mats(t);
    double start_value = 0.0;
    if (restart == 0) {
      std::vector<std::vector<int>> signs(t, std::vector<int>(n, 1));
      if (n * t <= 20) {
        SignBound sign = SignEnumerationBound(tensor);
        signs = std::move(sign.signs);
        start_value = sign.value;
      }
      for (int j = 0; j < t; ++j) {
        for (int i = 0; i < n; ++i) mats[j].push_back(signs[j][i] * Eigen::MatrixXd::Identity(d, d));
      }
    } else {
      for (int j = 0; j < t; ++j) {
        for (int i = 0; i < n; ++i) mats[j].push_back(RandomOrthogonal(d, rng));
      }
    }
    TopPair top = TopSingular(Operator(entries, mats, d));
    // The sign start is |T(z)| I exactly; keep the enumerated value so that
    // summation order cannot put the ascent below the sign bound.
    top.sigma = std::max(top.sigma, start_value);
    double step = l1 > 0.0 ? config.initial_step / l1 : 0.0;
    for (int iter = 0; iter < config.max_iter && l1 > 0.0; ++iter) {
      const Matrices grad = Gradient(entries, mats, top.u, top.v);
      bool accepted = false;
      for (int tries = 0; tries < 30; ++tries) {
        Matrices trial = mats;
        for (int j = 0; j < t; ++j) {
          for (int i = 0; i < n; ++i) trial[j][i] = Polar(mats[j][i] + step * grad[j][i]);
        }
        const TopPair next = TopSingular(Operator(entries, trial, d));
        if (next.sigma >= top.sigma) {
          const double gain = next.sigma - top.sigma;
          mats = std::move(trial);
          top = next;
          accepted = gain > 1e-13 * std::max(1.0, top.sigma);
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    result.restart_values.push_back(top.sigma);
    if (top.sigma > result.value) {
      result.value = top.sigma;
      result.best_restart = restart;
      result.witness.d = d;
      result.witness.n = n;
      result.witness.t = t;
      result.witness.u = top.u;
      result.witness.v = top.v;
      result.witness.matrices = mats;
    }
  }
  return result;
}

}  // namespace cbq
