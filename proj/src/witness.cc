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

#include "cbq/witness.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cbq/error.h"
#include "cbq/text.h"

namespace cbq {
namespace {

constexpr double kNegativeTol = 1e-7;
constexpr double kGramMatchTol = 1e-6;
constexpr double kConsistencyTol = 1e-6;

std::string TupleLabel(const IndexTuple& index) {
  std::string out;
  for (std::size_t k = 0; k < index.size(); ++k) out += (k ? "," : "") + std::to_string(index[k]);
  return out;
}

// Columns [offset + k * stride] for k in [0, count).
Eigen::MatrixXd Columns(const Eigen::MatrixXd& m, std::int64_t offset, std::int64_t stride,
                        std::int64_t count) {
  Eigen::MatrixXd out(m.rows(), count);
  for (std::int64_t k = 0; k < count; ++k) out.col(k) = m.col(offset + k * stride);
  return out;
}

Eigen::MatrixXd PolarFactor(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

// v-side: w_b = W_1(b_1) ... W_L(b_L) v for b in [n]^L, stored column-wise in
// lexicographic order. Fills mats[0..L-1] and returns v.
Eigen::VectorXd PeelPrefix(const Eigen::MatrixXd& w, int n, int len,
                           std::vector<std::vector<Eigen::MatrixXd>>* mats) {
  const int d = static_cast<int>(w.rows());
  if (len == 1) {
    const Eigen::VectorXd v = w.col(0);
    mats->push_back({});
    for (int i = 0; i < n; ++i) mats->back().push_back(OrthogonalExtension(v, w.col(i)));
    return v;
  }
  const std::int64_t block = TupleCount(n, len - 1);
  const Eigen::MatrixXd first = w.leftCols(block);
  std::vector<Eigen::MatrixXd> level;
  level.push_back(Eigen::MatrixXd::Identity(d, d));
  for (int i = 1; i < n; ++i) level.push_back(OrthogonalExtension(first, w.middleCols(i * block, block)));
  mats->push_back(std::move(level));
  return PeelPrefix(first, n, len - 1, mats);
}

// u-side: u_a = U_s(a_s)' ... U_1(a_1)' u for a in [n]^s. Fills mats[0..s-1]
// (mats[j] holds U_{j+1}) and returns u.
Eigen::VectorXd PeelSuffix(const Eigen::MatrixXd& w, int n, int len,
                           std::vector<std::vector<Eigen::MatrixXd>>* mats) {
  const int d = static_cast<int>(w.rows());
  std::vector<Eigen::MatrixXd> level;
  Eigen::VectorXd u;
  if (len == 1) {
    u = w.col(0);
    for (int e = 0; e < n; ++e) level.push_back(OrthogonalExtension(u, w.col(e)).transpose());
    mats->push_back(std::move(level));
    return u;
  }
  // Columns with last index e sit at positions j * n + e.
  const std::int64_t count = TupleCount(n, len - 1);
  const Eigen::MatrixXd first = Columns(w, 0, n, count);
  level.push_back(Eigen::MatrixXd::Identity(d, d));
  for (int e = 1; e < n; ++e) {
    level.push_back(OrthogonalExtension(first, Columns(w, e, n, count)).transpose());
  }
  u = PeelSuffix(first, n, len - 1, mats);
  mats->push_back(std::move(level));
  return u;
}

}  // namespace

GramFactor GramFactorize(const Eigen::MatrixXd& x, double rank_tol) {
  if (x.rows() != x.cols() || x.rows() == 0) throw DimensionError("Gram matrix must be square");
  const Eigen::MatrixXd sym = 0.5 * (x + x.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (values(0) < -kNegativeTol) {
    throw NumericalError(fmt::format("matrix is not PSD: minimum eigenvalue {:.3e}", values(0)));
  }
  const double cutoff = rank_tol * std::max(values(values.size() - 1), 0.0);
  std::vector<int> kept;
  for (int k = static_cast<int>(values.size()) - 1; k >= 0; --k) {
    if (values(k) > cutoff) kept.push_back(k);
  }
  GramFactor factor;
  factor.d = std::max<int>(1, static_cast<int>(kept.size()));
  factor.vectors = Eigen::MatrixXd::Zero(factor.d, x.rows());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    factor.vectors.row(static_cast<Eigen::Index>(r)) =
        std::sqrt(values(kept[r])) * eig.eigenvectors().col(kept[r]).transpose();
  }
  for (Eigen::Index k = 0; k < x.rows(); ++k) factor.labels.push_back(fmt::format("x_{}", k));
  return factor;
}

std::vector<std::string> GramLabels(const CbLayout& layout) {
  std::vector<std::string> labels;
  if (layout.s == 0) {
    labels.push_back("u");
  } else {
    ForEachTuple(layout.n, layout.s, [&](const IndexTuple& a) { labels.push_back("u_" + TupleLabel(a)); });
  }
  ForEachTuple(layout.n, layout.t - layout.s,
               [&](const IndexTuple& b) { labels.push_back("v_" + TupleLabel(b)); });
  return labels;
}

Eigen::MatrixXd OrthogonalExtension(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
  if (xs.rows() != ys.rows() || xs.cols() != ys.cols()) {
    throw DimensionError("vector families differ in shape");
  }
  const int d = static_cast<int>(xs.rows());
  const Eigen::MatrixXd diff = xs.transpose() * xs - ys.transpose() * ys;
  Eigen::Index wr = 0, wc = 0;
  const double worst = diff.size() ? diff.cwiseAbs().maxCoeff(&wr, &wc) : 0.0;
  if (worst > kGramMatchTol) {
    throw NumericalError(fmt::format(
        "Gram matrices differ by {:.3e} at entry ({}, {})", worst, wr, wc));
  }
  // Independent subset of xs (the same indices are independent in ys).
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivot(xs);
  const double scale = std::max(1.0, xs.cwiseAbs().maxCoeff());
  pivot.setThreshold(1e-9 * scale);
  const int rank = xs.cols() ? static_cast<int>(pivot.rank()) : 0;
  Eigen::MatrixXd xi(d, rank), yi(d, rank);
  for (int k = 0; k < rank; ++k) {
    const int col = pivot.colsPermutation().indices()(k);
    xi.col(k) = xs.col(col);
    yi.col(k) = ys.col(col);
  }
  // Orthonormal bases of the complements from full QR factorizations.
  auto complement = [d, rank](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    if (rank == 0) return Eigen::MatrixXd::Identity(d, d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(d - rank);
  };
  Eigen::MatrixXd bx(d, d), by(d, d);
  bx << xi, complement(xi);
  by << yi, complement(yi);
  const Eigen::MatrixXd u = bx.transpose().partialPivLu().solve(by.transpose()).transpose();
  return PolarFactor(u);
}

double RepairGram(const std::vector<GramEquality>& family, Eigen::MatrixXd* x) {
  const Eigen::Index order = x->rows();
  auto key = [order](int a, int b) { return static_cast<std::int64_t>(std::min(a, b)) * order + std::max(a, b); };
  std::vector<std::int64_t> parent(order * order);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::int64_t k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  for (const GramEquality& eq : family) {
    const std::int64_t a = find(key(eq.a, eq.b)), b = find(key(eq.ref_a, eq.ref_b));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<double> sum(order * order, 0.0);
  std::vector<int> count(order * order, 0);
  for (Eigen::Index c = 0; c < order; ++c) {
    for (Eigen::Index r = 0; r <= c; ++r) {
      const std::int64_t root = find(key(r, c));
      sum[root] += 0.5 * ((*x)(r, c) + (*x)(c, r));
      ++count[root];
    }
  }
  double change = 0.0;
  for (Eigen::Index c = 0; c < order; ++c) {
    for (Eigen::Index r = 0; r <= c; ++r) {
      const std::int64_t root = find(key(r, c));
      const double value = r == c ? 1.0 : sum[root] / count[root];
      change = std::max({change, std::fabs((*x)(r, c) - value), std::fabs((*x)(c, r) - value)});
      (*x)(r, c) = (*x)(c, r) = value;
    }
  }
  return change;
}

CbWitness RecoverWitness(const GramFactor& factor, int n, int t, int s) {
  const CbLayout layout = MakeLayout(n, t, s);
  if (factor.vectors.cols() != layout.order()) {
    throw DimensionError(fmt::format("factor has {} vectors, layout needs {}",
                                     factor.vectors.cols(), layout.order()));
  }
  const Eigen::MatrixXd gram = factor.vectors.transpose() * factor.vectors;
  const double residual = ConsistencyResidual(BuildConstraints(n, t, s), gram);
  if (residual > kConsistencyTol) {
    throw NumericalError(fmt::format("consistency residual {:.3e} exceeds {:.0e}", residual,
                                     kConsistencyTol));
  }
  CbWitness w;
  w.d = factor.d;
  w.n = n;
  w.t = t;
  const Eigen::MatrixXd& vecs = factor.vectors;
  if (s == 0) {
    w.u = vecs.col(0);
  } else {
    w.u = PeelSuffix(vecs.leftCols(layout.u_count()), n, s, &w.matrices);
  }
  std::vector<std::vector<Eigen::MatrixXd>> v_side;
  w.v = PeelPrefix(vecs.rightCols(layout.v_count()), n, t - s, &v_side);
  for (auto& level : v_side) w.matrices.push_back(std::move(level));
  return w;
}

CbWitness RecoverWitnessFromGram(const Eigen::MatrixXd& x, int n, int t, int s,
                                 WitnessDiagnostics* diagnostics) {
  const std::vector<GramEquality> family = BuildConstraints(n, t, s);
  WitnessDiagnostics diag;
  diag.consistency_residual = ConsistencyResidual(family, x);
  if (diag.consistency_residual > kConsistencyTol) {
    throw NumericalError(fmt::format("consistency residual {:.3e} exceeds {:.0e}",
                                     diag.consistency_residual, kConsistencyTol));
  }
  Eigen::MatrixXd repaired = x;
  diag.repair_change = RepairGram(family, &repaired);
  GramFactor factor = GramFactorize(repaired);
  factor.labels = GramLabels(MakeLayout(n, t, s));
  CbWitness w = RecoverWitness(factor, n, t, s);

  const CbLayout layout = MakeLayout(n, t, s);
  ForEachTuple(n, t, [&](const IndexTuple& index) {
    const std::int64_t rank = TupleRank(index, n);
    const int a = static_cast<int>(rank / layout.v_count());
    const int b = layout.v_offset() + static_cast<int>(rank % layout.v_count());
    const double value = w.u.dot(WitnessProduct(w, index) * w.v);
    diag.reproduction_error = std::max(diag.reproduction_error, std::fabs(value - repaired(a, b)));
  });
  diag.orthogonality_residual = OrthogonalityResidual(w);
  if (diagnostics) *diagnostics = diag;
  return w;
}

Eigen::MatrixXd WitnessProduct(const CbWitness& w, const IndexTuple& index) {
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(w.d, w.d);
  for (int j = 0; j < w.t; ++j) prod = prod * w.matrices[j][index[j] - 1];
  return prod;
}

double WitnessObjective(const Tensor& tensor, const CbWitness& w) {
  double sum = 0.0;
  for (const auto& [index, value] : tensor.entries()) {
    sum += value * w.u.dot(WitnessProduct(w, index) * w.v);
  }
  return sum;
}

double WitnessOperatorNorm(const Tensor& tensor, const CbWitness& w) {
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(w.d, w.d);
  for (const auto& [index, value] : tensor.entries()) total += value * WitnessProduct(w, index);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(total);
  return svd.singularValues()(0);
}

double OrthogonalityResidual(const CbWitness& w) {
  double worst = 0.0;
  for (const auto& level : w.matrices) {
    for (const Eigen::MatrixXd& m : level) {
      const Eigen::MatrixXd e = m.transpose() * m - Eigen::MatrixXd::Identity(w.d, w.d);
      worst = std::max(worst, e.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::string FormatWitness(const CbWitness& w) {
  std::string out = fmt::format("witness d={} n={} t={}\n", w.d, w.n, w.t);
  auto row = [](const auto& values) {
    std::string line;
    for (Eigen::Index k = 0; k < values.size(); ++k) line += (k ? " " : "") + text::Exact(values(k));
    return line;
  };
  out += "u " + row(w.u) + "\n";
  out += "v " + row(w.v) + "\n";
  for (int j = 1; j <= w.t; ++j) {
    for (int i = 1; i <= w.n; ++i) {
      out += fmt::format("U j={} i={}\n", j, i);
      const Eigen::MatrixXd& m = w.U(j, i);
      for (Eigen::Index r = 0; r < m.rows(); ++r) out += row(m.row(r)) + "\n";
    }
  }
  return out;
}

}  // namespace cbq
