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

#include "cbq/cbnorm.h"

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cbq/error.h"

namespace cbq {
namespace {

long long IntPow(long long b, int e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

long long Binom2(long long k) { return k * (k - 1) / 2; }

// Literal evaluation of the counting sums for the split family.
long long CountBySum(int n, int t, int s) {
  long long total = 0;
  if (s == 0) {
    for (int l = 1; l <= t - 1; ++l) total += (IntPow(n, l) - 1) * Binom2(IntPow(n, t - l));
    return total;
  }
  for (int l = 1; l <= s - 1; ++l) total += (IntPow(n, l) - 1) * Binom2(IntPow(n, s - l));
  for (int l = 1; l <= t - s - 1; ++l) total += (IntPow(n, l) - 1) * Binom2(IntPow(n, t - s - l));
  return total;
}

Tensor RandomTensor(int n, int t, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<double> dense(TupleCount(n, t));
  for (double& v : dense) v = gauss(rng);
  return Tensor::FromDense(t, n, dense);
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

// Gram matrix of u and U_1(i_1) ... U_t(i_t) v arranged by the split layout.
Eigen::MatrixXd GramFromMatrices(int n, int t, int s, int d, std::mt19937_64& rng) {
  std::vector<std::vector<Eigen::MatrixXd>> u(t);
  for (auto& slot : u) {
    for (int i = 0; i < n; ++i) slot.push_back(RandomOrthogonal(d, rng));
  }
  Eigen::VectorXd uvec = RandomOrthogonal(d, rng).col(0);
  Eigen::VectorXd vvec = RandomOrthogonal(d, rng).col(0);
  std::vector<Eigen::VectorXd> vectors;
  if (s == 0) {
    vectors.push_back(uvec);
  } else {
    ForEachTuple(n, s, [&](const IndexTuple& a) {
      Eigen::VectorXd w = uvec;
      for (int j = 0; j < s; ++j) w = u[j][a[j] - 1].transpose() * w;
      vectors.push_back(w);
    });
  }
  ForEachTuple(n, t - s, [&](const IndexTuple& b) {
    Eigen::VectorXd w = vvec;
    for (int j = t - s - 1; j >= 0; --j) w = u[s + j][b[j] - 1] * w;
    vectors.push_back(w);
  });
  Eigen::MatrixXd x(vectors.size(), vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = 0; j < vectors.size(); ++j) x(i, j) = vectors[i].dot(vectors[j]);
  }
  return x;
}

// Coefficient row of X[a][b] - X[c][d] over the upper triangle.
Eigen::RowVectorXd Coefficients(int order, int a, int b, int c, int d) {
  auto col = [order](int p, int q) {
    if (p > q) std::swap(p, q);
    return p * order + q;
  };
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(order * order);
  r(col(a, b)) += 1.0;
  r(col(c, d)) -= 1.0;
  return r;
}

// All conditions <w_{i j}, w_{i k}> = <w_{i' j}, w_{i' k}> for every pair of
// fixed parts i, i' (not only against the reference), for one vector family.
void AllPairsFamily(int n, int len, int offset, bool suffix_fixed, int order,
                    std::vector<Eigen::RowVectorXd>* rows) {
  for (int l = 1; l < len; ++l) {
    const long long fixed = IntPow(n, l), free = IntPow(n, len - l);
    auto index = [&](long long f, long long j) {
      return static_cast<int>(offset + (suffix_fixed ? j * fixed + f : f * free + j));
    };
    for (long long i = 0; i < fixed; ++i) {
      for (long long i2 = 0; i2 < fixed; ++i2) {
        for (long long j = 0; j < free; ++j) {
          for (long long k = 0; k < free; ++k) {
            rows->push_back(
                Coefficients(order, index(i, j), index(i, k), index(i2, j), index(i2, k)));
          }
        }
      }
    }
  }
}

int Rank(const std::vector<Eigen::RowVectorXd>& rows, int cols) {
  if (rows.empty()) return 0;
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

TEST(CbNormModelTest, CountsMatchClosedForm) {
  for (int n = 1; n <= 3; ++n) {
    for (int t = 1; t <= 4; ++t) {
      for (int s = 0; s <= t / 2; ++s) {
        const auto family = BuildConstraints(n, t, s);
        EXPECT_EQ(static_cast<long long>(family.size()), CountBySum(n, t, s))
            << "n=" << n << " t=" << t << " s=" << s;
        EXPECT_EQ(ConstraintCount(n, t, s), CountBySum(n, t, s));
        long long independent = 0;
        for (const auto& eq : family) independent += eq.independent;
        EXPECT_EQ(independent, IndependentConstraintCount(n, t, s));
      }
    }
  }
  EXPECT_EQ(BuildConstraints(3, 1, 0).size(), 0u);
  EXPECT_EQ(BuildConstraints(2, 2, 0).size(), 1u);
  EXPECT_THROW(BuildConstraints(2, 3, 2), DimensionError);
}

// The reference family, its independent subset and the all-pairs family span
// the same space, and the subset has full row rank.
TEST(CbNormModelTest, IndependentSubsetSpansFullFamily) {
  for (int n = 2; n <= 3; ++n) {
    for (int t = 2; t <= (n == 2 ? 4 : 3); ++t) {
      for (int s = 0; s <= t / 2; ++s) {
        const CbLayout layout = MakeLayout(n, t, s);
        const int order = layout.order();
        const int cols = order * order;
        // diag(X) = e belongs to every system being compared.
        std::vector<Eigen::RowVectorXd> diagonal;
        for (int i = 0; i < order; ++i) {
          diagonal.push_back(Eigen::RowVectorXd::Zero(cols));
          diagonal.back()(i * order + i) = 1.0;
        }
        std::vector<Eigen::RowVectorXd> all_pairs = diagonal, family = diagonal,
                                        subset = diagonal;
        if (s >= 1) AllPairsFamily(n, s, 0, true, order, &all_pairs);
        AllPairsFamily(n, t - s, layout.v_offset(), false, order, &all_pairs);
        for (const auto& eq : BuildConstraints(n, t, s)) {
          family.push_back(Coefficients(order, eq.a, eq.b, eq.ref_a, eq.ref_b));
          if (eq.independent) subset.push_back(family.back());
        }
        const int rank_all = Rank(all_pairs, cols);
        EXPECT_EQ(Rank(family, cols), rank_all);
        EXPECT_EQ(Rank(subset, cols), static_cast<int>(subset.size()));
        EXPECT_EQ(static_cast<int>(subset.size()), rank_all);
        EXPECT_EQ(static_cast<long long>(subset.size()) - order,
                  IndependentConstraintCount(n, t, s));
        std::vector<Eigen::RowVectorXd> joint = all_pairs;
        joint.insert(joint.end(), subset.begin(), subset.end());
        EXPECT_EQ(Rank(joint, cols), rank_all);
      }
    }
  }
}

TEST(CbNormModelTest, GramOfOrthogonalProductsIsFeasible) {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 3; ++n) {
    for (int t = 1; t <= 3; ++t) {
      for (int s = 0; s <= t / 2; ++s) {
        const Eigen::MatrixXd x = GramFromMatrices(n, t, s, 4, rng);
        EXPECT_LE(ConsistencyResidual(BuildConstraints(n, t, s), x), 1e-10);
      }
    }
  }
}

TEST(CbNormModelTest, ObjectiveMatchesMultilinearForm) {
  EXPECT_TRUE(BuildObjective(Tensor(2, 2), 1).isZero());
  const std::vector<std::pair<IndexTuple, double>> id = {{{1, 1}, 1.0}, {{2, 2}, 1.0}};
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  expected.topRightCorner(2, 2) = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  expected.bottomLeftCorner(2, 2) = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_TRUE(BuildObjective(Tensor::FromEntries(2, 2, id), 1).isApprox(expected));

  // <C_s(T), X> on a Gram of explicit vectors equals sum_i T_i <u, U(i) v>.
  std::mt19937_64 rng(2);
  const int n = 2, t = 3, d = 3;
  const Tensor tensor = RandomTensor(n, t, rng);
  std::vector<std::vector<Eigen::MatrixXd>> u(t);
  for (auto& slot : u) {
    for (int i = 0; i < n; ++i) slot.push_back(RandomOrthogonal(d, rng));
  }
  const Eigen::VectorXd uvec = RandomOrthogonal(d, rng).col(0);
  const Eigen::VectorXd vvec = RandomOrthogonal(d, rng).col(0);
  double direct = 0.0;
  ForEachTuple(n, t, [&](const IndexTuple& i) {
    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(d, d);
    for (int j = 0; j < t; ++j) prod = prod * u[j][i[j] - 1];
    direct += tensor.at(i) * uvec.dot(prod * vvec);
  });
  for (int s = 0; s <= 1; ++s) {
    std::vector<Eigen::VectorXd> vectors;
    if (s == 0) {
      vectors.push_back(uvec);
    } else {
      for (int a = 0; a < n; ++a) vectors.push_back(u[0][a].transpose() * uvec);
    }
    ForEachTuple(n, t - s, [&](const IndexTuple& b) {
      Eigen::VectorXd w = vvec;
      for (int j = t - s - 1; j >= 0; --j) w = u[s + j][b[j] - 1] * w;
      vectors.push_back(w);
    });
    Eigen::MatrixXd x(vectors.size(), vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      for (std::size_t j = 0; j < vectors.size(); ++j) x(i, j) = vectors[i].dot(vectors[j]);
    }
    EXPECT_NEAR((BuildObjective(tensor, s).cwiseProduct(x)).sum(), direct, 1e-12);
  }
}

TEST(CbNormTest, OrderOneIsAbsoluteSum) {
  const Tensor t = Tensor::FromDense(1, 3, std::vector<double>{1, -2, 3});
  const CbResult r = ComputeCbNorm(t, 0);
  ASSERT_EQ(r.solution.status, conic::Status::kOptimal);
  EXPECT_NEAR(r.value, 6.0, 1e-7);
  EXPECT_NEAR(r.dual_value, 6.0, 1e-7);
}

TEST(CbNormTest, IdentityMatrix) {
  const std::vector<std::pair<IndexTuple, double>> id = {{{1, 1}, 1.0}, {{2, 2}, 1.0}};
  for (int s : {0, 1}) {
    const CbResult r = ComputeCbNorm(Tensor::FromEntries(2, 2, id), s);
    EXPECT_NEAR(r.value, 2.0, 1e-7) << "s=" << s;
  }
}

TEST(CbNormTest, ChshMatrix) {
  const Tensor chsh = Tensor::FromDense(2, 2, std::vector<double>{1, 1, 1, -1});
  EXPECT_NEAR(ComputeCbNorm(chsh, 1).value, 2.0 * std::sqrt(2.0), 1e-7);
  EXPECT_NEAR(ComputeCbNorm(chsh, 0).value, 2.0 * std::sqrt(2.0), 1e-7);
}

TEST(CbNormTest, DualCertificates) {
  std::mt19937_64 rng(3);
  const conic::SolverOptions opt;
  for (int s = 0; s <= 1; ++s) {
    const Tensor t = RandomTensor(2, 3, rng);
    const CbResult r = ComputeCbNorm(t, s, opt);
    ASSERT_EQ(r.solution.status, conic::Status::kOptimal);
    EXPECT_GE(r.dual_value, r.value - opt.gap_tol);
    const double bound = CbUpperBoundCheck(t, r.dual, opt.feas_tol);
    EXPECT_NEAR(bound, r.value, 2 * opt.gap_tol);
    EXPECT_GE(r.upper_bound, r.value - 1e-12);
    EXPECT_LE(r.upper_bound, r.value + 1e-7);
    CbDual bad = r.dual;
    bad.lambda(1) = -bad.lambda(1);
    EXPECT_THROW(CbUpperBoundCheck(t, bad, opt.feas_tol), NumericalError);
    const CbDual parsed = ParseDual(FormatDual(r.dual));
    EXPECT_EQ(parsed.lambda, r.dual.lambda);
    EXPECT_EQ(parsed.y, r.dual.y);
  }
  CbDual zero{2, 2, 1, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(0)};
  EXPECT_EQ(CbUpperBoundCheck(Tensor(2, 2), zero), 0.0);
}

TEST(CbNormTest, Homogeneity) {
  std::mt19937_64 rng(4);
  const Tensor t = RandomTensor(2, 2, rng);
  const double base = ComputeCbNorm(t, 1).value;
  for (double alpha : {-2.0, 0.5, 3.0}) {
    EXPECT_NEAR(ComputeCbNorm(t.Scaled(alpha), 1).value, std::fabs(alpha) * base,
                1e-6 * std::fabs(alpha) * base);
  }
  EXPECT_NEAR(ComputeCbNorm(t.Scaled(0.0), 1).value, 0.0, 1e-7);
}

TEST(CbNormTest, SplitAndReversalInvariance) {
  std::mt19937_64 rng(5);
  const conic::SolverOptions opt;
  for (int trial = 0; trial < 3; ++trial) {
    const Tensor t = RandomTensor(2, 3, rng);
    const double v0 = ComputeCbNorm(t, 0, opt).value;
    const double v1 = ComputeCbNorm(t, 1, opt).value;
    EXPECT_NEAR(v0, v1, 2 * opt.gap_tol);
    EXPECT_NEAR(ComputeCbNorm(t.Reversed(), 1, opt).value, v1, 2 * opt.gap_tol);
  }
}

// max over sign vectors of |T(z_1, ..., z_t)|, enumerated directly.
double SignBound(const Tensor& t) {
  const int n = t.dim(), order = t.order();
  const long long total = 1LL << (n * order);
  double best = 0.0;
  for (long long bits = 0; bits < total; ++bits) {
    std::vector<std::vector<double>> z(order, std::vector<double>(n));
    for (int j = 0; j < order; ++j) {
      for (int i = 0; i < n; ++i) z[j][i] = (bits >> (j * n + i)) & 1 ? -1.0 : 1.0;
    }
    best = std::max(best, std::fabs(EvalMultilinear(t, z)));
  }
  return best;
}

TEST(CbNormTest, AtLeastSignBound) {
  std::mt19937_64 rng(6);
  for (int n = 1; n <= 2; ++n) {
    for (int t = 1; t <= 3; ++t) {
      const Tensor tensor = RandomTensor(n, t, rng);
      EXPECT_GE(ComputeCbNorm(tensor, t / 2).value, SignBound(tensor) - 1e-8);
    }
  }
}

}  // namespace
}  // namespace cbq
