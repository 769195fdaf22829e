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

#include "cbq/conic.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <tuple>

#include <Eigen/Sparse>
#include <Eigen/SparseQR>
#include <fmt/format.h>

#include "cbq/error.h"
#include "cbq/kernels.h"

namespace cbq::conic {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const double> View(const VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> View(VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double MaxAbs(const VectorXd& v) { return kernels::MaxAbs(View(v)); }

double MaxAbs(const MatrixXd& m) {
  return kernels::MaxAbs({m.data(), static_cast<std::size_t>(m.size())});
}

double MinEigenvalue(const MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

// Symmetric matrix entry listed in both triangles.
struct SymEntry {
  int p;
  int q;
  double v;
};

// Rows touching one PSD block, with their entries.
struct BlockRow {
  int row;
  std::vector<SymEntry> entries;
};

// Minimize-form copy of the problem with duplicates removed:
//   min <C,X> + c_l'x_l + c_f'x_f  s.t.  A(X) + A_l x_l + A_f x_f = b.
struct Standard {
  int m = 0;
  std::vector<int> orders;
  std::vector<MatrixXd> c_psd;
  std::vector<std::vector<BlockRow>> block_rows;
  SparseMatrix a_lin;   // m x n_l
  SparseMatrix a_free;  // m x n_f
  VectorXd c_lin;
  VectorXd c_free;
  VectorXd b;
  std::vector<int> kept_rows;    // standard row -> problem row
  std::vector<int> scalar_slot;  // problem scalar -> position within its kind
  double sign = 1.0;             // -1 when the problem maximizes

  int n_lin() const { return static_cast<int>(c_lin.size()); }
  int n_free() const { return static_cast<int>(c_free.size()); }
  int nu() const {
    int total = n_lin();
    for (int k : orders) total += k;
    return total;
  }
};

struct Iterate {
  std::vector<MatrixXd> x;
  VectorXd x_lin;
  VectorXd x_free;
  VectorXd y;
  std::vector<MatrixXd> z;
  VectorXd z_lin;
};

VectorXd ApplyA(const Standard& s, const std::vector<MatrixXd>& x, const VectorXd& x_lin,
                const VectorXd& x_free) {
  VectorXd out = s.a_lin * x_lin + s.a_free * x_free;
  for (std::size_t k = 0; k < s.orders.size(); ++k) {
    for (const BlockRow& br : s.block_rows[k]) {
      double sum = 0.0;
      for (const SymEntry& e : br.entries) sum += e.v * x[k](e.p, e.q);
      out(br.row) += sum;
    }
  }
  return out;
}

template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> ApplyAdjointPsd(
    const Standard& s, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < s.orders.size(); ++k) {
    Matrix m = Matrix::Zero(s.orders[k], s.orders[k]);
    for (const BlockRow& br : s.block_rows[k]) {
      for (const SymEntry& e : br.entries) m(e.p, e.q) += y(br.row) * static_cast<Scalar>(e.v);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string RowName(const Problem& problem, int i) {
  const std::string& label = problem.row(i).label;
  return label.empty() ? fmt::format("#{}", i) : fmt::format("#{} ({})", i, label);
}

Standard Standardize(const Problem& problem, std::vector<int>* dropped) {
  Standard s;
  s.sign = problem.sense() == Sense::kMaximize ? -1.0 : 1.0;
  s.orders.reserve(problem.num_blocks());
  for (int k = 0; k < problem.num_blocks(); ++k) {
    s.orders.push_back(problem.block_order(k));
    s.c_psd.push_back(s.sign * problem.objective_block(k));
  }
  int n_lin = 0;
  int n_free = 0;
  s.scalar_slot.resize(problem.num_scalars());
  for (int j = 0; j < problem.num_scalars(); ++j) {
    s.scalar_slot[j] = problem.scalar_kind(j) == ScalarKind::kNonnegative ? n_lin++ : n_free++;
  }
  s.c_lin = VectorXd::Zero(n_lin);
  s.c_free = VectorXd::Zero(n_free);
  for (int j = 0; j < problem.num_scalars(); ++j) {
    double c = s.sign * problem.scalar_objective()(j);
    if (problem.scalar_kind(j) == ScalarKind::kNonnegative) {
      s.c_lin(s.scalar_slot[j]) = c;
    } else {
      s.c_free(s.scalar_slot[j]) = c;
    }
  }

  // Exact duplicate rows: identical terms. Identical right-hand sides are
  // dropped, different ones are contradictory.
  using Key = std::pair<std::vector<std::tuple<int, int, int, double>>,
                        std::vector<std::pair<int, double>>>;
  std::map<Key, int> seen;
  for (int i = 0; i < problem.num_rows(); ++i) {
    const Row& row = problem.row(i);
    Key key;
    for (const PsdTerm& t : row.psd) key.first.emplace_back(t.block, t.r, t.c, t.value);
    for (const ScalarTerm& t : row.scalar) key.second.emplace_back(t.var, t.value);
    if (key.first.empty() && key.second.empty()) {
      if (row.rhs != 0.0) {
        throw SolverError("row " + RowName(problem, i) + " reads 0 = " + fmt::format("{}", row.rhs));
      }
      dropped->push_back(i);
      continue;
    }
    auto [it, inserted] = seen.emplace(std::move(key), i);
    if (!inserted) {
      if (problem.row(it->second).rhs != row.rhs) {
        throw SolverError("rows " + RowName(problem, it->second) + " and " + RowName(problem, i) +
                          " have equal coefficients but different right-hand sides");
      }
      dropped->push_back(i);
      continue;
    }
    s.kept_rows.push_back(i);
  }
  s.m = static_cast<int>(s.kept_rows.size());
  s.b.resize(s.m);
  s.block_rows.resize(s.orders.size());
  std::vector<Eigen::Triplet<double>> lin_triplets;
  std::vector<Eigen::Triplet<double>> free_triplets;
  for (int r = 0; r < s.m; ++r) {
    const Row& row = problem.row(s.kept_rows[r]);
    s.b(r) = row.rhs;
    std::map<int, std::vector<SymEntry>> per_block;
    for (const PsdTerm& t : row.psd) {
      auto& entries = per_block[t.block];
      entries.push_back({t.r, t.c, t.value});
      if (t.r != t.c) entries.push_back({t.c, t.r, t.value});
    }
    for (auto& [block, entries] : per_block) {
      s.block_rows[block].push_back({r, std::move(entries)});
    }
    for (const ScalarTerm& t : row.scalar) {
      if (problem.scalar_kind(t.var) == ScalarKind::kNonnegative) {
        lin_triplets.emplace_back(r, s.scalar_slot[t.var], t.value);
      } else {
        free_triplets.emplace_back(r, s.scalar_slot[t.var], t.value);
      }
    }
  }
  s.a_lin.resize(s.m, n_lin);
  s.a_lin.setFromTriplets(lin_triplets.begin(), lin_triplets.end());
  s.a_free.resize(s.m, n_free);
  s.a_free.setFromTriplets(free_triplets.begin(), free_triplets.end());
  return s;
}

// Rank check on the equality rows: QR of A' with column pivoting.
void CheckRowRank(const Problem& problem, const Standard& s) {
  if (s.m == 0) return;
  std::vector<int> offsets;
  int cols = 0;
  for (int order : s.orders) {
    offsets.push_back(cols);
    cols += order * (order + 1) / 2;
  }
  const int lin_offset = cols;
  cols += s.n_lin();
  const int free_offset = cols;
  cols += s.n_free();
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < s.orders.size(); ++k) {
    const int order = s.orders[k];
    for (const BlockRow& br : s.block_rows[k]) {
      for (const SymEntry& e : br.entries) {
        if (e.p > e.q) continue;
        // Upper-triangle coordinate (p, q), p <= q, packed column-wise.
        const int col = offsets[k] + e.q * (e.q + 1) / 2 + e.p;
        triplets.emplace_back(col, br.row, e.p == e.q ? e.v : 2.0 * e.v);
      }
      (void)order;
    }
  }
  for (int outer = 0; outer < s.a_lin.outerSize(); ++outer) {
    for (SparseMatrix::InnerIterator it(s.a_lin, outer); it; ++it) {
      triplets.emplace_back(lin_offset + it.col(), it.row(), it.value());
    }
  }
  for (int outer = 0; outer < s.a_free.outerSize(); ++outer) {
    for (SparseMatrix::InnerIterator it(s.a_free, outer); it; ++it) {
      triplets.emplace_back(free_offset + it.col(), it.row(), it.value());
    }
  }
  SparseMatrix at(cols, s.m);
  at.setFromTriplets(triplets.begin(), triplets.end());
  at.makeCompressed();
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  qr.compute(at);
  if (qr.info() != Eigen::Success) throw SolverError("QR factorization of the constraint rows failed");
  const int rank = static_cast<int>(qr.rank());
  if (rank >= s.m) return;
  std::vector<int> redundant;
  const auto& perm = qr.colsPermutation().indices();
  for (int k = rank; k < s.m; ++k) redundant.push_back(s.kept_rows[perm(k)]);
  std::sort(redundant.begin(), redundant.end());
  std::string names;
  for (std::size_t k = 0; k < redundant.size() && k < 10; ++k) {
    names += (k ? ", " : "") + RowName(problem, redundant[k]);
  }
  if (redundant.size() > 10) names += fmt::format(", ... ({} in total)", redundant.size());
  throw SolverError(fmt::format("equality rows are rank deficient ({} of {}); redundant rows: {}",
                                rank, s.m, names));
}

// Nesterov-Todd scaling of one PSD block: X = R D R', Z = R^-T D R^-1.
using MatrixXe = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXe = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct BlockScaling {
  MatrixXd r;
  MatrixXd r_inv;
  MatrixXd w;  // R R'
  MatrixXe w_ext;  // same, kept in extended precision for the Schur complement
  VectorXd d;
};

// Computed in extended precision: near the optimum W spans eigenvalues from
// about sqrt(mu) to 1/sqrt(mu) and the Schur complement inherits W's errors
// squared.
BlockScaling NtScaling(const MatrixXd& x, const MatrixXd& z) {
  const MatrixXe lx = x.cast<long double>().llt().matrixL();
  const MatrixXe lz = z.cast<long double>().llt().matrixL();
  Eigen::JacobiSVD<MatrixXe> svd(lz.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXe sqrt_d = svd.singularValues().cwiseSqrt();
  const MatrixXe r = lx * svd.matrixV() * sqrt_d.cwiseInverse().asDiagonal();
  BlockScaling sc;
  sc.d = svd.singularValues().cast<double>();
  sc.r = r.cast<double>();
  sc.r_inv = (sqrt_d.cwiseInverse().asDiagonal() * svd.matrixU().transpose() * lz.transpose())
                 .cast<double>();
  sc.w_ext = r * r.transpose();
  sc.w = sc.w_ext.cast<double>();
  return sc;
}

// Largest step keeping x + alpha dx PSD, given the Cholesky factor of x.
double MaxPsdStep(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  MatrixXd m = llt.matrixL().solve(dx);
  m = llt.matrixL().solve(m.transpose()).transpose();
  const double lmin = MinEigenvalue(0.5 * (m + m.transpose()));
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

MatrixXd Sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

class InteriorPoint {
 public:
  InteriorPoint(const Standard& s, const SolverOptions& options) : s_(s), opt_(options) {}

  Iterate Run(Status* status, int* iterations);

 private:
  struct Direction {
    std::vector<MatrixXd> dx;
    VectorXd dx_lin;
    VectorXd dx_free;
    VectorXd dy;
    std::vector<MatrixXd> dz;
    VectorXd dz_lin;
  };

  void InitialPoint(Iterate* it) const;
  void Factor(const Iterate& it);
  // Solves with complementarity right-hand sides rx (per block) and rx_lin:
  //   dX + W dZ W = rx,  dx + (x/z) dz = rx_lin.
  Direction SolveNewton(const std::vector<MatrixXd>& rx, const VectorXd& rx_lin) const;
  VectorXe SolveAugmented(const VectorXd& rhs) const;
  // Factors A A' over all variables (fixed for the whole run).
  void FactorGram();
  // Adds the minimum-norm correction that makes the direction satisfy the
  // primal Newton equation exactly; the reduced system loses accuracy as the
  // scaling becomes ill-conditioned near the optimum.
  void RestorePrimal(Direction* d) const;

  const Standard& s_;
  const SolverOptions& opt_;

  // Per-iteration state.
  std::vector<BlockScaling> scaling_;
  VectorXd lin_ratio_;  // x / z
  // The reduced system is assembled and factored in extended precision; its
  // condition number grows like 1/mu^2 near the optimum.
  MatrixXe kkt_;
  Eigen::PartialPivLU<MatrixXe> lu_;
  Eigen::LLT<MatrixXd> gram_;
  VectorXd rp_;
  std::vector<MatrixXd> rd_;
  VectorXd rd_lin_;
  VectorXd rd_free_;
};

void InteriorPoint::InitialPoint(Iterate* it) const {
  double a_norm = 0.0;
  for (std::size_t k = 0; k < s_.orders.size(); ++k) {
    for (const BlockRow& br : s_.block_rows[k]) {
      double f = 0.0;
      for (const SymEntry& e : br.entries) f += e.v * e.v;
      a_norm = std::max(a_norm, std::sqrt(f));
    }
  }
  for (int j = 0; j < s_.a_lin.outerSize(); ++j) a_norm = std::max(a_norm, s_.a_lin.col(j).norm());
  double c_norm = std::max(s_.c_lin.norm(), s_.c_free.norm());
  for (const MatrixXd& c : s_.c_psd) c_norm = std::max(c_norm, c.norm());
  const double n_total = std::max(1, s_.nu());
  double xi = std::max(10.0, std::sqrt(n_total));
  for (int i = 0; i < s_.m; ++i) {
    xi = std::max(xi, std::sqrt(n_total) * (1.0 + std::fabs(s_.b(i))) / (1.0 + a_norm));
  }
  const double eta = std::max({10.0, std::sqrt(n_total), c_norm, a_norm});
  for (int order : s_.orders) {
    it->x.push_back(xi * MatrixXd::Identity(order, order));
    it->z.push_back(eta * MatrixXd::Identity(order, order));
  }
  it->x_lin = VectorXd::Constant(s_.n_lin(), xi);
  it->z_lin = VectorXd::Constant(s_.n_lin(), eta);
  it->x_free = VectorXd::Zero(s_.n_free());
  it->y = VectorXd::Zero(s_.m);
}

void InteriorPoint::Factor(const Iterate& it) {
  const int m = s_.m;
  const int nf = s_.n_free();
  scaling_.clear();
  MatrixXe schur = MatrixXe::Zero(m, m);
  for (std::size_t k = 0; k < s_.orders.size(); ++k) {
    scaling_.push_back(NtScaling(it.x[k], it.z[k]));
    const MatrixXe& w = scaling_.back().w_ext;
    const auto& rows = s_.block_rows[k];
    // M_ij += <A_i, W A_j W> = sum a_pq b_rs W_qr W_sp.
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = a; b < rows.size(); ++b) {
        long double sum = 0.0L;
        for (const SymEntry& e : rows[a].entries) {
          for (const SymEntry& f : rows[b].entries) {
            sum += static_cast<long double>(e.v) * f.v * w(e.q, f.p) * w(f.q, e.p);
          }
        }
        schur(rows[a].row, rows[b].row) += sum;
        if (a != b) schur(rows[b].row, rows[a].row) += sum;
      }
    }
  }
  lin_ratio_ = it.x_lin.cwiseQuotient(it.z_lin);
  if (s_.n_lin() > 0) {
    SparseMatrix scaled = s_.a_lin * lin_ratio_.asDiagonal();
    schur += MatrixXd(scaled * s_.a_lin.transpose()).cast<long double>();
  }
  kkt_.setZero(m + nf, m + nf);
  kkt_.topLeftCorner(m, m) = schur;
  if (nf > 0) {
    const MatrixXe af = MatrixXd(s_.a_free).cast<long double>();
    kkt_.topRightCorner(m, nf) = af;
    kkt_.bottomLeftCorner(nf, m) = af.transpose();
  }
  lu_.compute(kkt_);
}

void InteriorPoint::FactorGram() {
  MatrixXd g = MatrixXd(s_.a_lin * s_.a_lin.transpose()) + MatrixXd(s_.a_free * s_.a_free.transpose());
  for (std::size_t k = 0; k < s_.orders.size(); ++k) {
    const int order = s_.orders[k];
    std::vector<std::vector<std::pair<int, double>>> at(static_cast<std::size_t>(order) * order);
    for (const BlockRow& br : s_.block_rows[k]) {
      for (const SymEntry& e : br.entries) {
        at[static_cast<std::size_t>(e.p) * order + e.q].emplace_back(br.row, e.v);
      }
    }
    for (const auto& cell : at) {
      for (const auto& [i, vi] : cell) {
        for (const auto& [j, vj] : cell) g(i, j) += vi * vj;
      }
    }
  }
  gram_.compute(g);
}

void InteriorPoint::RestorePrimal(Direction* d) const {
  const VectorXd err = rp_ - ApplyA(s_, d->dx, d->dx_lin, d->dx_free);
  const VectorXd u = gram_.solve(err);
  const std::vector<MatrixXd> adj = ApplyAdjointPsd(s_, u);
  for (std::size_t k = 0; k < s_.orders.size(); ++k) d->dx[k] = Sym(d->dx[k] + adj[k]);
  d->dx_lin += s_.a_lin.transpose() * u;
  d->dx_free += s_.a_free.transpose() * u;
}

VectorXe InteriorPoint::SolveAugmented(const VectorXd& rhs) const {
  const VectorXe r = rhs.cast<long double>();
  VectorXe sol = lu_.solve(r);
  for (int refine = 0; refine < 2; ++refine) {
    const VectorXe res = r - kkt_ * sol;
    sol += lu_.solve(res);
  }
  return sol;
}

InteriorPoint::Direction InteriorPoint::SolveNewton(const std::vector<MatrixXd>& rx,
                                                    const VectorXd& rx_lin) const {
  const int m = s_.m;
  const int nf = s_.n_free();
  // dX = rx - W Rd W + W A*(dy) W, dx = rx_lin - (x/z) rd_lin + (x/z) A_l' dy.
  // W is of size up to 1/sqrt(mu) near the optimum, so dX is a small
  // difference of large terms; it is formed in extended precision.
  std::vector<MatrixXe> base(s_.orders.size());
  std::vector<MatrixXd> base_d(s_.orders.size());
  for (std::size_t k = 0; k < s_.orders.size(); ++k) {
    const MatrixXe& w = scaling_[k].w_ext;
    base[k] = rx[k].cast<long double>() - w * rd_[k].cast<long double>() * w;
    base_d[k] = Sym(base[k].cast<double>());
  }
  const VectorXd base_lin = rx_lin - lin_ratio_.cwiseProduct(rd_lin_);
  VectorXd rhs(m + nf);
  rhs.head(m) = rp_ - ApplyA(s_, base_d, base_lin, VectorXd::Zero(nf));
  rhs.tail(nf) = rd_free_;
  const VectorXe sol = SolveAugmented(rhs);

  Direction d;
  const VectorXe dy = sol.head(m);
  d.dy = dy.cast<double>();
  d.dx_free = sol.tail(nf).cast<double>();
  const std::vector<MatrixXe> aty = ApplyAdjointPsd(s_, dy);
  const VectorXd aty_lin = s_.a_lin.transpose() * d.dy;
  for (std::size_t k = 0; k < s_.orders.size(); ++k) {
    const MatrixXe& w = scaling_[k].w_ext;
    const MatrixXe dx = base[k] + w * aty[k] * w;
    d.dz.push_back(Sym(rd_[k] - aty[k].cast<double>()));
    d.dx.push_back(Sym(dx.cast<double>()));
  }
  d.dz_lin = rd_lin_ - aty_lin;
  d.dx_lin = base_lin + lin_ratio_.cwiseProduct(aty_lin);
  RestorePrimal(&d);
  return d;
}

Iterate InteriorPoint::Run(Status* status, int* iterations) {
  Iterate it;
  InitialPoint(&it);
  FactorGram();
  const double nu = std::max(1, s_.nu());
  Iterate best = it;
  double best_merit = kInf;
  *status = Status::kGapNotReached;
  int stall = 0;
  for (int iter = 0;; ++iter) {
    *iterations = iter;
    // Residuals.
    rp_ = s_.b - ApplyA(s_, it.x, it.x_lin, it.x_free);
    const std::vector<MatrixXd> aty = ApplyAdjointPsd(s_, it.y);
    rd_.assign(s_.orders.size(), MatrixXd());
    double pobj = s_.c_lin.dot(it.x_lin) + s_.c_free.dot(it.x_free);
    double comp = kernels::Dot(View(it.x_lin), View(it.z_lin));
    double dinf = 0.0;
    for (std::size_t k = 0; k < s_.orders.size(); ++k) {
      rd_[k] = s_.c_psd[k] - aty[k] - it.z[k];
      dinf = std::max(dinf, MaxAbs(rd_[k]));
      pobj += (s_.c_psd[k].cwiseProduct(it.x[k])).sum();
      comp += (it.x[k].cwiseProduct(it.z[k])).sum();
    }
    rd_lin_ = s_.c_lin - s_.a_lin.transpose() * it.y - it.z_lin;
    rd_free_ = s_.c_free - s_.a_free.transpose() * it.y;
    dinf = std::max({dinf, MaxAbs(rd_lin_), MaxAbs(rd_free_)});
    const double pinf = MaxAbs(rp_);
    const double dobj = s_.b.dot(it.y);
    const double gap = std::fabs(pobj - dobj);
    const double mu = comp / nu;
    if (opt_.verbose) {
      std::cerr << fmt::format("iter {:3d}  pobj {:+.10e}  dobj {:+.10e}  gap {:.2e}  pinf {:.2e}  "
                               "dinf {:.2e}  mu {:.2e}\n",
                               iter, pobj, dobj, gap, pinf, dinf, mu);
    }
    const double merit = std::max({pinf / opt_.feas_tol, dinf / opt_.feas_tol,
                                   gap / opt_.gap_tol, comp / opt_.gap_tol});
    if (merit < best_merit) {
      best_merit = merit;
      best = it;
      stall = 0;
    } else {
      ++stall;
    }
    if (merit <= 1.0) {
      *status = Status::kOptimal;
      return it;
    }
    double x_norm = it.x_lin.size() ? MaxAbs(it.x_lin) : 0.0;
    for (const MatrixXd& x : it.x) x_norm = std::max(x_norm, MaxAbs(x));
    if (x_norm > 1e13 || MaxAbs(it.y) > 1e13) {
      *status = Status::kInfeasibleEvidence;
      return it;
    }
    if (iter >= opt_.max_iter || stall > 12) return best;

    Factor(it);
    if (!std::isfinite(lu_.rcond()) || lu_.rcond() == 0.0) return best;

    // Predictor: dX + W dZ W = -X.
    std::vector<MatrixXd> rx(s_.orders.size());
    for (std::size_t k = 0; k < s_.orders.size(); ++k) rx[k] = -it.x[k];
    VectorXd rx_lin = -it.x_lin;
    const Direction aff = SolveNewton(rx, rx_lin);

    double ap = 1.0;
    double ad = 1.0;
    for (std::size_t k = 0; k < s_.orders.size(); ++k) {
      ap = std::min(ap, MaxPsdStep(it.x[k], aff.dx[k]));
      ad = std::min(ad, MaxPsdStep(it.z[k], aff.dz[k]));
    }
    ap = std::min(ap, kernels::MaxStep(View(it.x_lin), View(aff.dx_lin)));
    ad = std::min(ad, kernels::MaxStep(View(it.z_lin), View(aff.dz_lin)));
    double comp_aff = (it.x_lin + ap * aff.dx_lin).dot(it.z_lin + ad * aff.dz_lin);
    for (std::size_t k = 0; k < s_.orders.size(); ++k) {
      comp_aff += ((it.x[k] + ap * aff.dx[k]).cwiseProduct(it.z[k] + ad * aff.dz[k])).sum();
    }
    const double sigma = std::clamp(std::pow(std::max(comp_aff, 0.0) / comp, 3.0), 0.0, 1.0);

    // Corrector in the scaled space:
    //   D o (dx~ + dz~) = sigma mu I - D^2 - dx~_aff o dz~_aff.
    for (std::size_t k = 0; k < s_.orders.size(); ++k) {
      const BlockScaling& sc = scaling_[k];
      const MatrixXd dxs = sc.r_inv * aff.dx[k] * sc.r_inv.transpose();
      const MatrixXd dzs = sc.r.transpose() * aff.dz[k] * sc.r;
      MatrixXd rhs = -0.5 * (dxs * dzs + dzs * dxs);
      const int order = s_.orders[k];
      for (int i = 0; i < order; ++i) rhs(i, i) += sigma * mu - sc.d(i) * sc.d(i);
      for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) rhs(i, j) *= 2.0 / (sc.d(i) + sc.d(j));
      }
      rx[k] = Sym(sc.r * rhs * sc.r.transpose());
    }
    rx_lin = (VectorXd::Constant(s_.n_lin(), sigma * mu) - it.x_lin.cwiseProduct(it.z_lin) -
              aff.dx_lin.cwiseProduct(aff.dz_lin))
                 .cwiseQuotient(it.z_lin);
    const Direction dir = SolveNewton(rx, rx_lin);

    double mp = kInf;
    double md = kInf;
    for (std::size_t k = 0; k < s_.orders.size(); ++k) {
      mp = std::min(mp, MaxPsdStep(it.x[k], dir.dx[k]));
      md = std::min(md, MaxPsdStep(it.z[k], dir.dz[k]));
    }
    mp = std::min(mp, kernels::MaxStep(View(it.x_lin), View(dir.dx_lin)));
    md = std::min(md, kernels::MaxStep(View(it.z_lin), View(dir.dz_lin)));
    const double gamma = 0.9 + 0.09 * std::min(ap, ad);
    const double step_p = std::min(1.0, gamma * mp);
    const double step_d = std::min(1.0, gamma * md);

    for (std::size_t k = 0; k < s_.orders.size(); ++k) {
      it.x[k] = Sym(it.x[k] + step_p * dir.dx[k]);
      it.z[k] = Sym(it.z[k] + step_d * dir.dz[k]);
    }
    kernels::Axpy(step_p, View(dir.dx_lin), View(it.x_lin));
    kernels::Axpy(step_p, View(dir.dx_free), View(it.x_free));
    kernels::Axpy(step_d, View(dir.dz_lin), View(it.z_lin));
    kernels::Axpy(step_d, View(dir.dy), View(it.y));
    if (step_p < 1e-12 && step_d < 1e-12) return best;
  }
}

}  // namespace

std::string_view StatusName(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasibleEvidence:
      return "infeasible-evidence";
    case Status::kGapNotReached:
      return "gap-not-reached";
  }
  return "unknown";
}

int Problem::AddPsdBlock(int order) {
  if (order < 1) throw SolverError("PSD block order must be positive");
  block_orders_.push_back(order);
  objective_blocks_.push_back(Eigen::MatrixXd::Zero(order, order));
  return static_cast<int>(block_orders_.size()) - 1;
}

int Problem::AddScalars(ScalarKind kind, int count) {
  const int first = num_scalars();
  scalar_kinds_.insert(scalar_kinds_.end(), count, kind);
  scalar_objective_.conservativeResize(num_scalars());
  scalar_objective_.tail(count).setZero();
  return first;
}

int Problem::AddRow(double rhs, std::string label) {
  rows_.push_back(Row{rhs, std::move(label), {}, {}});
  return num_rows() - 1;
}

void Problem::AddPsdTerm(int row, int block, int r, int c, double value) {
  if (block < 0 || block >= num_blocks()) throw SolverError("unknown PSD block");
  const int order = block_orders_[block];
  if (r < 0 || c < 0 || r >= order || c >= order) throw SolverError("PSD entry out of range");
  if (r > c) std::swap(r, c);
  auto& terms = rows_.at(row).psd;
  auto it = std::find_if(terms.begin(), terms.end(), [&](const PsdTerm& t) {
    return t.block == block && t.r == r && t.c == c;
  });
  if (it != terms.end()) {
    it->value += value;
    if (it->value == 0.0) terms.erase(it);
  } else if (value != 0.0) {
    auto pos = std::lower_bound(terms.begin(), terms.end(), std::tuple(block, r, c),
                                [](const PsdTerm& t, const std::tuple<int, int, int>& key) {
                                  return std::tuple(t.block, t.r, t.c) < key;
                                });
    terms.insert(pos, PsdTerm{block, r, c, value});
  }
}

void Problem::AddScalarTerm(int row, int var, double value) {
  if (var < 0 || var >= num_scalars()) throw SolverError("unknown scalar variable");
  auto& terms = rows_.at(row).scalar;
  auto it = std::lower_bound(terms.begin(), terms.end(), var,
                             [](const ScalarTerm& t, int v) { return t.var < v; });
  if (it != terms.end() && it->var == var) {
    it->value += value;
    if (it->value == 0.0) terms.erase(it);
  } else if (value != 0.0) {
    terms.insert(it, ScalarTerm{var, value});
  }
}

void Problem::AddPsdObjective(int block, int r, int c, double value) {
  Eigen::MatrixXd& m = objective_blocks_.at(block);
  m(r, c) += value;
  if (r != c) m(c, r) += value;
}

void Problem::AddScalarObjective(int var, double value) { scalar_objective_(var) += value; }

double Problem::RowActivity(int i, const std::vector<Eigen::MatrixXd>& x_psd,
                            const Eigen::VectorXd& x_scalar) const {
  const Row& r = rows_[i];
  double sum = 0.0;
  for (const PsdTerm& t : r.psd) {
    sum += (t.r == t.c ? 1.0 : 2.0) * t.value * x_psd[t.block](t.r, t.c);
  }
  for (const ScalarTerm& t : r.scalar) sum += t.value * x_scalar(t.var);
  return sum;
}

std::string Problem::Dump() const {
  std::string out = fmt::format("{} blocks={} scalars={} rows={}\n",
                                sense_ == Sense::kMaximize ? "maximize" : "minimize",
                                num_blocks(), num_scalars(), num_rows());
  for (int k = 0; k < num_blocks(); ++k) out += fmt::format("block {} order {}\n", k, block_orders_[k]);
  for (int j = 0; j < num_scalars(); ++j) {
    out += fmt::format("scalar {} {}\n", j,
                       scalar_kinds_[j] == ScalarKind::kNonnegative ? "nonneg" : "free");
  }
  out += "objective:";
  for (int k = 0; k < num_blocks(); ++k) {
    for (int c = 0; c < block_orders_[k]; ++c) {
      for (int r = 0; r <= c; ++r) {
        if (objective_blocks_[k](r, c) != 0.0) {
          out += fmt::format(" {:+.17g}*X{}[{},{}]", objective_blocks_[k](r, c), k, r, c);
        }
      }
    }
  }
  for (int j = 0; j < num_scalars(); ++j) {
    if (scalar_objective_(j) != 0.0) out += fmt::format(" {:+.17g}*x{}", scalar_objective_(j), j);
  }
  out += "\n";
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[i];
    out += fmt::format("row {}{}:", i, r.label.empty() ? "" : " " + r.label);
    for (const PsdTerm& t : r.psd) out += fmt::format(" {:+.17g}*X{}[{},{}]", t.value, t.block, t.r, t.c);
    for (const ScalarTerm& t : r.scalar) out += fmt::format(" {:+.17g}*x{}", t.value, t.var);
    out += fmt::format(" = {:.17g}\n", r.rhs);
  }
  return out;
}

Residuals ComputeResiduals(const Problem& problem, const Solution& sol) {
  Residuals res{0.0, 0.0, 0.0};
  for (int i = 0; i < problem.num_rows(); ++i) {
    res.primal_infeas = std::max(
        res.primal_infeas, std::fabs(problem.RowActivity(i, sol.x_psd, sol.x_scalar) - problem.row(i).rhs));
  }
  const double sign = problem.sense() == Sense::kMaximize ? 1.0 : -1.0;
  // z = sign * (A'y - c) for the scalars and Z_k = sign * (A*(y) - C_k).
  Eigen::VectorXd aty = Eigen::VectorXd::Zero(problem.num_scalars());
  std::vector<Eigen::MatrixXd> aty_psd;
  for (int k = 0; k < problem.num_blocks(); ++k) {
    aty_psd.push_back(Eigen::MatrixXd::Zero(problem.block_order(k), problem.block_order(k)));
  }
  double pobj = 0.0;
  for (int i = 0; i < problem.num_rows(); ++i) {
    const Row& r = problem.row(i);
    for (const ScalarTerm& t : r.scalar) aty(t.var) += sol.y(i) * t.value;
    for (const PsdTerm& t : r.psd) {
      aty_psd[t.block](t.r, t.c) += sol.y(i) * t.value;
      if (t.r != t.c) aty_psd[t.block](t.c, t.r) += sol.y(i) * t.value;
    }
  }
  for (int j = 0; j < problem.num_scalars(); ++j) {
    const double x = sol.x_scalar(j);
    const double z = sign * (aty(j) - problem.scalar_objective()(j));
    pobj += problem.scalar_objective()(j) * x;
    if (problem.scalar_kind(j) == ScalarKind::kNonnegative) {
      res.primal_infeas = std::max(res.primal_infeas, -x);
      res.dual_infeas = std::max(res.dual_infeas, -z);
    } else {
      res.dual_infeas = std::max(res.dual_infeas, std::fabs(z));
    }
  }
  for (int k = 0; k < problem.num_blocks(); ++k) {
    pobj += (problem.objective_block(k).cwiseProduct(sol.x_psd[k])).sum();
    res.primal_infeas = std::max(res.primal_infeas, -MinEigenvalue(Sym(sol.x_psd[k])));
    const Eigen::MatrixXd z = sign * (aty_psd[k] - problem.objective_block(k));
    res.dual_infeas = std::max(res.dual_infeas, -MinEigenvalue(Sym(z)));
  }
  double dobj = 0.0;
  for (int i = 0; i < problem.num_rows(); ++i) dobj += problem.row(i).rhs * sol.y(i);
  res.gap = std::fabs(pobj - dobj);
  return res;
}

Solution Solve(const Problem& problem, const SolverOptions& options) {
  Solution sol;
  const Standard s = Standardize(problem, &sol.dropped_rows);
  CheckRowRank(problem, s);

  InteriorPoint ipm(s, options);
  Status status;
  int iterations = 0;
  const Iterate it = ipm.Run(&status, &iterations);

  sol.status = status;
  sol.iterations = iterations;
  sol.x_psd = it.x;
  sol.x_scalar = Eigen::VectorXd::Zero(problem.num_scalars());
  for (int j = 0; j < problem.num_scalars(); ++j) {
    sol.x_scalar(j) = problem.scalar_kind(j) == ScalarKind::kNonnegative
                          ? it.x_lin(s.scalar_slot[j])
                          : it.x_free(s.scalar_slot[j]);
  }
  // Internal multipliers belong to the minimize form; flip for maximize.
  sol.y = Eigen::VectorXd::Zero(problem.num_rows());
  for (int r = 0; r < s.m; ++r) sol.y(s.kept_rows[r]) = s.sign * it.y(r);

  const double sign = problem.sense() == Sense::kMaximize ? 1.0 : -1.0;
  sol.z_psd.clear();
  for (int k = 0; k < problem.num_blocks(); ++k) {
    sol.z_psd.push_back(Eigen::MatrixXd::Zero(problem.block_order(k), problem.block_order(k)));
  }
  Eigen::VectorXd aty = Eigen::VectorXd::Zero(problem.num_scalars());
  for (int i = 0; i < problem.num_rows(); ++i) {
    const Row& r = problem.row(i);
    for (const ScalarTerm& t : r.scalar) aty(t.var) += sol.y(i) * t.value;
    for (const PsdTerm& t : r.psd) {
      sol.z_psd[t.block](t.r, t.c) += sol.y(i) * t.value;
      if (t.r != t.c) sol.z_psd[t.block](t.c, t.r) += sol.y(i) * t.value;
    }
  }
  for (int k = 0; k < problem.num_blocks(); ++k) {
    sol.z_psd[k] = sign * (sol.z_psd[k] - problem.objective_block(k));
  }
  sol.z_scalar = sign * (aty - problem.scalar_objective());

  sol.primal_value = problem.scalar_objective().dot(sol.x_scalar);
  for (int k = 0; k < problem.num_blocks(); ++k) {
    sol.primal_value += (problem.objective_block(k).cwiseProduct(sol.x_psd[k])).sum();
  }
  sol.dual_value = 0.0;
  for (int i = 0; i < problem.num_rows(); ++i) sol.dual_value += problem.row(i).rhs * sol.y(i);
  const Residuals res = ComputeResiduals(problem, sol);
  sol.gap = res.gap;
  sol.primal_infeas = res.primal_infeas;
  sol.dual_infeas = res.dual_infeas;
  return sol;
}

}  // namespace cbq::conic
