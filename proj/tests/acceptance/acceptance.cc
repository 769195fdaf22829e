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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Each criterion also fills a value record; the last
// criterion reruns the first eleven and compares those records byte for byte.

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cbq/boolean.h"
#include "cbq/cbnorm.h"
#include "cbq/error.h"
#include "cbq/oracle.h"
#include "cbq/query_degree.h"
#include "cbq/report.h"
#include "cbq/tensor.h"
#include "cbq/text.h"
#include "cbq/witness.h"

namespace cbq {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string summary;  // may mention timings, so it is not compared
  Report record;        // values only
};

// Records a failed check and keeps the first message for the summary.
void Check(Outcome* o, bool ok, const std::string& what) {
  if (ok) return;
  if (o->pass) o->summary = what;
  o->pass = false;
}

Tensor RandomTensor(int n, int t, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<double> values(static_cast<std::size_t>(TupleCount(n, t)));
  for (double& v : values) v = gauss(rng);
  return Tensor::FromDense(t, n, values);
}

std::int64_t Power(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

std::int64_t PairCount(std::int64_t m) { return m * (m - 1) / 2; }

// Counting formula for the Gram-consistency equalities at split s (s = 0
// leaves only the second sum, which is the m_0 count).
std::int64_t CountFormula(int n, int t, int s) {
  std::int64_t m = 0;
  for (int l = 1; l <= s - 1; ++l) m += (Power(n, l) - 1) * PairCount(Power(n, s - l));
  for (int l = 1; l <= t - s - 1; ++l) m += (Power(n, l) - 1) * PairCount(Power(n, t - s - l));
  return m;
}

Outcome ClosedFormOrderOne() {
  Outcome o;
  std::mt19937_64 rng(1001);
  double worst_rel = 0.0, worst_time = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Tensor tensor = RandomTensor(4, 1, rng);
    double expected = 0.0;
    for (const double v : tensor.ToDense()) expected += std::abs(v);
    const Clock::time_point start = Clock::now();
    const CbResult r = ComputeCbNorm(tensor, 0);
    const double seconds = SecondsSince(start);
    Check(&o, r.solution.status == conic::Status::kOptimal, fmt::format("tensor {}: not optimal", k));
    const double rel = std::abs(r.value - expected) / expected;
    worst_rel = std::max(worst_rel, rel);
    worst_time = std::max(worst_time, seconds);
    o.record.Add(fmt::format("value[{}]", k), text::Exact(r.value));
    Check(&o, rel <= 1e-6, fmt::format("tensor {}: relative error {:.3g}", k, rel));
    Check(&o, seconds < 1.0, fmt::format("tensor {}: {:.3g} s", k, seconds));
  }
  if (o.pass) {
    o.summary = fmt::format("max relative error {:.3g}, max time {:.3g} s", worst_rel, worst_time);
  }
  return o;
}

Outcome SplitInvariance() {
  Outcome o;
  std::mt19937_64 rng(1002);
  double worst = 0.0, worst_time = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Tensor tensor = RandomTensor(2, 4, rng);
    const Clock::time_point start = Clock::now();
    double lo = 0.0, hi = 0.0;
    for (int s = 0; s <= 2; ++s) {
      const CbResult r = ComputeCbNorm(tensor, s);
      const double v = r.value;
      Check(&o, r.solution.status == conic::Status::kOptimal,
            fmt::format("tensor {} s={}: not optimal", k, s));
      o.record.Add(fmt::format("value[{}][s={}]", k, s), text::Exact(v));
      lo = s == 0 ? v : std::min(lo, v);
      hi = s == 0 ? v : std::max(hi, v);
    }
    const double seconds = SecondsSince(start);
    worst = std::max(worst, hi - lo);
    worst_time = std::max(worst_time, seconds);
    Check(&o, hi - lo <= 2e-8, fmt::format("tensor {}: split spread {:.3g}", k, hi - lo));
    Check(&o, seconds < 30.0, fmt::format("tensor {}: {:.3g} s", k, seconds));
  }
  if (o.pass) o.summary = fmt::format("max spread {:.3g}, max time {:.3g} s", worst, worst_time);
  return o;
}

Outcome ConstraintCounts() {
  Outcome o;
  int cases = 0;
  for (int n = 1; n <= 3; ++n) {
    for (int t = 1; t <= 4; ++t) {
      for (int s = 0; s <= t / 2; ++s) {
        const auto generated = static_cast<std::int64_t>(BuildConstraints(n, t, s).size());
        const std::int64_t expected = CountFormula(n, t, s);
        o.record.Add(fmt::format("count[n={},t={},s={}]", n, t, s), std::to_string(generated));
        Check(&o, generated == expected && ConstraintCount(n, t, s) == expected,
              fmt::format("n={} t={} s={}: generated {} expected {}", n, t, s, generated,
                          expected));
        ++cases;
      }
    }
  }
  if (o.pass) o.summary = fmt::format("{} (n, t, s) cases match", cases);
  return o;
}

Outcome WitnessRoundTrip() {
  Outcome o;
  std::mt19937_64 rng(1004);
  double worst_value = 0.0, worst_orth = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int n = 1 + k % 2;
    const int t = 1 + (k / 2) % 3;
    const int s = DefaultSplit(t);
    const Tensor tensor = RandomTensor(n, t, rng);
    const CbResult r = ComputeCbNorm(tensor, s);
    Check(&o, r.solution.status == conic::Status::kOptimal, fmt::format("tensor {}: not optimal", k));
    WitnessDiagnostics diag;
    const CbWitness w = RecoverWitnessFromGram(r.gram, n, t, s, &diag);
    const double value = WitnessObjective(tensor, w);
    const double orth = OrthogonalityResidual(w);
    worst_value = std::max(worst_value, std::abs(value - r.value));
    worst_orth = std::max(worst_orth, orth);
    o.record.Add(fmt::format("witness[{}]", k), text::Exact(value));
    o.record.AddInt(fmt::format("d[{}]", k), w.d);
    Check(&o, std::abs(value - r.value) <= 1e-5,
          fmt::format("tensor {}: witness {} vs sdp {}", k, value, r.value));
    Check(&o, orth <= 1e-7, fmt::format("tensor {}: orthogonality residual {:.3g}", k, orth));
  }
  if (o.pass) {
    o.summary = fmt::format("max value error {:.3g}, max orthogonality residual {:.3g}",
                            worst_value, worst_orth);
  }
  return o;
}

Outcome LowerBoundSandwich() {
  Outcome o;
  std::mt19937_64 rng(1005);
  double min_margin = INFINITY;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 3;
    const int t = 1 + (k / 3) % 3;
    const Tensor tensor = RandomTensor(n, t, rng);
    const double sign = SignEnumerationBound(tensor).value;
    AscentConfig config;
    config.seed = static_cast<std::uint64_t>(k);
    const double ascent = AscentLowerBound(tensor, config).value;
    // The ascent value is a lower bound on the true norm, so it is compared
    // against the dual-certified upper bound rather than the primal value,
    // which may sit up to gap_tol below the optimum.
    const CbResult r = ComputeCbNorm(tensor, DefaultSplit(t));
    Check(&o, r.solution.status == conic::Status::kOptimal, fmt::format("tensor {}: not optimal", k));
    const double sdp = r.upper_bound;
    min_margin = std::min(min_margin, sdp + 1e-9 - ascent);
    o.record.Add(fmt::format("bounds[{}]", k),
                 fmt::format("{} {} {}", text::Exact(sign), text::Exact(ascent), text::Exact(sdp)));
    Check(&o, sign <= ascent, fmt::format("tensor {}: sign {} > ascent {}", k, sign, ascent));
    Check(&o, ascent <= sdp + 1e-9, fmt::format("tensor {}: ascent {} > sdp {}", k, ascent, sdp));
  }
  if (o.pass) o.summary = fmt::format("smallest slack to sdp + 1e-9: {:.3g}", min_margin);
  return o;
}

Outcome ParityPipeline() {
  Outcome o;
  const Clock::time_point start = Clock::now();
  const BooleanFunction f = BooleanFunction::Parity(2);

  // z_1 z_2 on z = (x, 1): exact fit, and its cb norm is at most 1.
  const std::pair<IndexTuple, double> entry{{1, 2}, 1.0};
  const Tensor explicit_tensor = Tensor::FromEntries(2, 3, std::span(&entry, 1));
  double explicit_fit = 0.0;
  for (CubeIndex x = 0; x < CubeSize(2); ++x) {
    const double value = EvalDiagonal(explicit_tensor, CubePoint(x, 2));
    explicit_fit = std::max(explicit_fit, std::abs(value - f.value(x)));
  }
  const double explicit_norm = ComputeCbNorm(explicit_tensor, 1).value;
  Check(&o, explicit_fit == 0.0, fmt::format("explicit tensor misfits by {}", explicit_fit));
  Check(&o, explicit_norm <= 1.0 + 1e-7, fmt::format("explicit tensor norm {}", explicit_norm));

  const MinEpsResult two = MinEpsSdp(f, 2, DefaultSplit(2));
  const MinEpsResult one = MinEpsSdp(f, 1, DefaultSplit(1));
  const CbDegResult deg = CbDeg(f, 0.0, 3, std::nullopt);
  const double seconds = SecondsSince(start);
  o.record.Add("eps[t=2]", text::Exact(two.eps));
  o.record.Add("eps[t=1]", text::Exact(one.eps));
  o.record.AddInt("cbdeg", deg.found ? deg.t_star : -1);
  o.record.AddInt("Q_0", deg.found ? deg.q_eps : -1);
  Check(&o, std::abs(two.eps) <= 1e-7, fmt::format("eps*(2) = {}", two.eps));
  Check(&o, CertifiedUpperBound(two.tensor, two.dual) <= 1.0 + 1e-7,
        "returned t=2 tensor exceeds cb norm 1");
  Check(&o, one.eps >= 0.25 - 1e-6, fmt::format("eps*(1) = {}", one.eps));
  Check(&o, deg.found && deg.t_star == 2, "cbdeg at eps=0 is not 2");
  Check(&o, deg.found && deg.q_eps == 1, "reported Q_0 is not 1");
  Check(&o, seconds < 10.0, fmt::format("{:.3g} s", seconds));
  if (o.pass) {
    o.summary = fmt::format("eps*(2) = {:.3g}, eps*(1) = {:.9g}, cbdeg 2, Q_0 1, {:.3g} s",
                            two.eps, one.eps, seconds);
  }
  return o;
}

Outcome LpExactness() {
  Outcome o;
  const BooleanFunction f = BooleanFunction::And(2);
  const LpResult lp = ApproxDegreeLp(f, 1);
  // Primal value of the returned polynomial, recomputed on the cube.
  double primal = 0.0;
  for (CubeIndex x = 0; x < CubeSize(2); ++x) {
    double p = 0.0;
    for (std::size_t k = 0; k < lp.subsets.size(); ++k) {
      p += lp.c(static_cast<Eigen::Index>(k)) * Character(MaskOf(lp.subsets[k], 2), x);
    }
    primal = std::max(primal, std::abs(p - f.value(x)));
  }
  // Dual value of the returned certificate, recomputed from phi.
  double dual = 0.0;
  for (CubeIndex x = 0; x < CubeSize(2); ++x) dual += f.value(x) * lp.certificate.phi[x];
  o.record.Add("primal", text::Exact(primal));
  o.record.Add("dual", text::Exact(dual));
  Check(&o, lp.status.has_certificate, "no dual certificate returned");
  Check(&o, std::abs(primal - 0.5) <= 1e-7, fmt::format("2eps* = {}", primal));
  Check(&o, std::abs(primal - dual) <= 1e-8, fmt::format("primal {} dual {}", primal, dual));
  if (o.pass) {
    o.summary = fmt::format("2eps* = {:.9g}, primal - dual = {:.3g}", primal, primal - dual);
  }
  return o;
}

struct GridCell {
  std::string name;
  BooleanFunction f;
  int t;
  LpResult lp;
  SocpResult socp;
  SdpCertificateResult sdp;
  MinEpsResult min_eps;
};

std::vector<GridCell> SolveGrid() {
  const std::vector<std::pair<std::string, BooleanFunction>> functions = {
      {"AND_2", BooleanFunction::And(2)},
      {"OR_2", BooleanFunction::Or(2)},
      {"PARITY_2", BooleanFunction::Parity(2)},
      {"PARITY_3", BooleanFunction::Parity(3)},
  };
  std::vector<GridCell> grid;
  for (const auto& [name, f] : functions) {
    for (int t = 1; t <= 3; ++t) {
      grid.push_back({name, f, t, ApproxDegreeLp(f, t), SolveSocp(f, t),
                      SolveSdpCertificate(f, t, SdpVariant::kRestricted),
                      MinEpsSdp(f, t, DefaultSplit(t))});
    }
  }
  return grid;
}

std::string CellName(const GridCell& c) { return fmt::format("{} t={}", c.name, c.t); }

Outcome CertificateChain(const std::vector<GridCell>& grid) {
  Outcome o;
  // Each value is a solver output, so the slack applies to both links; equal
  // values (LP and SOCP on AND_2 at t=1) differ in the last digits.
  const double slack = 3 * conic::SolverOptions{}.gap_tol;
  int verified = 0;
  for (const GridCell& c : grid) {
    const double lp = c.lp.status.value, socp = c.socp.status.value, sdp = c.sdp.status.value;
    o.record.Add(fmt::format("chain[{}]", CellName(c)),
                 fmt::format("{} {} {}", text::Exact(lp), text::Exact(socp), text::Exact(sdp)));
    Check(&o, lp <= socp + slack, fmt::format("{}: LP {} > SOCP {}", CellName(c), lp, socp));
    Check(&o, socp <= sdp + slack, fmt::format("{}: SOCP {} > SDP {}", CellName(c), socp, sdp));

    std::vector<std::pair<std::string, Certificate>> certs;
    if (c.lp.status.has_certificate) certs.emplace_back("lp", c.lp.certificate);
    if (c.socp.status.has_certificate) certs.emplace_back("socp", c.socp.certificate);
    if (c.sdp.status.has_certificate) certs.emplace_back("sdp", c.sdp.certificate);
    for (const auto& [kind, cert] : certs) {
      bool pass = false;
      std::string why;
      try {
        const VerifyReport report = VerifyCertificate(LiftToSdp(cert), c.f, c.t, 0.0);
        pass = report.pass;
        if (!report.failures.empty()) why = report.failures.front();
      } catch (const Error& e) {
        why = e.what();
      }
      o.record.AddBool(fmt::format("verify[{}][{}]", CellName(c), kind), pass);
      Check(&o, pass, fmt::format("{}: lifted {} certificate fails: {}", CellName(c), kind, why));
      ++verified;
    }
  }
  if (o.pass) {
    o.summary = fmt::format("{} cells ordered, {} lifted certificates verified", grid.size(),
                            verified);
  }
  return o;
}

Outcome StrongDuality(const std::vector<GridCell>& grid) {
  Outcome o;
  double worst = 0.0;
  for (const GridCell& c : grid) {
    const double diff = std::abs(2 * c.min_eps.eps - c.sdp.status.value);
    worst = std::max(worst, diff);
    o.record.Add(fmt::format("two_eps[{}]", CellName(c)), text::Exact(2 * c.min_eps.eps));
    Check(&o, diff <= 3e-8, fmt::format("{}: |2eps* - dual| = {:.3g}", CellName(c), diff));
  }
  if (o.pass) o.summary = fmt::format("max |2eps* - dual| = {:.3g}", worst);
  return o;
}

Outcome ArrowLift() {
  Outcome o;
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> shrink(0.01, 0.5);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 3;
    const int t = 1 + (k / 3) % 3;
    SignedMeasure phi(n);
    for (CubeIndex x = 0; x < CubeSize(n); ++x) phi[x] = gauss(rng);
    const std::vector<Subset> subsets = LowDegreeSubsets(n, t);
    const Eigen::VectorXd v = SocpVector(phi, t, subsets);
    const double w = v.norm() + std::abs(gauss(rng));
    const SdpCertificate lifted = LiftToSdp(SocpCertificate{n, t, phi, w, subsets, v});

    const double consistency = ConsistencyResidual(BuildConstraints(n + 1, t, 0), lifted.x);
    bool diagonal = true;
    for (Eigen::Index i = 0; i < lifted.x.rows(); ++i) diagonal &= lifted.x(i, i) == w;
    const bool psd = Eigen::LLT<Eigen::MatrixXd>(lifted.x).info() == Eigen::Success;
    o.record.Add(fmt::format("consistency[{}]", k), text::Exact(consistency));
    Check(&o, consistency == 0.0, fmt::format("pair {}: consistency residual {}", k, consistency));
    Check(&o, diagonal, fmt::format("pair {}: diagonal differs from w", k));
    Check(&o, psd, fmt::format("pair {}: arrow matrix not positive definite", k));

    bool rejected = false;
    try {
      LiftToSdp(SocpCertificate{n, t, phi, v.norm() * (1.0 - shrink(rng)), subsets, v});
    } catch (const NumericalError&) {
      rejected = true;
    }
    o.record.AddBool(fmt::format("rejected[{}]", k), rejected);
    Check(&o, rejected, fmt::format("pair {}: w < ||v|| accepted", k));
  }
  if (o.pass) o.summary = "20 arrow matrices exact and PSD, 20 undersized w rejected";
  return o;
}

Outcome Monotonicity(const std::vector<GridCell>& grid) {
  Outcome o;
  double worst = -INFINITY;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const GridCell& a = grid[i];
    const GridCell& b = grid[i + 1];
    if (a.name != b.name) continue;
    const double rise = b.min_eps.eps - a.min_eps.eps;
    worst = std::max(worst, rise);
    Check(&o, rise <= 2e-8,
          fmt::format("{}: eps* rises by {:.3g} from t={}", b.name, rise, a.t));
  }
  o.record.Add("max_rise", text::Exact(worst));
  if (o.pass) o.summary = fmt::format("largest eps*(t+1) - eps*(t) = {:.3g}", worst);
  return o;
}

struct Criterion {
  std::string title;
  Outcome outcome;
};

std::vector<Criterion> RunCriteria() {
  std::vector<Criterion> out;
  out.push_back({"order-one closed form", ClosedFormOrderOne()});
  out.push_back({"split invariance", SplitInvariance()});
  out.push_back({"constraint counts", ConstraintCounts()});
  out.push_back({"witness round trip", WitnessRoundTrip()});
  out.push_back({"lower-bound sandwich", LowerBoundSandwich()});
  out.push_back({"PARITY_2 pipeline", ParityPipeline()});
  out.push_back({"LP exactness", LpExactness()});
  const std::vector<GridCell> grid = SolveGrid();
  out.push_back({"certificate chain", CertificateChain(grid)});
  out.push_back({"strong duality", StrongDuality(grid)});
  out.push_back({"arrow lift", ArrowLift()});
  out.push_back({"monotonicity", Monotonicity(grid)});
  return out;
}

Outcome Determinism(const std::vector<Criterion>& first) {
  Outcome o;
  const std::vector<Criterion> second = RunCriteria();
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const std::string a = first[i].outcome.record.str();
    const std::string b = second[i].outcome.record.str();
    bytes += a.size();
    Check(&o, a == b, fmt::format("criterion {} record differs between runs", i + 1));
    Check(&o, first[i].outcome.pass == second[i].outcome.pass,
          fmt::format("criterion {} verdict differs between runs", i + 1));
  }
  if (o.pass) o.summary = fmt::format("{} record bytes identical across two runs", bytes);
  return o;
}

int Main() {
  std::vector<Criterion> criteria;
  try {
    criteria = RunCriteria();
    criteria.push_back({"determinism", Determinism(criteria)});
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Outcome& o = criteria[i].outcome;
    failed += !o.pass;
    std::printf("criterion %2zu %-22s %s  %s\n", i + 1, criteria[i].title.c_str(),
                o.pass ? "PASS" : "FAIL", o.summary.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace cbq

int main() { return cbq::Main(); }
