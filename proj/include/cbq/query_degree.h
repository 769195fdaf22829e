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

#ifndef CBQ_QUERY_DEGREE_H_
#define CBQ_QUERY_DEGREE_H_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cbq/boolean.h"
#include "cbq/cbnorm.h"
#include "cbq/conic.h"
#include "cbq/tensor.h"

// Completely bounded approximate degree of partial Boolean functions and the
// LP, SOCP and SDP certificates that lower-bound it.
//
// Throughout, tensors have dimension n + 1 and are evaluated on z = (x, 1);
// the objective of every certificate (phi, X, w) is
//   -w + sum_{x in D} phi(x) f(x) - sum_{x not in D} |phi(x)|.
namespace cbq {

// Split used by MinEpsSdp when none is given.
inline int DefaultSplit(int t) { return t / 2; }

struct MinEpsResult {
  int t = 0;
  int s = 0;
  double eps = 0.0;  // optimal epsilon (half of the optimal 2 epsilon)
  Tensor tensor{1, 1};
  CbDual dual;              // (lambda, y) with <e, lambda> <= 1
  double lambda_sum = 0.0;
  double slack_min_eigenvalue = 0.0;  // of Diag(lambda) + A*(y) - C_s(T)
  double fit_error = 0.0;             // max_{x in D} |T(z_x) - f(x)|
  conic::Solution solution;
};

// min 2 eps over t-tensors T with ||T||_cb <= 1 (certified by the dual of the
// split-s cb-norm program) and |T(z_x) - f(x)| <= 2 eps on D.
MinEpsResult MinEpsSdp(const BooleanFunction& f, int t, int s,
                       const conic::SolverOptions& options = {});

struct CbDegResult {
  bool found = false;
  int t_star = 0;  // smallest t <= t_max with eps*(t) <= eps + tol
  int q_eps = 0;   // ceil(t_star / 2)
  double tol = 0.0;
  std::vector<MinEpsResult> table;  // t = 1, 2, ...
};

// Linear scan from t = 1. split fixes s for every t; otherwise DefaultSplit.
// The comparison tolerance is 10 * options.gap_tol.
CbDegResult CbDeg(const BooleanFunction& f, double eps, int t_max, std::optional<int> split,
                  const conic::SolverOptions& options = {});

struct LpCertificate {
  int n = 0;
  int t = 0;
  SignedMeasure phi{1};
};

struct SocpCertificate {
  int n = 0;
  int t = 0;
  SignedMeasure phi{1};
  double w = 0.0;
  std::vector<Subset> subsets;  // all |S| <= t, (size, lex) order
  Eigen::VectorXd v;            // v_S = 2^n sqrt(|I_S|) phi_hat(S)
};

struct SdpCertificate {
  int n = 0;
  int t = 0;
  SignedMeasure phi{1};
  Eigen::MatrixXd x;  // order 1 + (n+1)^t, index 0 first, then tuples
  double w = 0.0;
};

using Certificate = std::variant<LpCertificate, SocpCertificate, SdpCertificate>;

double CertificateObjective(const BooleanFunction& f, const SignedMeasure& phi, double w);

// Shared bookkeeping for the three certificate programs. Every program is
// solved with phi = phi_plus - phi_minus and sum(phi_plus + phi_minus) = 1;
// when the optimum is positive the point is rescaled to sum |phi| = 1 and
// returned as a certificate.
struct CertificateStatus {
  double value = 0.0;             // optimal value of the maximization
  double primal_value = 0.0;      // optimal 2 eps of the paired minimization
  bool has_certificate = false;
  double split_overlap = 0.0;     // max_x min(phi_plus, phi_minus)
  double phi_mass = 0.0;          // sum |phi| before rescaling
  conic::Solution solution;
};

enum class SdpVariant { kRestricted, kExtended };

struct SdpCertificateResult {
  CertificateStatus status;
  SdpCertificate certificate;
};

// Restricted: phi supported on D. Extended: phi on the whole cube, with
// |phi| penalized outside D. Both at s = 0.
SdpCertificateResult SolveSdpCertificate(const BooleanFunction& f, int t, SdpVariant variant,
                                         const conic::SolverOptions& options = {});

struct LpResult {
  CertificateStatus status;
  std::vector<Subset> subsets;  // |S| <= t, (size, lex) order
  Eigen::VectorXd c;            // optimal polynomial coefficients
  LpCertificate certificate;    // Fourier-projected dual polynomial
};

LpResult ApproxDegreeLp(const BooleanFunction& f, int t, const conic::SolverOptions& options = {});

struct SocpResult {
  CertificateStatus status;
  std::vector<Subset> subsets;
  Eigen::VectorXd c;        // primal coefficients
  Eigen::VectorXd c_tilde;  // c_S / sqrt(|I_S|), norm at most 1
  SocpCertificate certificate;
};

SocpResult SolveSocp(const BooleanFunction& f, int t, const conic::SolverOptions& options = {});

// v_S = 2^n sqrt(|I_S|) phi_hat(S) for every |S| <= t.
Eigen::VectorXd SocpVector(const SignedMeasure& phi, int t, const std::vector<Subset>& subsets);

// LP -> (phi, 0, 0); SOCP -> (phi, [[w, v'], [v, w I]], w) with v indexed by
// tuples, v_i = 2^n phi_hat(S_i). Throws NumericalError when the structural
// condition of the input fails (vanishing low-degree moments, w >= ||v||,
// stored v consistent with phi); normalization is left to VerifyCertificate.
SdpCertificate LiftToSdp(const LpCertificate& cert);
SdpCertificate LiftToSdp(const SocpCertificate& cert);
SdpCertificate LiftToSdp(const Certificate& cert);

struct VerifyTolerances {
  double normalization = 1e-9;
  double diagonal = 1e-8;
  double consistency = 1e-8;
  double moment = 1e-8;
  double eigenvalue = 1e-8;
};

struct VerifyReport {
  double normalization_residual = 0.0;  // |sum |phi| - 1|
  double diagonal_residual = 0.0;       // max |X_kk - w|
  double consistency_residual = 0.0;    // all prefix pairs, all suffix pairs
  double moment_residual = 0.0;         // max |X_{0,i} - sum_x phi(x) z^i|
  double min_eigenvalue = 0.0;
  double objective = 0.0;
  bool feasible = false;
  bool certifies = false;  // objective > 2 eps
  bool pass = false;
  std::vector<std::string> failures;
};

// Recomputes every certificate condition from the raw data without using the
// constraint generators or the solver.
VerifyReport VerifyCertificate(const SdpCertificate& cert, const BooleanFunction& f, int t,
                               double eps, const VerifyTolerances& tol = {});

// Certificate file:
//   cert kind=<lp|socp|sdp> n=<n> t=<t>
//   phi <+-string> <value>       (nonzeros only)
//   w <value>                    (socp, sdp)
//   v <S|empty> <value>          (socp; S comma-separated)
//   X                            (sdp; then the lower triangle, one row per line)
std::string FormatCertificate(const Certificate& cert);
Certificate ParseCertificate(std::string_view text);
std::string_view CertificateKindName(const Certificate& cert);

}  // namespace cbq

#endif  // CBQ_QUERY_DEGREE_H_
