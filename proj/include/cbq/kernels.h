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

#ifndef CBQ_KERNELS_H_
#define CBQ_KERNELS_H_

#include <span>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference version and
// an AVX2 version; the active one is picked once at runtime from CPUID.
//
// The two versions are required to agree bit for bit. Reductions therefore
// use a fixed four-lane accumulation order in both versions (lane k sums
// elements i with i % 4 == k, lanes are combined as (l0 + l1) + (l2 + l3),
// the tail is added last in index order) and no version uses fused
// multiply-add.
namespace cbq::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view IsaName(Isa isa);

// Best instruction set supported by this CPU.
Isa DetectedIsa();

// Instruction set currently used by the dispatching entry points.
Isa ActiveIsa();

// Overrides dispatch (tests and benchmarking). Requesting an ISA the CPU does
// not support falls back to kScalar.
void ForceIsa(Isa isa);

// In-place unnormalized Walsh-Hadamard transform:
//   out[s] = sum_x in[x] * (-1)^popcount(s & x).
// data.size() must be a power of two.
void WalshHadamard(std::span<double> data);

double Dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);

double MaxAbs(std::span<const double> a);

// Largest alpha >= 0 with x + alpha * dx >= 0 componentwise; +infinity when
// no component of dx is negative. x is assumed nonnegative.
double MaxStep(std::span<const double> x, std::span<const double> dx);

namespace scalar {
void WalshHadamard(std::span<double> data);
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double MaxAbs(std::span<const double> a);
double MaxStep(std::span<const double> x, std::span<const double> dx);
}  // namespace scalar

namespace avx2 {
void WalshHadamard(std::span<double> data);
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double MaxAbs(std::span<const double> a);
double MaxStep(std::span<const double> x, std::span<const double> dx);
}  // namespace avx2

}  // namespace cbq::kernels

#endif  // CBQ_KERNELS_H_
