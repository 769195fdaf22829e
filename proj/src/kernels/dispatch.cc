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

#include <atomic>

#include "cbq/kernels.h"

namespace cbq::kernels {
namespace {

bool CpuHasAvx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& ActiveSlot() {
  static std::atomic<Isa> active{DetectedIsa()};
  return active;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa DetectedIsa() {
  static const Isa detected = CpuHasAvx2() ? Isa::kAvx2 : Isa::kScalar;
  return detected;
}

Isa ActiveIsa() { return ActiveSlot().load(std::memory_order_relaxed); }

void ForceIsa(Isa isa) {
  if (isa == Isa::kAvx2 && DetectedIsa() != Isa::kAvx2) isa = Isa::kScalar;
  ActiveSlot().store(isa, std::memory_order_relaxed);
}

void WalshHadamard(std::span<double> data) {
  if (ActiveIsa() == Isa::kAvx2) return avx2::WalshHadamard(data);
  scalar::WalshHadamard(data);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (ActiveIsa() == Isa::kAvx2) return avx2::Dot(a, b);
  return scalar::Dot(a, b);
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (ActiveIsa() == Isa::kAvx2) return avx2::Axpy(alpha, x, y);
  scalar::Axpy(alpha, x, y);
}

double MaxAbs(std::span<const double> a) {
  if (ActiveIsa() == Isa::kAvx2) return avx2::MaxAbs(a);
  return scalar::MaxAbs(a);
}

double MaxStep(std::span<const double> x, std::span<const double> dx) {
  if (ActiveIsa() == Isa::kAvx2) return avx2::MaxStep(x, dx);
  return scalar::MaxStep(x, dx);
}

}  // namespace cbq::kernels
