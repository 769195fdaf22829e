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

#include <cmath>
#include <cstddef>
#include <limits>

#include "cbq/kernels.h"

namespace cbq::kernels::scalar {

void WalshHadamard(std::span<double> data) {
  const std::size_t n = data.size();
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = data[j];
        const double b = data[j + h];
        data[j] = a + b;
        data[j + h] = a - b;
      }
    }
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double p = a[i + k] * b[i + k];
      lane[k] = lane[k] + p;
    }
  }
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) {
    const double p = a[i] * b[i];
    s = s + p;
  }
  return s;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

double MaxAbs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

double MaxStep(std::span<const double> x, std::span<const double> dx) {
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) step = std::min(step, (0.0 - x[i]) / dx[i]);
  }
  return step;
}

}  // namespace cbq::kernels::scalar
