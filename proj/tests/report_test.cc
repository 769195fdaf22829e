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

#include "cbq/report.h"

#include <cmath>

#include <gtest/gtest.h>

namespace cbq {
namespace {

TEST(ReportTest, NineSignificantDigits) {
  EXPECT_EQ(FormatNumber(1.0), "1.00000000");
  EXPECT_EQ(FormatNumber(0.5), "0.500000000");
  EXPECT_EQ(FormatNumber(2.0 * std::sqrt(2.0)), "2.82842712");
  EXPECT_EQ(FormatNumber(-1.5e-9), "-1.50000000e-09");
  EXPECT_EQ(FormatNumber(-0.0), "0.00000000");
}

TEST(ReportTest, KnownDigests) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ReportTest, LinesInInsertionOrder) {
  Report a;
  a.Add("z", "1");
  a.AddInt("a", 2);
  a.AddBool("m", true);
  Report b;
  b.AddNumber("x", 0.25);
  a.Append(b);
  EXPECT_EQ(a.str(), "z: 1\na: 2\nm: yes\nx: 0.250000000\n");
}

}  // namespace
}  // namespace cbq
