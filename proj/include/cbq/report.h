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

#ifndef CBQ_REPORT_H_
#define CBQ_REPORT_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cbq {

// Fixed 9 significant digits, trailing zeros kept ("1.00000000").
std::string FormatNumber(double value);

// Lowercase hex SHA-256 digest.
std::string Sha256Hex(std::string_view data);

// Ordered "key: value" lines. Keys are emitted in insertion order so that the
// same computation always produces the same bytes.
class Report {
 public:
  void Add(std::string_view key, std::string_view value);
  void AddNumber(std::string_view key, double value);
  void AddInt(std::string_view key, long long value);
  void AddBool(std::string_view key, bool value);
  void Append(const Report& other);

  const std::vector<std::pair<std::string, std::string>>& lines() const { return lines_; }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace cbq

#endif  // CBQ_REPORT_H_
