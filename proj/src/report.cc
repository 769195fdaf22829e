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

#include <fmt/format.h>
#include <openssl/evp.h>

#include "cbq/error.h"

namespace cbq {

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  // Avoid printing "-0.00000000" for values that round to zero.
  if (value == 0.0) value = 0.0;
  return fmt::format("{:#.9g}", value);
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * size);
  for (unsigned int i = 0; i < size; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void Report::Add(std::string_view key, std::string_view value) {
  lines_.emplace_back(std::string(key), std::string(value));
}

void Report::AddNumber(std::string_view key, double value) { Add(key, FormatNumber(value)); }

void Report::AddInt(std::string_view key, long long value) { Add(key, std::to_string(value)); }

void Report::AddBool(std::string_view key, bool value) { Add(key, value ? "yes" : "no"); }

void Report::Append(const Report& other) {
  lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
}

std::string Report::str() const {
  std::string out;
  for (const auto& [k, v] : lines_) out += fmt::format("{}: {}\n", k, v);
  return out;
}

}  // namespace cbq
