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

#ifndef CBQ_TEXT_H_
#define CBQ_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

// Line-oriented helpers shared by the text file formats.
namespace cbq::text {

struct Line {
  int number;  // 1-based
  std::vector<std::string_view> tokens;
};

// Splits into whitespace-separated tokens per line, dropping '#' comments and
// blank lines. The views point into text.
std::vector<Line> Tokenize(std::string_view text);

double ParseDouble(std::string_view token, int line);
long long ParseInt(std::string_view token, int line);

// Parses "key=<int>" and checks the key.
long long ParseKeyInt(std::string_view token, std::string_view key, int line);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

// Round-trip exact decimal rendering (17 significant digits).
std::string Exact(double value);

}  // namespace cbq::text

#endif  // CBQ_TEXT_H_
