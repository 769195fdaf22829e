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

#ifndef CBQ_TOOLS_CLI_H_
#define CBQ_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace cbq::cli {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Runs one command. args excludes the program name and starts with the tool
// name ("cbnorm" or "qdeg"). The report goes to out, diagnostics to err.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Entry point: when invoked through a link named cbnorm or qdeg, the tool
// name is taken from argv[0].
int Main(int argc, char** argv);

}  // namespace cbq::cli

#endif  // CBQ_TOOLS_CLI_H_
