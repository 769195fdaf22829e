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

#include "cli.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "cbq/query_degree.h"
#include "cbq/text.h"

namespace cbq::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cbq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Write("parity2.tns", "tensor t=2 N=2\n1 2 1\n");
    Write("parity2.fn", "boolfn n=2\n++ +1\n+- -1\n-+ -1\n-- +1\n");
    Write("and2.fn", "boolfn n=2\n++ +1\n+- -1\n-+ -1\n-- -1\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  void Write(const std::string& name, const std::string& contents) const {
    text::WriteFile(Path(name), contents);
  }

  struct Outcome {
    int code;
    std::string out;
    std::string err;
  };
  Outcome Call(std::vector<std::string> args) const {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::Run(args, out, err);
    return {code, out.str(), err.str()};
  }

  // Runs a tool binary in a fresh process; returns the exit code.
  int Spawn(const std::string& tool, const std::string& args, std::string* out) const {
    const std::string capture = Path("spawn.out");
    const std::string cmd =
        fmt::format("'{}/{}' {} > '{}' 2>/dev/null", CBQ_TOOL_DIR, tool, args, capture);
    const int status = std::system(cmd.c_str());
    *out = text::ReadFile(capture);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(CliTest, ComputeSingleEntryTensor) {
  const Outcome o = Call({"cbnorm", "compute", "--tensor", Path("parity2.tns"), "--witness",
                          Path("w.txt"), "--dual", Path("d.txt")});
  EXPECT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("\nvalue: 1.00000000\n"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("\nstatus: OPTIMAL\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(Path("w.txt")));
  const CbDual dual = ParseDual(text::ReadFile(Path("d.txt")));
  EXPECT_EQ(dual.t, 2);
}

TEST_F(CliTest, CbDegParityTwo) {
  const Outcome o =
      Call({"qdeg", "cbdeg", "--fn", Path("parity2.fn"), "--eps", "0", "--tmax", "3"});
  EXPECT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NE(o.out.find("\nt_star: 2\n"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("\nQ_eps: 1\n"), std::string::npos);
}

TEST_F(CliTest, CertificatesReverifyInFreshProcess) {
  for (const std::string kind : {"lp", "socp", "sdp"}) {
    const std::string cert = Path("cert_" + kind + ".txt");
    const Outcome o = Call({"qdeg", "cert", "--fn", Path("and2.fn"), "--t", "1", "--kind", kind,
                            "--out", cert});
    ASSERT_EQ(o.code, kExitOk) << kind << "\n" << o.out << o.err;
    std::string out;
    const int code = Spawn("qdeg", fmt::format("verify --fn '{}' --eps 0 --cert '{}'",
                                               Path("and2.fn"), cert),
                           &out);
    EXPECT_EQ(code, kExitOk) << kind << "\n" << out;
    EXPECT_NE(out.find("\nstatus: PASS\n"), std::string::npos) << out;
  }
}

TEST_F(CliTest, TamperedCertificateFails) {
  const std::string cert = Path("c.txt");
  ASSERT_EQ(Call({"qdeg", "cert", "--fn", Path("parity2.fn"), "--t", "1", "--kind", "sdp",
                  "--out", cert})
                .code,
            kExitOk);
  SdpCertificate c = std::get<SdpCertificate>(ParseCertificate(text::ReadFile(cert)));
  c.x(1, 0) += 1e-3;
  c.x(0, 1) += 1e-3;
  Write("bad.txt", FormatCertificate(c));
  const Outcome o =
      Call({"qdeg", "verify", "--fn", Path("parity2.fn"), "--eps", "0", "--cert", Path("bad.txt")});
  EXPECT_EQ(o.code, kExitFail);
  EXPECT_NE(o.out.find("failure[0]: moment residual"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("\nstatus: FAIL\n"), std::string::npos);
}

TEST_F(CliTest, NoCertificateAtExactDegree) {
  const Outcome o = Call({"qdeg", "cert", "--fn", Path("parity2.fn"), "--t", "2", "--kind",
                          "sdp", "--out", Path("none.txt")});
  EXPECT_EQ(o.code, kExitFail);
  EXPECT_NE(o.out.find("\nstatus: NO_CERTIFICATE\n"), std::string::npos) << o.out;
  EXPECT_FALSE(fs::exists(Path("none.txt")));
}

TEST_F(CliTest, ApproxDegAndSocpReports) {
  const Outcome lp = Call({"qdeg", "approxdeg", "--fn", Path("and2.fn"), "--t", "1"});
  EXPECT_EQ(lp.code, kExitOk);
  EXPECT_NE(lp.out.find("\ntwo_eps: 0.500000000\n"), std::string::npos) << lp.out;
  EXPECT_NE(lp.out.find("\nc[]: -0.500000000\n"), std::string::npos);
  const Outcome socp = Call({"qdeg", "socp", "--fn", Path("and2.fn"), "--t", "1"});
  EXPECT_EQ(socp.code, kExitOk);
  EXPECT_NE(socp.out.find("\nc_tilde_norm: "), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"qdeg"}).code, kExitUsage);
  EXPECT_EQ(Call({"qdeg", "cbdeg", "--fn", Path("parity2.fn"), "--eps", "0", "--tmax", "2",
                  "--bogus"})
                .code,
            kExitUsage);
  const Outcome missing = Call({"cbnorm", "compute", "--tensor", Path("absent.tns")});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("absent.tns"), std::string::npos);
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
  Write("broken.fn", "boolfn n=2\n++ +2\n");
  EXPECT_EQ(Call({"qdeg", "cbdeg", "--fn", Path("broken.fn"), "--eps", "0", "--tmax", "2"}).code,
            kExitUsage);
  EXPECT_EQ(Call({"qdeg", "cert", "--fn", Path("and2.fn"), "--t", "1", "--kind", "qp", "--out",
                  Path("x.txt")})
                .code,
            kExitUsage);
  EXPECT_EQ(Call({"cbnorm", "compute", "--tensor", Path("parity2.tns"), "--split", "2"}).code,
            kExitUsage);
}

TEST_F(CliTest, ReportsAreDeterministic) {
  const std::vector<std::string> args = {"cbnorm", "ascent", "--tensor", Path("parity2.tns"),
                                         "--restarts", "3", "--seed", "7"};
  const Outcome a = Call(args);
  const Outcome b = Call(args);
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.find("wall_time_s"), std::string::npos);
  std::vector<std::string> timed = args;
  timed.insert(timed.begin(), "--time");
  EXPECT_NE(Call(timed).out.find("\nwall_time_s: "), std::string::npos);
}

TEST_F(CliTest, ToolNameFromLinkName) {
  std::string out;
  EXPECT_EQ(Spawn("cbnorm", fmt::format("compute --tensor '{}'", Path("parity2.tns")), &out),
            kExitOk);
  EXPECT_NE(out.find("\nvalue: 1.00000000\n"), std::string::npos);
  EXPECT_EQ(Spawn("cbtool", fmt::format("qdeg cbdeg --fn '{}' --eps 0 --tmax 2",
                                        Path("parity2.fn")),
                  &out),
            kExitOk);
  EXPECT_NE(out.find("\nt_star: 2\n"), std::string::npos);
}

}  // namespace
}  // namespace cbq::cli
