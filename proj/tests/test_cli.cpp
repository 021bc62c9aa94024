#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/cli.hpp"
#include "json.hpp"

using hypsum::cli::run;
namespace cli = hypsum::cli;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

}  // namespace

TEST(Cli, EvalNonIntegerDispatch) {
  const auto r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "100"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], "m,direct,asymptotic,residual,predicted_order,theorem");
  EXPECT_EQ(fields(ls[1]).back(), "T3");
}

TEST(Cli, EvalHarmonicSum) {
  const auto r = call({"eval", "--a", "1,1", "--b", "2", "--m", "5"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NEAR(std::stod(fields(lines(r.out)[1])[1]), 137.0 / 60, 1e-15);
}

TEST(Cli, EvalCorollaryScale) {
  const auto r = call({"eval", "--a", "0.5,0.5,0.5,0.5,1.25", "--b", "1,1,1,0.25", "--m", "1000", "--scale", "pi2over4"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto f = fields(lines(r.out)[1]);
  EXPECT_EQ(f.back(), "T4");
  EXPECT_LE(std::abs(std::stod(f[3])), 1e-7);
  const auto numeric = call({"eval", "--a", "0.5,0.5,0.5,0.5,1.25", "--b", "1,1,1,0.25", "--m", "1000", "--scale",
                             "2.4674011002723395"});
  ASSERT_EQ(numeric.code, cli::kOk);
  EXPECT_NEAR(std::stod(fields(lines(numeric.out)[1])[1]), std::stod(f[1]), 1e-14);
}

TEST(Cli, EvalUnsortedMKeepsOrder) {
  const auto r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "400,100,200"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(fields(ls[1])[0], "400");
  EXPECT_EQ(fields(ls[2])[0], "100");
}

TEST(Cli, CsvRoundTripsBitExact) {
  const auto r = call({"eval", "--a", "0.5,0.7,1.1", "--b", "1.9,1.3", "--m", "10,100,1000"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto ls = lines(r.out);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    const double direct = std::stod(f[1]), asym = std::stod(f[2]), resid = std::stod(f[3]);
    // the residual is computed from the same doubles that were printed
    EXPECT_EQ(resid, direct - asym);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", direct);
    EXPECT_EQ(std::stod(buf), direct);
  }
}

TEST(Cli, JsonOutput) {
  const auto r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "100,200", "--format", "json", "--N", "2"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["metadata"]["theorem"], "T3");
  EXPECT_EQ(doc["metadata"]["N"], 2);
  ASSERT_EQ(doc["rows"].size(), 2u);
  EXPECT_EQ(doc["rows"][1]["m"], 200);
  EXPECT_NEAR(doc["rows"][0]["predicted_order"].get<double>(), 3.7, 1e-14);
}

TEST(Cli, SweepSlope) {
  const auto r = call({"sweep", "--a", "0.6,0.9,1.3", "--b", "1.1,1.7", "--m", "100,200,400,800,1600,3200,6400"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto ls = lines(r.out);
  const auto& footer = ls.back();
  ASSERT_EQ(footer.rfind("# slope=", 0), 0u);
  const double slope = std::stod(footer.substr(8));
  EXPECT_NEAR(slope, -3, 0.1);
  EXPECT_NE(footer.find("predicted=-3"), std::string::npos);
}

TEST(Cli, SweepT3AndT7) {
  const auto r = call({"sweep", "--a", "0.5,0.7", "--b", "1.9", "--N", "1", "--m", "200,400,800,1600,3200,6400"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NEAR(std::stod(lines(r.out).back().substr(8)), -2.7, 0.05);
  const auto j = call({"sweep", "--a", "0.6,0.7", "--b", "0.3", "--m", "100,200,400,800,1600,3200", "--format", "json"});
  ASSERT_EQ(j.code, cli::kOk) << j.err;
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["metadata"]["theorem"], "T7");
  EXPECT_EQ(doc["fit"]["predicted_slope"], -3.0);
}

TEST(Cli, SweepRejectsShortOrUnsortedGrid) {
  EXPECT_EQ(call({"sweep", "--a", "0.5,0.7", "--b", "1.9", "--m", "100,200,400"}).code, cli::kParseError);
  const auto r = call({"sweep", "--a", "0.5,0.7", "--b", "1.9", "--m", "100,200,400,300,800,1600"});
  EXPECT_EQ(r.code, cli::kParseError);
  EXPECT_NE(r.err.find("300"), std::string::npos);
}

TEST(Cli, SweepZeroResidual) {
  // the series has converged to the last bit at these m
  const auto r = call({"sweep", "--a", "1.5,2.5", "--b", "9.235", "--m", "3200,6400,12800,25600,51200,102400"});
  EXPECT_EQ(r.code, cli::kZeroResidual);
}

TEST(Cli, ParseErrorsNameTheToken) {
  auto r = call({"eval", "--a", "0.5,x7", "--b", "1.9", "--m", "10"});
  EXPECT_EQ(r.code, cli::kParseError);
  EXPECT_NE(r.err.find("x7"), std::string::npos);
  r = call({"eval", "--a", "0.5,0.7,0.9", "--b", "1.9", "--m", "10"});
  EXPECT_EQ(r.code, cli::kParseError);
  r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "0"});
  EXPECT_EQ(r.code, cli::kParseError);
  EXPECT_NE(r.err.find("'0'"), std::string::npos);
  r = call({"eval", "--a", "0.5,0.7", "--b", "-2", "--m", "10"});
  EXPECT_EQ(r.code, cli::kParseError);
  r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "10", "--format", "xml"});
  EXPECT_EQ(r.code, cli::kParseError);
  EXPECT_NE(r.err.find("xml"), std::string::npos);
  r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "10", "--theorem", "T9"});
  EXPECT_EQ(r.code, cli::kParseError);
  r = call({"frobnicate"});
  EXPECT_EQ(r.code, cli::kParseError);
}

TEST(Cli, SumErrorsExitThree) {
  const auto r = call({"eval", "--a", "0.5,0.7,-0.3", "--b", "1.9,1.2", "--m", "10"});
  EXPECT_EQ(r.code, cli::kSumError);
  EXPECT_NE(r.err.find("T3"), std::string::npos);
}

TEST(Cli, ForcedTheoremPreconditionFails) {
  const auto r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "10", "--theorem", "T4"});
  EXPECT_EQ(r.code, cli::kParseError);
}

TEST(Cli, VerifySuites) {
  auto r = call({"verify", "--suite", "corollary1", "--m", "1000"});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  EXPECT_NE(r.out.find("corollary1"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  r = call({"verify", "--suite", "corollary2", "--abc", "0.3,0.5,0.7", "--m", "1000"});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  r = call({"verify", "--suite", "ak-cross", "--p", "3", "--k", "20", "--draws", "100", "--seed", "7"});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  const auto f = fields(lines(r.out)[1]);
  EXPECT_LE(std::stod(f[1]), 1e-12);
  r = call({"verify", "--suite", "continuity"});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
}

TEST(Cli, VerifyFailureExitFive) {
  const auto r = call({"verify", "--suite", "corollary1", "--m", "3"});
  EXPECT_EQ(r.code, cli::kVerifyFailed);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, VerifyRejectsBadInput) {
  EXPECT_EQ(call({"verify", "--suite", "nope"}).code, cli::kParseError);
  EXPECT_EQ(call({"verify", "--suite", "corollary2", "--abc", "0.1,0.1,0.1"}).code, cli::kParseError);
  EXPECT_EQ(call({"verify", "--suite", "ak-cross", "--p", "5"}).code, cli::kParseError);
}

TEST(Cli, SeededOutputIsDeterministic) {
  const std::vector<std::string> args{"verify", "--suite", "binomial", "--seed", "42"};
  const auto a = call(args);
  const auto b = call(args);
  EXPECT_EQ(a.code, cli::kOk);
  EXPECT_EQ(a.out, b.out);
  const auto c = call({"verify", "--suite", "binomial", "--seed", "43"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, RelTolFromEnvironment) {
  ::setenv("HYPSUM_REL_TOL", "1e-9", 1);
  auto r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "10", "--format", "json"});
  EXPECT_EQ(nlohmann::json::parse(r.out)["metadata"]["rel_tol"], 1e-9);
  r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "10", "--format", "json", "--rel-tol", "1e-11"});
  EXPECT_EQ(nlohmann::json::parse(r.out)["metadata"]["rel_tol"], 1e-11);
  ::setenv("HYPSUM_REL_TOL", "bogus", 1);
  r = call({"eval", "--a", "0.5,0.7", "--b", "1.9", "--m", "10"});
  EXPECT_EQ(r.code, cli::kParseError);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
  ::unsetenv("HYPSUM_REL_TOL");
}

TEST(Cli, ParseHelpers) {
  EXPECT_EQ(cli::parse_real_list("--a", "0.5, 1.5"), (std::vector<double>{0.5, 1.5}));
  EXPECT_EQ(cli::parse_m_list("--m", "1,20"), (std::vector<std::size_t>{1, 20}));
  EXPECT_THROW(cli::parse_real_list("--a", ""), cli::ParseError);
  EXPECT_THROW(cli::parse_m_list("--m", "3.5"), cli::ParseError);
}
