#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypsum::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kParseError = 2;
inline constexpr int kSumError = 3;
inline constexpr int kZeroResidual = 4;
inline constexpr int kVerifyFailed = 5;

struct RunConfig {
  std::string command;
  std::vector<double> a, b;
  std::vector<std::size_t> m;
  std::optional<int> N;
  std::optional<std::string> theorem;
  std::string format = "csv";
  double rel_tol = 1e-14;
  std::optional<double> scale;
  std::optional<std::uint64_t> seed;
  // verify
  std::string suite = "all";
  std::vector<double> abc;
  int p = 3;
  int k = 20;
  std::optional<int> draws;  // 100 for ak-cross, 200 for binomial
};

// Thrown for malformed command lines; the message names the bad token.
struct ParseError {
  std::string message;
};

std::vector<double> parse_real_list(const std::string& flag, const std::string& text);
std::vector<std::size_t> parse_m_list(const std::string& flag, const std::string& text);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypsum::cli
