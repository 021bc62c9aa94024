#include "cli.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hypsum/hypsum.hpp"

namespace hypsum::cli {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;
using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!text.empty() && text.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& flag, const std::string& token) {
  const std::string t = trim(token);
  double v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ParseError{"invalid number '" + token + "' for " + flag};
  }
  return v;
}

long long parse_int(const std::string& flag, const std::string& token) {
  const std::string t = trim(token);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ParseError{"invalid integer '" + token + "' for " + flag};
  }
  return v;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_commas(text)) out.push_back(parse_real(flag, tok));
  if (out.empty()) throw ParseError{"empty list for " + flag};
  return out;
}

std::vector<std::size_t> parse_m_list(const std::string& flag, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_commas(text)) {
    const long long v = parse_int(flag, tok);
    if (v < 1) throw ParseError{"m value '" + tok + "' for " + flag + " must be a positive integer"};
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ParseError{"empty list for " + flag};
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// eval / sweep

struct Row {
  std::size_t m;
  double direct, asymptotic, residual, predicted_order;
  std::string theorem;
};

EvalOptions<double> eval_options(const RunConfig& cfg) {
  EvalOptions<double> opts;
  opts.N = cfg.N;
  if (cfg.theorem) {
    const auto t = theorem_from_string(*cfg.theorem);
    if (!t) throw ParseError{"unknown theorem '" + *cfg.theorem + "' for --theorem (T2..T7)"};
    opts.force_theorem = t;
  }
  opts.ctl.rel_tol = cfg.rel_tol;
  return opts;
}

std::vector<Row> compute_rows(const RunConfig& cfg, const SeriesParams<double>& params, Expansion<double>& expansion) {
  expansion = make_expansion(params, eval_options(cfg));

  // Sums are accumulated in one pass over the sorted m values.
  std::vector<std::size_t> order(cfg.m.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return cfg.m[i] < cfg.m[j]; });
  std::vector<std::size_t> sorted;
  for (auto i : order) sorted.push_back(cfg.m[i]);
  std::vector<double> sums = cfg.scale ? hypergeometric_partial_sums(params, std::span<const std::size_t>(sorted))
                                       : direct_partial_sums(params, std::span<const std::size_t>(sorted));
  if (cfg.scale) {
    for (auto& s : sums) s *= *cfg.scale;
  }

  std::vector<Row> rows(cfg.m.size());
  for (std::size_t n = 0; n < order.size(); ++n) {
    const std::size_t m = sorted[n];
    const auto asym = expansion.at(m);
    rows[order[n]] = {m, sums[n], asym.value, sums[n] - asym.value, asym.predicted_order, to_string(asym.theorem)};
  }
  return rows;
}

json metadata(const RunConfig& cfg, const Expansion<double>& expansion) {
  json meta;
  meta["command"] = cfg.command;
  meta["params"] = {{"a", cfg.a}, {"b", cfg.b}};
  meta["s_p"] = SeriesParams<double>(cfg.a, cfg.b).s();
  meta["theorem"] = to_string(expansion.theorem);
  meta["rel_tol"] = cfg.rel_tol;
  meta["N"] = cfg.N ? json(*cfg.N) : json(nullptr);
  meta["scale"] = cfg.scale ? json(*cfg.scale) : json(nullptr);
  meta["version"] = kVersion;
  return meta;
}

json row_json(const Row& r) {
  return {{"m", r.m},
          {"direct", r.direct},
          {"asymptotic", r.asymptotic},
          {"residual", r.residual},
          {"predicted_order", r.predicted_order},
          {"theorem", r.theorem}};
}

void write_csv_rows(const std::vector<Row>& rows, std::ostream& out) {
  out << "m,direct,asymptotic,residual,predicted_order,theorem\n";
  for (const auto& r : rows) {
    out << r.m << ',' << fmt17(r.direct) << ',' << fmt17(r.asymptotic) << ',' << fmt17(r.residual) << ','
        << fmt17(r.predicted_order) << ',' << r.theorem << '\n';
  }
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const SeriesParams<double> params(cfg.a, cfg.b);
  Expansion<double> expansion;
  const auto rows = compute_rows(cfg, params, expansion);
  if (cfg.format == "json") {
    json doc;
    doc["metadata"] = metadata(cfg, expansion);
    doc["rows"] = json::array();
    for (const auto& r : rows) doc["rows"].push_back(row_json(r));
    out << doc.dump(2) << '\n';
  } else {
    write_csv_rows(rows, out);
  }
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.m.size() < 6) throw ParseError{"sweep needs at least 6 values in --m"};
  for (std::size_t i = 1; i < cfg.m.size(); ++i) {
    if (cfg.m[i] <= cfg.m[i - 1]) {
      throw ParseError{"--m value '" + std::to_string(cfg.m[i]) + "' is not strictly increasing"};
    }
  }
  const SeriesParams<double> params(cfg.a, cfg.b);
  Expansion<double> expansion;
  const auto rows = compute_rows(cfg, params, expansion);

  const bool degenerate = std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.residual == 0; });
  double slope = std::nan("");
  if (!degenerate) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      x.push_back(static_cast<double>(r.m));
      y.push_back(r.residual);
    }
    slope = loglog_slope<double>(x, y);
  }
  const double predicted = -expansion.predicted_order;

  if (cfg.format == "json") {
    json doc;
    doc["metadata"] = metadata(cfg, expansion);
    doc["rows"] = json::array();
    for (const auto& r : rows) doc["rows"].push_back(row_json(r));
    doc["fit"] = {{"slope", degenerate ? json(nullptr) : json(slope)},
                  {"predicted_slope", predicted},
                  {"next_order_coefficient", expansion.next_order_coefficient}};
    out << doc.dump(2) << '\n';
  } else {
    write_csv_rows(rows, out);
    out << "# slope=" << (degenerate ? std::string("nan") : fmt17(slope)) << " predicted=" << fmt17(predicted)
        << '\n';
  }
  if (degenerate) {
    err << "error: a residual is exactly zero, the log-log fit is undefined\n";
    return kZeroResidual;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct SuiteResult {
  std::string name;
  double max_error;
  double threshold;
  bool pass() const { return max_error <= threshold; }
};

std::vector<std::size_t> verify_ms(const RunConfig& cfg) {
  return cfg.m.empty() ? std::vector<std::size_t>{1000} : cfg.m;
}

SuiteResult suite_corollary1(const RunConfig& cfg) {
  const SeriesParams<double> params({0.5, 0.5, 0.5, 0.5, 1.25}, {1, 1, 1, 0.25});
  const double pi = std::acos(-1.0);
  const double constant = -digamma(1.0) + 3 * std::log(2.0);
  double worst = 0;
  TailControl<double> ctl;
  ctl.rel_tol = cfg.rel_tol;
  const auto expansion = make_theorem4(params, ctl);
  for (std::size_t m : verify_ms(cfg)) {
    if (m < 3) throw ParseError{"--m value '" + std::to_string(m) + "' must be at least 3"};
    const double mm = static_cast<double>(m);
    const double lhs = pi * pi / 4 * hypergeometric_partial_sum(params, m);
    const double rhs = digamma(mm) + constant + 0.25 / (mm - 1) - 0.125 / ((mm - 1) * (mm - 2));
    worst = std::max(worst, std::abs(lhs - rhs));
    worst = std::max(worst, std::abs(expansion.at(m).value - rhs));
  }
  return {"corollary1", worst, 1e-7};
}

SeriesParams<double> corollary2_params(double a, double b, double c) {
  const double a4 = a + b + c - 1;
  const double b4 = (a + b + c - 1) / 2;
  if (!(a4 > 0) || !(b4 > 0)) throw ParseError{"--abc needs a+b+c > 1 for a convergent constant"};
  return SeriesParams<double>({a, b, c, a4, (a + b + c + 1) / 2}, {b + c, c + a, a + b, b4});
}

SuiteResult suite_corollary2(const RunConfig& cfg) {
  const std::vector<double> abc = cfg.abc.empty() ? std::vector<double>{0.3, 0.5, 0.7} : cfg.abc;
  if (abc.size() != 3) throw ParseError{"--abc needs exactly three values"};
  const double a = abc[0], b = abc[1], c = abc[2];
  const auto params = corollary2_params(a, b, c);
  TailControl<double> ctl;
  ctl.rel_tol = cfg.rel_tol;
  const auto expansion = make_theorem4(params, ctl);
  const double constant = (digamma(1.0) - digamma(a) - digamma(b) - digamma(c)) / 2;
  const double c1 = (a + b + c - 1) / 2;
  const double c2 = (2 * a * b * c - (a + b + c) * (a + b + c - 1)) / 4;
  double worst = 0;
  for (std::size_t m : verify_ms(cfg)) {
    if (m < 3) throw ParseError{"--m value '" + std::to_string(m) + "' must be at least 3"};
    const double mm = static_cast<double>(m);
    const double rhs = digamma(mm) + constant + c1 / (mm - 1) + c2 / ((mm - 1) * (mm - 2));
    worst = std::max(worst, std::abs(direct_partial_sum(params, m) - rhs));
    worst = std::max(worst, std::abs(expansion.at(m).value - rhs));
  }
  return {"corollary2", worst, 1e-6};
}

std::mt19937_64 make_rng(const RunConfig& cfg) { return std::mt19937_64(cfg.seed.value_or(1)); }

SuiteResult suite_ak_cross(const RunConfig& cfg) {
  if (cfg.p != 3 && cfg.p != 4) throw ParseError{"--p '" + std::to_string(cfg.p) + "' must be 3 or 4"};
  if (cfg.k < 0) throw ParseError{"--k '" + std::to_string(cfg.k) + "' must be non-negative"};
  auto rng = make_rng(cfg);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  const auto p = static_cast<std::size_t>(cfg.p);
  Wide worst = 0;
  for (int d = 0; d < cfg.draws.value_or(100); ++d) {
    std::vector<Wide> a(p + 1), b(p);
    for (auto& x : a) x = U(rng);
    for (auto& x : b) x = U(rng);
    const SeriesParams<Wide> params(a, b);
    const auto table = ak_table_nested(params, static_cast<std::size_t>(cfg.k));
    for (std::size_t k = 0; k <= static_cast<std::size_t>(cfg.k); ++k) {
      const Wide ref = table.value_real(k);
      for (auto v : {AltVariant::first, AltVariant::second}) {
        Wide alt;
        try {
          alt = (p == 3 ? ak3_alt(params, k, v) : ak4_alt(params, k, v)).to_real();
        } catch (const DegenerateRepresentation&) {
          continue;
        }
        const Wide scale = std::max<Wide>(abs(ref), abs(alt));
        if (scale == 0) continue;
        const Wide rel = abs(alt - ref) / scale;
        if (rel > worst) worst = rel;
      }
    }
  }
  return {"ak-cross-p" + std::to_string(cfg.p), static_cast<double>(worst), 1e-12};
}

SuiteResult suite_binomial(const RunConfig& cfg) {
  auto rng = make_rng(cfg);
  std::uniform_real_distribution<double> X(-3.0, 3.0);
  std::uniform_int_distribution<int> M(1, 100);
  const int draws = cfg.draws.value_or(200);
  double worst = 0;
  for (int d = 0; d < draws; ++d) {
    double x = X(rng);
    while (std::abs(x) < 1e-3) x = X(rng);
    const int m = M(rng);
    Wide brute = 0, term = 1;
    const Wide xw = x;
    for (int l = 0; l < m; ++l) {
      brute += term;
      term *= (-xw + l) / (l + 1);
    }
    const double closed = binomial_partial_sum(x, static_cast<std::size_t>(m));
    const double rel = static_cast<double>(abs(Wide(closed) - brute) / abs(brute));
    worst = std::max(worst, rel);
  }
  return {"binomial", worst, 1e-13};
}

SuiteResult suite_continuity(const RunConfig& cfg) {
  TailControl<double> ctl;
  ctl.rel_tol = cfg.rel_tol;
  const std::size_t m = cfg.m.empty() ? 500 : cfg.m.front();
  double worst = 0;
  // p = 1 sets with s_p = 1 and s_p = 2
  const SeriesParams<double> one({0.5, 0.7}, {2.2});
  const SeriesParams<double> two({0.5, 0.7}, {3.2});
  const double t3a = make_theorem3(one, 1, ctl).at(m).value;
  const double t5 = make_theorem5(one, ctl).at(m).value;
  worst = std::max(worst, std::abs(t3a - t5) / std::abs(t5));
  const double t3b = make_theorem3(two, 0, ctl).at(m).value;
  const double t6 = make_theorem6(two, ctl).at(m).value;
  worst = std::max(worst, std::abs(t3b - t6) / std::abs(t6));
  return {"continuity", worst, 1e-10};
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  std::vector<SuiteResult> results;
  const std::string& s = cfg.suite;
  const bool all = s == "all";
  bool known = all;
  if (all || s == "corollary1") results.push_back(suite_corollary1(cfg)), known = true;
  if (all || s == "corollary2") results.push_back(suite_corollary2(cfg)), known = true;
  if (all || s == "ak-cross") {
    known = true;
    if (all) {
      for (int p : {3, 4}) {
        RunConfig c = cfg;
        c.p = p;
        results.push_back(suite_ak_cross(c));
      }
    } else {
      results.push_back(suite_ak_cross(cfg));
    }
  }
  if (all || s == "binomial") results.push_back(suite_binomial(cfg)), known = true;
  if (all || s == "continuity") results.push_back(suite_continuity(cfg)), known = true;
  if (!known) throw ParseError{"unknown suite '" + s + "' for --suite"};

  bool ok = true;
  if (cfg.format == "json") {
    json doc = json::array();
    for (const auto& r : results) {
      doc.push_back({{"suite", r.name}, {"max_error", r.max_error}, {"threshold", r.threshold},
                     {"status", r.pass() ? "PASS" : "FAIL"}});
      ok = ok && r.pass();
    }
    out << doc.dump(2) << '\n';
  } else {
    out << "suite,max_error,threshold,status\n";
    for (const auto& r : results) {
      out << r.name << ',' << fmt17(r.max_error) << ',' << fmt17(r.threshold) << ',' << (r.pass() ? "PASS" : "FAIL")
          << '\n';
      ok = ok && r.pass();
    }
  }
  return ok ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------------------
// argument handling

struct RawArgs {
  std::string a, b, m, theorem, format = "csv", rel_tol, scale, seed, suite = "all", abc, p, k, draws, N;
};

void add_series_options(CLI::App* sub, RawArgs& raw) {
  sub->add_option("--a", raw.a, "upper parameters a_1,...,a_{p+1}")->required();
  sub->add_option("--b", raw.b, "lower parameters b_1,...,b_p")->required();
  sub->add_option("--m", raw.m, "partial-sum lengths, comma separated")->required();
  sub->add_option("--N", raw.N, "truncation order of the non-integer expansion");
  sub->add_option("--theorem", raw.theorem, "force an expansion (T2..T7)");
  sub->add_option("--scale", raw.scale, "compare scale * sum_l prod (a_i)_l/((b_j)_l l!) (number or pi2over4)");
}

void add_common_options(CLI::App* sub, RawArgs& raw) {
  sub->add_option("--format", raw.format, "csv or json");
  sub->add_option("--rel-tol", raw.rel_tol, "relative tolerance for the sums over k");
  sub->add_option("--seed", raw.seed, "seed for random draws");
}

RunConfig to_config(const std::string& command, const RawArgs& raw) {
  RunConfig cfg;
  cfg.command = command;
  if (raw.format != "csv" && raw.format != "json") throw ParseError{"unknown format '" + raw.format + "' for --format"};
  cfg.format = raw.format;

  if (const char* env = std::getenv("HYPSUM_REL_TOL"); env && *env) cfg.rel_tol = parse_real("HYPSUM_REL_TOL", env);
  if (!raw.rel_tol.empty()) cfg.rel_tol = parse_real("--rel-tol", raw.rel_tol);
  if (!(cfg.rel_tol > 0 && cfg.rel_tol < 1)) {
    throw ParseError{"relative tolerance '" + fmt17(cfg.rel_tol) + "' must lie in (0, 1)"};
  }
  if (!raw.seed.empty()) {
    const long long s = parse_int("--seed", raw.seed);
    if (s < 0) throw ParseError{"--seed '" + raw.seed + "' must be non-negative"};
    cfg.seed = static_cast<std::uint64_t>(s);
  }

  if (command == "eval" || command == "sweep") {
    cfg.a = parse_real_list("--a", raw.a);
    cfg.b = parse_real_list("--b", raw.b);
    if (cfg.a.size() != cfg.b.size() + 1) {
      throw ParseError{"--a has " + std::to_string(cfg.a.size()) + " values but --b has " +
                       std::to_string(cfg.b.size()) + "; expected len(a) = len(b) + 1"};
    }
    cfg.m = parse_m_list("--m", raw.m);
    if (!raw.N.empty()) cfg.N = static_cast<int>(parse_int("--N", raw.N));
    if (!raw.theorem.empty()) cfg.theorem = raw.theorem;
    if (!raw.scale.empty()) {
      const double pi = std::acos(-1.0);
      cfg.scale = raw.scale == "pi2over4" ? pi * pi / 4 : parse_real("--scale", raw.scale);
    }
  } else {
    cfg.suite = raw.suite;
    if (!raw.m.empty()) cfg.m = parse_m_list("--m", raw.m);
    if (!raw.abc.empty()) cfg.abc = parse_real_list("--abc", raw.abc);
    if (!raw.p.empty()) cfg.p = static_cast<int>(parse_int("--p", raw.p));
    if (!raw.k.empty()) cfg.k = static_cast<int>(parse_int("--k", raw.k));
    if (!raw.draws.empty()) {
      cfg.draws = static_cast<int>(parse_int("--draws", raw.draws));
      if (*cfg.draws < 1) throw ParseError{"--draws '" + raw.draws + "' must be positive"};
    }
  }
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partial sums of unit-argument hypergeometric series and their large-m expansions", "hypsum"};
  app.require_subcommand(1);
  RawArgs raw;

  auto* eval = app.add_subcommand("eval", "direct sums, expansion and residual for each m");
  add_series_options(eval, raw);
  add_common_options(eval, raw);

  auto* sweep = app.add_subcommand("sweep", "residuals over a grid of m with a log-log slope fit");
  add_series_options(sweep, raw);
  add_common_options(sweep, raw);

  auto* verify = app.add_subcommand("verify", "built-in identity and corollary checks");
  verify->add_option("--suite", raw.suite, "all, corollary1, corollary2, ak-cross, binomial, continuity");
  verify->add_option("--m", raw.m, "partial-sum lengths");
  verify->add_option("--abc", raw.abc, "a,b,c for corollary2");
  verify->add_option("--p", raw.p, "3 or 4 for ak-cross");
  verify->add_option("--k", raw.k, "highest k for ak-cross");
  verify->add_option("--draws", raw.draws, "number of random draws");
  add_common_options(verify, raw);

  // CLI11 wants argv order reversed when given a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }

  try {
    const std::string command = eval->parsed() ? "eval" : sweep->parsed() ? "sweep" : "verify";
    const RunConfig cfg = to_config(command, raw);
    if (command == "eval") return cmd_eval(cfg, out);
    if (command == "sweep") return cmd_sweep(cfg, out, err);
    return cmd_verify(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.message << '\n';
    return kParseError;
  } catch (const ParamError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const TailError& e) {
    err << "error: sum '" << e.sum_name() << "' did not converge: " << e.what() << '\n';
    return kSumError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kSumError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace hypsum::cli
