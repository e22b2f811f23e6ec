#ifndef ABUNDANCY_CLI_HPP
#define ABUNDANCY_CLI_HPP

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abundancy.hpp"
#include "arith.hpp"
#include "genfunc.hpp"
#include "limit_stats.hpp"
#include "perm_oracle.hpp"
#include "qseries.hpp"
#include "sieve.hpp"
#include "tori.hpp"

namespace abundancy::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kVerificationFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kResource = 3;

struct RunConfig {
  std::string subcommand;
  unsigned ell = 2;
  std::uint64_t nmax = 1'000'000;
  unsigned bins = 250;
  std::uint64_t prime_cutoff = 10'000;
  double eps = 1e-10;
  unsigned threads = 1;
  std::string table_path;
  std::string out_path;
  std::string hist_path;
  std::string summary_path;
  std::string cache_dir;
  double max_work = EnumerationBudget{}.max_work;
  std::uint64_t max_nmax = SieveOptions{}.max_nmax;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json atable_json(const ATable& a) {
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t k = 0; k < a.counts.size(); ++k)
    if (a.counts[k] != 0) counts[std::to_string(k)] = a.counts[k].str();
  return {{"ell", a.ell}, {"n", a.n}, {"counts", counts}};
}

inline std::vector<std::uint32_t> parse_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) throw UsageError("not an integer list: " + text);
    out.push_back(v);
  }
  return out;
}

// "4;2,3" -> {{4}, {2, 3}}
inline std::vector<std::vector<std::uint32_t>> parse_twists(const std::string& text) {
  std::vector<std::vector<std::uint32_t>> out;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) out.push_back(parse_list(group));
  return out;
}

inline std::string cache_dir(const RunConfig& cfg) {
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* env = std::getenv("ABUNDANCY_CACHE_DIR")) return env;
  return {};
}

// Table for (ell, nmax): --table if given, else the cache directory when one
// is configured, else a fresh sieve.
inline ArithTable obtain_table(const RunConfig& cfg, unsigned ell, std::uint64_t nmax, bool nmax_explicit) {
  if (!cfg.table_path.empty()) {
    ArithTable t = load_table(cfg.table_path, ell);
    if (nmax_explicit && nmax != t.nmax()) {
      if (nmax > t.nmax()) throw UsageError("--nmax exceeds the rows in --table");
      auto prefix = [&]() {
        std::vector<ExactInt> v;
        for (std::uint64_t n = 1; n <= nmax; ++n) v.push_back(t.value(n));
        return v;
      }();
      TableMetadata meta = t.metadata();
      meta.nmax = nmax;
      return ArithTable(meta, std::move(prefix));
    }
    return t;
  }
  SieveOptions opts;
  opts.threads = cfg.threads;
  opts.max_nmax = cfg.max_nmax;
  const std::string dir = cache_dir(cfg);
  if (dir.empty()) return sieve_b(ell, nmax, opts);
  const std::filesystem::path path =
      std::filesystem::path(dir) / ("b" + std::to_string(ell) + "_" + std::to_string(nmax) + ".csv");
  if (std::filesystem::exists(path) && std::filesystem::exists(sidecar_path(path))) return load_table(path, ell);
  std::filesystem::create_directories(dir);
  ArithTable t = sieve_b(ell, nmax, opts);
  save_table(t, path);
  return t;
}

inline double default_theorem_tolerance(unsigned ell) {
  if (ell == 2) return 2e-5;
  if (ell == 3) return 1e-3;
  return 1e-2;
}

}  // namespace detail

/// Parses argv and dispatches to a subcommand. Artifacts go to the declared
/// files; one summary line goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Generalized abundancy index laboratory"};
  app.require_subcommand(1);
  app.add_option("--threads", cfg.threads, "Cap on worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--cache-dir", cfg.cache_dir, "Table cache directory (default: $ABUNDANCY_CACHE_DIR)");

  // sieve
  auto* sieve = app.add_subcommand("sieve", "Tabulate B(ell, n) for n <= nmax");
  sieve->add_option("--ell", cfg.ell)->check(CLI::Range(1u, 64u));
  sieve->add_option("--nmax", cfg.nmax)->check(CLI::PositiveNumber);
  sieve->add_option("--out", cfg.out_path, "CSV path; metadata goes to <out>.json")->required();
  sieve->add_option("--max-nmax", cfg.max_nmax, "Memory budget in table entries");

  // bruteforce
  std::uint32_t brute_n = 0;
  bool brute_check = false;
  auto* brute = app.add_subcommand("bruteforce", "Enumerate commuting tuples and tabulate A(ell, n, k)");
  brute->add_option("--ell", cfg.ell)->check(CLI::Range(1u, 16u));
  brute->add_option("--n", brute_n)->required()->check(CLI::Range(1u, 12u));
  brute->add_option("--out", cfg.out_path, "JSON output path");
  brute->add_option("--budget", cfg.max_work, "Upper bound on (n!)^ell");
  brute->add_flag("--check", brute_check, "Compare with the exponential formula and exp(xL)");

  // genfunc
  std::uint32_t order = 10;
  auto* gen = app.add_subcommand("genfunc", "A-rows from the coefficients of exp(x L_ell(z))");
  gen->add_option("--ell", cfg.ell)->check(CLI::Range(1u, 16u));
  gen->add_option("--order", order, "Truncation order N")->check(CLI::Range(0u, 100000u));
  gen->add_option("--out", cfg.out_path, "JSON output path");

  // cauchy
  std::uint32_t c_n = 5, c_k = 2, c_grid = 2048, c_trunc = 0;
  double c_r = 0.3, c_tol = 1e-8;
  auto* cauchy = app.add_subcommand("cauchy", "Contour-integral check of A(ell, n, k)/n!");
  cauchy->add_option("--ell", cfg.ell)->check(CLI::Range(1u, 16u));
  cauchy->add_option("--n", c_n);
  cauchy->add_option("--k", c_k);
  cauchy->add_option("--r", c_r);
  cauchy->add_option("--M", c_grid)->check(CLI::Range(1u, 1u << 24));
  cauchy->add_option("--ntrunc", c_trunc, "Inner-sum truncation (0 = automatic)");
  cauchy->add_option("--tol", c_tol, "Failure threshold for abs_err");
  cauchy->add_option("--out", cfg.out_path, "JSON output path");

  // qcheck
  std::string q_text = "1/2", z_text = "1";
  double q_eps = 1e-12;
  bool q_grid = false;
  auto* qcheck = app.add_subcommand("qcheck", "Check the q-integral power rule");
  qcheck->add_option("--ell", cfg.ell)->check(CLI::Range(2u, 64u));
  qcheck->add_option("--q", q_text, "Exact rational p/q with |q| < 1");
  qcheck->add_option("--z", z_text, "Exact rational p/q");
  qcheck->add_option("--eps", q_eps, "Tail tolerance");
  qcheck->add_flag("--grid", q_grid, "Run the grid ell=2..6, q in {1/2,1/3,2/5}, z in {0,1/2,1}");
  qcheck->add_option("--out", cfg.out_path, "JSON output path");

  // verify-theorem
  double thm_tol = -1;
  auto* theorem = app.add_subcommand("verify-theorem", "Cesaro mean of B(ell,n)/n^{ell-1} vs zeta(2)...zeta(ell)");
  theorem->add_option("--ell", cfg.ell)->check(CLI::Range(2u, 16u));
  auto* thm_nmax = theorem->add_option("--nmax", cfg.nmax)->check(CLI::PositiveNumber);
  theorem->add_option("--table", cfg.table_path);
  theorem->add_option("--tol", thm_tol, "Allowed |mean - zeta product| (default depends on ell)");
  theorem->add_option("--summary", cfg.summary_path, "JSON output path");

  // verify-conjecture
  double max_rel_err = 1e-3;
  auto* conj = app.add_subcommand("verify-conjecture", "Mean of E_N against -mu, with histogram");
  auto* conj_nmax = conj->add_option("--nmax", cfg.nmax)->check(CLI::PositiveNumber);
  conj->add_option("--table", cfg.table_path, "ell = 2 table from `sieve`");
  conj->add_option("--bins", cfg.bins)->check(CLI::Range(1u, 1000000u));
  conj->add_option("--hist", cfg.hist_path, "Histogram CSV path");
  conj->add_option("--summary", cfg.summary_path, "Summary JSON path");
  conj->add_option("--max-rel-err", max_rel_err, "Failure threshold for |mean_E + mu|/mu");

  // moments
  unsigned moment_m = 2;
  auto* moments = app.add_subcommand("moments", "Moments of the limiting distribution");
  moments->add_option("--ell", cfg.ell)->check(CLI::Range(2u, 16u));
  moments->add_option("--m", moment_m)->check(CLI::Range(1u, 16u));
  moments->add_option("--cutoff", cfg.prime_cutoff)->check(CLI::Range(std::uint64_t{2}, std::uint64_t{100'000'000}));
  moments->add_option("--eps", cfg.eps);
  auto* mom_nmax = moments->add_option("--nmax", cfg.nmax, "Table size for the empirical moment (0 = skip)");
  moments->add_option("--table", cfg.table_path);
  moments->add_option("--out", cfg.out_path, "JSON output path");

  // tori
  std::string dims_text, twists_text, dot_path;
  bool tori_check = false;
  std::uint32_t double_count_n = 0;
  auto* tori = app.add_subcommand("tori", "Twisted discrete tori");
  tori->add_option("--dims", dims_text, "f_1,...,f_ell");
  tori->add_option("--twists", twists_text, "Twist vectors for directions 2..ell, e.g. \"4;2,3\"");
  tori->add_option("--dot", dot_path, "Graphviz output path");
  tori->add_flag("--check", tori_check, "Validate the realization");
  tori->add_option("--ell", cfg.ell)->check(CLI::Range(1u, 16u));
  tori->add_option("--double-count", double_count_n, "Run the double-counting check for n");
  tori->add_option("--budget", cfg.max_work, "Upper bound on (n!)^ell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*sieve) {
      SieveOptions opts;
      opts.threads = cfg.threads;
      opts.max_nmax = cfg.max_nmax;
      const ArithTable t = sieve_b(cfg.ell, cfg.nmax, opts);
      save_table(t, cfg.out_path);
      out << "sieve ell=" << cfg.ell << " nmax=" << cfg.nmax << " wrote " << cfg.out_path << " and "
          << sidecar_path(cfg.out_path).string() << '\n';
      return kOk;
    }

    if (*brute) {
      EnumerationBudget budget;
      budget.max_work = cfg.max_work;
      budget.threads = cfg.threads;
      const ATable a = enumerate_A(cfg.ell, brute_n, budget);
      const auto j = detail::atable_json(a);
      if (!cfg.out_path.empty()) detail::write_json(cfg.out_path, j);
      bool ok = true;
      if (brute_check) {
        const auto row = one_orbit_row(cfg.ell, brute_n);
        ok = bell_transform(cfg.ell, brute_n, row) == a && exp_series(cfg.ell, brute_n).a_row(brute_n) == a;
      }
      out << j.dump() << (brute_check ? (ok ? " check=pass" : " check=FAIL") : "") << '\n';
      return ok ? kOk : kVerificationFailed;
    }

    if (*gen) {
      if (order > 400) throw BudgetExceeded("genfunc: order above 400 is refused");
      const SeriesPoly g = exp_series(cfg.ell, order);
      nlohmann::json rows = nlohmann::json::array();
      for (std::uint32_t n = 0; n <= order; ++n) rows.push_back(detail::atable_json(g.a_row(n)));
      const nlohmann::json j = {{"ell", cfg.ell}, {"order", order}, {"rows", rows}};
      if (!cfg.out_path.empty()) detail::write_json(cfg.out_path, j);
      out << "genfunc ell=" << cfg.ell << " order=" << order << " rows=" << rows.size() << '\n';
      return kOk;
    }

    if (*cauchy) {
      const CauchyCheck c = cauchy_check(cfg.ell, c_n, c_k, c_r, c_grid, c_trunc);
      const nlohmann::json j = {{"ell", c.ell},     {"n", c.n},           {"k", c.k},
                                {"r", c.r},         {"M", c.grid},        {"n_trunc", c.n_trunc},
                                {"numeric", c.numeric}, {"exact", c.exact}, {"abs_err", c.abs_err}};
      if (!cfg.out_path.empty()) detail::write_json(cfg.out_path, j);
      const bool ok = c.abs_err <= c_tol;
      out << "cauchy numeric=" << detail::format_double(c.numeric) << " exact=" << detail::format_double(c.exact)
          << " abs_err=" << detail::format_double(c.abs_err) << (ok ? " pass" : " FAIL") << '\n';
      return ok ? kOk : kVerificationFailed;
    }

    if (*qcheck) {
      std::vector<std::tuple<unsigned, std::string, std::string>> cases;
      if (q_grid) {
        for (unsigned l = 2; l <= 6; ++l)
          for (const char* q : {"1/2", "1/3", "2/5"})
            for (const char* z : {"0", "1/2", "1"}) cases.emplace_back(l, q, z);
      } else {
        cases.emplace_back(cfg.ell, q_text, z_text);
      }
      nlohmann::json results = nlohmann::json::array();
      bool ok = true;
      for (const auto& [l, q, z] : cases) {
        const PowerRuleCheck c = verify_power_rule(l, parse_rational(z), parse_rational(q), q_eps);
        ok = ok && c.bound_ok;
        results.push_back({{"ell", l},
                           {"q", q},
                           {"z", z},
                           {"terms", c.terms},
                           {"lhs_truncated", to_double(c.lhs_truncated)},
                           {"rhs_exact", to_string(c.rhs_exact)},
                           {"tail_bound", to_double(c.tail_bound)},
                           {"bound_ok", c.bound_ok}});
      }
      if (!cfg.out_path.empty()) detail::write_json(cfg.out_path, {{"eps", q_eps}, {"cases", results}});
      out << "qcheck cases=" << cases.size() << (ok ? " pass" : " FAIL") << '\n';
      return ok ? kOk : kVerificationFailed;
    }

    if (*theorem) {
      const ArithTable t = detail::obtain_table(cfg, cfg.ell, cfg.nmax, thm_nmax->count() > 0);
      const double mean = cesaro_mean(t, t.nmax());
      const double target = zeta_product(cfg.ell);
      const double tol = thm_tol > 0 ? thm_tol : detail::default_theorem_tolerance(cfg.ell);
      bool power_rule_ok = true;
      for (const char* q : {"1/2", "1/3", "2/5"})
        for (const char* z : {"0", "1/2", "1"})
          power_rule_ok = power_rule_ok && verify_power_rule(cfg.ell, parse_rational(z), parse_rational(q), 1e-12).bound_ok;
      const bool ok = std::fabs(mean - target) <= tol && power_rule_ok;
      if (!cfg.summary_path.empty())
        detail::write_json(cfg.summary_path, {{"ell", cfg.ell},
                                              {"nmax", t.nmax()},
                                              {"cesaro_mean", mean},
                                              {"zeta_product", target},
                                              {"abs_diff", std::fabs(mean - target)},
                                              {"tol", tol},
                                              {"power_rule_ok", power_rule_ok}});
      out << "verify-theorem ell=" << cfg.ell << " nmax=" << t.nmax() << " mean=" << detail::format_double(mean)
          << " zeta_product=" << detail::format_double(target) << (ok ? " pass" : " FAIL") << '\n';
      return ok ? kOk : kVerificationFailed;
    }

    if (*conj) {
      const ArithTable t = detail::obtain_table(cfg, 2, cfg.nmax, conj_nmax->count() > 0);
      const ErrorSummary s = error_series(t, t.nmax(), cfg.bins);
      if (!cfg.summary_path.empty())
        detail::write_json(cfg.summary_path, {{"nmax", s.nmax},
                                              {"mean_E", s.mean_E},
                                              {"mu", s.mu},
                                              {"rel_err", s.rel_err},
                                              {"bins", s.bins},
                                              {"last_E", s.last_E}});
      if (!cfg.hist_path.empty()) {
        std::ofstream h(cfg.hist_path, std::ios::binary | std::ios::trunc);
        if (!h) throw std::runtime_error("cannot open for writing: " + cfg.hist_path);
        h << "bin_left,bin_right,count\n";
        for (const auto& b : s.histogram)
          h << detail::format_double(b.left) << ',' << detail::format_double(b.right) << ',' << b.count << '\n';
      }
      const bool ok = s.rel_err <= max_rel_err;
      out << "verify-conjecture nmax=" << s.nmax << " mean_E=" << detail::format_double(s.mean_E)
          << " mu=" << detail::format_double(s.mu) << " rel_err=" << detail::format_double(s.rel_err)
          << (ok ? " pass" : " FAIL") << '\n';
      return ok ? kOk : kVerificationFailed;
    }

    if (*moments) {
      MomentResult r = theoretical_moment(cfg.ell, moment_m, cfg.prime_cutoff, cfg.eps);
      const bool want_empirical = !cfg.table_path.empty() || cfg.nmax > 0;
      if (want_empirical) {
        const ArithTable t = detail::obtain_table(cfg, cfg.ell, cfg.nmax, mom_nmax->count() > 0);
        r.empirical = empirical_moment(t, moment_m, t.nmax());
      }
      nlohmann::json j = {{"ell", r.ell},
                          {"m", r.m},
                          {"theoretical", r.theoretical},
                          {"raw_product", r.raw_product},
                          {"prime_cutoff", r.prime_cutoff},
                          {"tail_bound", r.tail_bound}};
      j["empirical"] = want_empirical ? nlohmann::json(r.empirical) : nlohmann::json(nullptr);
      if (r.closed_form) j["closed_form"] = *r.closed_form;
      if (!r.warning.empty()) {
        j["warning"] = r.warning;
        err << "warning: " << r.warning << '\n';
      }
      if (!cfg.out_path.empty()) detail::write_json(cfg.out_path, j);
      out << "moments ell=" << r.ell << " m=" << r.m << " theoretical=" << detail::format_double(r.theoretical);
      if (want_empirical) out << " empirical=" << detail::format_double(r.empirical);
      out << '\n';
      return r.warning.empty() ? kOk : kVerificationFailed;
    }

    if (*tori) {
      EnumerationBudget budget;
      budget.max_work = cfg.max_work;
      if (double_count_n > 0) {
        const DoubleCountResult d = double_count_check(cfg.ell, double_count_n, budget);
        out << "tori double-count ell=" << cfg.ell << " n=" << double_count_n << " count=" << d.count
            << " bruteforce=" << d.bruteforce_count << (d.match ? " match" : " MISMATCH") << '\n';
        return d.match ? kOk : kVerificationFailed;
      }
      if (dims_text.empty()) throw UsageError("tori: --dims or --double-count is required");
      TorusSpec spec;
      spec.dims = detail::parse_list(dims_text);
      if (!twists_text.empty()) spec.twists = detail::parse_twists(twists_text);
      if (spec.twists.empty() && spec.dims.size() > 1)
        for (std::size_t r = 1; r < spec.dims.size(); ++r) spec.twists.emplace_back(r, 1u);
      const TorusRealization t = build_torus(spec);
      if (!dot_path.empty()) export_dot(t, std::filesystem::path(dot_path));
      bool ok = true;
      out << "tori n=" << t.n() << " edges=" << t.edges().size();
      if (tori_check) {
        const TorusValidation v = validate(t);
        ok = v.all();
        out << " commutes=" << v.commutes << " transitive=" << v.transitive << " group_order_n=" << v.group_order_n
            << " basepoint_bijective=" << v.basepoint_bijective;
      }
      out << '\n';
      return ok ? kOk : kVerificationFailed;
    }
  } catch (const BudgetExceeded& e) {
    err << "refused: " << e.what() << '\n';
    return kResource;
  } catch (const TableFormatError& e) {
    err << "table error: " << e.what() << '\n';
    return e.kind() == TableFormatError::Kind::io ? kUsage : kVerificationFailed;
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const std::invalid_argument& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailed;
  }
  return kUsage;
}

}  // namespace abundancy::cli

#endif  // ABUNDANCY_CLI_HPP
