#ifndef ABUNDANCY_LIMIT_STATS_HPP
#define ABUNDANCY_LIMIT_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "arith.hpp"
#include "sieve.hpp"

namespace abundancy {

inline constexpr double kEulerGamma = 0.5772156649015328606;

/// Neumaier-compensated running sum. Order of additions is the caller's.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// zeta(s) for integer s >= 2 through the alternating series
/// eta(s) = sum (-1)^{k-1} k^{-s} = (1 - 2^{1-s}) zeta(s), summed with
/// Borwein's Chebyshev-weighted acceleration. With n weights the remainder is
/// at most 3 / ((3 + sqrt 8)^n (1 - 2^{1-s})); n is the first count meeting eps.
inline double zeta(unsigned s, double eps = 1e-16) {
  if (s < 2) throw std::invalid_argument("zeta: s must be >= 2");
  if (!(eps > 0)) throw std::invalid_argument("zeta: eps must be positive");
  const long double denom = 1.0L - std::pow(2.0L, 1.0L - static_cast<long double>(s));
  const long double rate = 3.0L + std::sqrt(8.0L);
  unsigned n = 1;
  while (3.0L / (std::pow(rate, static_cast<long double>(n)) * denom) > eps && n < 80) ++n;

  // d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)
  std::vector<long double> d(n + 1);
  long double term = 1.0L, acc = 1.0L;
  d[0] = acc;
  for (unsigned i = 1; i <= n; ++i) {
    term *= 4.0L * (n + i - 1) * (n - i + 1) / (static_cast<long double>(2 * i) * (2 * i - 1));
    acc += term;
    d[i] = acc;
  }
  long double sum = 0.0L;
  for (unsigned k = n; k-- > 0;) {
    const long double t = (d[k] - d[n]) / std::pow(static_cast<long double>(k + 1), static_cast<long double>(s));
    sum += (k % 2 == 0) ? t : -t;
  }
  const long double eta = -sum / d[n];
  return static_cast<double>(eta / denom);
}

/// zeta(2) zeta(3) ... zeta(ell); 1 for ell < 2.
inline double zeta_product(unsigned ell) {
  double p = 1.0;
  for (unsigned s = 2; s <= ell; ++s) p *= zeta(s);
  return p;
}

/// mu = gamma/2 + ln(24 zeta(2))/4 - zeta(2)/2.
inline double mu_constant() {
  const double z2 = zeta(2);
  return kEulerGamma / 2 + std::log(24 * z2) / 4 - z2 / 2;
}

/// Prime zeta P(s) = sum_p p^{-s} = sum_k mu(k)/k ln zeta(ks).
inline double prime_zeta(unsigned s) {
  if (s < 2) throw std::invalid_argument("prime_zeta: s must be >= 2");
  double total = 0.0;
  for (unsigned k = 1; k * s < 200; ++k) {
    const int mu = moebius(k);
    if (mu != 0) total += mu * std::log(zeta(k * s)) / k;
    if (std::ldexp(1.0, -static_cast<int>(k * s)) < 1e-20) break;
  }
  return total;
}

/// B(ell, n) / n^{ell-1} rounded to double. For ell = 2 this is one correctly
/// rounded division of two exactly representable integers.
inline double index_as_double(const ArithTable& table, std::uint64_t n) {
  const unsigned e = table.ell() - 1;
  if (table.is_small()) {
    const std::uint64_t b = table.small_value(n);
    if (e == 0) return static_cast<double>(b);
    if (e == 1 && b < (1ULL << 53) && n < (1ULL << 53)) return static_cast<double>(b) / static_cast<double>(n);
    return static_cast<double>(static_cast<long double>(b) / std::pow(static_cast<long double>(n), e));
  }
  return to_double(ExactRational(table.value(n), ipow(ExactInt(n), e)));
}

namespace detail {
inline void check_prefix(const ArithTable& table, std::uint64_t N, const char* who) {
  if (N < 1 || N > table.nmax())
    throw std::invalid_argument(std::string(who) + ": N must be in [1, table.nmax()]");
}
}  // namespace detail

/// (1/N) sum_{n<=N} B(ell, n)/n^{ell-1}, compensated, ascending n.
inline double cesaro_mean(const ArithTable& table, std::uint64_t N) {
  detail::check_prefix(table, N, "cesaro_mean");
  CompensatedSum s;
  for (std::uint64_t n = 1; n <= N; ++n) s.add(index_as_double(table, n));
  return s.value() / static_cast<double>(N);
}

/// Exact-rational Cesaro mean. Denominators grow like lcm(1..N)^{ell-1}, so
/// this is meant for small N.
inline ExactRational cesaro_mean_exact(const ArithTable& table, std::uint64_t N) {
  detail::check_prefix(table, N, "cesaro_mean_exact");
  ExactRational s = 0;
  for (std::uint64_t n = 1; n <= N; ++n) s += ExactRational(table.value(n), ipow(ExactInt(n), table.ell() - 1));
  return s / N;
}

/// (1/N) sum_{n<=N} (B(ell, n)/n^{ell-1})^m, compensated, ascending n.
inline double empirical_moment(const ArithTable& table, unsigned m, std::uint64_t N) {
  detail::check_prefix(table, N, "empirical_moment");
  if (m < 1) throw std::invalid_argument("empirical_moment: m must be >= 1");
  CompensatedSum s;
  for (std::uint64_t n = 1; n <= N; ++n) {
    const double x = index_as_double(table, n);
    double xm = x;
    for (unsigned i = 1; i < m; ++i) xm *= x;
    s.add(xm);
  }
  return s.value() / static_cast<double>(N);
}

struct HistogramBin {
  double left = 0;
  double right = 0;
  std::uint64_t count = 0;
};

/// Equal-width bins spanning [min, max]; bins are right-open except the last.
inline std::vector<HistogramBin> histogram(const std::vector<double>& data, unsigned bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  if (data.empty()) throw std::invalid_argument("histogram: no data");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(bins);
  for (unsigned i = 0; i < bins; ++i) {
    out[i].left = lo + width * i;
    out[i].right = (i + 1 == bins) ? hi : lo + width * (i + 1);
  }
  for (double x : data) {
    auto idx = static_cast<std::int64_t>(std::floor((x - lo) / width));
    idx = std::clamp<std::int64_t>(idx, 0, bins - 1);
    // Edge rounding: keep x inside [left, right).
    while (idx > 0 && x < out[idx].left) --idx;
    while (idx + 1 < static_cast<std::int64_t>(bins) && x >= out[idx].right) ++idx;
    ++out[idx].count;
  }
  return out;
}

/// Statistics of E_N = sum_{n<=N} sigma(n)/n - zeta(2) N + ln(N)/2 for N <= nmax
/// and the histogram of the cumulative sums X = sum_{N'<=N} (E_N' + mu).
struct ErrorSummary {
  std::uint64_t nmax = 0;
  double mean_E = 0;    // (1/nmax) sum_N E_N
  double minus_mu = 0;  // -mu
  double mu = 0;
  double rel_err = 0;   // |mean_E + mu| / mu
  double last_E = 0;    // E_nmax, the plain (non-averaged) value
  unsigned bins = 0;
  std::vector<HistogramBin> histogram;
};

/// The sigma(n)/n terms are rounded once to double; the running sums of the
/// terms, of E_N and of X are compensated and strictly sequential.
inline ErrorSummary error_series(const ArithTable& table, std::uint64_t N, unsigned bins = 250) {
  if (table.ell() != 2) throw std::invalid_argument("error_series: requires an ell = 2 table");
  detail::check_prefix(table, N, "error_series");
  const double z2 = zeta(2);
  const double mu = mu_constant();

  std::vector<double> errors(N);
  CompensatedSum partial, mean;
  for (std::uint64_t n = 1; n <= N; ++n) {
    partial.add(index_as_double(table, n));
    const double e = partial.value() - z2 * static_cast<double>(n) + 0.5 * std::log(static_cast<double>(n));
    errors[n - 1] = e;
    mean.add(e);
  }
  ErrorSummary out;
  out.nmax = N;
  out.mu = mu;
  out.minus_mu = -mu;
  out.mean_E = mean.value() / static_cast<double>(N);
  out.rel_err = std::fabs(out.mean_E + mu) / mu;
  out.last_E = errors.back();
  out.bins = bins;

  CompensatedSum cumulative;
  for (double& e : errors) {
    cumulative.add(e + mu);
    e = cumulative.value();
  }
  out.histogram = histogram(errors, bins);
  return out;
}

/// Reference value of mean_E at 50 significant digits, through
///   mean_E = (1/N) sum_n (N-n+1) sigma(n)/n - zeta(2)(N+1)/2 + ln(N!)/(2N).
inline double mean_error_reference(const ArithTable& table, std::uint64_t N) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  if (table.ell() != 2) throw std::invalid_argument("mean_error_reference: requires an ell = 2 table");
  detail::check_prefix(table, N, "mean_error_reference");
  Big weighted = 0;
  for (std::uint64_t n = 1; n <= N; ++n) {
    const Big term = Big(table.value(n)) / Big(n);
    weighted += term * Big(N - n + 1);
  }
  const Big pi = boost::math::constants::pi<Big>();
  const Big z2 = pi * pi / 6;
  const Big bigN(N);
  const Big value = weighted / bigN - z2 * (bigN + 1) / 2 + boost::math::lgamma(bigN + 1) / (2 * bigN);
  return static_cast<double>(value);
}

struct LocalMoment {
  double value = 0;
  double tail_bound = 0;  // bound on the dropped terms a >= terms
  unsigned terms = 0;
};

/// E[(Bhat(ell, p, a)/p^{(ell-1)a})^m] for a ~ Geometric(1/p):
///   (1 - 1/p) sum_{a>=0} p^{-a} (Bhat/p^{(ell-1)a})^m.
/// The normalized factor is (p^{-a-1}; 1/p)_{ell-1}/(1/p; 1/p)_{ell-1} <=
/// prod_{i<ell} (1 - p^{-i})^{-1}, so the tail after A terms is at most that
/// bound to the m-th power times p^{-A}.
inline LocalMoment local_moment_detail(unsigned ell, std::uint64_t p, unsigned m, double eps) {
  if (ell < 1 || m < 1 || p < 2 || !(eps > 0)) throw std::invalid_argument("local_moment: bad arguments");
  const long double q = 1.0L / static_cast<long double>(p);
  long double denom = 1.0L;  // (q; q)_{ell-1}
  for (unsigned i = 1; i < ell; ++i) denom *= 1.0L - std::pow(q, static_cast<long double>(i));
  const long double bound = std::pow(1.0L / denom, static_cast<long double>(m));

  LocalMoment out;
  long double sum = 0.0L;
  long double qa = 1.0L;  // q^a
  unsigned a = 0;
  while (true) {
    // (q^{a+1}; q)_{ell-1}
    long double numer = 1.0L;
    long double z = qa * q;
    for (unsigned i = 0; i + 1 < ell; ++i) {
      numer *= 1.0L - z;
      z *= q;
    }
    const long double normalized = numer / denom;
    sum += qa * std::pow(normalized, static_cast<long double>(m));
    qa *= q;
    ++a;
    const long double tail = bound * qa;
    if (tail <= eps || a > 4000) {
      out.tail_bound = static_cast<double>(tail);
      break;
    }
  }
  out.terms = a;
  out.value = static_cast<double>((1.0L - q) * sum);
  return out;
}

inline double local_moment(unsigned ell, std::uint64_t p, unsigned m, double eps = 1e-15) {
  return local_moment_detail(ell, p, m, eps).value;
}

struct MomentResult {
  unsigned ell = 0;
  unsigned m = 0;
  double theoretical = 0;  // tail-extrapolated Euler product
  double raw_product = 0;  // product over primes <= prime_cutoff only
  double tail_bound = 0;   // size of the extrapolated tail factor's effect
  double empirical = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t prime_cutoff = 0;
  std::optional<double> closed_form;  // zeta(2)...zeta(ell), reported for m = 1
  std::string warning;
};

/// prod_p local_moment(ell, p, m). The product runs over p <= prime_cutoff; the
/// remaining factors behave like 1 + c/p^2, with c read off the last included
/// prime, and are folded in as exp(c sum_{p > cutoff} p^{-2}) using the prime
/// zeta function. tail_bound is the magnitude of that correction.
inline MomentResult theoretical_moment(unsigned ell, unsigned m, std::uint64_t prime_cutoff, double eps = 1e-10) {
  if (ell < 2 || m < 1) throw std::invalid_argument("theoretical_moment: need ell >= 2, m >= 1");
  if (prime_cutoff < 2) throw std::invalid_argument("theoretical_moment: prime_cutoff must be >= 2");
  const auto primes = primes_up_to(prime_cutoff);
  const double per_prime_eps = std::max(eps / static_cast<double>(primes.size()), 1e-17);

  MomentResult out;
  out.ell = ell;
  out.m = m;
  out.prime_cutoff = prime_cutoff;
  long double product = 1.0L;
  long double inv_sq = 0.0L;
  double last_local = 1.0;
  for (auto p : primes) {
    last_local = local_moment(ell, p, m, per_prime_eps);
    product *= last_local;
    inv_sq += 1.0L / (static_cast<long double>(p) * p);
  }
  const double last_p = static_cast<double>(primes.back());
  const double c = last_p * last_p * (last_local - 1.0);
  const double tail_sq = std::max(0.0, prime_zeta(2) - static_cast<double>(inv_sq));
  const long double tail_factor = std::exp(static_cast<long double>(c) * tail_sq);

  out.raw_product = static_cast<double>(product);
  out.theoretical = static_cast<double>(product * tail_factor);
  out.tail_bound = std::fabs(out.theoretical - out.raw_product);

  if (m == 1) {
    out.closed_form = zeta_product(ell);
    if (std::fabs(out.theoretical - *out.closed_form) > out.tail_bound)
      out.warning = "m = 1 product disagrees with zeta(2)...zeta(ell) beyond the tail bound";
  }
  return out;
}

}  // namespace abundancy

#endif  // ABUNDANCY_LIMIT_STATS_HPP
