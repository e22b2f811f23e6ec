#ifndef ABUNDANCY_GENFUNC_HPP
#define ABUNDANCY_GENFUNC_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "arith.hpp"
#include "limit_stats.hpp"
#include "perm_oracle.hpp"
#include "sieve.hpp"

namespace abundancy {

/// Coefficients l_n = B(ell, n)/n of L_ell(z) = sum_n l_n z^n, n = 1..N.
inline std::vector<ExactRational> series_L(unsigned ell, std::uint64_t N) {
  if (N < 1) throw std::invalid_argument("series_L: N must be >= 1");
  const ArithTable b = sieve_b(ell, N);
  std::vector<ExactRational> out;
  out.reserve(N);
  for (std::uint64_t n = 1; n <= N; ++n) out.emplace_back(b.value(n), ExactInt(n));
  return out;
}

/// Truncation of G_ell(x, z) = exp(x L_ell(z)) = sum_n H_{ell,n}(x) z^n through
/// z^N. H_{ell,n} is a polynomial in x; its coefficients are stored scaled by
/// n!, which makes them the integers A(ell, n, k).
class SeriesPoly {
 public:
  SeriesPoly(unsigned ell, std::uint32_t order, std::vector<std::vector<ExactInt>> scaled)
      : ell_(ell), order_(order), scaled_(std::move(scaled)) {}

  unsigned ell() const noexcept { return ell_; }
  std::uint32_t order() const noexcept { return order_; }

  // [x^k z^n] G, exact.
  ExactRational coefficient(std::uint32_t n, std::uint32_t k) const {
    check(n);
    if (k > n) return 0;
    return ExactRational(scaled_[n][k], factorial(n));
  }

  // n! [x^k z^n] G = A(ell, n, k).
  const ExactInt& scaled_coefficient(std::uint32_t n, std::uint32_t k) const {
    check(n);
    return scaled_[n].at(k);
  }

  ATable a_row(std::uint32_t n) const {
    check(n);
    return ATable{ell_, n, scaled_[n]};
  }

  // H_{ell,n}(x).
  ExactRational evaluate(std::uint32_t n, const ExactRational& x) const {
    check(n);
    ExactRational acc = 0;
    for (std::size_t k = scaled_[n].size(); k-- > 0;) acc = acc * x + ExactRational(scaled_[n][k]);
    return acc / factorial(n);
  }

 private:
  void check(std::uint32_t n) const {
    if (n > order_) throw std::out_of_range("SeriesPoly: n beyond truncation order");
  }

  unsigned ell_;
  std::uint32_t order_;
  std::vector<std::vector<ExactInt>> scaled_;
};

/// G = exp(x L) through the differential recurrence n g_n = x sum_{m=1}^n m l_m g_{n-m}.
/// With m l_m = B(ell, m) and a(n, k) = n! [x^k] g_n this reads
///   a(n, k) = sum_m B(ell, m) (n-1)!/(n-m)! a(n-m, k-1),
/// which stays in the integers.
inline SeriesPoly exp_series(unsigned ell, std::uint32_t N) {
  const ArithTable b = sieve_b(ell, std::max<std::uint32_t>(N, 1));
  std::vector<std::vector<ExactInt>> a(N + 1);
  a[0] = {ExactInt(1)};
  for (std::uint32_t n = 1; n <= N; ++n) {
    a[n].assign(n + 1, ExactInt(0));
    ExactInt falling = 1;  // (n-1)!/(n-m)!
    for (std::uint32_t m = 1; m <= n; ++m) {
      if (m > 1) falling *= n - m + 1;
      const ExactInt weight = b.value(m) * falling;
      const auto& prev = a[n - m];
      for (std::uint32_t k = 1; k <= n - m + 1; ++k)
        if (k - 1 < prev.size() && prev[k - 1] != 0) a[n][k] += weight * prev[k - 1];
    }
  }
  return SeriesPoly(ell, N, std::move(a));
}

/// H_{ell,n}(x) for n = 0..N at a fixed rational x, via the scalar form of the
/// same recurrence, n h_n = x sum_m B(ell, m) h_{n-m}. With x = u/v the scaled
/// values c_n = n! v^n h_n are integers.
inline std::vector<ExactRational> series_values(unsigned ell, std::uint32_t N, const ExactRational& x) {
  const ArithTable b = sieve_b(ell, std::max<std::uint32_t>(N, 1));
  const ExactInt u = boost::multiprecision::numerator(x);
  const ExactInt v = boost::multiprecision::denominator(x);
  std::vector<ExactInt> c(N + 1);
  c[0] = 1;
  for (std::uint32_t n = 1; n <= N; ++n) {
    ExactInt acc = 0;
    ExactInt falling = 1, vpow = 1;
    for (std::uint32_t m = 1; m <= n; ++m) {
      if (m > 1) {
        falling *= n - m + 1;
        vpow *= v;
      }
      acc += b.value(m) * falling * vpow * c[n - m];
    }
    c[n] = u * acc;
  }
  std::vector<ExactRational> out(N + 1);
  ExactInt scale = 1;  // n! v^n
  for (std::uint32_t n = 0; n <= N; ++n) {
    if (n > 0) scale *= v * n;
    out[n] = ExactRational(c[n], scale);
  }
  return out;
}

/// p(0..N) by Euler's pentagonal recurrence.
inline std::vector<ExactInt> partition_numbers(std::uint32_t N) {
  std::vector<ExactInt> p(N + 1, ExactInt(0));
  p[0] = 1;
  for (std::uint32_t n = 1; n <= N; ++n) {
    ExactInt acc = 0;
    for (std::uint64_t k = 1;; ++k) {
      const std::uint64_t g1 = k * (3 * k - 1) / 2;
      if (g1 > n) break;
      const std::uint64_t g2 = k * (3 * k + 1) / 2;
      ExactInt term = p[n - g1];
      if (g2 <= n) term += p[n - g2];
      if (k % 2 == 1)
        acc += term;
      else
        acc -= term;
    }
    p[n] = acc;
  }
  return p;
}

struct CauchyCheck {
  unsigned ell = 0;
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  double r = 0;
  std::uint32_t grid = 0;     // M
  std::uint32_t n_trunc = 0;  // inner-sum truncation
  double numeric = 0;
  double exact = 0;
  double abs_err = 0;
};

/// Smallest N >= n with r^N N^{2 ell} below 1e-20 and the bound decreasing.
inline std::uint32_t default_truncation(unsigned ell, std::uint32_t n, double r) {
  std::uint32_t N = std::max<std::uint32_t>(n, 1);
  const double lr = std::log(r);
  while (true) {
    const double logb = N * lr + 2.0 * ell * std::log(static_cast<double>(N));
    const double slope = lr + 2.0 * ell / N;
    if (logb < std::log(1e-20) && slope < 0) return N;
    ++N;
  }
}

/// Trapezoidal evaluation of the contour integral
///   A(ell,n,k)/n! = (1/k!) \oint r^{-n} e^{-i n theta} S(theta)^k dtheta/2pi,
///   S(theta) = sum_{nu=1}^{n_trunc} r^nu e^{i nu theta} B(ell,nu)/nu,
/// on M equispaced angles. k is an integer, so exp(k log S) = S^k on any branch.
inline CauchyCheck cauchy_check(unsigned ell, std::uint32_t n, std::uint32_t k, double r, std::uint32_t M,
                                std::uint32_t n_trunc = 0) {
  if (!(r > 0 && r < 1)) throw std::invalid_argument("cauchy_check: r must lie in (0, 1)");
  if (M < 1) throw std::invalid_argument("cauchy_check: M must be >= 1");
  if (n_trunc == 0) n_trunc = default_truncation(ell, n, r);

  CauchyCheck out;
  out.ell = ell;
  out.n = n;
  out.k = k;
  out.r = r;
  out.grid = M;
  out.n_trunc = n_trunc;

  using C = std::complex<long double>;
  const ArithTable b = sieve_b(ell, n_trunc);
  std::vector<long double> weight(n_trunc + 1, 0.0L);  // r^nu B/nu
  for (std::uint32_t nu = 1; nu <= n_trunc; ++nu)
    weight[nu] = std::pow(static_cast<long double>(r), static_cast<long double>(nu)) *
                 static_cast<long double>(to_double(ExactRational(b.value(nu), ExactInt(nu))));
  std::vector<C> roots(M);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (std::uint32_t j = 0; j < M; ++j) roots[j] = std::polar(1.0L, two_pi * j / M);

  C total = 0;
  for (std::uint32_t j = 0; j < M; ++j) {
    C inner = 0;
    for (std::uint32_t nu = 1; nu <= n_trunc; ++nu)
      inner += weight[nu] * roots[(static_cast<std::uint64_t>(nu) * j) % M];
    if (k > 0 && inner == C(0)) throw std::domain_error("cauchy_check: inner sum vanished on the contour");
    C pw = 1;
    for (std::uint32_t i = 0; i < k; ++i) pw *= inner;
    total += roots[(M - (static_cast<std::uint64_t>(n) * j) % M) % M] * pw;
  }
  long double kfact = 1;
  for (std::uint32_t i = 2; i <= k; ++i) kfact *= i;
  const long double value =
      total.real() / M / kfact / std::pow(static_cast<long double>(r), static_cast<long double>(n));

  out.numeric = static_cast<double>(value);
  out.exact = to_double(exp_series(ell, n).coefficient(n, k));
  out.abs_err = std::fabs(out.numeric - out.exact);
  return out;
}

/// H_{2,n}(x) divided by its leading asymptotic form
///   x^{(1+x)/4} 2^{-(5+3x)/4} 3^{-(1+x)/4} n^{-(3+x)/4} exp(2 sqrt(x zeta(2) n)).
inline double hr_ratio(std::uint32_t n, double x) {
  if (n < 1) throw std::invalid_argument("hr_ratio: n must be >= 1");
  if (!(x > 0)) throw std::invalid_argument("hr_ratio: x must be positive");
  using Big = boost::multiprecision::cpp_bin_float_50;
  const ExactRational xr(x);
  const ExactRational h = series_values(2, n, xr).back();
  const double log_h = static_cast<double>(log(Big(boost::multiprecision::numerator(h))) -
                                           log(Big(boost::multiprecision::denominator(h))));
  const double log_asym = (1 + x) / 4 * std::log(x) - (5 + 3 * x) / 4 * std::log(2.0) -
                          (1 + x) / 4 * std::log(3.0) - (3 + x) / 4 * std::log(static_cast<double>(n)) +
                          2 * std::sqrt(x * zeta(2) * n);
  return std::exp(log_h - log_asym);
}

}  // namespace abundancy

#endif  // ABUNDANCY_GENFUNC_HPP
