#ifndef ABUNDANCY_ARITH_HPP
#define ABUNDANCY_ARITH_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace abundancy {

using ExactInt = boost::multiprecision::cpp_int;
using ExactRational = boost::multiprecision::cpp_rational;

// Raised when an exact identity that must hold (integrality, exact
// division) fails. Seeing one means the implementation is wrong.
class VerificationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a request exceeds a configured work or memory budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checked fixed-width helpers. An empty optional means the exact result
// does not fit and the caller must promote to ExactInt.
inline std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
  return r;
}

inline std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) return std::nullopt;
  return r;
}

inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    auto next = checked_mul(r, base);
    if (!next) return std::nullopt;
    r = *next;
  }
  return r;
}

inline ExactInt ipow(const ExactInt& base, unsigned exp) {
  return boost::multiprecision::pow(base, exp);
}

inline ExactRational rpow(const ExactRational& base, unsigned exp) {
  ExactRational r = 1;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

inline ExactInt factorial(unsigned n) {
  ExactInt r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

// Exact quotient; throws if `den` does not divide `num`.
inline ExactInt exact_div(const ExactInt& num, const ExactInt& den, const char* what) {
  ExactInt q, r;
  boost::multiprecision::divide_qr(num, den, q, r);
  if (r != 0) throw VerificationError(std::string("non-exact division: ") + what);
  return q;
}

// Integer value of a rational that must be integral.
inline ExactInt require_integral(const ExactRational& v, const char* what) {
  if (boost::multiprecision::denominator(v) != 1)
    throw VerificationError(std::string("non-integral value: ") + what);
  return boost::multiprecision::numerator(v);
}

/// Primes p <= limit in ascending order (Eratosthenes).
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  std::vector<std::uint64_t> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

struct PrimePower {
  std::uint64_t prime;
  unsigned exponent;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime-exponent representation of a positive integer. Primes are strictly
/// increasing and every stored exponent is at least 1; n = 1 has no factors.
class Factorization {
 public:
  Factorization() = default;

  explicit Factorization(std::vector<PrimePower> factors) : factors_(std::move(factors)) {
    std::uint64_t prev = 0;
    value_ = 1;
    for (const auto& f : factors_) {
      if (f.prime <= prev || f.exponent == 0)
        throw std::invalid_argument("Factorization: primes must increase and exponents be >= 1");
      prev = f.prime;
      for (unsigned i = 0; i < f.exponent; ++i) {
        auto v = checked_mul(value_, f.prime);
        if (!v) throw std::overflow_error("Factorization: value exceeds 64 bits");
        value_ = *v;
      }
    }
  }

  const std::vector<PrimePower>& factors() const& noexcept { return factors_; }
  // By value on rvalues so that `for (x : factorize(n).factors())` is safe.
  std::vector<PrimePower> factors() && { return std::move(factors_); }
  std::uint64_t value() const noexcept { return value_; }
  bool empty() const noexcept { return factors_.empty(); }

  // Number of divisors, prod (a_r + 1).
  std::uint64_t divisor_count() const noexcept {
    std::uint64_t c = 1;
    for (const auto& f : factors_) c *= f.exponent + 1;
    return c;
  }

  friend bool operator==(const Factorization&, const Factorization&) = default;

 private:
  std::vector<PrimePower> factors_;
  std::uint64_t value_ = 1;
};

/// Smallest-prime-factor table; factorizes n <= limit in O(log n) and
/// falls back to trial division above the limit.
class FactorSieve {
 public:
  explicit FactorSieve(std::uint32_t limit) : spf_(static_cast<std::size_t>(limit) + 1, 0) {
    for (std::uint32_t i = 2; i <= limit; ++i) {
      if (spf_[i] != 0) continue;
      for (std::uint64_t j = i; j <= limit; j += i)
        if (spf_[j] == 0) spf_[j] = i;
    }
  }

  std::uint64_t limit() const noexcept { return spf_.size() - 1; }

  Factorization factorize(std::uint64_t n) const {
    if (n == 0) throw std::invalid_argument("factorize: n must be positive");
    std::vector<PrimePower> out;
    auto push = [&out](std::uint64_t p) {
      if (!out.empty() && out.back().prime == p)
        ++out.back().exponent;
      else
        out.push_back({p, 1});
    };
    if (n > limit()) {
      for (std::uint64_t p = 2; p <= n / p; p += (p == 2 ? 1 : 2)) {
        while (n % p == 0) {
          push(p);
          n /= p;
        }
        if (n <= limit()) break;
      }
      if (n > limit()) {
        push(n);
        n = 1;
      }
    }
    while (n > 1) {
      std::uint64_t p = spf_[n];
      push(p);
      n /= p;
    }
    return Factorization(std::move(out));
  }

 private:
  std::vector<std::uint32_t> spf_;
};

namespace detail {
inline const FactorSieve& default_factor_sieve() {
  static const FactorSieve sieve(1u << 20);
  return sieve;
}
}  // namespace detail

inline Factorization factorize(std::uint64_t n) {
  return detail::default_factor_sieve().factorize(n);
}

/// All positive divisors of n, ascending.
inline std::vector<std::uint64_t> divisors(const Factorization& f) {
  std::vector<std::uint64_t> out{1};
  for (const auto& [p, a] : f.factors()) {
    const std::size_t prev = out.size();
    std::uint64_t pk = 1;
    for (unsigned k = 1; k <= a; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < prev; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("divisors: n must be positive");
  return divisors(factorize(n));
}

// Moebius function via factorization.
inline int moebius(std::uint64_t n) {
  const auto f = factorize(n);
  for (const auto& pp : f.factors())
    if (pp.exponent > 1) return 0;
  return f.factors().size() % 2 == 0 ? 1 : -1;
}

// Parses "p/q" or "p" into an exact rational.
inline ExactRational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return ExactRational(ExactInt(text));
    ExactInt num(text.substr(0, slash));
    ExactInt den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return ExactRational(num, den);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("not a rational: '" + text + "'");
  }
}

inline std::string to_string(const ExactRational& v) {
  if (boost::multiprecision::denominator(v) == 1) return boost::multiprecision::numerator(v).str();
  return boost::multiprecision::numerator(v).str() + "/" + boost::multiprecision::denominator(v).str();
}

// Nearest double to a rational whose numerator and denominator may each
// exceed the double range.
inline double to_double(const ExactRational& v) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  Big num(boost::multiprecision::numerator(v));
  Big den(boost::multiprecision::denominator(v));
  return static_cast<double>(num / den);
}

}  // namespace abundancy

#endif  // ABUNDANCY_ARITH_HPP
