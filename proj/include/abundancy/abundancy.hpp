#ifndef ABUNDANCY_ABUNDANCY_HPP
#define ABUNDANCY_ABUNDANCY_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "arith.hpp"
#include "qseries.hpp"

// Pointwise B(ell, n): the weighted count of divisor chains
// d_1 | d_2 | ... | d_{ell-1} | n with weight d_1 d_2 ... d_{ell-1}.
// Three routes are provided and are expected to agree exactly.

namespace abundancy {

namespace detail {
inline void check_args(unsigned ell, std::uint64_t n, const char* who) {
  if (ell < 1) throw std::invalid_argument(std::string(who) + ": ell must be >= 1");
  if (n < 1) throw std::invalid_argument(std::string(who) + ": n must be >= 1");
}
}  // namespace detail

/// B(ell, n) by explicit enumeration of every chain d_1 | ... | d_{ell-1} | n.
inline ExactInt b_via_flags(unsigned ell, std::uint64_t n) {
  detail::check_args(ell, n, "b_via_flags");
  if (ell == 1) return 1;
  const auto divs = divisors(n);
  const std::size_t t = divs.size();
  // below[i]: indices of the divisors of divs[i]
  std::vector<std::vector<std::size_t>> below(t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (divs[i] % divs[j] == 0) below[i].push_back(j);

  ExactInt total = 0;
  // Depth-first walk from d_{ell-1} down to d_1.
  struct Frame {
    std::size_t top;   // index of the divisor constraining this level
    std::size_t next;  // next candidate position in below[top]
    ExactInt weight;   // product of chain entries chosen above this level
  };
  std::vector<Frame> stack;
  stack.push_back({t - 1, 0, 1});
  const std::size_t depth = ell - 1;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next == below[f.top].size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t pick = below[f.top][f.next++];
    ExactInt w = f.weight * divs[pick];
    if (stack.size() == depth)
      total += w;
    else
      stack.push_back({pick, 0, std::move(w)});
  }
  return total;
}

/// B(ell, n) via B(ell, n) = sum_{d|n} (n/d)^{ell-1} B(ell-1, d), B(1, n) = 1,
/// evaluated level by level over the divisor lattice of n.
inline ExactInt b_via_recursion(unsigned ell, std::uint64_t n) {
  detail::check_args(ell, n, "b_via_recursion");
  const auto divs = divisors(n);
  std::vector<ExactInt> level(divs.size(), ExactInt(1));  // B(1, d)
  for (unsigned r = 1; r < ell; ++r) {
    std::vector<ExactInt> next(divs.size(), ExactInt(0));
    for (std::size_t i = 0; i < divs.size(); ++i) {
      const std::uint64_t m = divs[i];
      for (std::size_t j = 0; j <= i; ++j) {
        if (m % divs[j] != 0) continue;
        next[i] += ipow(ExactInt(m / divs[j]), r) * level[j];
      }
    }
    level = std::move(next);
  }
  return level.back();
}

/// Local factor p^{(ell-1)a} (p^{-a-1}; p^{-1})_{ell-1} / (p^{-1}; p^{-1})_{ell-1},
/// evaluated in exact rationals. The quotient must be an integer.
inline ExactInt local_factor(unsigned ell, std::uint64_t p, unsigned a) {
  if (ell < 1) throw std::invalid_argument("local_factor: ell must be >= 1");
  if (p < 2) throw std::invalid_argument("local_factor: p must be prime");
  const ExactRational inv_p(ExactInt(1), ExactInt(p));
  const ExactRational value = ExactRational(ipow(ExactInt(p), (ell - 1) * a)) *
                              qpoch(rpow(inv_p, a + 1), inv_p, ell - 1) /
                              qpoch(inv_p, inv_p, ell - 1);
  return require_integral(value, "local_factor q-Pochhammer quotient");
}

/// B(ell, n) as the product of local factors over the prime factorization of n.
inline ExactInt b_via_multiplicativity(unsigned ell, std::uint64_t n) {
  detail::check_args(ell, n, "b_via_multiplicativity");
  ExactInt product = 1;
  for (const auto& [p, a] : factorize(n).factors()) product *= local_factor(ell, p, a);
  return product;
}

/// Generalized abundancy index B(ell, n) / n^{ell-1}, exact.
inline ExactRational abundancy_index(unsigned ell, std::uint64_t n) {
  detail::check_args(ell, n, "abundancy_index");
  return ExactRational(b_via_multiplicativity(ell, n), ipow(ExactInt(n), ell - 1));
}

}  // namespace abundancy

#endif  // ABUNDANCY_ABUNDANCY_HPP
