#ifndef ABUNDANCY_QSERIES_HPP
#define ABUNDANCY_QSERIES_HPP

#include <cstdint>
#include <stdexcept>

#include "arith.hpp"

namespace abundancy {

/// q-Pochhammer symbol (z;q)_r = (1-z)(1-qz)...(1-q^{r-1}z); (z;q)_0 = 1.
inline ExactRational qpoch(const ExactRational& z, const ExactRational& q, unsigned r) {
  ExactRational value = 1;
  ExactRational qi_z = z;
  for (unsigned i = 0; i < r; ++i) {
    value *= 1 - qi_z;
    qi_z *= q;
  }
  return value;
}

/// Gaussian binomial coefficient [n choose j]_q = (q;q)_n / ((q;q)_j (q;q)_{n-j}).
inline ExactRational qbinomial(unsigned n, unsigned j, const ExactRational& q) {
  if (j > n) return 0;
  return qpoch(q, q, n) / (qpoch(q, q, j) * qpoch(q, q, n - j));
}

/// Expansion of (z;q)_r by the q-binomial formula,
///   sum_{j=0}^{r} q^{j(j-1)/2} [r choose j]_q (-z)^j.
inline ExactRational qpoch_qbinomial_expansion(const ExactRational& z, const ExactRational& q,
                                               unsigned r) {
  ExactRational sum = 0;
  for (unsigned j = 0; j <= r; ++j) {
    ExactRational term = rpow(q, j == 0 ? 0 : j * (j - 1) / 2) * qbinomial(r, j, q) * rpow(-z, j);
    sum += term;
  }
  return sum;
}

struct PowerRuleCheck {
  unsigned ell = 0;
  ExactRational z;
  ExactRational q;
  unsigned terms = 0;            // K, number of summed terms k = 0..K-1
  ExactRational lhs_truncated;   // z(1-q) sum_{k<K} q^k (q^{k+1} z; q)_{ell-1}
  ExactRational rhs_exact;       // (1-q)(1-(z;q)_ell)/(1-q^ell)
  ExactRational tail_bound;      // rigorous bound on |sum_{k>=K} ...|
  bool bound_ok = false;         // |lhs - rhs| <= tail_eps
};

namespace detail {
inline ExactRational rabs(const ExactRational& v) { return v < 0 ? ExactRational(-v) : v; }
}  // namespace detail

/// Checks the power-rule identity
///   z(1-q) sum_{k>=0} q^k (q^{k+1}z;q)_{ell-1} = (1-q)(1-(z;q)_ell)/(1-q^ell)
/// by exact truncated summation. Every factor (1 - q^{k+1+i} z) is bounded by
/// (1 + |z||q|^{i+1}), so the terms k >= K sum to at most
///   |z| |1-q| prod_i (1 + |z||q|^{i+1}) |q|^K / (1 - |q|),
/// and K is the first index where that bound drops to tail_eps / 2.
inline PowerRuleCheck verify_power_rule(unsigned ell, const ExactRational& z,
                                        const ExactRational& q, double tail_eps) {
  if (ell < 2) throw std::invalid_argument("verify_power_rule: ell must be >= 2");
  if (!(tail_eps > 0)) throw std::invalid_argument("verify_power_rule: tail_eps must be positive");
  const ExactRational abs_q = detail::rabs(q);
  if (abs_q >= 1) throw std::domain_error("verify_power_rule: requires |q| < 1");

  PowerRuleCheck out;
  out.ell = ell;
  out.z = z;
  out.q = q;

  const ExactRational abs_z = detail::rabs(z);
  ExactRational factor_bound = 1;
  {
    ExactRational qi = abs_q;
    for (unsigned i = 0; i + 1 < ell; ++i) {
      factor_bound *= 1 + abs_z * qi;
      qi *= abs_q;
    }
  }
  const ExactRational prefactor = abs_z * detail::rabs(1 - q) * factor_bound / (1 - abs_q);
  const ExactRational half_eps(tail_eps / 2);

  ExactRational tail = prefactor;  // bound for the tail starting at k = 0
  ExactRational qk = 1;            // q^k
  ExactRational qk1_z = q * z;     // q^{k+1} z
  ExactRational partial = 0;
  unsigned k = 0;
  while (tail > half_eps) {
    partial += qk * qpoch(qk1_z, q, ell - 1);
    qk *= q;
    qk1_z *= q;
    tail *= abs_q;
    ++k;
    if (k > 100000) throw std::domain_error("verify_power_rule: tail bound unattainable");
  }
  out.terms = k;
  out.lhs_truncated = z * (1 - q) * partial;
  out.rhs_exact = (1 - q) * (1 - qpoch(z, q, ell)) / (1 - rpow(q, ell));
  out.tail_bound = tail;
  out.bound_ok = detail::rabs(out.lhs_truncated - out.rhs_exact) <= ExactRational(tail_eps);
  return out;
}

}  // namespace abundancy

#endif  // ABUNDANCY_QSERIES_HPP
