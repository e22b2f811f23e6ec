#ifndef ABUNDANCY_PERM_ORACLE_HPP
#define ABUNDANCY_PERM_ORACLE_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "abundancy.hpp"
#include "arith.hpp"

namespace abundancy {

/// A permutation of [n] = {1, ..., n}. Points are 1-based throughout.
class Permutation {
 public:
  Permutation() = default;

  // images[j-1] is the image of point j.
  explicit Permutation(std::vector<std::uint32_t> images) : image_(std::move(images)) {
    std::vector<bool> seen(image_.size() + 1, false);
    for (auto v : image_) {
      if (v < 1 || v > image_.size() || seen[v])
        throw std::invalid_argument("Permutation: images must be a bijection of [n]");
      seen[v] = true;
    }
  }

  static Permutation identity(std::uint32_t n) {
    Permutation p;
    p.image_.resize(n);
    std::iota(p.image_.begin(), p.image_.end(), 1u);
    return p;
  }

  // Product of disjoint cycles written with 1-based points.
  static Permutation from_cycles(std::uint32_t n, const std::vector<std::vector<std::uint32_t>>& cycles) {
    std::vector<std::uint32_t> img(n);
    std::iota(img.begin(), img.end(), 1u);
    for (const auto& c : cycles)
      for (std::size_t i = 0; i < c.size(); ++i) img[c[i] - 1] = c[(i + 1) % c.size()];
    return Permutation(std::move(img));
  }

  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(image_.size()); }
  std::uint32_t operator()(std::uint32_t j) const { return image_[j - 1]; }
  const std::vector<std::uint32_t>& images() const noexcept { return image_; }

  // (a * b)(j) = a(b(j)).
  friend Permutation operator*(const Permutation& a, const Permutation& b) {
    Permutation r;
    r.image_.resize(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) r.image_[j] = a.image_[b.image_[j] - 1];
    return r;
  }

  Permutation inverse() const {
    Permutation r;
    r.image_.resize(size());
    for (std::size_t j = 0; j < size(); ++j) r.image_[image_[j] - 1] = static_cast<std::uint32_t>(j + 1);
    return r;
  }

  Permutation pow(std::uint64_t k) const {
    Permutation r = identity(size());
    for (std::uint64_t i = 0; i < k; ++i) r = *this * r;
    return r;
  }

  bool commutes_with(const Permutation& o) const {
    for (std::size_t j = 0; j < size(); ++j)
      if (image_[o.image_[j] - 1] != o.image_[image_[j] - 1]) return false;
    return true;
  }

  // sigma * this * sigma^{-1}: the same permutation with points renamed by sigma.
  Permutation conjugate_by(const Permutation& sigma) const { return sigma * *this * sigma.inverse(); }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::uint32_t> image_;
};

// Minimal union-find over 1..n.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n + 1), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    parent_[std::max(a, b)] = std::min(a, b);
    --components_;
  }
  std::size_t components() const noexcept { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::size_t components_;
};

/// Number of orbits of <perms> on [n]: the components of the union of the
/// generators' functional graphs.
inline std::uint32_t orbit_count(std::span<const Permutation> perms, std::uint32_t n) {
  DisjointSets ds(n);
  for (const auto& p : perms) {
    if (p.size() != n) throw std::invalid_argument("orbit_count: permutation size mismatch");
    for (std::uint32_t j = 1; j <= n; ++j) ds.unite(j, p(j));
  }
  return static_cast<std::uint32_t>(ds.components());
}

/// An ell-tuple of permutations of the same [n] with its orbit count cached.
class PermTuple {
 public:
  PermTuple(std::uint32_t n, std::vector<Permutation> perms) : n_(n), perms_(std::move(perms)) {
    for (const auto& p : perms_)
      if (p.size() != n_) throw std::invalid_argument("PermTuple: permutations must act on the same [n]");
    orbits_ = abundancy::orbit_count(perms_, n_);
  }

  std::uint32_t n() const noexcept { return n_; }
  std::size_t ell() const noexcept { return perms_.size(); }
  const std::vector<Permutation>& perms() const noexcept { return perms_; }
  const Permutation& operator[](std::size_t i) const { return perms_[i]; }
  std::uint32_t orbit_count() const noexcept { return orbits_; }

  bool pairwise_commuting() const {
    for (std::size_t i = 0; i < perms_.size(); ++i)
      for (std::size_t j = i + 1; j < perms_.size(); ++j)
        if (!perms_[i].commutes_with(perms_[j])) return false;
    return true;
  }

  PermTuple conjugate_by(const Permutation& sigma) const {
    std::vector<Permutation> out;
    out.reserve(perms_.size());
    for (const auto& p : perms_) out.push_back(p.conjugate_by(sigma));
    return PermTuple(n_, std::move(out));
  }

  friend bool operator==(const PermTuple& a, const PermTuple& b) { return a.perms_ == b.perms_; }
  friend bool operator<(const PermTuple& a, const PermTuple& b) { return a.perms_ < b.perms_; }

 private:
  std::uint32_t n_;
  std::vector<Permutation> perms_;
  std::uint32_t orbits_ = 0;
};

/// A(ell, n, k) for k = 0..n; counts[k] is the number of commuting ell-tuples
/// whose generated group has exactly k orbits.
struct ATable {
  unsigned ell = 0;
  std::uint32_t n = 0;
  std::vector<ExactInt> counts;

  ExactInt total() const {
    ExactInt s = 0;
    for (const auto& c : counts) s += c;
    return s;
  }
  friend bool operator==(const ATable&, const ATable&) = default;
};

inline std::vector<Permutation> all_permutations(std::uint32_t n) {
  std::vector<std::uint32_t> img(n);
  std::iota(img.begin(), img.end(), 1u);
  std::vector<Permutation> out;
  do {
    out.emplace_back(img);
  } while (std::next_permutation(img.begin(), img.end()));
  return out;
}

struct EnumerationBudget {
  // Upper bound on (n!)^ell. The default admits ell=2 up to n=7 and ell=3 up to n=5.
  double max_work = 3.0e7;
  unsigned threads = 1;
};

inline void check_enumeration_budget(unsigned ell, std::uint32_t n, const EnumerationBudget& budget) {
  double work = 1;
  for (unsigned i = 0; i < ell; ++i)
    for (std::uint32_t j = 2; j <= n; ++j) work *= j;
  if (work > budget.max_work)
    throw BudgetExceeded("enumeration of commuting " + std::to_string(ell) + "-tuples in S_" +
                         std::to_string(n) + " exceeds the configured budget");
}

namespace detail {

// Visits every commuting tuple whose first permutation is one of
// `firsts`. Deeper levels only scan the centralizer of the chosen prefix.
template <typename Visit>
void visit_commuting_from(unsigned ell, const std::vector<Permutation>& all,
                          std::span<const Permutation* const> firsts, Visit&& visit) {
  std::vector<const Permutation*> chosen(ell, nullptr);
  std::vector<std::vector<const Permutation*>> candidates(ell);
  std::vector<const Permutation*> everything;
  everything.reserve(all.size());
  for (const auto& p : all) everything.push_back(&p);

  std::function<void(unsigned)> descend = [&](unsigned level) {
    if (level == ell) {
      visit(std::span<const Permutation* const>(chosen));
      return;
    }
    for (const Permutation* p : candidates[level]) {
      chosen[level] = p;
      if (level + 1 < ell) {
        auto& next = candidates[level + 1];
        next.clear();
        for (const Permutation* c : candidates[level])
          if (c->commutes_with(*p)) next.push_back(c);
      }
      descend(level + 1);
    }
  };

  for (const Permutation* first : firsts) {
    chosen[0] = first;
    if (ell > 1) {
      candidates[1].clear();
      for (const Permutation* c : everything)
        if (c->commutes_with(*first)) candidates[1].push_back(c);
    }
    descend(1);
  }
}

inline std::uint32_t orbit_count_ptrs(std::span<const Permutation* const> perms, std::uint32_t n) {
  DisjointSets ds(n);
  for (const Permutation* p : perms)
    for (std::uint32_t j = 1; j <= n; ++j) ds.unite(j, (*p)(j));
  return static_cast<std::uint32_t>(ds.components());
}

}  // namespace detail

/// Calls visit(span<const Permutation* const>) for every pairwise-commuting
/// ell-tuple in S_n, in lexicographic order of the tuple.
template <typename Visit>
void for_each_commuting_tuple(unsigned ell, std::uint32_t n, Visit&& visit,
                              const EnumerationBudget& budget = {}) {
  if (ell < 1) throw std::invalid_argument("for_each_commuting_tuple: ell must be >= 1");
  check_enumeration_budget(ell, n, budget);
  const auto all = all_permutations(n);
  std::vector<const Permutation*> firsts;
  for (const auto& p : all) firsts.push_back(&p);
  detail::visit_commuting_from(ell, all, firsts, visit);
}

/// Brute-force A(ell, n, k): enumerate commuting tuples, count orbits.
/// The outer loop over the first permutation may be split across threads;
/// partial counts are merged by exact addition.
inline ATable enumerate_A(unsigned ell, std::uint32_t n, const EnumerationBudget& budget = {}) {
  if (ell < 1) throw std::invalid_argument("enumerate_A: ell must be >= 1");
  if (n < 1) throw std::invalid_argument("enumerate_A: n must be >= 1");
  check_enumeration_budget(ell, n, budget);
  const auto all = all_permutations(n);
  std::vector<const Permutation*> firsts;
  for (const auto& p : all) firsts.push_back(&p);

  const unsigned workers = std::max(1u, std::min<unsigned>(budget.threads, static_cast<unsigned>(firsts.size())));
  std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(n + 1, 0));
  auto work = [&](unsigned w) {
    const std::size_t lo = firsts.size() * w / workers;
    const std::size_t hi = firsts.size() * (w + 1) / workers;
    std::span<const Permutation* const> mine(firsts.data() + lo, hi - lo);
    detail::visit_commuting_from(ell, all, mine, [&](std::span<const Permutation* const> tuple) {
      ++partial[w][detail::orbit_count_ptrs(tuple, n)];
    });
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  ATable out{ell, n, std::vector<ExactInt>(n + 1, ExactInt(0))};
  for (const auto& counts : partial)
    for (std::uint32_t k = 0; k <= n; ++k) out.counts[k] += counts[k];
  return out;
}

/// Full table from the one-orbit counts by the exponential formula
///   A(ell, n, k) = (n!/k!) sum_{nu_1+...+nu_k = n} prod_r A(ell, nu_r, 1)/nu_r!
/// over ordered compositions. `one_orbit[nu-1]` = A(ell, nu, 1) for nu = 1..n.
/// The composition sums are accumulated in exact rationals; the result must
/// be integral.
inline ATable bell_transform(unsigned ell, std::uint32_t n, std::span<const ExactInt> one_orbit) {
  if (one_orbit.size() < n) throw std::invalid_argument("bell_transform: need A(ell, nu, 1) for nu <= n");
  std::vector<ExactRational> weight(n + 1, ExactRational(0));  // A(nu,1)/nu!
  for (std::uint32_t nu = 1; nu <= n; ++nu) weight[nu] = ExactRational(one_orbit[nu - 1], factorial(nu));

  // comp[m] = sum over compositions of m into k parts, for the current k.
  std::vector<ExactRational> comp(n + 1, ExactRational(0));
  comp[0] = 1;  // k = 0
  ATable out{ell, n, std::vector<ExactInt>(n + 1, ExactInt(0))};
  if (n == 0) out.counts[0] = 1;
  const ExactInt n_fact = factorial(n);
  for (std::uint32_t k = 1; k <= n; ++k) {
    std::vector<ExactRational> next(n + 1, ExactRational(0));
    for (std::uint32_t m = k; m <= n; ++m)
      for (std::uint32_t nu = 1; nu + (k - 1) <= m; ++nu) next[m] += weight[nu] * comp[m - nu];
    comp = std::move(next);
    out.counts[k] = require_integral(ExactRational(n_fact, factorial(k)) * comp[n], "bell_transform count");
  }
  return out;
}

/// A(ell, nu, 1) = (nu-1)! B(ell, nu) for nu = 1..n, from the flag route.
inline std::vector<ExactInt> one_orbit_row(unsigned ell, std::uint32_t n) {
  std::vector<ExactInt> row;
  for (std::uint32_t nu = 1; nu <= n; ++nu) row.push_back(factorial(nu - 1) * b_via_flags(ell, nu));
  return row;
}

/// B(ell, n) = A(ell, n, 1)/(n-1)! from brute-force enumeration.
inline ExactInt b_from_bruteforce(unsigned ell, std::uint32_t n, const EnumerationBudget& budget = {}) {
  const ATable a = enumerate_A(ell, n, budget);
  return exact_div(a.counts[1], factorial(n - 1), "A(ell, n, 1) by (n-1)!");
}

}  // namespace abundancy

#endif  // ABUNDANCY_PERM_ORACLE_HPP
