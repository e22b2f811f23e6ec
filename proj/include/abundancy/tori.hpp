#ifndef ABUNDANCY_TORI_HPP
#define ABUNDANCY_TORI_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "arith.hpp"
#include "perm_oracle.hpp"

// Twisted discrete tori. Vertices are [f_1] x ... x [f_ell], coordinates
// 1-based. Direction r steps coordinate r; stepping off the face i_r = f_r
// lands on i_r = 1 after the lower coordinates are moved by the twist of
// direction r, a vector phi in [f_1] x ... x [f_{r-1}] applied as
//   rho_{r-1}^{phi_{r-1}-1} o ... o rho_1^{phi_1-1}.

namespace abundancy {

struct TorusSpec {
  std::vector<std::uint32_t> dims;                 // f_1..f_ell
  std::vector<std::vector<std::uint32_t>> twists;  // twists[r-2] for direction r = 2..ell, length r-1

  unsigned ell() const noexcept { return static_cast<unsigned>(dims.size()); }

  std::uint64_t n() const {
    std::uint64_t v = 1;
    for (auto f : dims) v *= f;
    return v;
  }

  void validate() const {
    if (dims.empty()) throw std::invalid_argument("TorusSpec: need at least one dimension");
    for (auto f : dims)
      if (f < 1) throw std::invalid_argument("TorusSpec: dimensions must be >= 1");
    if (twists.size() != dims.size() - 1)
      throw std::invalid_argument("TorusSpec: need one twist vector per direction 2..ell");
    for (std::size_t r = 0; r < twists.size(); ++r) {
      if (twists[r].size() != r + 1)
        throw std::invalid_argument("TorusSpec: twist of direction " + std::to_string(r + 2) + " needs " +
                                    std::to_string(r + 1) + " components");
      for (std::size_t s = 0; s <= r; ++s)
        if (twists[r][s] < 1 || twists[r][s] > dims[s])
          throw std::invalid_argument("TorusSpec: twist component out of range");
    }
  }

  friend bool operator==(const TorusSpec&, const TorusSpec&) = default;
};

struct TorusEdge {
  std::uint32_t from = 0;  // 1-based vertex labels
  std::uint32_t to = 0;
  unsigned direction = 0;  // 1-based
  bool wrap = false;
};

/// A built torus: the commuting tuple (pi_1..pi_ell) on [n] and the edge list.
/// Vertex (i_1..i_ell) has label 1 + sum (i_s - 1) * f_1 ... f_{s-1}.
class TorusRealization {
 public:
  TorusRealization(TorusSpec spec, PermTuple perms, std::vector<TorusEdge> edges)
      : spec_(std::move(spec)), perms_(std::move(perms)), edges_(std::move(edges)) {}

  const TorusSpec& spec() const noexcept { return spec_; }
  const PermTuple& perms() const noexcept { return perms_; }
  const std::vector<TorusEdge>& edges() const noexcept { return edges_; }
  std::uint32_t n() const noexcept { return perms_.n(); }

  std::vector<std::uint32_t> coordinates(std::uint32_t label) const {
    std::vector<std::uint32_t> c;
    std::uint32_t x = label - 1;
    for (auto f : spec_.dims) {
      c.push_back(x % f + 1);
      x /= f;
    }
    return c;
  }

  std::uint32_t label(const std::vector<std::uint32_t>& coords) const {
    std::uint32_t x = 0, stride = 1;
    for (std::size_t s = 0; s < coords.size(); ++s) {
      x += (coords[s] - 1) * stride;
      stride *= spec_.dims[s];
    }
    return x + 1;
  }

  // Same torus with its tuple replaced; used to build negative controls.
  TorusRealization with_perms(PermTuple perms) const { return TorusRealization(spec_, std::move(perms), edges_); }

 private:
  TorusSpec spec_;
  PermTuple perms_;
  std::vector<TorusEdge> edges_;
};

inline TorusRealization build_torus(const TorusSpec& spec) {
  spec.validate();
  const unsigned ell = spec.ell();
  const std::uint64_t n64 = spec.n();
  if (n64 > (1u << 24)) throw BudgetExceeded("build_torus: torus too large");
  const auto n = static_cast<std::uint32_t>(n64);

  // prefix[s] = f_1 ... f_s; rho[s] acts on prefix indices [0, prefix[s]).
  std::vector<std::uint32_t> prefix(ell + 1, 1);
  for (unsigned s = 0; s < ell; ++s) prefix[s + 1] = prefix[s] * spec.dims[s];
  std::vector<std::vector<std::uint32_t>> rho(ell + 1);

  // rho_t lifted to any prefix space containing the first t coordinates.
  auto lift = [&](unsigned t, std::uint32_t x) { return rho[t][x % prefix[t]] + (x / prefix[t]) * prefix[t]; };

  for (unsigned r = 1; r <= ell; ++r) {
    const std::uint32_t stride = prefix[r - 1];
    const std::uint32_t f = spec.dims[r - 1];
    rho[r].resize(prefix[r]);
    for (std::uint32_t x = 0; x < prefix[r]; ++x) {
      const std::uint32_t coord = x / stride;  // i_r - 1
      if (coord + 1 < f) {
        rho[r][x] = x + stride;
        continue;
      }
      std::uint32_t lower = x % stride;
      if (r >= 2) {
        const auto& phi = spec.twists[r - 2];
        for (unsigned t = 1; t < r; ++t)
          for (std::uint32_t rep = 1; rep < phi[t - 1]; ++rep) lower = lift(t, lower);
      }
      rho[r][x] = lower;
    }
  }

  std::vector<Permutation> perms;
  std::vector<TorusEdge> edges;
  for (unsigned r = 1; r <= ell; ++r) {
    std::vector<std::uint32_t> img(n);
    const std::uint32_t stride = prefix[r - 1];
    for (std::uint32_t x = 0; x < n; ++x) {
      img[x] = lift(r, x) + 1;
      const bool wrap = (x / stride) % spec.dims[r - 1] + 1 == spec.dims[r - 1];
      edges.push_back({x + 1, img[x], r, wrap});
    }
    perms.emplace_back(std::move(img));
  }
  return TorusRealization(spec, PermTuple(n, std::move(perms)), std::move(edges));
}

struct TorusValidation {
  bool commutes = false;
  bool transitive = false;
  bool group_order_n = false;
  bool basepoint_bijective = false;

  bool all() const noexcept { return commutes && transitive && group_order_n && basepoint_bijective; }
};

namespace detail {
struct ImageHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto x : v) h = (h ^ x) * 1099511628211ULL;
    return h;
  }
};

// |<gens>| by closure, giving up once it exceeds `limit`.
inline std::uint64_t group_order_up_to(const std::vector<Permutation>& gens, std::uint32_t n, std::uint64_t limit) {
  std::unordered_set<std::vector<std::uint32_t>, ImageHash> seen;
  std::vector<Permutation> frontier{Permutation::identity(n)};
  seen.insert(frontier.front().images());
  while (!frontier.empty()) {
    std::vector<Permutation> next;
    for (const auto& g : frontier)
      for (const auto& s : gens) {
        Permutation h = s * g;
        if (seen.insert(h.images()).second) {
          if (seen.size() > limit) return seen.size();
          next.push_back(std::move(h));
        }
      }
    frontier = std::move(next);
  }
  return seen.size();
}
}  // namespace detail

inline TorusValidation validate(const TorusRealization& t) {
  TorusValidation v;
  const auto& tuple = t.perms();
  const std::uint32_t n = t.n();
  v.commutes = tuple.pairwise_commuting();
  v.transitive = orbit_count(tuple.perms(), n) == 1;
  v.group_order_n = detail::group_order_up_to(tuple.perms(), n, n) == n;

  // (phi_1..phi_ell) -> pi_1^{phi_1-1} ... pi_ell^{phi_ell-1}(1,...,1).
  const auto& dims = t.spec().dims;
  std::vector<bool> hit(n + 1, false);
  std::uint32_t distinct = 0;
  std::function<void(std::size_t, std::uint32_t)> walk = [&](std::size_t r, std::uint32_t point) {
    // r counts down: apply pi_r^{0..f_r-1} and recurse to lower directions.
    for (std::uint32_t rep = 0; rep < dims[r]; ++rep) {
      if (r == 0) {
        if (!hit[point]) {
          hit[point] = true;
          ++distinct;
        }
      } else {
        walk(r - 1, point);
      }
      point = tuple[r](point);
    }
  };
  walk(dims.size() - 1, 1);
  v.basepoint_bijective = distinct == n;
  return v;
}

/// Calls fn(spec) for every TorusSpec with f_1 ... f_ell = n, i.e. every
/// ordered factorization together with every twist choice.
template <typename Fn>
void for_each_torus_spec(unsigned ell, std::uint64_t n, Fn&& fn) {
  if (ell < 1 || n < 1) throw std::invalid_argument("for_each_torus_spec: need ell >= 1, n >= 1");
  TorusSpec spec;
  spec.dims.assign(ell, 1);
  spec.twists.resize(ell - 1);
  for (unsigned r = 0; r + 1 < ell; ++r) spec.twists[r].assign(r + 1, 1);

  // Odometer over the flattened twist components.
  auto visit_twists = [&]() {
    std::vector<std::pair<unsigned, unsigned>> slots;  // (twist index, component)
    for (unsigned r = 0; r + 1 < ell; ++r)
      for (unsigned s = 0; s <= r; ++s) slots.emplace_back(r, s);
    for (auto [r, s] : slots) spec.twists[r][s] = 1;
    while (true) {
      fn(static_cast<const TorusSpec&>(spec));
      std::size_t i = 0;
      for (; i < slots.size(); ++i) {
        auto [r, s] = slots[i];
        if (spec.twists[r][s] < spec.dims[s]) {
          ++spec.twists[r][s];
          break;
        }
        spec.twists[r][s] = 1;
      }
      if (i == slots.size()) return;
    }
  };

  std::function<void(unsigned, std::uint64_t)> factor = [&](unsigned r, std::uint64_t rest) {
    if (r + 1 == ell) {
      spec.dims[r] = static_cast<std::uint32_t>(rest);
      visit_twists();
      return;
    }
    for (std::uint64_t f = 1; f <= rest; ++f) {
      if (rest % f != 0) continue;
      spec.dims[r] = static_cast<std::uint32_t>(f);
      factor(r + 1, rest / f);
    }
  };
  factor(0, n);
}

inline std::uint64_t count_torus_specs(unsigned ell, std::uint64_t n) {
  std::uint64_t c = 0;
  for_each_torus_spec(ell, n, [&](const TorusSpec&) { ++c; });
  return c;
}

struct DoubleCountResult {
  bool match = false;
  std::uint64_t count = 0;            // distinct relabelled torus tuples
  std::uint64_t bruteforce_count = 0;  // transitive commuting tuples
};

/// Relabels every torus tuple with every bijection [n] -> [n] and compares the
/// resulting set with the brute-force set of transitive commuting tuples.
inline DoubleCountResult double_count_check(unsigned ell, std::uint32_t n, const EnumerationBudget& budget = {}) {
  check_enumeration_budget(ell, n, budget);
  using Key = std::vector<std::vector<std::uint32_t>>;
  const auto sigmas = all_permutations(n);
  std::vector<Permutation> sigma_inv;
  for (const auto& s : sigmas) sigma_inv.push_back(s.inverse());

  std::set<Key> from_tori;
  for_each_torus_spec(ell, n, [&](const TorusSpec& spec) {
    const TorusRealization t = build_torus(spec);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      Key key;
      for (const auto& p : t.perms().perms()) key.push_back((sigmas[i] * p * sigma_inv[i]).images());
      from_tori.insert(std::move(key));
    }
  });

  std::set<Key> brute;
  for_each_commuting_tuple(
      ell, n,
      [&](std::span<const Permutation* const> tuple) {
        if (detail::orbit_count_ptrs(tuple, n) != 1) return;
        Key key;
        for (const Permutation* p : tuple) key.push_back(p->images());
        brute.insert(std::move(key));
      },
      budget);

  DoubleCountResult out;
  out.count = from_tori.size();
  out.bruteforce_count = brute.size();
  out.match = from_tori == brute;
  return out;
}

/// Deterministic Graphviz rendering. Parallel edges between the same pair of
/// vertices are merged with a multiplicity attribute; wrap edges are dashed.
inline void export_dot(const TorusRealization& t, std::ostream& out) {
  out << "graph torus {\n";
  out << "  node [shape=circle];\n";
  for (std::uint32_t v = 1; v <= t.n(); ++v) {
    const auto c = t.coordinates(v);
    out << "  v" << v << " [label=\"(";
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
    out << ")\"];\n";
  }
  struct Agg {
    unsigned count = 0;
    bool wrap = false;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, Agg> merged;
  for (const auto& e : t.edges()) {
    auto& a = merged[{std::min(e.from, e.to), std::max(e.from, e.to)}];
    ++a.count;
    a.wrap = a.wrap || e.wrap;
  }
  for (const auto& [key, a] : merged) {
    out << "  v" << key.first << " -- v" << key.second;
    std::vector<std::string> attrs;
    if (a.wrap) attrs.emplace_back("style=dashed");
    if (a.count > 1) attrs.push_back("multiplicity=" + std::to_string(a.count));
    if (!attrs.empty()) {
      out << " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
      out << "]";
    }
    out << ";\n";
  }
  out << "}\n";
}

inline void export_dot(const TorusRealization& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("export_dot: cannot open " + path.string());
  export_dot(t, out);
  if (!out) throw std::runtime_error("export_dot: write failed for " + path.string());
}

}  // namespace abundancy

#endif  // ABUNDANCY_TORI_HPP
