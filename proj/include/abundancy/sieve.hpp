#ifndef ABUNDANCY_SIEVE_HPP
#define ABUNDANCY_SIEVE_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "arith.hpp"

namespace abundancy {

inline constexpr int kTableFormatVersion = 1;

struct TableMetadata {
  unsigned ell = 0;
  std::uint64_t nmax = 0;
  int format_version = kTableFormatVersion;
  std::string method = "dirichlet-passes";
  bool fast_path = true;  // values were produced in checked 64-bit arithmetic

  friend bool operator==(const TableMetadata&, const TableMetadata&) = default;
};

/// Immutable table of B(ell, n) for n = 1..nmax.
class ArithTable {
 public:
  using Small = std::vector<std::uint64_t>;
  using Big = std::vector<ExactInt>;

  ArithTable(TableMetadata meta, Small values) : meta_(std::move(meta)), values_(std::move(values)) {
    check();
  }
  ArithTable(TableMetadata meta, Big values) : meta_(std::move(meta)), values_(std::move(values)) {
    check();
  }

  unsigned ell() const noexcept { return meta_.ell; }
  std::uint64_t nmax() const noexcept { return meta_.nmax; }
  const TableMetadata& metadata() const noexcept { return meta_; }

  // True when every value fits in 64 bits and is stored that way.
  bool is_small() const noexcept { return std::holds_alternative<Small>(values_); }

  // Value at 1-based index n, 1 <= n <= nmax.
  ExactInt value(std::uint64_t n) const {
    bounds(n);
    if (const auto* s = std::get_if<Small>(&values_)) return ExactInt((*s)[n - 1]);
    return std::get<Big>(values_)[n - 1];
  }

  std::uint64_t small_value(std::uint64_t n) const {
    bounds(n);
    return std::get<Small>(values_)[n - 1];
  }

  const Small* small_values() const noexcept { return std::get_if<Small>(&values_); }

  std::string value_string(std::uint64_t n) const {
    bounds(n);
    if (const auto* s = std::get_if<Small>(&values_)) return std::to_string((*s)[n - 1]);
    return std::get<Big>(values_)[n - 1].str();
  }

  friend bool operator==(const ArithTable& a, const ArithTable& b) {
    if (a.meta_.ell != b.meta_.ell || a.meta_.nmax != b.meta_.nmax) return false;
    for (std::uint64_t n = 1; n <= a.nmax(); ++n)
      if (a.value(n) != b.value(n)) return false;
    return true;
  }

 private:
  void check() const {
    const std::size_t size = std::visit([](const auto& v) { return v.size(); }, values_);
    if (meta_.nmax == 0 || size != meta_.nmax)
      throw std::invalid_argument("ArithTable: value count does not match nmax");
    if (value(1) != 1) throw VerificationError("ArithTable: B(ell, 1) must be 1");
  }
  void bounds(std::uint64_t n) const {
    if (n < 1 || n > meta_.nmax) throw std::out_of_range("ArithTable: index out of range");
  }

  TableMetadata meta_;
  std::variant<Small, Big> values_;
};

struct SieveOptions {
  unsigned threads = 1;
  std::uint64_t max_nmax = 100'000'000;  // memory budget in table entries
};

namespace detail {

// One pass next(m) = sum_{d|m} (m/d)^r cur(d) over m in [lo, hi], fixed width.
// Returns false on overflow.
inline bool pass_small(const std::vector<std::uint64_t>& cur, const std::vector<std::uint64_t>& kpow,
                       std::vector<std::uint64_t>& next, std::uint64_t lo, std::uint64_t hi) {
  for (std::uint64_t d = 1; d <= hi; ++d) {
    const std::uint64_t base = cur[d];
    std::uint64_t k = (lo + d - 1) / d;
    for (std::uint64_t m = k * d; m <= hi; m += d, ++k) {
      std::uint64_t term, sum;
      if (__builtin_mul_overflow(kpow[k], base, &term)) return false;
      if (__builtin_add_overflow(next[m], term, &sum)) return false;
      next[m] = sum;
    }
  }
  return true;
}

inline std::vector<std::pair<std::uint64_t, std::uint64_t>> segments(std::uint64_t nmax,
                                                                      unsigned threads) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(nmax, 64))));
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  const std::uint64_t chunk = (nmax + threads - 1) / threads;
  for (std::uint64_t lo = 1; lo <= nmax; lo += chunk) out.emplace_back(lo, std::min(nmax, lo + chunk - 1));
  return out;
}

}  // namespace detail

/// B(ell, n) for every n <= nmax by ell-1 Dirichlet-convolution passes
///   t_{r+1}(m) = sum_{d|m} (m/d)^r t_r(d),  t_1 = 1,
/// each a harmonic double loop. Runs in checked 64-bit arithmetic and
/// promotes to ExactInt from the first pass that overflows. Segments own
/// disjoint output ranges, so threaded runs are bit-identical to serial ones.
inline ArithTable sieve_b(unsigned ell, std::uint64_t nmax, const SieveOptions& opts = {}) {
  if (ell < 1) throw std::invalid_argument("sieve_b: ell must be >= 1");
  if (nmax < 1) throw std::invalid_argument("sieve_b: nmax must be >= 1");
  if (nmax > opts.max_nmax)
    throw BudgetExceeded("sieve_b: nmax " + std::to_string(nmax) + " exceeds budget " +
                         std::to_string(opts.max_nmax));

  TableMetadata meta;
  meta.ell = ell;
  meta.nmax = nmax;

  std::vector<std::uint64_t> cur(nmax + 1, 1);
  cur[0] = 0;
  unsigned r = 1;
  const auto segs = detail::segments(nmax, opts.threads);
  for (; r < ell; ++r) {
    std::vector<std::uint64_t> kpow(nmax + 1, 0);
    bool ok = true;
    for (std::uint64_t k = 1; k <= nmax && ok; ++k) {
      auto v = checked_pow(k, r);
      if (v)
        kpow[k] = *v;
      else
        ok = false;
    }
    std::vector<std::uint64_t> next(nmax + 1, 0);
    if (ok) {
      std::vector<char> seg_ok(segs.size(), 1);
      if (segs.size() == 1) {
        seg_ok[0] = detail::pass_small(cur, kpow, next, segs[0].first, segs[0].second);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < segs.size(); ++i)
          pool.emplace_back([&, i] {
            seg_ok[i] = detail::pass_small(cur, kpow, next, segs[i].first, segs[i].second);
          });
        for (auto& t : pool) t.join();
      }
      ok = std::all_of(seg_ok.begin(), seg_ok.end(), [](char c) { return c != 0; });
    }
    if (!ok) break;
    cur = std::move(next);
  }

  if (r == ell) {
    cur.erase(cur.begin());
    return ArithTable(std::move(meta), std::move(cur));
  }

  // Promotion: finish the remaining passes in arbitrary precision.
  meta.fast_path = false;
  std::vector<ExactInt> big(cur.begin(), cur.end());
  for (; r < ell; ++r) {
    std::vector<ExactInt> next(nmax + 1, ExactInt(0));
    for (std::uint64_t d = 1; d <= nmax; ++d) {
      std::uint64_t k = 1;
      for (std::uint64_t m = d; m <= nmax; m += d, ++k) next[m] += ipow(ExactInt(k), r) * big[d];
    }
    big = std::move(next);
  }
  big.erase(big.begin());
  return ArithTable(std::move(meta), std::move(big));
}

// ---------------------------------------------------------------------------
// On-disk cache: CSV data file (header "n,value", one row per n ascending,
// newline-terminated) plus a JSON sidecar at "<path>.json" holding
// {ell, nmax, format_version, sha256, creation}.

class TableFormatError : public std::runtime_error {
 public:
  enum class Kind { io, version, checksum, metadata, malformed };
  TableFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& data) {
  return std::filesystem::path(data.string() + ".json");
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

inline std::string table_csv(const ArithTable& table) {
  std::string out = "n,value\n";
  out.reserve(out.size() + table.nmax() * 12);
  if (const auto* small = table.small_values()) {
    char buf[24];
    for (std::uint64_t n = 1; n <= table.nmax(); ++n) {
      out.append(buf, std::to_chars(buf, buf + sizeof buf, n).ptr);
      out += ',';
      out.append(buf, std::to_chars(buf, buf + sizeof buf, (*small)[n - 1]).ptr);
      out += '\n';
    }
  } else {
    for (std::uint64_t n = 1; n <= table.nmax(); ++n) {
      out += std::to_string(n);
      out += ',';
      out += table.value_string(n);
      out += '\n';
    }
  }
  return out;
}

inline nlohmann::json table_metadata_json(const TableMetadata& meta, const std::string& sha) {
  return {{"ell", meta.ell},
          {"nmax", meta.nmax},
          {"format_version", meta.format_version},
          {"sha256", sha},
          {"creation", {{"method", meta.method}, {"fast_path", meta.fast_path}}}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TableFormatError(TableFormatError::Kind::io, "cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw TableFormatError(TableFormatError::Kind::io, "write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableFormatError(TableFormatError::Kind::io, "cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void save_table(const ArithTable& table, const std::filesystem::path& path) {
  const std::string csv = table_csv(table);
  write_text_file(path, csv);
  write_text_file(sidecar_path(path), table_metadata_json(table.metadata(), sha256_hex(csv)).dump(2) + "\n");
}

/// Loads and validates a cached table. `expected_ell`, when given, must match
/// the stored metadata.
inline ArithTable load_table(const std::filesystem::path& path,
                             std::optional<unsigned> expected_ell = std::nullopt) {
  using Kind = TableFormatError::Kind;
  nlohmann::json meta_json;
  try {
    meta_json = nlohmann::json::parse(read_text_file(sidecar_path(path)));
  } catch (const nlohmann::json::exception& e) {
    throw TableFormatError(Kind::malformed, std::string("metadata is not valid JSON: ") + e.what());
  }
  TableMetadata meta;
  std::string sha;
  try {
    meta.format_version = meta_json.at("format_version").get<int>();
    if (meta.format_version != kTableFormatVersion)
      throw TableFormatError(Kind::version, "unsupported table format_version " +
                                                std::to_string(meta.format_version));
    meta.ell = meta_json.at("ell").get<unsigned>();
    meta.nmax = meta_json.at("nmax").get<std::uint64_t>();
    sha = meta_json.at("sha256").get<std::string>();
    if (meta_json.contains("creation")) {
      const auto& c = meta_json["creation"];
      meta.method = c.value("method", meta.method);
      meta.fast_path = c.value("fast_path", meta.fast_path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw TableFormatError(Kind::malformed, std::string("metadata missing fields: ") + e.what());
  }
  if (expected_ell && *expected_ell != meta.ell)
    throw TableFormatError(Kind::metadata, "table has ell=" + std::to_string(meta.ell) +
                                               " but ell=" + std::to_string(*expected_ell) +
                                               " was requested");

  const std::string csv = read_text_file(path);
  if (sha256_hex(csv) != sha) throw TableFormatError(Kind::checksum, "checksum mismatch: " + path.string());

  const std::string header = "n,value\n";
  if (csv.compare(0, header.size(), header) != 0)
    throw TableFormatError(Kind::malformed, "missing CSV header");
  std::vector<std::uint64_t> small;
  std::vector<ExactInt> big;
  bool use_big = false;
  small.reserve(meta.nmax);
  std::size_t pos = header.size();
  std::uint64_t expect = 1;
  while (pos < csv.size()) {
    const std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) throw TableFormatError(Kind::malformed, "row not newline-terminated");
    const std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos || comma > eol) throw TableFormatError(Kind::malformed, "row without comma");
    std::uint64_t n = 0;
    auto [np, nec] = std::from_chars(csv.data() + pos, csv.data() + comma, n);
    if (nec != std::errc() || np != csv.data() + comma || n != expect)
      throw TableFormatError(Kind::malformed, "bad row index near n=" + std::to_string(expect));
    const char* vb = csv.data() + comma + 1;
    const char* ve = csv.data() + eol;
    if (vb == ve || !std::all_of(vb, ve, [](char c) { return c >= '0' && c <= '9'; }))
      throw TableFormatError(Kind::malformed, "bad value at n=" + std::to_string(n));
    std::uint64_t v = 0;
    auto [vp, vec] = std::from_chars(vb, ve, v);
    if (!use_big && (vec != std::errc() || vp != ve)) {
      use_big = true;
      big.assign(small.begin(), small.end());
    }
    if (use_big)
      big.emplace_back(std::string(vb, ve));
    else
      small.push_back(v);
    ++expect;
    pos = eol + 1;
  }
  if (expect - 1 != meta.nmax)
    throw TableFormatError(Kind::malformed, "row count " + std::to_string(expect - 1) +
                                                " does not match nmax " + std::to_string(meta.nmax));
  try {
    if (use_big) return ArithTable(std::move(meta), std::move(big));
    return ArithTable(std::move(meta), std::move(small));
  } catch (const std::exception& e) {
    throw TableFormatError(Kind::malformed, e.what());
  }
}

}  // namespace abundancy

#endif  // ABUNDANCY_SIEVE_HPP
