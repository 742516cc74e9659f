// Dense rational matrices with exact rank / nullspace / solve, plus a
// randomized modular rank for matrices too large for exact elimination.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "alfeld/rational.hpp"

namespace alfeld {

class RatMatrix {
public:
  RatMatrix() : rows_(0), cols_(0) {}
  RatMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
  RatMatrix(std::initializer_list<std::initializer_list<Rational>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
    a_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto& r : init) {
      if (static_cast<int>(r.size()) != cols_) throw std::invalid_argument("RatMatrix: ragged init");
      for (const auto& x : r) a_.push_back(x);
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const Rational& at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  static RatMatrix identity(int n) {
    RatMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Rational(1);
    return m;
  }

  RatMatrix transposed() const {
    RatMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
  }

  RatMatrix operator*(const RatMatrix& b) const {
    if (cols_ != b.rows_) throw std::invalid_argument("RatMatrix: size mismatch in product");
    RatMatrix c(rows_, b.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const Rational& x = at(i, k);
        if (x.is_zero()) continue;
        for (int j = 0; j < b.cols_; ++j) {
          const Rational& y = b.at(k, j);
          if (!y.is_zero()) c.at(i, j) += x * y;
        }
      }
    return c;
  }

  friend bool operator==(const RatMatrix& a, const RatMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }

  bool is_zero() const {
    for (const auto& x : a_)
      if (!x.is_zero()) return false;
    return true;
  }

  void append_row(const RatVec& row) {
    if (cols_ == 0 && rows_ == 0) cols_ = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols_) throw std::invalid_argument("RatMatrix: row size mismatch");
    a_.insert(a_.end(), row.begin(), row.end());
    ++rows_;
  }

  static RatMatrix vstack(const RatMatrix& top, const RatMatrix& bottom) {
    if (top.cols() != bottom.cols() && top.rows() != 0 && bottom.rows() != 0)
      throw std::invalid_argument("RatMatrix: vstack width mismatch");
    RatMatrix m(0, top.rows() ? top.cols() : bottom.cols());
    for (int i = 0; i < top.rows(); ++i) {
      RatVec r(top.cols());
      for (int j = 0; j < top.cols(); ++j) r[j] = top.at(i, j);
      m.append_row(r);
    }
    for (int i = 0; i < bottom.rows(); ++i) {
      RatVec r(bottom.cols());
      for (int j = 0; j < bottom.cols(); ++j) r[j] = bottom.at(i, j);
      m.append_row(r);
    }
    return m;
  }

  RatVec column(int j) const {
    RatVec c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = at(i, j);
    return c;
  }

  RatVec apply(const RatVec& x) const {
    if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("RatMatrix: apply size mismatch");
    RatVec y(rows_);
    for (int i = 0; i < rows_; ++i) {
      Rational s;
      for (int j = 0; j < cols_; ++j)
        if (!at(i, j).is_zero() && !x[j].is_zero()) s += at(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

private:
  int rows_, cols_;
  std::vector<Rational> a_;
};

namespace detail {

using ZRow = std::vector<mpz_class>;

// Clears denominators and removes integer content from one matrix row.
inline ZRow integral_row(const RatMatrix& m, int i) {
  int n = m.cols();
  mpz_class l(1);
  for (int j = 0; j < n; ++j) {
    const mpz_class& d = m.at(i, j).den();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
  }
  ZRow r(n);
  mpz_class g(0);
  for (int j = 0; j < n; ++j) {
    const Rational& q = m.at(i, j);
    if (q.is_zero()) continue;
    r[j] = q.num() * (l / q.den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), r[j].get_mpz_t());
  }
  if (g > 1)
    for (auto& x : r)
      if (x != 0) x /= g;
  return r;
}

inline void reduce_content(ZRow& r) {
  mpz_class g(0);
  for (const auto& x : r) {
    if (x == 0) continue;
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g == 1) return;
  }
  if (g > 1)
    for (auto& x : r)
      if (x != 0) x /= g;
}

struct Echelon {
  std::vector<ZRow> rows;        // pivot rows, in increasing pivot-column order
  std::vector<int> pivot_cols;   // same length as rows
  int rank() const { return static_cast<int>(pivot_cols.size()); }
};

// Fraction-free forward elimination (Bareiss-style cross-multiplication with
// per-row content removal).  The pivot ROW choice is free since the reduced
// echelon form is unique; rows with fewer nonzeros go first to limit fill.
inline Echelon integer_echelon(const RatMatrix& m) {
  int nr = m.rows(), nc = m.cols();
  std::vector<ZRow> work;
  work.reserve(nr);
  std::vector<int> nnz;
  for (int i = 0; i < nr; ++i) {
    ZRow r = integral_row(m, i);
    int c = 0;
    for (const auto& x : r)
      if (x != 0) ++c;
    if (c == 0) continue;
    work.push_back(std::move(r));
    nnz.push_back(c);
  }

  Echelon out;
  size_t used = 0;  // rows [0, used) hold pivots already placed
  for (int col = 0; col < nc && used < work.size(); ++col) {
    size_t best = work.size();
    for (size_t i = used; i < work.size(); ++i) {
      if (work[i][col] == 0) continue;
      if (best == work.size() || nnz[i] < nnz[best] ||
          (nnz[i] == nnz[best] &&
           mpz_sizeinbase(work[i][col].get_mpz_t(), 2) < mpz_sizeinbase(work[best][col].get_mpz_t(), 2)))
        best = i;
    }
    if (best == work.size()) continue;
    std::swap(work[used], work[best]);
    std::swap(nnz[used], nnz[best]);
    const ZRow& piv = work[used];
    const mpz_class& p = piv[col];
    mpz_class g, cp, ca;
    for (size_t i = used + 1; i < work.size(); ++i) {
      ZRow& r = work[i];
      if (r[col] == 0) continue;
      mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), r[col].get_mpz_t());
      cp = p / g;
      ca = r[col] / g;
      int c = 0;
      for (int j = col; j < nc; ++j) {
        if (r[j] == 0 && piv[j] == 0) continue;
        r[j] = r[j] * cp - piv[j] * ca;
        if (r[j] != 0) ++c;
      }
      reduce_content(r);
      nnz[i] = c;
    }
    out.pivot_cols.push_back(col);
    ++used;
  }
  out.rows.assign(work.begin(), work.begin() + used);
  return out;
}

// Full back-substitution: rational pivot rows with unit pivots, zeros above
// and below every pivot.  Rows come out in increasing pivot-column order.
struct Rref {
  std::vector<RatVec> rows;
  std::vector<int> pivot_cols;
  int rank() const { return static_cast<int>(pivot_cols.size()); }
};

inline Rref reduced_echelon(const RatMatrix& m) {
  Echelon e = integer_echelon(m);
  int nc = m.cols();
  int k = e.rank();
  std::vector<RatVec> rows(k, RatVec(nc));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < nc; ++j) rows[i][j] = Rational(e.rows[i][j], mpz_class(1));
  for (int i = k - 1; i >= 0; --i) {
    int pc = e.pivot_cols[i];
    Rational inv = Rational(1) / rows[i][pc];
    for (int j = pc; j < nc; ++j)
      if (!rows[i][j].is_zero()) rows[i][j] *= inv;
    for (int u = 0; u < i; ++u) {
      const Rational f = rows[u][pc];
      if (f.is_zero()) continue;
      for (int j = pc; j < nc; ++j)
        if (!rows[i][j].is_zero()) rows[u][j] -= f * rows[i][j];
    }
  }
  Rref out;
  out.rows = std::move(rows);
  out.pivot_cols = std::move(e.pivot_cols);
  return out;
}

inline bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1ull) == 0) {
    d >>= 1;
    ++s;
  }
  auto mulmod = [](uint64_t a, uint64_t b, uint64_t mod) -> uint64_t {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % mod);
  };
  auto powmod = [&](uint64_t a, uint64_t e, uint64_t mod) -> uint64_t {
    uint64_t r = 1;
    a %= mod;
    while (e) {
      if (e & 1ull) r = mulmod(r, a, mod);
      a = mulmod(a, a, mod);
      e >>= 1;
    }
    return r;
  };
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline uint64_t random_prime_ge_2_50(std::mt19937_64& rng) {
  std::uniform_int_distribution<uint64_t> dist(1ull << 50, (1ull << 51) - 1);
  uint64_t c = dist(rng) | 1ull;
  while (!is_prime_u64(c)) c += 2;
  return c;
}

inline int rank_mod_p(const std::vector<ZRow>& zrows, int nc, uint64_t p) {
  std::vector<std::vector<uint64_t>> w;
  w.reserve(zrows.size());
  mpz_class t;
  for (const auto& zr : zrows) {
    std::vector<uint64_t> r(nc);
    bool nonzero = false;
    for (int j = 0; j < nc; ++j) {
      t = zr[j] % static_cast<unsigned long>(p);
      long v = t.get_si();
      if (v < 0) v += static_cast<long>(p);
      r[j] = static_cast<uint64_t>(v);
      nonzero |= (r[j] != 0);
    }
    if (nonzero) w.push_back(std::move(r));
  }
  auto mulmod = [p](uint64_t a, uint64_t b) -> uint64_t {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
  };
  auto invmod = [&](uint64_t a) -> uint64_t {
    // Fermat inverse
    uint64_t r = 1, e = p - 2;
    while (e) {
      if (e & 1ull) r = mulmod(r, a);
      a = mulmod(a, a);
      e >>= 1;
    }
    return r;
  };
  int rank = 0;
  size_t used = 0;
  for (int col = 0; col < nc && used < w.size(); ++col) {
    size_t piv = w.size();
    for (size_t i = used; i < w.size(); ++i)
      if (w[i][col] != 0) {
        piv = i;
        break;
      }
    if (piv == w.size()) continue;
    std::swap(w[used], w[piv]);
    uint64_t inv = invmod(w[used][col]);
    for (size_t i = used + 1; i < w.size(); ++i) {
      if (w[i][col] == 0) continue;
      uint64_t f = mulmod(w[i][col], inv);
      for (int j = col; j < nc; ++j)
        if (w[used][j] != 0) {
          uint64_t s = mulmod(f, w[used][j]);
          w[i][j] = (w[i][j] >= s) ? w[i][j] - s : w[i][j] + p - s;
        }
    }
    ++rank;
    ++used;
  }
  return rank;
}

}  // namespace detail

/// Rank over Q by fraction-free elimination.
inline int rank_exact(const RatMatrix& m) { return detail::integer_echelon(m).rank(); }

/// Canonical nullspace basis: columns correspond to the free columns of the
/// reduced echelon form in increasing order, each with a unit entry at its
/// free column.  Column count is cols - rank.
inline RatMatrix nullspace_basis(const RatMatrix& m) {
  detail::Rref r = detail::reduced_echelon(m);
  int nc = m.cols();
  std::vector<bool> is_pivot(nc, false);
  for (int c : r.pivot_cols) is_pivot[c] = true;
  std::vector<int> free_cols;
  for (int j = 0; j < nc; ++j)
    if (!is_pivot[j]) free_cols.push_back(j);
  RatMatrix ns(nc, static_cast<int>(free_cols.size()));
  for (size_t fj = 0; fj < free_cols.size(); ++fj) {
    int j = free_cols[fj];
    ns.at(j, static_cast<int>(fj)) = Rational(1);
    for (int i = 0; i < r.rank(); ++i) ns.at(r.pivot_cols[i], static_cast<int>(fj)) = -r.rows[i][j];
  }
  return ns;
}

/// Solves m x = b exactly.  Returns nullopt when inconsistent; otherwise the
/// solution produced by the deterministic elimination with all free
/// variables set to zero.
inline std::optional<RatVec> solve_exact(const RatMatrix& m, const RatVec& b) {
  if (static_cast<int>(b.size()) != m.rows()) throw std::invalid_argument("solve_exact: rhs size mismatch");
  RatMatrix aug(m.rows(), m.cols() + 1);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols()) = b[i];
  }
  detail::Rref r = detail::reduced_echelon(aug);
  for (int c : r.pivot_cols)
    if (c == m.cols()) return std::nullopt;
  RatVec x(m.cols());
  for (int i = 0; i < r.rank(); ++i) x[r.pivot_cols[i]] = r.rows[i][m.cols()];
  return x;
}

/// Lower bound on the rank: clears denominators row-wise and eliminates
/// modulo `prime_count` independent random primes >= 2^50, returning the
/// maximum rank observed.  Equals the exact rank with overwhelming
/// probability.
inline int rank_modular(const RatMatrix& m, int prime_count, uint64_t seed = 0) {
  if (prime_count < 1) throw std::invalid_argument("rank_modular: prime_count must be >= 1");
  std::vector<detail::ZRow> zrows;
  zrows.reserve(m.rows());
  for (int i = 0; i < m.rows(); ++i) zrows.push_back(detail::integral_row(m, i));
  std::mt19937_64 rng(seed);
  int best = 0;
  for (int t = 0; t < prime_count; ++t) {
    uint64_t p = detail::random_prime_ge_2_50(rng);
    best = std::max(best, detail::rank_mod_p(zrows, m.cols(), p));
  }
  return best;
}

}  // namespace alfeld
