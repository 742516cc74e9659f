#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "alfeld/ratmatrix.hpp"

using namespace alfeld;

namespace {

// Test-side oracle: plain Gaussian elimination over F_p, independent of the
// library's elimination code.
int oracle_rank_mod_p(const std::vector<std::vector<long>>& m, long p) {
  auto w = m;
  int rank = 0;
  size_t used = 0;
  if (w.empty()) return 0;
  int nc = static_cast<int>(w[0].size());
  auto norm = [p](long x) { return ((x % p) + p) % p; };
  for (int col = 0; col < nc && used < w.size(); ++col) {
    size_t piv = w.size();
    for (size_t i = used; i < w.size(); ++i)
      if (norm(w[i][col]) != 0) {
        piv = i;
        break;
      }
    if (piv == w.size()) continue;
    std::swap(w[used], w[piv]);
    long inv = 1, base = norm(w[used][col]), e = p - 2;
    while (e) {
      if (e & 1) inv = (inv * base) % p;
      base = (base * base) % p;
      e >>= 1;
    }
    for (size_t i = used + 1; i < w.size(); ++i) {
      long f = (norm(w[i][col]) * inv) % p;
      if (f == 0) continue;
      for (int j = col; j < nc; ++j) w[i][j] = norm(w[i][j] - f * norm(w[used][j]));
    }
    ++rank;
    ++used;
  }
  return rank;
}

RatMatrix random_int_matrix(std::mt19937_64& rng, int rows, int cols, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  RatMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m.at(i, j) = Rational(d(rng));
  return m;
}

}  // namespace

TEST_CASE("rank_exact basics") {
  CHECK(rank_exact(RatMatrix::identity(3)) == 3);
  RatMatrix prop{{Rational(1), Rational(2)}, {Rational(2), Rational(4)}};
  CHECK(rank_exact(prop) == 1);
}

TEST_CASE("rank_exact on a constructed rank-12 product") {
  std::mt19937_64 rng(20240517);
  RatMatrix a = random_int_matrix(rng, 20, 12, -5, 5);
  RatMatrix b = random_int_matrix(rng, 12, 30, -5, 5);
  RatMatrix m = a * b;

  // Independent check over a prime field.
  const long p = 1000003;
  std::vector<std::vector<long>> ml(20, std::vector<long>(30));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 30; ++j) ml[i][j] = m.at(i, j).num().get_si();
  REQUIRE(oracle_rank_mod_p(ml, p) == 12);

  CHECK(rank_exact(m) == 12);
  CHECK(rank_modular(m, 2, 7) == 12);
}

TEST_CASE("nullspace_basis canonical form") {
  RatMatrix m{{Rational(1), Rational(1)}};
  RatMatrix ns = nullspace_basis(m);
  REQUIRE(ns.cols() == 1);
  CHECK(ns.at(0, 0) == Rational(-1));
  CHECK(ns.at(1, 0) == Rational(1));

  CHECK(nullspace_basis(RatMatrix::identity(4)).cols() == 0);

  RatMatrix r{{Rational(1), Rational(2), Rational(3)}};
  RatMatrix n = nullspace_basis(r);
  REQUIRE(n.cols() == 2);
  CHECK((r * n).is_zero());
  // free columns 1 and 2 carry unit entries
  CHECK(n.at(1, 0) == Rational(1));
  CHECK(n.at(2, 0) == Rational(0));
  CHECK(n.at(1, 1) == Rational(0));
  CHECK(n.at(2, 1) == Rational(1));
}

TEST_CASE("solve_exact") {
  RatMatrix id = RatMatrix::identity(3);
  RatVec b{Rational(1), Rational(2, 3), Rational(-4)};
  auto x = solve_exact(id, b);
  REQUIRE(x.has_value());
  CHECK(*x == b);

  RatMatrix two{{Rational(2)}};
  auto y = solve_exact(two, RatVec{Rational(3)});
  REQUIRE(y.has_value());
  CHECK((*y)[0] == Rational(3, 2));

  // singular and inconsistent
  RatMatrix sing{{Rational(1), Rational(1)}, {Rational(1), Rational(1)}};
  CHECK_FALSE(solve_exact(sing, RatVec{Rational(0), Rational(1)}).has_value());
  // singular but consistent: solved with free variable zero
  auto z = solve_exact(sing, RatVec{Rational(2), Rational(2)});
  REQUIRE(z.has_value());
  CHECK((*z)[0] == Rational(2));
  CHECK((*z)[1] == Rational(0));
}

TEST_CASE("rank_modular basics") {
  CHECK(rank_modular(RatMatrix::identity(3), 1, 123) == 3);
  RatMatrix third(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) third.at(i, j) = Rational(1, 3);
  CHECK(rank_modular(third, 2, 5) == 1);
}

TEST_CASE("elimination invariants on random matrices") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    int rows = 1 + static_cast<int>(rng() % 8);
    int cols = 1 + static_cast<int>(rng() % 8);
    RatMatrix m = random_int_matrix(rng, rows, cols, -4, 4);
    // sprinkle fractions
    m.at(0, 0) = m.at(0, 0) / Rational(3);
    int rk = rank_exact(m);
    RatMatrix ns = nullspace_basis(m);
    CHECK(rk + ns.cols() == cols);
    CHECK((m * ns).is_zero());
    CHECK(rank_exact(m.transposed()) == rk);
    CHECK(rank_modular(m, 1, trial) <= rk);
    CHECK(rank_modular(m, 2, trial + 1000) == rk);
  }
}
