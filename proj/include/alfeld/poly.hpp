// Multivariate polynomials with rational coefficients, kept in Cartesian
// monomials under graded-lex order.
#pragma once

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alfeld/rational.hpp"

namespace alfeld {

using Exponents = std::vector<int>;

inline int total_degree(const Exponents& e) {
  int s = 0;
  for (int x : e) s += x;
  return s;
}

struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return a < b;
  }
};

/// All exponent vectors in `nvars` variables of total degree <= r, in
/// graded-lex order.  Empty when r < 0.
inline std::vector<Exponents> monomials_up_to(int nvars, int r) {
  std::vector<Exponents> out;
  if (r < 0) return out;
  for (int d = 0; d <= r; ++d) {
    std::vector<Exponents> level;
    Exponents e(nvars, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
      if (pos == nvars - 1) {
        e[pos] = left;
        level.push_back(e);
        return;
      }
      for (int v = 0; v <= left; ++v) {
        e[pos] = v;
        self(self, pos + 1, left - v);
      }
      e[pos] = 0;
    };
    if (nvars == 0) {
      if (d == 0) level.push_back(e);
    } else {
      rec(rec, 0, d);
    }
    std::sort(level.begin(), level.end());
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

class Poly {
public:
  using Terms = std::map<Exponents, Rational, GradedLexLess>;

  explicit Poly(int nvars = 0) : nvars_(nvars) {}

  static Poly constant(int nvars, const Rational& c) {
    Poly p(nvars);
    if (!c.is_zero()) p.terms_[Exponents(nvars, 0)] = c;
    return p;
  }
  static Poly variable(int nvars, int i) {
    Poly p(nvars);
    Exponents e(nvars, 0);
    e.at(i) = 1;
    p.terms_[e] = Rational(1);
    return p;
  }
  static Poly monomial(const Exponents& e, const Rational& c) {
    Poly p(static_cast<int>(e.size()));
    if (!c.is_zero()) p.terms_[e] = c;
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }

  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;  // -1 for the zero polynomial
  }

  Rational coeff(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const Exponents& e, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    check_vars(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_vars(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  Poly operator-() const {
    Poly r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_[e] = -c;
    return r;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.check_vars(b);
    Poly r(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e(ea);
        for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        r.add_term(e, ca * cb);
      }
    return r;
  }
  friend Poly operator*(const Rational& c, const Poly& p) {
    Poly r(p.nvars_);
    if (c.is_zero()) return r;
    for (const auto& [e, x] : p.terms_) r.terms_[e] = c * x;
    return r;
  }
  friend bool operator==(const Poly& a, const Poly& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  Poly partial(int i) const {
    Poly r(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      Exponents d(e);
      d[i] -= 1;
      r.add_term(d, Rational(e[i]) * c);
    }
    return r;
  }

  Rational eval(const RatVec& x) const {
    if (static_cast<int>(x.size()) != nvars_) throw std::invalid_argument("Poly::eval: arity mismatch");
    Rational s(0);
    for (const auto& [e, c] : terms_) {
      Rational t = c;
      for (int i = 0; i < nvars_; ++i)
        if (e[i]) t *= pow(x[i], static_cast<unsigned>(e[i]));
      s += t;
    }
    return s;
  }

  /// Substitutes variable i by images[i]; the images share some arity m and
  /// the result is a polynomial in m variables.
  Poly compose(const std::vector<Poly>& images) const {
    if (static_cast<int>(images.size()) != nvars_) throw std::invalid_argument("Poly::compose: arity mismatch");
    int m = nvars_ ? images[0].nvars() : 0;
    for (const auto& g : images)
      if (g.nvars() != m) throw std::invalid_argument("Poly::compose: image arity mismatch");
    // cache powers of each image
    std::vector<int> maxe(nvars_, 0);
    for (const auto& [e, c] : terms_)
      for (int i = 0; i < nvars_; ++i) maxe[i] = std::max(maxe[i], e[i]);
    std::vector<std::vector<Poly>> pw(nvars_);
    for (int i = 0; i < nvars_; ++i) {
      pw[i].push_back(Poly::constant(m, Rational(1)));
      for (int k = 1; k <= maxe[i]; ++k) pw[i].push_back(pw[i].back() * images[i]);
    }
    Poly r(m);
    for (const auto& [e, c] : terms_) {
      Poly t = Poly::constant(m, c);
      for (int i = 0; i < nvars_; ++i)
        if (e[i]) t = t * pw[i][e[i]];
      r += t;
    }
    return r;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << c.str();
      for (int i = 0; i < nvars_; ++i)
        if (e[i]) {
          os << "*x" << i;
          if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
  }

private:
  void check_vars(const Poly& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("Poly: arity mismatch");
  }

  int nvars_;
  Terms terms_;
};

/// Integral of a monomial over the reference simplex {u >= 0, sum u <= 1}:
/// factorial(b_1)...factorial(b_n) / factorial(|b| + n).
inline Rational reference_simplex_monomial_integral(const Exponents& b) {
  int n = static_cast<int>(b.size());
  mpz_class num(1);
  for (int i = 0; i < n; ++i) num *= factorial_z(static_cast<unsigned>(b[i]));
  mpz_class den = factorial_z(static_cast<unsigned>(total_degree(b) + n));
  return Rational(num, den);
}

/// Integral of a polynomial in reference coordinates over the reference
/// simplex of its own arity.
inline Rational reference_simplex_integral(const Poly& p) {
  Rational s(0);
  for (const auto& [e, c] : p.terms()) s += c * reference_simplex_monomial_integral(e);
  return s;
}

}  // namespace alfeld
