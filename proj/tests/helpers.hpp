// Shared helpers for the test suites: seeded random polynomials and forms,
// and a nested univariate integration oracle independent of the library's
// moment-formula path.
#pragma once

#include <random>

#include "alfeld/formspaces.hpp"
#include "alfeld/kform.hpp"

namespace testutil {

using namespace alfeld;

inline Rational q(long a, long b = 1) { return Rational(a, b); }

inline Poly random_poly(std::mt19937_64& rng, int nvars, int deg, int span = 9) {
  std::uniform_int_distribution<int> d(-span, span);
  Poly p(nvars);
  for (const auto& e : monomials_up_to(nvars, deg)) p.add_term(e, Rational(d(rng)));
  return p;
}

inline KForm random_form(std::mt19937_64& rng, int nvars, int k, int deg) {
  KForm w(nvars, k);
  for (const auto& s : sigma_list(nvars, k)) w.add_term(s, random_poly(rng, nvars, deg));
  return w;
}

inline std::vector<Poly> random_vector_field(std::mt19937_64& rng, int deg) {
  return {random_poly(rng, 3, deg), random_poly(rng, 3, deg), random_poly(rng, 3, deg)};
}

// Antiderivative with respect to variable i.
inline Poly antiderivative(const Poly& p, int i) {
  Poly r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Exponents d(e);
    d[i] += 1;
    r.add_term(d, c / Rational(d[i]));
  }
  return r;
}

// Iterated symbolic integration of p over the reference simplex in nvars
// variables: integrate the last variable from 0 to 1 - (sum of the others),
// then recurse.
inline Rational nested_integral_reference_simplex(const Poly& p) {
  int n = p.nvars();
  if (n == 0) return p.coeff(Exponents{});
  Poly anti = antiderivative(p, n - 1);
  // substitute x_{n-1} := 1 - x_0 - ... - x_{n-2} and x_{n-1} := 0
  std::vector<Poly> upper, lower;
  Poly bound = Poly::constant(n - 1, Rational(1));
  for (int j = 0; j < n - 1; ++j) bound -= Poly::variable(n - 1, j);
  for (int j = 0; j < n - 1; ++j) {
    upper.push_back(Poly::variable(n - 1, j));
    lower.push_back(Poly::variable(n - 1, j));
  }
  upper.push_back(bound);
  lower.push_back(Poly(n - 1));
  Poly inner = anti.compose(upper) - anti.compose(lower);
  return nested_integral_reference_simplex(inner);
}

}  // namespace testutil
