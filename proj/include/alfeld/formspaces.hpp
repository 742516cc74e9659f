// Bases of the polynomial form spaces on a simplex: full spaces, trimmed
// spaces, the canonical moment degrees of freedom, and the constructive
// splitting of a form with vanishing trace on a face.
#pragma once

#include <optional>
#include <vector>

#include "alfeld/kform.hpp"

namespace alfeld {

/// Coefficient layout of k-forms with polynomial degree <= r in n variables:
/// component order is sigma (lex) outer, monomial (graded-lex) inner.
struct FormLayout {
  int n, r, k;
  std::vector<Sigma> sigmas;
  std::vector<Exponents> monos;
  std::map<Exponents, int, GradedLexLess> mono_index;

  FormLayout(int n_, int r_, int k_) : n(n_), r(r_), k(k_) {
    sigmas = sigma_list(n, k);
    monos = monomials_up_to(n, r);
    for (size_t i = 0; i < monos.size(); ++i) mono_index[monos[i]] = static_cast<int>(i);
  }

  int dim() const { return static_cast<int>(sigmas.size() * monos.size()); }
  int index(int sigma_idx, int mono_idx) const { return sigma_idx * static_cast<int>(monos.size()) + mono_idx; }

  RatVec vectorize(const KForm& w) const {
    RatVec v(dim());
    int si = 0;
    for (const auto& s : sigmas) {
      Poly c = w.coeff(s);
      for (const auto& [e, x] : c.terms()) {
        auto it = mono_index.find(e);
        if (it == mono_index.end()) throw std::invalid_argument("FormLayout: polynomial degree exceeds layout");
        v[index(si, it->second)] = x;
      }
      ++si;
    }
    return v;
  }

  KForm devectorize(const RatVec& v) const {
    KForm w(n, k);
    for (size_t si = 0; si < sigmas.size(); ++si) {
      Poly p(n);
      for (size_t mi = 0; mi < monos.size(); ++mi) {
        const Rational& c = v[index(static_cast<int>(si), static_cast<int>(mi))];
        if (!c.is_zero()) p.add_term(monos[mi], c);
      }
      if (!p.is_zero()) w.add_term(sigmas[si], p);
    }
    return w;
  }
};

/// Incremental row-space used for greedy maximal-independent-subset picks.
class GreedySpan {
public:
  bool try_add(RatVec v) {
    for (const auto& [piv, row] : rows_) {
      if (v[piv].is_zero()) continue;
      Rational f = v[piv];
      for (size_t j = piv; j < v.size(); ++j)
        if (!row[j].is_zero()) v[j] -= f * row[j];
    }
    size_t piv = v.size();
    for (size_t j = 0; j < v.size(); ++j)
      if (!v[j].is_zero()) {
        piv = j;
        break;
      }
    if (piv == v.size()) return false;
    Rational inv = Rational(1) / v[piv];
    for (size_t j = piv; j < v.size(); ++j)
      if (!v[j].is_zero()) v[j] *= inv;
    rows_.emplace_back(piv, std::move(v));
    std::sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return true;
  }
  int rank() const { return static_cast<int>(rows_.size()); }

private:
  std::vector<std::pair<size_t, RatVec>> rows_;
};

/// Monomial basis of P_r Lambda^k in n variables; dim = C(r+n,n) C(n,k).
inline std::vector<KForm> pr_lambda_basis(int n, int r, int k) {
  std::vector<KForm> out;
  if (r < 0 || k < 0 || k > n) return out;
  for (const auto& s : sigma_list(n, k))
    for (const auto& e : monomials_up_to(n, r)) {
      KForm w(n, k);
      w.add_term(s, Poly::monomial(e, Rational(1)));
      out.push_back(std::move(w));
    }
  return out;
}

inline long pr_lambda_dim(int n, int r, int k) {
  if (r < 0) return 0;
  return binom(r + n, n) * binom(n, k);
}

/// Trimmed space P_r^- Lambda^k as the span P_{r-1} Lambda^k
/// + koszul(P_{r-1} Lambda^{k+1}); the basis is the greedy maximal
/// independent subset of the generators in deterministic order.
inline std::vector<KForm> pr_minus_basis(int n, int r, int k, const Point& base) {
  std::vector<KForm> gens = pr_lambda_basis(n, r - 1, k);
  if (k + 1 <= n)
    for (const auto& g : pr_lambda_basis(n, r - 1, k + 1)) gens.push_back(koszul(g, base));
  FormLayout layout(n, std::max(r, 0), k);
  GreedySpan span;
  std::vector<KForm> out;
  for (auto& g : gens) {
    if (g.is_zero()) continue;
    if (span.try_add(layout.vectorize(g))) out.push_back(std::move(g));
  }
  return out;
}

/// The literal variant with koszul applied to degree r+1 coefficients; its
/// elements have polynomial degree up to r+2, so the span leaves P_r.  Kept
/// so its dimension can be reported next to the standard space.
inline int pr_minus_literal_dim(int n, int r, int k, const Point& base) {
  std::vector<KForm> gens = pr_lambda_basis(n, r - 1, k);
  if (k + 1 <= n)
    for (const auto& g : pr_lambda_basis(n, r + 1, k + 1)) gens.push_back(koszul(g, base));
  FormLayout layout(n, std::max(r + 2, 0), k);
  GreedySpan span;
  for (const auto& g : gens) {
    if (g.is_zero()) continue;
    span.try_add(layout.vectorize(g));
  }
  return span.rank();
}

/// All s-faces of the n-simplex as increasing index sets, lex order.
inline std::vector<SubSimplex> simplex_faces(int n, int s) {
  std::vector<SubSimplex> out;
  for (const auto& sel : sigma_list(n + 1, s + 1)) out.push_back(SubSimplex{sel});
  return out;
}

/// S_k(T, x_0): the k-faces of T that contain vertex 0.
inline std::vector<SubSimplex> star_faces(int n, int k) {
  std::vector<SubSimplex> out;
  for (const auto& f : simplex_faces(n, k))
    if (f.verts[0] == 0) out.push_back(f);
  return out;
}

/// One canonical degree of freedom: omega |-> integral over the face of
/// tr(omega) wedge eta, with eta given in the face's reference coordinates.
struct CanonicalDof {
  SubSimplex face;
  KForm eta;  // lives in dim(face) reference variables
};

inline Rational eval_canonical_dof(const Simplex& t, const CanonicalDof& dof, const KForm& w) {
  std::vector<Point> pts;
  for (int v : dof.face.verts) pts.push_back(t.vertex(v));
  int s = dof.face.dim();
  KForm tw = trace(w, pts);
  KForm top = wedge(tw, dof.eta);
  Sigma full(s);
  for (int i = 0; i < s; ++i) full[i] = i;
  return reference_simplex_integral(top.coeff(full));
}

/// The canonical moment functionals determining P_r Lambda^k(T): for r >= 1
/// moments against trimmed spaces on all faces of dimension >= k, and for
/// r = 0 plain trace integrals on the k-faces containing x_0.
inline std::vector<CanonicalDof> canonical_dofs(int n, int r, int k) {
  std::vector<CanonicalDof> out;
  if (r >= 1) {
    for (int s = k; s <= n; ++s) {
      Point origin(s, Rational(0));
      auto etas = pr_minus_basis(s, r + k - s, s - k, origin);
      for (const auto& f : simplex_faces(n, s))
        for (const auto& eta : etas) out.push_back(CanonicalDof{f, eta});
    }
  } else if (r == 0) {
    KForm one(k, 0);
    one.add_term(Sigma{}, Poly::constant(k, Rational(1)));
    for (const auto& f : star_faces(n, k)) out.push_back(CanonicalDof{f, one});
  }
  return out;
}

inline RatMatrix canonical_dof_matrix(const Simplex& t, int r, int k) {
  auto dofs = canonical_dofs(t.dim(), r, k);
  auto basis = pr_lambda_basis(t.dim(), r, k);
  RatMatrix m(static_cast<int>(dofs.size()), static_cast<int>(basis.size()));
  for (size_t i = 0; i < dofs.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) m.at(static_cast<int>(i), static_cast<int>(j)) = eval_canonical_dof(t, dofs[i], basis[j]);
  return m;
}

/// Projection onto P_r Lambda^k(T) matching all canonical functionals.
inline KForm canonical_projection(const Simplex& t, int r, int k, const KForm& w) {
  auto dofs = canonical_dofs(t.dim(), r, k);
  auto basis = pr_lambda_basis(t.dim(), r, k);
  RatMatrix m = canonical_dof_matrix(t, r, k);
  if (m.rows() != m.cols()) throw VerificationError("canonical projection: functional count != dim");
  RatVec rhs(dofs.size());
  for (size_t i = 0; i < dofs.size(); ++i) rhs[i] = eval_canonical_dof(t, dofs[i], w);
  auto x = solve_exact(m, rhs);
  if (!x) throw VerificationError("canonical projection: singular canonical matrix");
  KForm out(t.dim(), k);
  for (size_t j = 0; j < basis.size(); ++j) out += (*x)[j] * basis[j];
  return out;
}

// ---------------------------------------------------------------------------
// Barycentric frame conversions and the constructive vertex split.
// ---------------------------------------------------------------------------

/// A form rewritten over the coframe {dlambda_j : j != drop}, with
/// coefficients as polynomials in the variables (lambda_j)_{j != drop}.
inline KForm to_barycentric_frame(const Simplex& t, const KForm& w, int drop) {
  int n = t.dim();
  std::vector<Poly> images(n);  // x_m as a polynomial of the lambda variables
  RatMatrix jac(n, n);          // dx_m = sum_a jac(m,a) dlambda_{J[a]}
  std::vector<int> J;
  for (int j = 0; j <= n; ++j)
    if (j != drop) J.push_back(j);
  for (int m = 0; m < n; ++m) {
    Poly xm = Poly::constant(n, t.vertex(drop)[m]);
    for (int a = 0; a < n; ++a) {
      Rational c = t.vertex(J[a])[m] - t.vertex(drop)[m];
      xm += c * Poly::variable(n, a);
      jac.at(m, a) = c;
    }
    images[m] = xm;
  }
  return pullback(w, images, jac);
}

inline KForm from_barycentric_frame(const Simplex& t, const KForm& w, int drop) {
  int n = t.dim();
  auto lam = t.barycentric_coords();
  std::vector<int> J;
  for (int j = 0; j <= n; ++j)
    if (j != drop) J.push_back(j);
  std::vector<Poly> images(n);
  RatMatrix jac(n, n);  // dlambda_{J[a]} = sum_m jac(a,m) dx_m
  for (int a = 0; a < n; ++a) {
    images[a] = lam[J[a]];
    for (int m = 0; m < n; ++m) jac.at(a, m) = lam[J[a]].partial(m).coeff(Exponents(n, 0));
  }
  return pullback(w, images, jac);
}

inline Poly cartesian_to_barycentric(const Simplex& t, const Poly& p, int drop = 0) {
  KForm w = to_barycentric_frame(t, KForm::from_scalar(p), drop);
  return w.coeff(Sigma{});
}

inline Poly barycentric_to_cartesian(const Simplex& t, const Poly& p, int drop = 0) {
  KForm w = from_barycentric_frame(t, KForm::from_scalar(p), drop);
  return w.coeff(Sigma{});
}

struct VertexSplit {
  KForm v;  // degree k-1 (zero 0-form when k = 0), polynomial degree <= r
  KForm w;  // degree k, polynomial degree <= r-1
};

/// Splits omega with tr_{F_i} omega = 0 as dlambda_i wedge v + lambda_i w,
/// following the explicit construction: coefficients without dlambda_i are
/// divisible by lambda_i, the rest regroup around dlambda_i.
inline VertexSplit vertex_split(const Simplex& t, const KForm& w, int i) {
  int n = t.dim();
  int k = w.degree();
  // precondition
  std::vector<Point> fpts;
  for (int j = 0; j <= n; ++j)
    if (j != i) fpts.push_back(t.vertex(j));
  if (!trace(w, fpts).is_zero()) throw std::invalid_argument("vertex_split: trace on F_i does not vanish");

  int drop = (i == 0) ? 1 : 0;
  std::vector<int> J;
  for (int j = 0; j <= n; ++j)
    if (j != drop) J.push_back(j);
  int ipos = static_cast<int>(std::find(J.begin(), J.end(), i) - J.begin());

  KForm bw = to_barycentric_frame(t, w, drop);
  KForm vf(n, k > 0 ? k - 1 : 0);
  KForm wf(n, k);
  for (const auto& [s, p] : bw.comps()) {
    auto it = std::find(s.begin(), s.end(), ipos);
    if (it == s.end()) {
      // divisible by lambda_i
      Poly q(n);
      for (const auto& [e, c] : p.terms()) {
        if (e[ipos] < 1) throw VerificationError("vertex_split: coefficient not divisible by lambda_i");
        Exponents d(e);
        d[ipos] -= 1;
        q.add_term(d, c);
      }
      wf.add_term(s, q);
    } else {
      if (k == 0) continue;  // unreachable: 0-forms have empty sigma
      int m = static_cast<int>(it - s.begin());
      Sigma rest;
      for (int x : s)
        if (x != ipos) rest.push_back(x);
      // a dy_s = (-1)^{k-1-m} a dy_rest ^ dy_i; v collects (-1)^{k-1} u
      int sign = ((k - 1 - m) % 2 == 0 ? 1 : -1) * ((k - 1) % 2 == 0 ? 1 : -1);
      vf.add_term(rest, sign > 0 ? p : -p);
    }
  }
  VertexSplit out{from_barycentric_frame(t, vf, drop), from_barycentric_frame(t, wf, drop)};
  return out;
}

}  // namespace alfeld
