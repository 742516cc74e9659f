// Polynomial differential k-forms in the Cartesian coframe dx_sigma: wedge,
// exterior derivative, Koszul contraction, pullback traces, exact
// integration, and 3D vector proxies.
#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "alfeld/geometry.hpp"
#include "alfeld/poly.hpp"

namespace alfeld {

/// Thrown when a computation contradicts a structural fact that is supposed
/// to hold (nonsingularity, solvability, range inclusion).
class VerificationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Sigma = std::vector<int>;  // strictly increasing axis indices, 0-based

/// Increasing k-subsets of {0, ..., n-1} in lexicographic order.
inline std::vector<Sigma> sigma_list(int n, int k) {
  std::vector<Sigma> out;
  if (k < 0 || k > n) return out;
  Sigma cur(k);
  auto rec = [&](auto&& self, int pos, int start) -> void {
    if (pos == k) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v < n; ++v) {
      cur[pos] = v;
      self(self, pos + 1, v + 1);
    }
  };
  if (k == 0)
    out.push_back(Sigma{});
  else
    rec(rec, 0, 0);
  return out;
}

/// Merges two disjoint increasing index sets; returns the permutation sign,
/// or 0 if they intersect.
inline int merge_sigmas(const Sigma& a, const Sigma& b, Sigma& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  int inversions = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      inversions += static_cast<int>(a.size() - i);
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return (inversions % 2 == 0) ? 1 : -1;
}

class KForm {
public:
  using Comps = std::map<Sigma, Poly>;

  KForm(int nvars, int deg) : nvars_(nvars), deg_(deg) {
    if (deg < 0 || deg > nvars) throw std::invalid_argument("KForm: degree out of range");
  }

  static KForm from_scalar(const Poly& p) {
    KForm w(p.nvars(), 0);
    w.add_term(Sigma{}, p);
    return w;
  }

  int nvars() const { return nvars_; }
  int degree() const { return deg_; }
  bool is_zero() const { return comps_.empty(); }
  const Comps& comps() const { return comps_; }

  int poly_degree() const {
    int d = -1;
    for (const auto& [s, p] : comps_) d = std::max(d, p.degree());
    return d;
  }

  Poly coeff(const Sigma& s) const {
    auto it = comps_.find(s);
    return it == comps_.end() ? Poly(nvars_) : it->second;
  }

  void add_term(const Sigma& s, const Poly& p) {
    if (static_cast<int>(s.size()) != deg_) throw std::invalid_argument("KForm: sigma arity mismatch");
    if (p.is_zero()) return;
    auto [it, fresh] = comps_.emplace(s, p);
    if (!fresh) {
      it->second += p;
      if (it->second.is_zero()) comps_.erase(it);
    }
  }

  KForm& operator+=(const KForm& o) {
    check_shape(o);
    for (const auto& [s, p] : o.comps_) add_term(s, p);
    return *this;
  }
  KForm& operator-=(const KForm& o) {
    check_shape(o);
    for (const auto& [s, p] : o.comps_) add_term(s, -p);
    return *this;
  }
  friend KForm operator+(KForm a, const KForm& b) { return a += b; }
  friend KForm operator-(KForm a, const KForm& b) { return a -= b; }
  friend KForm operator*(const Rational& c, const KForm& w) {
    KForm r(w.nvars_, w.deg_);
    if (c.is_zero()) return r;
    for (const auto& [s, p] : w.comps_) r.comps_[s] = c * p;
    return r;
  }
  friend KForm operator*(const Poly& f, const KForm& w) {
    KForm r(w.nvars_, w.deg_);
    for (const auto& [s, p] : w.comps_) r.add_term(s, f * p);
    return r;
  }
  friend bool operator==(const KForm& a, const KForm& b) {
    return a.nvars_ == b.nvars_ && a.deg_ == b.deg_ && a.comps_ == b.comps_;
  }

  /// Pointwise evaluation on k vectors.
  Rational eval(const Point& x, const std::vector<Vec>& vecs) const {
    if (static_cast<int>(vecs.size()) != deg_) throw std::invalid_argument("KForm::eval: need k vectors");
    Rational total(0);
    for (const auto& [s, p] : comps_) {
      RatMatrix m(deg_, deg_);
      for (int i = 0; i < deg_; ++i)
        for (int j = 0; j < deg_; ++j) m.at(i, j) = vecs[j][s[i]];
      Rational d = deg_ ? determinant(m) : Rational(1);
      total += p.eval(x) * d;
    }
    return total;
  }

private:
  void check_shape(const KForm& o) const {
    if (nvars_ != o.nvars_ || deg_ != o.deg_) throw std::invalid_argument("KForm: shape mismatch");
  }

  int nvars_, deg_;
  Comps comps_;
};

inline KForm wedge(const KForm& a, const KForm& b) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("wedge: carrier mismatch");
  if (a.degree() + b.degree() > a.nvars()) throw std::invalid_argument("wedge: degree overflow");
  KForm r(a.nvars(), a.degree() + b.degree());
  Sigma merged;
  for (const auto& [sa, pa] : a.comps())
    for (const auto& [sb, pb] : b.comps()) {
      int sign = merge_sigmas(sa, sb, merged);
      if (sign == 0) continue;
      Poly prod = pa * pb;
      r.add_term(merged, sign > 0 ? prod : -prod);
    }
  return r;
}

inline KForm exterior_d(const KForm& w) {
  if (w.degree() >= w.nvars()) throw std::invalid_argument("exterior_d: top-degree input");
  KForm r(w.nvars(), w.degree() + 1);
  Sigma merged;
  for (const auto& [s, p] : w.comps())
    for (int j = 0; j < w.nvars(); ++j) {
      Poly dp = p.partial(j);
      if (dp.is_zero()) continue;
      int sign = merge_sigmas(Sigma{j}, s, merged);
      if (sign == 0) continue;
      r.add_term(merged, sign > 0 ? dp : -dp);
    }
  return r;
}

/// Koszul operator: contraction with the position field x - base.
inline KForm koszul(const KForm& w, const Point& base) {
  if (w.degree() < 1) throw std::invalid_argument("koszul: 0-form input");
  if (static_cast<int>(base.size()) != w.nvars()) throw std::invalid_argument("koszul: base arity mismatch");
  KForm r(w.nvars(), w.degree() - 1);
  for (const auto& [s, p] : w.comps()) {
    for (size_t i = 0; i < s.size(); ++i) {
      Poly pos = Poly::variable(w.nvars(), s[i]) - Poly::constant(w.nvars(), base[s[i]]);
      Sigma rest;
      for (size_t j = 0; j < s.size(); ++j)
        if (j != i) rest.push_back(s[j]);
      Poly term = p * pos;
      r.add_term(rest, (i % 2 == 0) ? term : -term);
    }
  }
  return r;
}

/// Pullback under an affine map: images give the old coordinates as
/// polynomials of the new ones, jac(m, t) is the coefficient of d(new_t) in
/// d(old_m).
inline KForm pullback(const KForm& w, const std::vector<Poly>& images, const RatMatrix& jac) {
  int new_n = images.empty() ? jac.cols() : images[0].nvars();
  if (w.degree() > new_n) throw std::invalid_argument("pullback: target dimension below form degree");
  KForm r(new_n, w.degree());
  auto taus = sigma_list(new_n, w.degree());
  for (const auto& [s, p] : w.comps()) {
    Poly moved = p.compose(images);
    if (moved.is_zero()) continue;
    for (const auto& tau : taus) {
      RatMatrix minor(w.degree(), w.degree());
      for (int i = 0; i < w.degree(); ++i)
        for (int j = 0; j < w.degree(); ++j) minor.at(i, j) = jac.at(s[i], tau[j]);
      Rational d = w.degree() ? determinant(minor) : Rational(1);
      if (d.is_zero()) continue;
      r.add_term(tau, d * moved);
    }
  }
  return r;
}

/// Trace (pullback) of a form onto the simplex spanned by face_pts, in the
/// reference coordinates of that simplex.
inline KForm trace(const KForm& w, const std::vector<Point>& face_pts) {
  int s = static_cast<int>(face_pts.size()) - 1;
  if (s < w.degree()) throw std::invalid_argument("trace: face dimension below form degree");
  RatMatrix jac(w.nvars(), s);
  for (int m = 0; m < w.nvars(); ++m)
    for (int t = 0; t < s; ++t) jac.at(m, t) = face_pts[t + 1][m] - face_pts[0][m];
  return pullback(w, parametrization(face_pts), jac);
}

/// Componentwise restriction to the affine hull of face_pts: each dx_sigma
/// coefficient composed with the parametrization, keeping the coframe.
inline std::map<Sigma, Poly> restrict_components(const KForm& w, const std::vector<Point>& face_pts) {
  auto images = parametrization(face_pts);
  std::map<Sigma, Poly> out;
  for (const auto& [s, p] : w.comps()) {
    Poly r = p.compose(images);
    if (!r.is_zero()) out[s] = r;
  }
  return out;
}

/// Integral of an s-form over the oriented s-simplex spanned by face_pts
/// (orientation given by the vertex order).
inline Rational integrate_form(const KForm& w, const std::vector<Point>& face_pts) {
  int s = static_cast<int>(face_pts.size()) - 1;
  if (w.degree() != s) throw std::invalid_argument("integrate_form: degree must equal face dimension");
  KForm t = trace(w, face_pts);
  Sigma full(s);
  for (int i = 0; i < s; ++i) full[i] = i;
  return reference_simplex_integral(t.coeff(full));
}

/// Pairing of Prop-style degrees of freedom: integral over f of
/// tr_f(omega) wedge tr_f(eta).
inline Rational pairing(const std::vector<Point>& face_pts, const KForm& w, const KForm& eta) {
  int s = static_cast<int>(face_pts.size()) - 1;
  if (w.degree() + eta.degree() != s) throw std::invalid_argument("pairing: degrees must sum to face dimension");
  KForm tw = trace(w, face_pts);
  KForm te = trace(eta, face_pts);
  KForm top = wedge(tw, te);
  Sigma full(s);
  for (int i = 0; i < s; ++i) full[i] = i;
  return reference_simplex_integral(top.coeff(full));
}

// ---------------------------------------------------------------------------
// 3D vector proxies: 0/3-forms <-> scalars, 1/2-forms <-> vector fields.
// Under this identification the exterior derivative is grad, curl, div.
// ---------------------------------------------------------------------------

inline KForm proxy_to_form(int k, const std::vector<Poly>& comps) {
  if (comps.empty() || comps[0].nvars() != 3) throw std::invalid_argument("proxy_to_form: 3D only");
  KForm w(3, k);
  switch (k) {
    case 0:
    case 3: {
      if (comps.size() != 1) throw std::invalid_argument("proxy_to_form: scalar proxy expected");
      if (k == 0)
        w.add_term(Sigma{}, comps[0]);
      else
        w.add_term(Sigma{0, 1, 2}, comps[0]);
      return w;
    }
    case 1: {
      if (comps.size() != 3) throw std::invalid_argument("proxy_to_form: vector proxy expected");
      for (int i = 0; i < 3; ++i) w.add_term(Sigma{i}, comps[i]);
      return w;
    }
    case 2: {
      if (comps.size() != 3) throw std::invalid_argument("proxy_to_form: vector proxy expected");
      w.add_term(Sigma{1, 2}, comps[0]);
      w.add_term(Sigma{0, 2}, -comps[1]);
      w.add_term(Sigma{0, 1}, comps[2]);
      return w;
    }
    default:
      throw std::invalid_argument("proxy_to_form: bad degree");
  }
}

inline std::vector<Poly> form_to_proxy(const KForm& w) {
  if (w.nvars() != 3) throw std::invalid_argument("form_to_proxy: 3D only");
  switch (w.degree()) {
    case 0:
      return {w.coeff(Sigma{})};
    case 3:
      return {w.coeff(Sigma{0, 1, 2})};
    case 1:
      return {w.coeff(Sigma{0}), w.coeff(Sigma{1}), w.coeff(Sigma{2})};
    case 2:
      return {w.coeff(Sigma{1, 2}), -w.coeff(Sigma{0, 2}), w.coeff(Sigma{0, 1})};
    default:
      throw std::invalid_argument("form_to_proxy: bad degree");
  }
}

// ---------------------------------------------------------------------------
// Barycentric building blocks
// ---------------------------------------------------------------------------

/// dlambda_i as a constant-coefficient 1-form.
inline KForm dlambda(const Simplex& t, int i) {
  auto lam = t.barycentric_coords();
  KForm w(t.dim(), 1);
  for (int j = 0; j < t.dim(); ++j) {
    Poly dj = lam[i].partial(j);
    if (!dj.is_zero()) w.add_term(Sigma{j}, dj);
  }
  return w;
}

/// Piecewise polynomial k-form: one polynomial form per child of a split.
struct PiecewiseKForm {
  const AlfeldSplit* split = nullptr;
  std::vector<KForm> pieces;

  int degree() const { return pieces.at(0).degree(); }
  bool is_zero() const {
    for (const auto& p : pieces)
      if (!p.is_zero()) return false;
    return true;
  }
  PiecewiseKForm d() const {
    PiecewiseKForm r;
    r.split = split;
    for (const auto& p : pieces) r.pieces.push_back(exterior_d(p));
    return r;
  }
  friend bool operator==(const PiecewiseKForm& a, const PiecewiseKForm& b) { return a.pieces == b.pieces; }
  friend PiecewiseKForm operator+(const PiecewiseKForm& a, const PiecewiseKForm& b) {
    PiecewiseKForm r;
    r.split = a.split;
    for (size_t i = 0; i < a.pieces.size(); ++i) r.pieces.push_back(a.pieces[i] + b.pieces[i]);
    return r;
  }
  friend PiecewiseKForm operator*(const Rational& c, const PiecewiseKForm& w) {
    PiecewiseKForm r;
    r.split = w.split;
    for (const auto& p : w.pieces) r.pieces.push_back(c * p);
    return r;
  }
};

}  // namespace alfeld
