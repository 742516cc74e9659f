// Simplices, their sub-simplex lattices, the Alfeld (barycentric) split,
// and exact geometric helpers: barycentric coordinates, the hat function of
// the barycenter, normals and edge frames.
#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "alfeld/poly.hpp"
#include "alfeld/ratmatrix.hpp"
#include "alfeld/rational.hpp"

namespace alfeld {

using Point = RatVec;
using Vec = RatVec;

inline Vec sub(const Point& a, const Point& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Rational dot(const Vec& a, const Vec& b) {
  Rational s(0);
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec cross(const Vec& a, const Vec& b) {
  if (a.size() != 3 || b.size() != 3) throw std::invalid_argument("cross: 3D only");
  return Vec{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec scale(const Rational& c, const Vec& a) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline bool is_zero_vec(const Vec& a) {
  for (const auto& x : a)
    if (!x.is_zero()) return false;
  return true;
}

inline Rational determinant(RatMatrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant: square matrices only");
  int n = m.rows();
  Rational det(1);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int i = c; i < n; ++i)
      if (!m.at(i, c).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0) return Rational(0);
    if (piv != c) {
      for (int j = c; j < n; ++j) std::swap(m.at(piv, j), m.at(c, j));
      det = -det;
    }
    det *= m.at(c, c);
    for (int i = c + 1; i < n; ++i) {
      if (m.at(i, c).is_zero()) continue;
      Rational f = m.at(i, c) / m.at(c, c);
      for (int j = c; j < n; ++j) m.at(i, j) -= f * m.at(c, j);
    }
  }
  return det;
}

/// Non-degenerate n-simplex.  The vertex order is kept exactly as given; the
/// orientation sign of det[x_1-x_0, ..., x_n-x_0] is recorded so densities
/// always integrate positively.
class Simplex {
public:
  explicit Simplex(std::vector<Point> verts) : verts_(std::move(verts)) {
    if (verts_.empty()) throw std::invalid_argument("Simplex: no vertices");
    n_ = static_cast<int>(verts_[0].size());
    if (static_cast<int>(verts_.size()) != n_ + 1) throw std::invalid_argument("Simplex: need n+1 vertices in R^n");
    RatMatrix t(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) t.at(j, i) = verts_[i + 1][j] - verts_[0][j];
    det_ = determinant(t);
    if (det_.is_zero()) throw std::invalid_argument("Simplex: degenerate (zero volume)");
  }

  static Simplex reference(int n) {
    std::vector<Point> v(n + 1, Point(n, Rational(0)));
    for (int i = 1; i <= n; ++i) v[i][i - 1] = Rational(1);
    return Simplex(std::move(v));
  }

  int dim() const { return n_; }
  const Point& vertex(int i) const { return verts_.at(i); }
  const std::vector<Point>& vertices() const { return verts_; }
  int orientation() const { return det_.sign(); }
  Rational volume() const {
    Rational v = det_;
    if (v.sign() < 0) v = -v;
    mpz_class f = factorial_z(static_cast<unsigned>(n_));
    return v / Rational(f, mpz_class(1));
  }

  Point barycenter() const {
    Point z(n_, Rational(0));
    for (const auto& v : verts_)
      for (int j = 0; j < n_; ++j) z[j] += v[j];
    Rational inv(1, static_cast<long>(n_) + 1);
    for (auto& x : z) x *= inv;
    return z;
  }

  /// Barycentric coordinates as affine polynomials, lambda_i(x_j) = delta_ij.
  std::vector<Poly> barycentric_coords() const {
    RatMatrix m(n_ + 1, n_ + 1);
    for (int k = 0; k <= n_; ++k) {
      m.at(k, 0) = Rational(1);
      for (int j = 0; j < n_; ++j) m.at(k, j + 1) = verts_[k][j];
    }
    std::vector<Poly> out;
    out.reserve(n_ + 1);
    for (int i = 0; i <= n_; ++i) {
      RatVec e(n_ + 1);
      e[i] = Rational(1);
      auto c = solve_exact(m, e);
      if (!c) throw std::logic_error("barycentric_coords: unsolvable (degenerate simplex)");
      Poly lam = Poly::constant(n_, (*c)[0]);
      for (int j = 0; j < n_; ++j) lam += (*c)[j + 1] * Poly::variable(n_, j);
      out.push_back(lam);
    }
    return out;
  }

private:
  std::vector<Point> verts_;
  int n_;
  Rational det_;
};

/// x_j as an affine polynomial of the reference coordinates of the simplex
/// spanned by `verts` (any dimension s <= n): x = w_0 + sum u_i (w_i - w_0).
inline std::vector<Poly> parametrization(const std::vector<Point>& verts) {
  int n = static_cast<int>(verts[0].size());
  int s = static_cast<int>(verts.size()) - 1;
  std::vector<Poly> images;
  images.reserve(n);
  for (int j = 0; j < n; ++j) {
    Poly xj = Poly::constant(s, verts[0][j]);
    for (int i = 1; i <= s; ++i) xj += (verts[i][j] - verts[0][j]) * Poly::variable(s, i - 1);
    images.push_back(xj);
  }
  return images;
}

/// Exact integral of a density (polynomial in ambient coordinates) over the
/// region of a full-dimensional simplex.
inline Rational integrate_density(const Simplex& t, const Poly& p) {
  Poly q = p.compose(parametrization(t.vertices()));
  Rational jac = t.volume() * Rational(factorial_z(static_cast<unsigned>(t.dim())), mpz_class(1));
  return jac * reference_simplex_integral(q);
}

/// Sub-simplex given by increasing vertex indices into an owner's table.
struct SubSimplex {
  std::vector<int> verts;
  int dim() const { return static_cast<int>(verts.size()) - 1; }
  friend bool operator==(const SubSimplex& a, const SubSimplex& b) { return a.verts == b.verts; }
  friend bool operator<(const SubSimplex& a, const SubSimplex& b) { return a.verts < b.verts; }
};

/// The Alfeld split T^z: children T_i = [z, x_0, ..., x^_i, ..., x_n].
/// Vertex table: indices 0..n are the parent vertices, index n+1 is z.
class AlfeldSplit {
public:
  explicit AlfeldSplit(Simplex parent) : parent_(std::move(parent)), z_(parent_.barycenter()) {
    int n = parent_.dim();
    for (int i = 0; i <= n; ++i) {
      std::vector<Point> v;
      v.push_back(z_);
      for (int j = 0; j <= n; ++j)
        if (j != i) v.push_back(parent_.vertex(j));
      children_.emplace_back(std::move(v));
    }
  }

  int dim() const { return parent_.dim(); }
  int n_children() const { return dim() + 1; }
  const Simplex& parent() const { return parent_; }
  const Point& barycenter() const { return z_; }
  const Simplex& child(int i) const { return children_.at(i); }
  int z_index() const { return dim() + 1; }

  Point vertex_point(int idx) const {
    if (idx == z_index()) return z_;
    return parent_.vertex(idx);
  }

  /// Vertex indices of child i in the paper's order [z, x_0, ..., x^_i, ..., x_n].
  std::vector<int> child_vertex_indices(int i) const {
    std::vector<int> v{z_index()};
    for (int j = 0; j <= dim(); ++j)
      if (j != i) v.push_back(j);
    return v;
  }

  bool child_contains_vertex(int child, int vertex_idx) const {
    return vertex_idx == z_index() || vertex_idx != child;
  }

  /// All s-dimensional sub-simplices of the split, deterministic order.
  std::vector<SubSimplex> subsimplices(int s) const {
    int n = dim();
    std::vector<SubSimplex> out;
    if (s < 0 || s > n) return out;
    // subsets of parent vertices (only faces of some child when s <= n-1)
    if (s <= n - 1) {
      std::vector<int> idx(s + 1);
      auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == s + 1) {
          out.push_back(SubSimplex{idx});
          return;
        }
        for (int v = start; v <= n; ++v) {
          idx[pos] = v;
          self(self, pos + 1, v + 1);
        }
      };
      rec(rec, 0, 0);
    }
    // subsets containing z
    {
      std::vector<int> idx(s + 1);
      auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == s) {
          idx[s] = z_index();
          out.push_back(SubSimplex{idx});
          return;
        }
        for (int v = start; v <= n; ++v) {
          idx[pos] = v;
          self(self, pos + 1, v + 1);
        }
      };
      if (s == 0) {
        out.push_back(SubSimplex{{z_index()}});
      } else {
        rec(rec, 0, 0);
      }
    }
    return out;
  }

  bool is_interior(const SubSimplex& f) const {
    return std::find(f.verts.begin(), f.verts.end(), z_index()) != f.verts.end();
  }

  std::vector<int> children_containing(const SubSimplex& f) const {
    std::vector<int> out;
    for (int c = 0; c < n_children(); ++c) {
      bool ok = true;
      for (int v : f.verts)
        if (!child_contains_vertex(c, v)) {
          ok = false;
          break;
        }
      if (ok) out.push_back(c);
    }
    return out;
  }

  std::vector<Point> points_of(const SubSimplex& f) const {
    std::vector<Point> p;
    p.reserve(f.verts.size());
    for (int v : f.verts) p.push_back(vertex_point(v));
    return p;
  }

  /// Internal (n-1)-faces with their two adjacent children (a < b).
  struct InternalFace {
    SubSimplex face;
    int child_a, child_b;
  };
  std::vector<InternalFace> internal_faces() const {
    std::vector<InternalFace> out;
    for (const auto& f : subsimplices(dim() - 1)) {
      if (!is_interior(f)) continue;
      auto cs = children_containing(f);
      if (cs.size() != 2) throw std::logic_error("internal face not shared by exactly two children");
      out.push_back(InternalFace{f, cs[0], cs[1]});
    }
    return out;
  }

  /// Boundary faces of the split are the whole parent faces F_i, each a face
  /// of the single child i.
  struct BoundaryFace {
    SubSimplex face;  // F_i = all parent indices except i
    int child;        // the child whose face it is (= i)
  };
  std::vector<BoundaryFace> boundary_faces() const {
    std::vector<BoundaryFace> out;
    for (int i = 0; i <= dim(); ++i) {
      SubSimplex f;
      for (int j = 0; j <= dim(); ++j)
        if (j != i) f.verts.push_back(j);
      out.push_back(BoundaryFace{f, i});
    }
    return out;
  }

  /// The hat function of the barycenter: on child T_i it is the barycentric
  /// coordinate of z within T_i, which equals (n+1) times the parent
  /// coordinate lambda_i.
  std::vector<Poly> hat_function() const {
    std::vector<Poly> mu;
    for (int i = 0; i < n_children(); ++i) {
      auto lam = children_[i].barycentric_coords();
      mu.push_back(lam[0]);  // z is vertex 0 of every child
    }
    return mu;
  }

private:
  Simplex parent_;
  Point z_;
  std::vector<Simplex> children_;
};

inline AlfeldSplit alfeld_split(const Simplex& t) { return AlfeldSplit(t); }

/// Rational (non-unit) normal of an (n-1)-face, oriented outward of the cell
/// with the given centroid.
inline Vec face_normal(const std::vector<Point>& face_pts, const Point& cell_centroid) {
  int n = static_cast<int>(face_pts[0].size());
  int s = static_cast<int>(face_pts.size()) - 1;
  if (s != n - 1) throw std::invalid_argument("face_normal: expected an (n-1)-face");
  RatMatrix tang(s, n);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < n; ++j) tang.at(i, j) = face_pts[i + 1][j] - face_pts[0][j];
  RatMatrix ns = nullspace_basis(tang);
  if (ns.cols() != 1) throw std::logic_error("face_normal: degenerate face");
  Vec nrm = ns.column(0);
  Vec to_face = sub(face_pts[0], cell_centroid);
  if (dot(nrm, to_face).sign() < 0)
    for (auto& x : nrm) x = -x;
  return nrm;
}

inline Point centroid(const std::vector<Point>& pts) {
  Point c(pts[0].size(), Rational(0));
  for (const auto& p : pts)
    for (size_t j = 0; j < c.size(); ++j) c[j] += p[j];
  Rational inv(1, static_cast<long>(pts.size()));
  for (auto& x : c) x *= inv;
  return c;
}

/// Edge frame in 3D: tangent (difference of endpoints in increasing vertex
/// order) plus two rational vectors spanning the plane normal to the edge.
struct EdgeFrame {
  Vec tangent, normal1, normal2;
};

inline EdgeFrame edge_frame(const Point& a, const Point& b) {
  if (a.size() != 3) throw std::invalid_argument("edge_frame: 3D only");
  Vec t = sub(b, a);
  Vec m1;
  for (int j = 0; j < 3; ++j) {
    Vec e(3, Rational(0));
    e[j] = Rational(1);
    m1 = cross(t, e);
    if (!is_zero_vec(m1)) break;
  }
  Vec m2 = cross(t, m1);
  return EdgeFrame{t, m1, m2};
}

}  // namespace alfeld
