// Piecewise polynomial form spaces on an Alfeld split, assembled as exact
// nullspaces of stacked continuity / boundary / vertex-smoothness constraint
// matrices, with closed-form dimension counts, exactness checks of the de
// Rham sequences, and continuous potentials for closed forms.
#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "alfeld/formspaces.hpp"
#include "alfeld/kform.hpp"

namespace alfeld {

enum class Family { V, Vd, M, Md, Mc, Vc };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::V: return "V";
    case Family::Vd: return "Vd";
    case Family::M: return "M";
    case Family::Md: return "Md";
    case Family::Mc: return "Mc";
    case Family::Vc: return "Vc";
  }
  return "?";
}

struct SpaceSpec {
  Family fam;
  bool ring = false;
  int n = 3, k = 0, r = 0;

  bool valid() const {
    if (k < 0 || k > n || n < 2) return false;
    if (fam == Family::Mc && !(k == 1 && n == 3)) return false;
    if (fam == Family::Vc && !(k == 2 && n == 3)) return false;
    if (fam == Family::V && ring) return false;
    return true;
  }
  std::string str() const {
    std::string s = family_name(fam);
    if (ring) s += "o";
    s += "^" + std::to_string(k) + "_" + std::to_string(r);
    return s;
  }
  friend bool operator<(const SpaceSpec& a, const SpaceSpec& b) {
    return std::tie(a.fam, a.ring, a.n, a.k, a.r) < std::tie(b.fam, b.ring, b.n, b.k, b.r);
  }
  friend bool operator==(const SpaceSpec& a, const SpaceSpec& b) {
    return std::tie(a.fam, a.ring, a.n, a.k, a.r) == std::tie(b.fam, b.ring, b.n, b.k, b.r);
  }
};

// ---------------------------------------------------------------------------
// Constraint assembly over the raw per-child coefficient space.
// Column layout: child outer, then sigma (lex), then monomial (graded-lex).
// ---------------------------------------------------------------------------

namespace rows {

/// Restrictions of all layout monomials to a parametrized sub-simplex,
/// computed incrementally in graded-lex order.
inline std::vector<Poly> restrict_monomials(const std::vector<Poly>& images, const std::vector<Exponents>& monos) {
  std::map<Exponents, Poly, GradedLexLess> memo;
  std::vector<Poly> out;
  out.reserve(monos.size());
  int m = images.empty() ? 0 : images[0].nvars();
  for (const auto& e : monos) {
    if (total_degree(e) == 0) {
      Poly one = Poly::constant(m, Rational(1));
      memo[e] = one;
      out.push_back(one);
      continue;
    }
    int j = 0;
    while (e[j] == 0) ++j;
    Exponents prev(e);
    prev[j] -= 1;
    Poly p = memo.at(prev) * images[j];
    memo[e] = p;
    out.push_back(p);
  }
  return out;
}

struct FaceData {
  std::vector<Point> pts;           // vertex points, canonical (increasing index) order
  std::vector<Poly> images;         // ambient coordinates of the parametrization
  RatMatrix jac;                    // d(x_m) = sum_t jac(m,t) du_t
  std::vector<Poly> restricted;     // layout monomials composed with the parametrization
  FormLayout face_layout;           // s-variable layout for restricted polynomials

  FaceData(const std::vector<Point>& points, const FormLayout& cell_layout)
      : pts(points), images(parametrization(points)), jac(static_cast<int>(points[0].size()), static_cast<int>(points.size()) - 1),
        face_layout(static_cast<int>(points.size()) - 1, cell_layout.r, 0) {
    int n = static_cast<int>(points[0].size());
    int s = static_cast<int>(points.size()) - 1;
    for (int m = 0; m < n; ++m)
      for (int t = 0; t < s; ++t) jac.at(m, t) = points[t + 1][m] - points[0][m];
    restricted = restrict_monomials(images, cell_layout.monos);
  }
  int s() const { return static_cast<int>(pts.size()) - 1; }
};

/// Accumulates c * restricted_monomial into a row block indexed by face
/// monomials, at the raw column of (child, sigma_idx, each cell monomial).
struct RowBlock {
  std::vector<RatVec> rows;  // one per face monomial
  RowBlock(int count, int raw_dim) : rows(count, RatVec(raw_dim)) {}
};

// Full componentwise restriction rows of (sign * child piece) on a face:
// for each sigma and each face monomial, one row.  Appends into `out`.
inline void add_full_restriction(std::vector<RatVec>& out_rows, std::map<std::tuple<int, int>, int>& row_index,
                                 const FaceData& fd, const FormLayout& lay, int raw_dim, int child, int sign) {
  for (size_t si = 0; si < lay.sigmas.size(); ++si) {
    for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
      int col = child * lay.dim() + lay.index(static_cast<int>(si), static_cast<int>(mi));
      for (const auto& [fe, c] : fd.restricted[mi].terms()) {
        auto key = std::make_tuple(static_cast<int>(si), fd.face_layout.mono_index.at(fe));
        auto it = row_index.find(key);
        if (it == row_index.end()) {
          it = row_index.emplace(key, static_cast<int>(out_rows.size())).first;
          out_rows.emplace_back(RatVec(raw_dim));
        }
        out_rows[it->second][col] += Rational(sign) * c;
      }
    }
  }
}

// Trace (pullback) rows: for each target tau on the face and each face
// monomial, one row; entries are minor(sigma,tau) * restriction coefficients.
inline void add_trace_restriction(std::vector<RatVec>& out_rows, std::map<std::tuple<int, int>, int>& row_index,
                                  const FaceData& fd, const FormLayout& lay, int raw_dim, int child, int sign) {
  int k = lay.k;
  auto taus = sigma_list(fd.s(), k);
  // minors of the jacobian
  std::vector<std::vector<Rational>> minor(lay.sigmas.size(), std::vector<Rational>(taus.size()));
  for (size_t si = 0; si < lay.sigmas.size(); ++si)
    for (size_t ti = 0; ti < taus.size(); ++ti) {
      RatMatrix m(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m.at(i, j) = fd.jac.at(lay.sigmas[si][i], taus[ti][j]);
      minor[si][ti] = k ? determinant(m) : Rational(1);
    }
  for (size_t si = 0; si < lay.sigmas.size(); ++si)
    for (size_t ti = 0; ti < taus.size(); ++ti) {
      if (minor[si][ti].is_zero()) continue;
      for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
        int col = child * lay.dim() + lay.index(static_cast<int>(si), static_cast<int>(mi));
        for (const auto& [fe, c] : fd.restricted[mi].terms()) {
          auto key = std::make_tuple(static_cast<int>(ti), fd.face_layout.mono_index.at(fe));
          auto it = row_index.find(key);
          if (it == row_index.end()) {
            it = row_index.emplace(key, static_cast<int>(out_rows.size())).first;
            out_rows.emplace_back(RatVec(raw_dim));
          }
          out_rows[it->second][col] += Rational(sign) * minor[si][ti] * c;
        }
      }
    }
}

// Rows for the exterior derivative of a piece restricted componentwise to a
// face.  dlay is the (k+1, r-1) layout used only for component bookkeeping.
inline void add_d_full_restriction(std::vector<RatVec>& out_rows, std::map<std::tuple<int, int>, int>& row_index,
                                   const FaceData& fd, const FormLayout& lay, int raw_dim, int child, int sign) {
  int n = lay.n;
  std::map<Sigma, int> dsigma_index;
  auto dsigmas = sigma_list(n, lay.k + 1);
  for (size_t i = 0; i < dsigmas.size(); ++i) dsigma_index[dsigmas[i]] = static_cast<int>(i);
  Sigma merged;
  for (size_t si = 0; si < lay.sigmas.size(); ++si)
    for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
      const Exponents& e = lay.monos[mi];
      int col = child * lay.dim() + lay.index(static_cast<int>(si), static_cast<int>(mi));
      for (int j = 0; j < n; ++j) {
        if (e[j] == 0) continue;
        int s = merge_sigmas(Sigma{j}, lay.sigmas[si], merged);
        if (s == 0) continue;
        Exponents de(e);
        de[j] -= 1;
        Rational factor = Rational(sign * s) * Rational(e[j]);
        const Poly& restr = fd.restricted[lay.mono_index.at(de)];
        int dsi = dsigma_index.at(merged);
        for (const auto& [fe, c] : restr.terms()) {
          auto key = std::make_tuple(dsi, fd.face_layout.mono_index.at(fe));
          auto it = row_index.find(key);
          if (it == row_index.end()) {
            it = row_index.emplace(key, static_cast<int>(out_rows.size())).first;
            out_rows.emplace_back(RatVec(raw_dim));
          }
          out_rows[it->second][col] += factor * c;
        }
      }
    }
}

// Point-jet rows: D^alpha of each component evaluated at a point, as a
// linear functional of one child's raw coefficients.
inline RatVec jet_row(const FormLayout& lay, int raw_dim, int child, int sigma_idx, const Exponents& alpha,
                      const Point& pt) {
  RatVec row(raw_dim);
  for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
    Poly m = Poly::monomial(lay.monos[mi], Rational(1));
    for (size_t j = 0; j < alpha.size(); ++j)
      for (int a = 0; a < alpha[j]; ++a) m = m.partial(static_cast<int>(j));
    if (m.is_zero()) continue;
    row[child * lay.dim() + lay.index(sigma_idx, static_cast<int>(mi))] = m.eval(pt);
  }
  return row;
}

}  // namespace rows

/// Constraint matrix of a space specification over the raw coefficients.
inline RatMatrix constraint_matrix(const SpaceSpec& spec, const AlfeldSplit& split) {
  if (!spec.valid()) throw std::invalid_argument("constraint_matrix: invalid space spec " + spec.str());
  int n = spec.n;
  if (split.dim() != n) throw std::invalid_argument("constraint_matrix: split dimension mismatch");
  FormLayout lay(n, spec.r, spec.k);
  int raw_dim = (n + 1) * lay.dim();
  std::vector<RatVec> out;
  if (spec.r < 0) return RatMatrix(0, 0);  // the zero space: no columns at all

  bool trace_internal = false, full_internal = false, d_internal = false;
  bool vertex_jets = false;
  int jet_order = 0;
  switch (spec.fam) {
    case Family::V: break;
    case Family::Vd: trace_internal = (spec.k < n); break;
    case Family::M: full_internal = true; break;
    case Family::Md: full_internal = true; d_internal = (spec.k < n); break;
    case Family::Mc: full_internal = true; vertex_jets = true; jet_order = 1; break;
    case Family::Vc: trace_internal = true; vertex_jets = true; jet_order = 0; break;
  }

  if (trace_internal || full_internal || d_internal) {
    FormLayout dlay(n, spec.r - 1, spec.k + 1);
    for (const auto& f : split.internal_faces()) {
      rows::FaceData fd(split.points_of(f.face), lay);
      if (trace_internal) {
        std::map<std::tuple<int, int>, int> idx;
        std::vector<RatVec> block;
        rows::add_trace_restriction(block, idx, fd, lay, raw_dim, f.child_a, +1);
        rows::add_trace_restriction(block, idx, fd, lay, raw_dim, f.child_b, -1);
        for (auto& r : block) out.push_back(std::move(r));
      }
      if (full_internal) {
        std::map<std::tuple<int, int>, int> idx;
        std::vector<RatVec> block;
        rows::add_full_restriction(block, idx, fd, lay, raw_dim, f.child_a, +1);
        rows::add_full_restriction(block, idx, fd, lay, raw_dim, f.child_b, -1);
        for (auto& r : block) out.push_back(std::move(r));
      }
      if (d_internal) {
        std::map<std::tuple<int, int>, int> idx;
        std::vector<RatVec> block;
        rows::add_d_full_restriction(block, idx, fd, lay, raw_dim, f.child_a, +1);
        rows::add_d_full_restriction(block, idx, fd, lay, raw_dim, f.child_b, -1);
        for (auto& r : block) out.push_back(std::move(r));
      }
    }
  }

  if (vertex_jets) {
    auto alphas = monomials_up_to(n, jet_order);
    for (const auto& v : split.subsimplices(0)) {
      auto children = split.children_containing(v);
      Point pt = split.vertex_point(v.verts[0]);
      for (size_t c = 1; c < children.size(); ++c)
        for (size_t si = 0; si < lay.sigmas.size(); ++si)
          for (const auto& alpha : alphas) {
            RatVec a = rows::jet_row(lay, raw_dim, children[c], static_cast<int>(si), alpha, pt);
            RatVec b = rows::jet_row(lay, raw_dim, children[0], static_cast<int>(si), alpha, pt);
            for (int j = 0; j < raw_dim; ++j) a[j] -= b[j];
            out.push_back(std::move(a));
          }
    }
  }

  if (spec.ring) {
    bool boundary_trace = false, boundary_full = false, boundary_d = false, zero_mean = false;
    if (spec.k <= n - 1) {
      switch (spec.fam) {
        case Family::Vd: boundary_trace = true; break;
        case Family::Vc: boundary_trace = true; break;
        case Family::M: boundary_full = true; break;
        case Family::Mc: boundary_full = true; break;
        case Family::Md: boundary_full = true; boundary_d = true; break;
        default: throw std::invalid_argument("constraint_matrix: ring not defined for family");
      }
    } else {  // k = n
      switch (spec.fam) {
        case Family::Vd: zero_mean = true; break;
        case Family::M:
        case Family::Md: boundary_full = true; zero_mean = true; break;
        default: throw std::invalid_argument("constraint_matrix: ring not defined for family at k=n");
      }
    }
    if (boundary_trace || boundary_full || boundary_d) {
      for (const auto& bf : split.boundary_faces()) {
        rows::FaceData fd(split.points_of(bf.face), lay);
        std::map<std::tuple<int, int>, int> idx;
        std::vector<RatVec> block;
        if (boundary_trace) rows::add_trace_restriction(block, idx, fd, lay, raw_dim, bf.child, +1);
        if (boundary_full) rows::add_full_restriction(block, idx, fd, lay, raw_dim, bf.child, +1);
        for (auto& r : block) out.push_back(std::move(r));
        if (boundary_d) {
          std::map<std::tuple<int, int>, int> idx2;
          std::vector<RatVec> block2;
          rows::add_d_full_restriction(block2, idx2, fd, lay, raw_dim, bf.child, +1);
          for (auto& r : block2) out.push_back(std::move(r));
        }
      }
    }
    if (zero_mean) {
      RatVec row(raw_dim);
      Sigma top = lay.sigmas.at(0);  // k = n: single component
      for (int c = 0; c <= n; ++c)
        for (size_t mi = 0; mi < lay.monos.size(); ++mi)
          row[c * lay.dim() + lay.index(0, static_cast<int>(mi))] =
              integrate_density(split.child(c), Poly::monomial(lay.monos[mi], Rational(1)));
      out.push_back(std::move(row));
    }
  }

  RatMatrix m(0, raw_dim);
  for (auto& r : out) m.append_row(r);
  return m;
}

// ---------------------------------------------------------------------------
// Space bases
// ---------------------------------------------------------------------------

struct SpaceBasis {
  SpaceSpec spec;
  const AlfeldSplit* split = nullptr;
  std::shared_ptr<FormLayout> layout;
  RatMatrix constraints;
  RatMatrix basis;             // raw_dim x dim, canonical reduced-echelon nullspace
  std::vector<int> free_cols;  // unit rows of the canonical basis

  int dim() const { return basis.cols(); }
  int raw_dim() const { return basis.rows(); }

  PiecewiseKForm element(int j) const { return devectorize(basis.column(j)); }

  RatVec vectorize(const PiecewiseKForm& w) const {
    RatVec v(raw_dim());
    for (int c = 0; c < split->n_children(); ++c) {
      RatVec piece = layout->vectorize(w.pieces.at(c));
      for (int i = 0; i < layout->dim(); ++i) v[c * layout->dim() + i] = piece[i];
    }
    return v;
  }

  PiecewiseKForm devectorize(const RatVec& v) const {
    PiecewiseKForm w;
    w.split = split;
    for (int c = 0; c < split->n_children(); ++c) {
      RatVec piece(layout->dim());
      for (int i = 0; i < layout->dim(); ++i) piece[i] = v[c * layout->dim() + i];
      w.pieces.push_back(layout->devectorize(piece));
    }
    return w;
  }

  /// Coordinates of a raw vector with respect to the canonical basis, or
  /// nullopt when the vector is not in the space.
  std::optional<RatVec> coordinates(const RatVec& raw) const {
    RatVec x(dim());
    for (int j = 0; j < dim(); ++j) x[j] = raw[free_cols[j]];
    RatVec back = basis.apply(x);
    for (int i = 0; i < raw_dim(); ++i)
      if (!(back[i] == raw[i])) return std::nullopt;
    return x;
  }
};

inline SpaceBasis build_space_uncached(const SpaceSpec& spec, const AlfeldSplit& split) {
  SpaceBasis sb;
  sb.spec = spec;
  sb.split = &split;
  sb.layout = std::make_shared<FormLayout>(spec.n, std::max(spec.r, -1), spec.k);
  if (spec.r < 0) {
    sb.constraints = RatMatrix(0, 0);
    sb.basis = RatMatrix(0, 0);
    return sb;
  }
  sb.constraints = constraint_matrix(spec, split);
  detail::Rref rr = detail::reduced_echelon(sb.constraints);
  int nc = sb.constraints.cols();
  std::vector<bool> is_pivot(nc, false);
  for (int c : rr.pivot_cols) is_pivot[c] = true;
  for (int j = 0; j < nc; ++j)
    if (!is_pivot[j]) sb.free_cols.push_back(j);
  RatMatrix ns(nc, static_cast<int>(sb.free_cols.size()));
  for (size_t fj = 0; fj < sb.free_cols.size(); ++fj) {
    ns.at(sb.free_cols[fj], static_cast<int>(fj)) = Rational(1);
    for (size_t i = 0; i < rr.rows.size(); ++i) ns.at(rr.pivot_cols[i], static_cast<int>(fj)) = -rr.rows[i][sb.free_cols[fj]];
  }
  sb.basis = std::move(ns);
  return sb;
}

/// Mutex-guarded memo of built spaces, keyed by (spec, split identity).
class SpaceCache {
public:
  std::shared_ptr<const SpaceBasis> get_or_build(const SpaceSpec& spec, const AlfeldSplit& split) {
    Key key{spec, &split};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    auto built = std::make_shared<const SpaceBasis>(build_space_uncached(spec, split));
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, fresh] = map_.emplace(key, built);
    return it->second;
  }
  void clear() {
    std::lock_guard<std::mutex> lock(mu_);
    map_.clear();
  }

private:
  using Key = std::pair<SpaceSpec, const AlfeldSplit*>;
  std::mutex mu_;
  std::map<Key, std::shared_ptr<const SpaceBasis>> map_;
};

inline SpaceCache& default_space_cache() {
  static SpaceCache cache;
  return cache;
}

inline std::shared_ptr<const SpaceBasis> build_space(const SpaceSpec& spec, const AlfeldSplit& split,
                                                     SpaceCache* cache = nullptr) {
  if (!spec.valid()) throw std::invalid_argument("build_space: invalid spec " + spec.str());
  return (cache ? *cache : default_space_cache()).get_or_build(spec, split);
}

// ---------------------------------------------------------------------------
// Closed-form dimensions
// ---------------------------------------------------------------------------

inline bool has_dimension_formula(const SpaceSpec& s) {
  if (!s.valid()) return false;
  switch (s.fam) {
    case Family::V: return !s.ring;
    case Family::Vd: return !s.ring;
    case Family::M: return !s.ring || s.k == s.n;  // ring M at top degree = ring Md
    case Family::Md: return true;
    case Family::Mc:
    case Family::Vc: return true;
  }
  return false;
}

inline long dimension_formula(const SpaceSpec& s) {
  if (!has_dimension_formula(s)) throw std::invalid_argument("dimension_formula: no closed form for " + s.str());
  long n = s.n, k = s.k, r = s.r;
  if (r < 0) return 0;
  auto clamp0 = [](long x) { return x < 0 ? 0L : x; };
  switch (s.fam) {
    case Family::V:
      return (n + 1) * binom(r + n, n) * binom(n, k);
    case Family::Vd:
      return binom(r + k, k) * (binom(r + n + 1, n - k + 1) - binom(r, n + 1 - k));
    case Family::M:
      if (!s.ring) return binom(n, k) * (binom(r + n + 1, n + 1) - binom(r, n + 1));
      // fallthrough only valid at k = n, where the ring space equals ring Md
      return dimension_formula(SpaceSpec{Family::Md, true, s.n, s.k, s.r});
    case Family::Md: {
      if (!s.ring) {
        long v = binom(n, k + 1) * (binom(r + n, n + 1) - binom(r - 1, n + 1)) +
                 binom(n, k) * (binom(r + n + 1, n + 1) - binom(r, n + 1)) -
                 binom(r + k, k + 1) * (binom(r + n, n - k) - binom(r - 1, n - k));
        return clamp0(v);
      }
      long v = binom(n, k + 1) * (binom(r + n - 1, n + 1) - binom(r - 2, n + 1)) +
               binom(n, k) * (binom(r + n, n + 1) - binom(r - 1, n + 1)) -
               binom(r + k, k + 1) * (binom(r + n - 1, n - k) - binom(r - 2, n - k));
      if (k == n) v -= 1;  // the zero-mean constraint
      return clamp0(v);
    }
    case Family::Mc: {
      // family degree rho = s.r; cubic counts are stated in terms of r = rho+1
      long rho = r, rr = rho + 1;
      if (!s.ring) {
        if (rho <= 1) return 3 * binom(rho + 3, 3);  // full vector polynomials
        return clamp0((rr - 2) * (2 * rr * rr + rr + 9));
      }
      if (rho <= 1) return 0;
      return clamp0((rr - 3) * (2 * rr * rr - 3 * rr + 10));
    }
    case Family::Vc: {
      long rho = r, rr = rho + 2;
      if (!s.ring) {
        if (rho == 0) return 3;  // continuous piecewise constants
        return clamp0((2 * rr - 5) * (rr * rr + rr + 3));
      }
      return clamp0(2 * rr * rr * rr - 5 * rr * rr + 3 * rr - 15);
    }
  }
  throw std::logic_error("dimension_formula: unreachable");
}

struct DimensionReport {
  SpaceSpec spec;
  long dim_computed = -1;
  long dim_formula = -1;
  bool pass = false;
};

inline DimensionReport verify_dimension(const SpaceSpec& spec, const AlfeldSplit& split, SpaceCache* cache = nullptr) {
  DimensionReport rep;
  rep.spec = spec;
  rep.dim_computed = build_space(spec, split, cache)->dim();
  rep.dim_formula = dimension_formula(spec);
  rep.pass = (rep.dim_computed == rep.dim_formula);
  return rep;
}

// ---------------------------------------------------------------------------
// Exterior derivative between space bases, exactness of the sequences
// ---------------------------------------------------------------------------

/// Matrix of d from basis a to the coordinates of basis b.  Throws
/// VerificationError when d(a) is not contained in span(b).
inline RatMatrix d_matrix(const SpaceBasis& a, const SpaceBasis& b) {
  if (b.spec.k != a.spec.k + 1) throw std::invalid_argument("d_matrix: target degree must be k+1");
  RatMatrix m(b.dim(), a.dim());
  for (int j = 0; j < a.dim(); ++j) {
    PiecewiseKForm w = a.element(j);
    PiecewiseKForm dw = w.d();
    auto coords = b.coordinates(b.vectorize(dw));
    if (!coords) throw VerificationError("d_matrix: image of d leaves the target space (wrong pairing?)");
    for (int i = 0; i < b.dim(); ++i) m.at(i, j) = (*coords)[i];
  }
  return m;
}

struct SequenceSpec {
  std::string name;
  std::vector<SpaceSpec> slots;
  int head_dim = 0;  // dim of the head kernel: 1 for an R-headed sequence, 0 for ring
};

/// The three local sequences with continuity upgraded at the vertices,
/// without boundary conditions (n = 3), at master degree r.
inline SequenceSpec c2_sequence(int id, int r) {
  SequenceSpec seq;
  seq.head_dim = 1;
  seq.name = "C2-" + std::to_string(id);
  switch (id) {
    case 1:
      seq.slots = {SpaceSpec{Family::Md, false, 3, 0, r}, SpaceSpec{Family::Md, false, 3, 1, r - 1},
                   SpaceSpec{Family::Md, false, 3, 2, r - 2}, SpaceSpec{Family::Md, false, 3, 3, r - 3}};
      break;
    case 2:
      seq.slots = {SpaceSpec{Family::Md, false, 3, 0, r}, SpaceSpec{Family::Md, false, 3, 1, r - 1},
                   SpaceSpec{Family::M, false, 3, 2, r - 2}, SpaceSpec{Family::Vd, false, 3, 3, r - 3}};
      break;
    case 3:
      seq.slots = {SpaceSpec{Family::Md, false, 3, 0, r}, SpaceSpec{Family::Mc, false, 3, 1, r - 1},
                   SpaceSpec{Family::Vc, false, 3, 2, r - 2}, SpaceSpec{Family::Vd, false, 3, 3, r - 3}};
      break;
    default:
      throw std::invalid_argument("c2_sequence: id must be 1, 2, or 3");
  }
  return seq;
}

/// Ring sequences with homogeneous boundary conditions, general n.  The
/// variant t marks the slot where full smoothness steps down: slots below t
/// are ring Md, slot t is ring M, and slots above are ring Vd.  In 3D,
/// t = 3, 2, 1 are the three displayed sequences.
inline SequenceSpec ring_sequence(int n, int t, int r) {
  if (t < 1 || t > n) throw std::invalid_argument("ring_sequence: variant out of range");
  SequenceSpec seq;
  seq.head_dim = 0;
  seq.name = "ring-" + std::to_string(n + 1 - t);
  seq.slots.clear();
  for (int k = 0; k <= n; ++k) {
    Family f = (k < t) ? Family::Md : (k == t ? Family::M : Family::Vd);
    seq.slots.push_back(SpaceSpec{f, true, n, k, r - k});
  }
  return seq;
}

struct SlotReport {
  SpaceSpec spec;
  long dim = 0;
  long d_rank = 0;       // rank of d out of this slot (0 at the last slot)
  long kernel_dim = 0;   // dim - d_rank
  bool exact = false;    // kernel equals the incoming range (or head)
};

struct SequenceReport {
  std::string name;
  std::vector<SlotReport> slots;
  long alternating_sum = 0;
  bool pass = false;
};

inline SequenceReport check_exact(const SequenceSpec& seq, const AlfeldSplit& split, SpaceCache* cache = nullptr) {
  SequenceReport rep;
  rep.name = seq.name;
  std::vector<std::shared_ptr<const SpaceBasis>> spaces;
  for (const auto& s : seq.slots) spaces.push_back(build_space(s, split, cache));
  int m = static_cast<int>(spaces.size());
  std::vector<long> ranks(m, 0);
  for (int i = 0; i + 1 < m; ++i) {
    RatMatrix d = d_matrix(*spaces[i], *spaces[i + 1]);
    ranks[i] = rank_exact(d);
  }
  rep.pass = true;
  long sign = 1;
  for (int i = 0; i < m; ++i) {
    SlotReport sr;
    sr.spec = seq.slots[i];
    sr.dim = spaces[i]->dim();
    sr.d_rank = ranks[i];
    sr.kernel_dim = sr.dim - sr.d_rank;
    long expected_kernel = (i == 0) ? seq.head_dim : ranks[i - 1];
    sr.exact = (sr.kernel_dim == expected_kernel);
    rep.pass = rep.pass && sr.exact;
    rep.alternating_sum += sign * sr.dim;
    sign = -sign;
    rep.slots.push_back(sr);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Potentials: solve d(rho) = omega in a continuous target space
// ---------------------------------------------------------------------------

/// Finds rho in the target space with d(rho) = omega, for omega a closed
/// member of the conforming (Vd) space one degree below the target.  The
/// membership and closedness preconditions are checked; an unsolvable
/// system is a verification failure.
inline PiecewiseKForm find_potential(const PiecewiseKForm& omega, const SpaceSpec& target, const AlfeldSplit& split,
                                     SpaceCache* cache = nullptr) {
  if (target.k < 1) throw std::invalid_argument("find_potential: target must have k >= 1 to take d");
  SpaceSpec source{Family::Vd, target.ring, target.n, target.k + 1, target.r - 1};
  if (source.k > target.n) throw std::invalid_argument("find_potential: omega degree exceeds n");
  auto src = build_space(source, split, cache);
  RatVec raw = src->vectorize(omega);
  // membership in the (ring) Vd space
  for (const auto& x : src->constraints.apply(raw))
    if (!x.is_zero()) throw std::invalid_argument("find_potential: omega is not in " + source.str());
  // closedness
  if (source.k < target.n && !omega.d().is_zero()) throw std::invalid_argument("find_potential: d(omega) != 0");
  auto tgt = build_space(target, split, cache);
  RatMatrix d(src->raw_dim(), tgt->dim());
  for (int j = 0; j < tgt->dim(); ++j) {
    RatVec col = src->vectorize(tgt->element(j).d());
    for (int i = 0; i < src->raw_dim(); ++i) d.at(i, j) = col[i];
  }
  auto x = solve_exact(d, raw);
  if (!x) throw VerificationError("find_potential: no potential in " + target.str() + " (theorem violated)");
  RatVec rho_raw = tgt->basis.apply(*x);
  PiecewiseKForm rho = tgt->devectorize(rho_raw);
  if (!(rho.d() == omega)) throw std::logic_error("find_potential: solver returned a wrong potential");
  return rho;
}

// ---------------------------------------------------------------------------
// Vertex smoothness probe
// ---------------------------------------------------------------------------

struct SmoothnessReport {
  int k = 0, r = 0;
  long dim_plain = 0;
  long dim_with_vertex_constraints = 0;
  bool pass = false;
};

/// Adds explicit C^{2-k} point constraints at every vertex of the split to
/// the Md space and checks that the dimension does not change.
inline SmoothnessReport vertex_smoothness_probe(int k, int r, const AlfeldSplit& split, SpaceCache* cache = nullptr) {
  if (split.dim() != 3 || k < 0 || k > 2) throw std::invalid_argument("vertex_smoothness_probe: n=3, k in {0,1,2}");
  SpaceSpec spec{Family::Md, false, 3, k, r};
  auto sb = build_space(spec, split, cache);
  SmoothnessReport rep;
  rep.k = k;
  rep.r = r;
  rep.dim_plain = sb->dim();
  FormLayout lay(3, r, k);
  int raw_dim = 4 * lay.dim();
  RatMatrix stacked = sb->constraints;
  auto alphas = monomials_up_to(3, 2 - k);
  for (const auto& v : split.subsimplices(0)) {
    auto children = split.children_containing(v);
    Point pt = split.vertex_point(v.verts[0]);
    for (size_t c = 1; c < children.size(); ++c)
      for (size_t si = 0; si < lay.sigmas.size(); ++si)
        for (const auto& alpha : alphas) {
          RatVec a = rows::jet_row(lay, raw_dim, children[c], static_cast<int>(si), alpha, pt);
          RatVec b = rows::jet_row(lay, raw_dim, children[0], static_cast<int>(si), alpha, pt);
          for (int j = 0; j < raw_dim; ++j) a[j] -= b[j];
          stacked.append_row(a);
        }
  }
  rep.dim_with_vertex_constraints = raw_dim - rank_exact(stacked);
  rep.pass = (rep.dim_plain == rep.dim_with_vertex_constraints);
  return rep;
}

}  // namespace alfeld
