// The 3D degree-of-freedom sets for the eight local spaces, their
// unisolvence, the induced projections, the commuting diagrams, and the
// tangential surface operators.  Every functional is materialized as an
// exact row vector over raw per-child proxy coefficients.
#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "alfeld/splitspaces.hpp"

namespace alfeld {

// ---------------------------------------------------------------------------
// Vector calculus on polynomial fields
// ---------------------------------------------------------------------------

inline std::vector<Poly> grad3(const Poly& p) { return {p.partial(0), p.partial(1), p.partial(2)}; }

inline std::vector<Poly> curl3(const std::vector<Poly>& v) {
  return {v[2].partial(1) - v[1].partial(2), v[0].partial(2) - v[2].partial(0), v[1].partial(0) - v[0].partial(1)};
}

inline Poly div3(const std::vector<Poly>& v) { return v[0].partial(0) + v[1].partial(1) + v[2].partial(2); }

inline std::vector<Poly> cross_cp(const Vec& a, const std::vector<Poly>& v) {
  return {Rational(a[1]) * v[2] - a[2] * v[1], Rational(a[2]) * v[0] - a[0] * v[2],
          Rational(a[0]) * v[1] - a[1] * v[0]};
}

inline std::vector<Poly> cross_pc(const std::vector<Poly>& v, const Vec& a) {
  return {v[1] * Poly::constant(v[1].nvars(), a[2]) - v[2] * Poly::constant(v[2].nvars(), a[1]),
          v[2] * Poly::constant(v[2].nvars(), a[0]) - v[0] * Poly::constant(v[0].nvars(), a[2]),
          v[0] * Poly::constant(v[0].nvars(), a[1]) - v[1] * Poly::constant(v[1].nvars(), a[0])};
}

inline Poly dot_cp(const Vec& a, const std::vector<Poly>& v) {
  Poly s(v[0].nvars());
  for (int i = 0; i < 3; ++i) s += a[i] * v[i];
  return s;
}

// Tangential surface operators on a plane with (non-unit) normal N.  All are
// consistent rational rescalings of their unit-normal counterparts.
inline std::vector<Poly> surface_grad(const Poly& phi, const Vec& N) { return cross_cp(N, cross_pc(grad3(phi), N)); }
inline std::vector<Poly> surface_rot(const Poly& phi, const Vec& N) { return cross_pc(grad3(phi), N); }
inline Poly surface_curl(const std::vector<Poly>& psi, const Vec& N) { return dot_cp(N, curl3(psi)); }
inline Poly surface_div(const std::vector<Poly>& psi, const Vec& N) { return dot_cp(N, curl3(cross_cp(N, psi))); }

// ---------------------------------------------------------------------------
// Proxy fields
// ---------------------------------------------------------------------------

/// Piecewise scalar or vector field over a split, the vector proxy of a
/// piecewise k-form.
struct ProxyField {
  const AlfeldSplit* split = nullptr;
  int k = 0;
  std::vector<std::vector<Poly>> comp;  // comp[child][i]

  int ncomp() const { return (k == 0 || k == 3) ? 1 : 3; }

  static ProxyField from_piecewise(const PiecewiseKForm& w) {
    ProxyField f;
    f.split = w.split;
    f.k = w.degree();
    for (const auto& p : w.pieces) f.comp.push_back(form_to_proxy(p));
    return f;
  }

  static ProxyField constant_field(const AlfeldSplit& sp, int k, const std::vector<Poly>& comps) {
    ProxyField f;
    f.split = &sp;
    f.k = k;
    for (int c = 0; c < sp.n_children(); ++c) f.comp.push_back(comps);
    return f;
  }

  PiecewiseKForm to_piecewise() const {
    PiecewiseKForm w;
    w.split = split;
    for (const auto& c : comp) w.pieces.push_back(proxy_to_form(k, c));
    return w;
  }

  int max_degree() const {
    int d = -1;
    for (const auto& c : comp)
      for (const auto& p : c) d = std::max(d, p.degree());
    return d;
  }
};

/// Raw proxy coefficient layout: child outer, component, then monomial.
struct ProxyLayout {
  int ncomp, D;
  std::vector<Exponents> monos;
  std::map<Exponents, int, GradedLexLess> mono_index;
  int n_children;

  ProxyLayout(int ncomp_, int D_, int children) : ncomp(ncomp_), D(D_), n_children(children) {
    monos = monomials_up_to(3, D);
    for (size_t i = 0; i < monos.size(); ++i) mono_index[monos[i]] = static_cast<int>(i);
  }
  int dim() const { return n_children * ncomp * static_cast<int>(monos.size()); }
  int index(int child, int comp, int mono) const {
    return (child * ncomp + comp) * static_cast<int>(monos.size()) + mono;
  }
  RatVec vectorize(const ProxyField& f) const {
    RatVec v(dim());
    for (int c = 0; c < n_children; ++c)
      for (int i = 0; i < ncomp; ++i)
        for (const auto& [e, x] : f.comp[c][i].terms()) {
          auto it = mono_index.find(e);
          if (it == mono_index.end()) throw std::invalid_argument("ProxyLayout: degree exceeds layout");
          v[index(c, i, it->second)] = x;
        }
    return v;
  }
};

// ---------------------------------------------------------------------------
// Degree-of-freedom descriptions
// ---------------------------------------------------------------------------

enum class DofOp { Jet, DivJet, EdgeMoment, FaceMoment, CellMoment };
enum class DofDeriv { Value, Grad, Curl, Div };

struct DofDesc {
  std::string block;
  DofOp op;
  std::vector<int> entity;  // parent vertex indices (sorted); empty for cells
  int child = -1;           // evaluation child for point/edge/face data
  // Jet / DivJet
  Exponents alpha;
  int comp = 0;
  // moments
  DofDeriv deriv = DofDeriv::Value;
  std::vector<Poly> test;                      // entity-local test, dotted with the derived field
  std::vector<std::vector<Poly>> cell_test;    // per-child test for cell moments
};

struct DofSet {
  std::string space;
  int r = 0;
  int target_k = 0;  // proxy form degree of the target space
  std::vector<DofDesc> dofs;

  std::map<std::string, int> count_by_block() const {
    std::map<std::string, int> m;
    for (const auto& d : dofs) m[d.block]++;
    return m;
  }
};

namespace dofdetail {

// Derived monomial field: the integrand contribution of the unit coefficient
// (comp i, exponent beta) under the chosen derivative, as polynomial
// components in ambient coordinates.
inline std::vector<Poly> derived_monomial(DofDeriv deriv, int ncomp, int i, const Exponents& beta) {
  Poly mono = Poly::monomial(beta, Rational(1));
  switch (deriv) {
    case DofDeriv::Value: {
      if (ncomp == 1) return {mono};
      std::vector<Poly> v(3, Poly(3));
      v[i] = mono;
      return v;
    }
    case DofDeriv::Grad:
      return grad3(mono);  // scalar input
    case DofDeriv::Curl: {
      std::vector<Poly> v(3, Poly(3));
      v[i] = mono;
      return curl3(v);
    }
    case DofDeriv::Div: {
      return {mono.partial(i)};
    }
  }
  return {};
}

struct EntityTable {
  std::vector<Poly> restricted;  // layout monomials composed with the parametrization
  int s;                         // entity dimension
};

inline EntityTable entity_table(const AlfeldSplit& sp, const std::vector<int>& entity, const ProxyLayout& lay) {
  std::vector<Point> pts;
  for (int v : entity) pts.push_back(sp.vertex_point(v));
  EntityTable t;
  t.s = static_cast<int>(pts.size()) - 1;
  t.restricted = rows::restrict_monomials(parametrization(pts), lay.monos);
  return t;
}

}  // namespace dofdetail

/// Materializes every functional of the set as a row over the raw proxy
/// layout of degree D (D at least the target degree; higher D evaluates the
/// same functionals on higher-degree inputs).
inline RatMatrix dof_rows(const DofSet& ds, const AlfeldSplit& sp, int D) {
  int ncomp = (ds.target_k == 0 || ds.target_k == 3) ? 1 : 3;
  ProxyLayout lay(ncomp, D, sp.n_children());
  RatMatrix rows(static_cast<int>(ds.dofs.size()), lay.dim());

  // caches
  std::map<std::vector<int>, dofdetail::EntityTable> tables;
  auto table_for = [&](const std::vector<int>& entity) -> const dofdetail::EntityTable& {
    auto it = tables.find(entity);
    if (it == tables.end()) it = tables.emplace(entity, dofdetail::entity_table(sp, entity, lay)).first;
    return it->second;
  };
  int max_cell_deg = 0;
  for (const auto& d : ds.dofs)
    if (d.op == DofOp::CellMoment)
      for (const auto& ct : d.cell_test)
        for (const auto& p : ct) max_cell_deg = std::max(max_cell_deg, p.degree());
  std::vector<std::map<Exponents, Rational, GradedLexLess>> cell_table(sp.n_children());
  {
    bool any_cell = false;
    for (const auto& d : ds.dofs) any_cell = any_cell || (d.op == DofOp::CellMoment);
    if (any_cell) {
      auto monos = monomials_up_to(3, D + max_cell_deg);
      for (int c = 0; c < sp.n_children(); ++c) {
        auto restricted = rows::restrict_monomials(parametrization(sp.child(c).vertices()), monos);
        Rational jac = sp.child(c).volume() * Rational(6);
        for (size_t m = 0; m < monos.size(); ++m)
          cell_table[c][monos[m]] = jac * reference_simplex_integral(restricted[m]);
      }
    }
  }
  auto integrate_cell = [&](int c, const Poly& p) {
    Rational s(0);
    for (const auto& [e, x] : p.terms()) s += x * cell_table[c].at(e);
    return s;
  };

  for (size_t di = 0; di < ds.dofs.size(); ++di) {
    const DofDesc& d = ds.dofs[di];
    int row = static_cast<int>(di);
    switch (d.op) {
      case DofOp::Jet: {
        Point pt = sp.vertex_point(d.entity.at(0));
        for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
          Poly m = Poly::monomial(lay.monos[mi], Rational(1));
          for (size_t j = 0; j < d.alpha.size(); ++j)
            for (int a = 0; a < d.alpha[j]; ++a) m = m.partial(static_cast<int>(j));
          if (m.is_zero()) continue;
          rows.at(row, lay.index(d.child, d.comp, static_cast<int>(mi))) = m.eval(pt);
        }
        break;
      }
      case DofOp::DivJet: {
        Point pt = sp.vertex_point(d.entity.at(0));
        for (int i = 0; i < 3; ++i)
          for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
            Poly m = Poly::monomial(lay.monos[mi], Rational(1)).partial(i);
            if (m.is_zero()) continue;
            rows.at(row, lay.index(d.child, i, static_cast<int>(mi))) = m.eval(pt);
          }
        break;
      }
      case DofOp::EdgeMoment:
      case DofOp::FaceMoment: {
        const auto& tab = table_for(d.entity);
        int in_comps = (d.deriv == DofDeriv::Grad) ? 1 : ncomp;
        for (int i = 0; i < in_comps; ++i)
          for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
            auto pieces = dofdetail::derived_monomial(d.deriv, ncomp, i, lay.monos[mi]);
            Poly integrand(tab.s);
            for (size_t pi = 0; pi < pieces.size(); ++pi) {
              if (pieces[pi].is_zero() || d.test[pi].is_zero()) continue;
              // pieces are single monomials with a scalar factor
              for (const auto& [e, x] : pieces[pi].terms())
                integrand += x * (tab.restricted[lay.mono_index.at(e)] * d.test[pi]);
            }
            if (integrand.is_zero()) continue;
            rows.at(row, lay.index(d.child, i, static_cast<int>(mi))) = reference_simplex_integral(integrand);
          }
        break;
      }
      case DofOp::CellMoment: {
        int in_comps = (d.deriv == DofDeriv::Grad) ? 1 : ncomp;
        for (int c = 0; c < sp.n_children(); ++c)
          for (int i = 0; i < in_comps; ++i)
            for (size_t mi = 0; mi < lay.monos.size(); ++mi) {
              auto pieces = dofdetail::derived_monomial(d.deriv, ncomp, i, lay.monos[mi]);
              Rational total(0);
              for (size_t pi = 0; pi < pieces.size(); ++pi) {
                if (pieces[pi].is_zero() || d.cell_test[c][pi].is_zero()) continue;
                total += integrate_cell(c, pieces[pi] * d.cell_test[c][pi]);
              }
              if (!total.is_zero()) rows.at(row, lay.index(c, i, static_cast<int>(mi))) += total;
            }
        break;
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// The eight DOF sets
// ---------------------------------------------------------------------------

enum class DofSpace { Md0, Md1, Md2, Md3, Mc1, M2, Vc2, Vd3 };

inline std::string dof_space_name(DofSpace s) {
  switch (s) {
    case DofSpace::Md0: return "Md0";
    case DofSpace::Md1: return "Md1";
    case DofSpace::Md2: return "Md2";
    case DofSpace::Md3: return "Md3";
    case DofSpace::Mc1: return "Mc1";
    case DofSpace::M2: return "M2";
    case DofSpace::Vc2: return "Vc2";
    case DofSpace::Vd3: return "Vd3";
  }
  return "?";
}

inline SpaceSpec dof_target_spec(DofSpace s, int r) {
  switch (s) {
    case DofSpace::Md0: return SpaceSpec{Family::Md, false, 3, 0, r};
    case DofSpace::Md1: return SpaceSpec{Family::Md, false, 3, 1, r - 1};
    case DofSpace::Md2: return SpaceSpec{Family::Md, false, 3, 2, r - 2};
    case DofSpace::Md3: return SpaceSpec{Family::Md, false, 3, 3, r - 3};
    case DofSpace::Mc1: return SpaceSpec{Family::Mc, false, 3, 1, r - 1};
    case DofSpace::M2: return SpaceSpec{Family::M, false, 3, 2, r - 2};
    case DofSpace::Vc2: return SpaceSpec{Family::Vc, false, 3, 2, r - 2};
    case DofSpace::Vd3: return SpaceSpec{Family::Vd, false, 3, 3, r - 3};
  }
  throw std::logic_error("dof_target_spec: unreachable");
}

namespace dofdetail {

struct Geometry {
  const AlfeldSplit* sp;
  std::vector<int> vertex_child;                  // evaluation child per parent vertex
  std::vector<std::array<int, 2>> edges;          // sorted pairs, lex order
  std::vector<int> edge_child;
  std::vector<std::array<int, 3>> faces;          // sorted triples, lex order
  std::vector<int> face_child;                    // owning child (the missing index)
  std::vector<Vec> face_N;                        // outward rational normal
  std::vector<std::array<Vec, 2>> face_tangents;  // parametrization tangents E1, E2

  explicit Geometry(const AlfeldSplit& split) : sp(&split) {
    for (int v = 0; v < 4; ++v) vertex_child.push_back(v == 0 ? 1 : 0);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        edges.push_back({a, b});
        int c = 0;
        while (c == a || c == b) ++c;
        edge_child.push_back(c);
      }
    std::vector<std::array<int, 3>> fs;
    for (int i = 0; i < 4; ++i) {
      std::array<int, 3> f;
      int t = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i) f[t++] = j;
      fs.push_back(f);
    }
    std::sort(fs.begin(), fs.end());
    for (const auto& f : fs) {
      faces.push_back(f);
      int missing = 0 + 1 + 2 + 3 - f[0] - f[1] - f[2];
      face_child.push_back(missing);
      std::vector<Point> pts{split.parent().vertex(f[0]), split.parent().vertex(f[1]), split.parent().vertex(f[2])};
      face_N.push_back(face_normal(pts, centroid(split.parent().vertices())));
      face_tangents.push_back({sub(pts[1], pts[0]), sub(pts[2], pts[0])});
    }
  }

  std::vector<int> face_entity(int fi) const { return {faces[fi][0], faces[fi][1], faces[fi][2]}; }
  std::vector<int> edge_entity(int ei) const { return {edges[ei][0], edges[ei][1]}; }
};

// Scalar polynomial tests on an entity in its reference coordinates.
inline std::vector<Poly> scalar_tests(int s, int deg) {
  std::vector<Poly> out;
  if (deg < 0) return out;
  for (const auto& e : monomials_up_to(s, deg)) out.push_back(Poly::monomial(e, Rational(1)));
  return out;
}

// Vector tests on an entity: each Cartesian direction times each monomial.
inline std::vector<std::vector<Poly>> cartesian_vector_tests(int s, int deg) {
  std::vector<std::vector<Poly>> out;
  for (int i = 0; i < 3; ++i)
    for (const auto& m : scalar_tests(s, deg)) {
      std::vector<Poly> v(3, Poly(s));
      v[i] = m;
      out.push_back(v);
    }
  return out;
}

// A constant 3D vector times scalar tests.
inline std::vector<std::vector<Poly>> directed_tests(const Vec& dir, int s, int deg) {
  std::vector<std::vector<Poly>> out;
  for (const auto& m : scalar_tests(s, deg)) {
    std::vector<Poly> v(3, Poly(s));
    for (int i = 0; i < 3; ++i) v[i] = Rational(dir[i]) * m;
    out.push_back(v);
  }
  return out;
}

// Tangential vector tests spanning [P_deg]^2 in the face frame.
inline std::vector<std::vector<Poly>> tangential_tests(const std::array<Vec, 2>& E, int deg) {
  std::vector<std::vector<Poly>> out;
  for (int t = 0; t < 2; ++t)
    for (const auto& m : scalar_tests(2, deg)) {
      std::vector<Poly> v(3, Poly(2));
      for (int i = 0; i < 3; ++i) v[i] = Rational(E[t][i]) * m;
      out.push_back(v);
    }
  return out;
}

// Face Raviart-Thomas space D_s = [P_{s-1}]^2_t + x_F P~_{s-1}, as tangential
// 3D fields over the face parameters; dim = s(s+2), empty for s <= 0.
inline std::vector<std::vector<Poly>> face_rt_tests(const std::array<Vec, 2>& E, int s) {
  std::vector<std::vector<Poly>> out = tangential_tests(E, s - 1);
  if (s >= 1) {
    for (const auto& e : monomials_up_to(2, s - 1)) {
      if (total_degree(e) != s - 1) continue;
      Poly m = Poly::monomial(e, Rational(1));
      std::vector<Poly> v(3, Poly(2));
      for (int i = 0; i < 3; ++i)
        v[i] = Rational(E[0][i]) * (m * Poly::variable(2, 0)) + Rational(E[1][i]) * (m * Poly::variable(2, 1));
      out.push_back(v);
    }
  }
  return out;
}

// Per-child interior test fields from a ring-space basis under an optional
// derivative, greedily reduced to an independent set in canonical order.
inline std::vector<std::vector<std::vector<Poly>>> interior_tests(const AlfeldSplit& sp, const SpaceSpec& ring_spec,
                                                                  bool apply_d, SpaceCache* cache) {
  auto sb = build_space(ring_spec, sp, cache);
  std::vector<std::vector<std::vector<Poly>>> out;
  int out_k = ring_spec.k + (apply_d ? 1 : 0);
  int out_deg = ring_spec.r - (apply_d ? 1 : 0);
  if (out_deg < 0) return out;
  int ncomp = (out_k == 0 || out_k == 3) ? 1 : 3;
  ProxyLayout lay(ncomp, out_deg, sp.n_children());
  GreedySpan span;
  for (int j = 0; j < sb->dim(); ++j) {
    PiecewiseKForm w = sb->element(j);
    if (apply_d) w = w.d();
    ProxyField f = ProxyField::from_piecewise(w);
    if (!span.try_add(lay.vectorize(f))) continue;
    out.push_back(f.comp);
  }
  return out;
}

}  // namespace dofdetail

/// Builds one of the eight DOF sets at master degree r (the counts follow
/// the per-space lists; interior moments test against ring-space images).
inline DofSet build_dofset(DofSpace space, int r, const AlfeldSplit& sp, SpaceCache* cache = nullptr) {
  int min_r = (space == DofSpace::Vc2 || space == DofSpace::Mc1) ? 3 : 5;
  if (r < min_r) throw std::invalid_argument("build_dofset: degree below supported range");
  dofdetail::Geometry g(sp);
  DofSet ds;
  ds.space = dof_space_name(space);
  ds.r = r;
  SpaceSpec target = dof_target_spec(space, r);
  ds.target_k = target.k;

  auto add_vertex_jets = [&](int order, const std::string& block) {
    int ncomp = (target.k == 0 || target.k == 3) ? 1 : 3;
    for (int v = 0; v < 4; ++v)
      for (const auto& alpha : monomials_up_to(3, order))
        for (int comp = 0; comp < ncomp; ++comp) {
          DofDesc d;
          d.block = block;
          d.op = DofOp::Jet;
          d.entity = {v};
          d.child = g.vertex_child[v];
          d.alpha = alpha;
          d.comp = comp;
          ds.dofs.push_back(std::move(d));
        }
  };
  auto add_vertex_div = [&](const std::string& block) {
    for (int v = 0; v < 4; ++v) {
      DofDesc d;
      d.block = block;
      d.op = DofOp::DivJet;
      d.entity = {v};
      d.child = g.vertex_child[v];
      ds.dofs.push_back(std::move(d));
    }
  };
  auto add_edge_moments = [&](DofDeriv deriv, const std::vector<std::vector<Poly>>& tests, const std::string& block) {
    for (size_t ei = 0; ei < g.edges.size(); ++ei)
      for (const auto& t : tests) {
        DofDesc d;
        d.block = block;
        d.op = DofOp::EdgeMoment;
        d.entity = g.edge_entity(static_cast<int>(ei));
        d.child = g.edge_child[ei];
        d.deriv = deriv;
        d.test = t;
        ds.dofs.push_back(std::move(d));
      }
  };
  auto add_face_moments = [&](DofDeriv deriv, const std::function<std::vector<std::vector<Poly>>(int)>& tests_of_face,
                              const std::string& block) {
    for (size_t fi = 0; fi < g.faces.size(); ++fi)
      for (const auto& t : tests_of_face(static_cast<int>(fi))) {
        DofDesc d;
        d.block = block;
        d.op = DofOp::FaceMoment;
        d.entity = g.face_entity(static_cast<int>(fi));
        d.child = g.face_child[fi];
        d.deriv = deriv;
        d.test = t;
        ds.dofs.push_back(std::move(d));
      }
  };
  // edge moments attached to (face, edge) incidences, evaluated on the face's child
  auto add_edge_face_moments = [&](DofDeriv deriv, const std::function<std::vector<std::vector<Poly>>(int)>& tests_of_face,
                                   const std::string& block) {
    for (size_t fi = 0; fi < g.faces.size(); ++fi) {
      auto tests = tests_of_face(static_cast<int>(fi));
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          std::vector<int> edge{g.faces[fi][a], g.faces[fi][b]};
          for (const auto& t : tests) {
            DofDesc d;
            d.block = block;
            d.op = DofOp::EdgeMoment;
            d.entity = edge;
            d.child = g.face_child[fi];
            d.deriv = deriv;
            d.test = t;
            ds.dofs.push_back(std::move(d));
          }
        }
    }
  };
  auto add_cell_moments = [&](DofDeriv deriv, const std::vector<std::vector<std::vector<Poly>>>& tests,
                              const std::string& block) {
    for (const auto& t : tests) {
      DofDesc d;
      d.block = block;
      d.op = DofOp::CellMoment;
      d.deriv = deriv;
      d.cell_test = t;
      ds.dofs.push_back(std::move(d));
    }
  };
  auto cell_scalar_tests = [&](const SpaceSpec& ring) {
    // scalar ring-space bases as per-child single-component tests
    std::vector<std::vector<std::vector<Poly>>> out;
    for (auto& f : dofdetail::interior_tests(sp, ring, false, cache)) out.push_back(f);
    return out;
  };
  auto one_cell_test = [&]() {
    std::vector<std::vector<std::vector<Poly>>> out;
    std::vector<std::vector<Poly>> ones;
    for (int c = 0; c < 4; ++c) ones.push_back({Poly::constant(3, Rational(1))});
    out.push_back(ones);
    return out;
  };

  using dofdetail::cartesian_vector_tests;
  using dofdetail::directed_tests;
  using dofdetail::face_rt_tests;
  using dofdetail::scalar_tests;
  using dofdetail::tangential_tests;

  auto wrap_scalar = [](const std::vector<Poly>& ts) {
    std::vector<std::vector<Poly>> out;
    for (const auto& t : ts) out.push_back({t});
    return out;
  };

  switch (space) {
    case DofSpace::Md0: {
      add_vertex_jets(2, "vertex-jet2");
      add_edge_moments(DofDeriv::Value, wrap_scalar(scalar_tests(1, r - 6)), "edge-value");
      {
        // per-edge normal pair: the tests depend on the edge frame
        for (size_t ei = 0; ei < g.edges.size(); ++ei) {
          EdgeFrame ef = edge_frame(sp.parent().vertex(g.edges[ei][0]), sp.parent().vertex(g.edges[ei][1]));
          for (const Vec& m : {ef.normal1, ef.normal2})
            for (const auto& t : directed_tests(m, 1, r - 5)) {
              DofDesc d;
              d.block = "edge-normal-deriv";
              d.op = DofOp::EdgeMoment;
              d.entity = g.edge_entity(static_cast<int>(ei));
              d.child = g.edge_child[ei];
              d.deriv = DofDeriv::Grad;
              d.test = t;
              ds.dofs.push_back(std::move(d));
            }
        }
      }
      add_face_moments(DofDeriv::Value, [&](int) { return wrap_scalar(scalar_tests(2, r - 6)); }, "face-value");
      add_face_moments(DofDeriv::Grad, [&](int fi) { return directed_tests(g.face_N[fi], 2, r - 4); },
                       "face-normal-deriv");
      {
        // grad-grad moments against the ring space itself
        std::vector<std::vector<std::vector<Poly>>> tests;
        auto ring = build_space(SpaceSpec{Family::Md, true, 3, 0, r}, sp, cache);
        for (int j = 0; j < ring->dim(); ++j) {
          PiecewiseKForm s = ring->element(j);
          std::vector<std::vector<Poly>> per_child;
          for (int c = 0; c < 4; ++c) per_child.push_back(grad3(s.pieces[c].coeff(Sigma{})));
          tests.push_back(per_child);
        }
        add_cell_moments(DofDeriv::Grad, tests, "cell-gradgrad");
      }
      break;
    }
    case DofSpace::Md1: {
      add_vertex_jets(1, "vertex-jet1");
      add_edge_moments(DofDeriv::Value, cartesian_vector_tests(1, r - 5), "edge-value");
      add_edge_moments(DofDeriv::Curl, cartesian_vector_tests(1, r - 4), "edge-curl");
      add_face_moments(DofDeriv::Value, [&](int fi) { return directed_tests(g.face_N[fi], 2, r - 4); }, "face-normal");
      add_face_moments(DofDeriv::Value, [&](int fi) { return face_rt_tests(g.face_tangents[fi], r - 5); },
                       "face-tangential");
      add_face_moments(DofDeriv::Curl,
                       [&](int fi) {
                         // (curl w x N) . kappa = curl w . (N x kappa): tangential pair
                         std::vector<std::vector<Poly>> out;
                         for (auto& t : tangential_tests(g.face_tangents[fi], r - 5)) out.push_back(cross_cp(g.face_N[fi], t));
                         return out;
                       },
                       "face-curl-tangential");
      add_cell_moments(DofDeriv::Value, dofdetail::interior_tests(sp, SpaceSpec{Family::Md, true, 3, 0, r}, true, cache),
                       "cell-grad-image");
      add_cell_moments(DofDeriv::Curl,
                       dofdetail::interior_tests(sp, SpaceSpec{Family::Md, true, 3, 1, r - 1}, true, cache),
                       "cell-curl-image");
      break;
    }
    case DofSpace::Md2: {
      add_vertex_jets(0, "vertex-value");
      add_vertex_div("vertex-div");
      add_edge_moments(DofDeriv::Value, cartesian_vector_tests(1, r - 4), "edge-value");
      add_edge_moments(DofDeriv::Div, wrap_scalar(scalar_tests(1, r - 5)), "edge-div");
      add_face_moments(DofDeriv::Value, [&](int) { return cartesian_vector_tests(2, r - 5); }, "face-value");
      add_face_moments(DofDeriv::Div, [&](int) { return wrap_scalar(scalar_tests(2, r - 6)); }, "face-div");
      add_cell_moments(DofDeriv::Value,
                       dofdetail::interior_tests(sp, SpaceSpec{Family::Md, true, 3, 1, r - 1}, true, cache),
                       "cell-curl-image");
      add_cell_moments(DofDeriv::Div, cell_scalar_tests(SpaceSpec{Family::Md, true, 3, 3, r - 3}), "cell-div-ring");
      break;
    }
    case DofSpace::Md3: {
      add_vertex_jets(0, "vertex-value");
      add_edge_moments(DofDeriv::Value, wrap_scalar(scalar_tests(1, r - 5)), "edge-value");
      add_face_moments(DofDeriv::Value, [&](int) { return wrap_scalar(scalar_tests(2, r - 6)); }, "face-value");
      add_cell_moments(DofDeriv::Value, one_cell_test(), "cell-mean");
      add_cell_moments(DofDeriv::Value, cell_scalar_tests(SpaceSpec{Family::Md, true, 3, 3, r - 3}), "cell-ring");
      break;
    }
    case DofSpace::Mc1: {
      add_vertex_jets(1, "vertex-jet1");
      add_edge_moments(DofDeriv::Value, cartesian_vector_tests(1, r - 5), "edge-value");
      add_edge_face_moments(DofDeriv::Curl, [&](int fi) { return directed_tests(g.face_N[fi], 1, r - 4); },
                            "edge-face-curl-normal");
      add_face_moments(DofDeriv::Value, [&](int fi) { return directed_tests(g.face_N[fi], 2, r - 4); }, "face-normal");
      add_face_moments(DofDeriv::Value, [&](int fi) { return face_rt_tests(g.face_tangents[fi], r - 5); },
                       "face-tangential");
      add_cell_moments(DofDeriv::Value, dofdetail::interior_tests(sp, SpaceSpec{Family::Md, true, 3, 0, r}, true, cache),
                       "cell-grad-image");
      add_cell_moments(DofDeriv::Curl,
                       dofdetail::interior_tests(sp, SpaceSpec{Family::Mc, true, 3, 1, r - 1}, true, cache),
                       "cell-curl-image");
      break;
    }
    case DofSpace::M2: {
      add_vertex_jets(0, "vertex-value");
      add_edge_moments(DofDeriv::Value, cartesian_vector_tests(1, r - 4), "edge-value");
      add_face_moments(DofDeriv::Value, [&](int) { return cartesian_vector_tests(2, r - 5); }, "face-value");
      add_cell_moments(DofDeriv::Value,
                       dofdetail::interior_tests(sp, SpaceSpec{Family::Md, true, 3, 1, r - 1}, true, cache),
                       "cell-curl-image");
      add_cell_moments(DofDeriv::Div, cell_scalar_tests(SpaceSpec{Family::Vd, true, 3, 3, r - 3}), "cell-div-ring");
      break;
    }
    case DofSpace::Vc2: {
      add_vertex_jets(0, "vertex-value");
      add_edge_face_moments(DofDeriv::Value, [&](int fi) { return directed_tests(g.face_N[fi], 1, r - 4); },
                            "edge-face-normal");
      add_face_moments(DofDeriv::Value, [&](int fi) { return directed_tests(g.face_N[fi], 2, r - 5); }, "face-normal");
      add_cell_moments(DofDeriv::Value,
                       dofdetail::interior_tests(sp, SpaceSpec{Family::Mc, true, 3, 1, r - 1}, true, cache),
                       "cell-curl-image");
      add_cell_moments(DofDeriv::Div, cell_scalar_tests(SpaceSpec{Family::Vd, true, 3, 3, r - 3}), "cell-div-ring");
      break;
    }
    case DofSpace::Vd3: {
      add_cell_moments(DofDeriv::Value, one_cell_test(), "cell-mean");
      add_cell_moments(DofDeriv::Value, cell_scalar_tests(SpaceSpec{Family::Vd, true, 3, 3, r - 3}), "cell-ring");
      break;
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Unisolvence, projection, commuting diagrams
// ---------------------------------------------------------------------------

struct UnisolvenceReport {
  std::string space;
  int r = 0;
  std::map<std::string, int> count_by_kind;
  long functional_count = 0;
  long space_dim = 0;
  long matrix_rank = 0;
  bool square = false;
  bool unisolvent = false;
};

/// Projections induced by the DOF sets, with cached matrices per space.
class DofMachine {
public:
  explicit DofMachine(const AlfeldSplit& sp, SpaceCache* cache = nullptr) : sp_(sp), cache_(cache) {}

  const AlfeldSplit& split() const { return sp_; }

  struct Built {
    DofSet set;
    std::shared_ptr<const SpaceBasis> target;
    RatMatrix basis_proxy;   // raw proxy vectors of the target basis, as columns
    RatMatrix matrix;        // DOF matrix: functionals x basis
    RatMatrix inverse;       // cached inverse (only when unisolvent)
    bool invertible = false;
  };

  const Built& built(DofSpace space, int r) {
    auto key = std::make_pair(space, r);
    auto it = built_.find(key);
    if (it != built_.end()) return it->second;
    Built b;
    b.set = build_dofset(space, r, sp_, cache_);
    b.target = build_space(dof_target_spec(space, r), sp_, cache_);
    int ncomp = (b.set.target_k == 0 || b.set.target_k == 3) ? 1 : 3;
    ProxyLayout lay(ncomp, dof_target_spec(space, r).r, 4);
    b.basis_proxy = RatMatrix(lay.dim(), b.target->dim());
    for (int j = 0; j < b.target->dim(); ++j) {
      RatVec v = lay.vectorize(ProxyField::from_piecewise(b.target->element(j)));
      for (int i = 0; i < lay.dim(); ++i) b.basis_proxy.at(i, j) = v[i];
    }
    RatMatrix rows = dof_rows(b.set, sp_, dof_target_spec(space, r).r);
    b.matrix = rows * b.basis_proxy;
    if (b.matrix.rows() == b.matrix.cols()) {
      auto inv = try_inverse(b.matrix);
      if (inv) {
        b.inverse = *inv;
        b.invertible = true;
      }
    }
    return built_.emplace(key, std::move(b)).first->second;
  }

  UnisolvenceReport check_unisolvence(DofSpace space, int r) {
    const Built& b = built(space, r);
    UnisolvenceReport rep;
    rep.space = b.set.space;
    rep.r = r;
    rep.count_by_kind = b.set.count_by_block();
    rep.functional_count = static_cast<long>(b.set.dofs.size());
    rep.space_dim = b.target->dim();
    rep.square = (rep.functional_count == rep.space_dim);
    rep.matrix_rank = rank_exact(b.matrix);
    rep.unisolvent = rep.square && (rep.matrix_rank == rep.space_dim);
    return rep;
  }

  const RatMatrix& rows_at_degree(DofSpace space, int r, int D) {
    auto key = std::make_tuple(space, r, D);
    auto it = rows_cache_.find(key);
    if (it != rows_cache_.end()) return it->second;
    return rows_cache_.emplace(key, dof_rows(built(space, r).set, sp_, D)).first->second;
  }

  /// The unique member of the target space matching every functional of p.
  PiecewiseKForm project(DofSpace space, int r, const ProxyField& p) {
    const Built& b = built(space, r);
    if (!b.invertible) throw VerificationError("project: singular DOF matrix for " + b.set.space);
    int D = std::max(p.max_degree(), dof_target_spec(space, r).r);
    const RatMatrix& rows = rows_at_degree(space, r, D);
    int ncomp = (b.set.target_k == 0 || b.set.target_k == 3) ? 1 : 3;
    ProxyLayout lay(ncomp, D, 4);
    RatVec vals = rows.apply(lay.vectorize(p));
    RatVec coords = b.inverse.apply(vals);
    RatVec raw = b.basis_proxy.apply(coords);
    // rebuild the piecewise form from proxy coefficients
    ProxyLayout tlay(ncomp, dof_target_spec(space, r).r, 4);
    ProxyField out;
    out.split = &sp_;
    out.k = b.set.target_k;
    out.comp.assign(4, std::vector<Poly>(ncomp, Poly(3)));
    int nm = static_cast<int>(tlay.monos.size());
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < ncomp; ++i)
        for (int m = 0; m < nm; ++m) {
          const Rational& x = raw[tlay.index(c, i, m)];
          if (!x.is_zero()) out.comp[c][i].add_term(tlay.monos[m], x);
        }
    return out.to_piecewise();
  }

private:
  static std::optional<RatMatrix> try_inverse(const RatMatrix& m) {
    int n = m.rows();
    RatMatrix aug(n, 2 * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
      aug.at(i, n + i) = Rational(1);
    }
    detail::Rref rr = detail::reduced_echelon(aug);
    if (rr.rank() != n) return std::nullopt;
    for (int i = 0; i < n; ++i)
      if (rr.pivot_cols[i] != i) return std::nullopt;
    RatMatrix inv(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) inv.at(i, j) = rr.rows[i][n + j];
    return inv;
  }

  const AlfeldSplit& sp_;
  SpaceCache* cache_;
  std::map<std::pair<DofSpace, int>, Built> built_;
  std::map<std::tuple<DofSpace, int, int>, RatMatrix> rows_cache_;
};

enum class Diagram { Two, One, Three };

inline std::string diagram_name(Diagram d) {
  switch (d) {
    case Diagram::Two: return "two";
    case Diagram::One: return "one";
    case Diagram::Three: return "three";
  }
  return "?";
}

/// Spaces used at the four slots of each commuting diagram.
inline std::array<DofSpace, 4> diagram_spaces(Diagram d) {
  switch (d) {
    case Diagram::Two: return {DofSpace::Md0, DofSpace::Md1, DofSpace::Md2, DofSpace::Md3};
    case Diagram::One: return {DofSpace::Md0, DofSpace::Md1, DofSpace::M2, DofSpace::Vd3};
    case Diagram::Three: return {DofSpace::Md0, DofSpace::Mc1, DofSpace::Vc2, DofSpace::Vd3};
  }
  throw std::logic_error("diagram_spaces: unreachable");
}

struct CommuteReport {
  std::string diagram;
  bool grad_ok = false, curl_ok = false, div_ok = false;
  bool pass() const { return grad_ok && curl_ok && div_ok; }
};

/// Verifies grad Pi_0 p = Pi_1 grad p, curl Pi_1 q = Pi_2 curl q, and
/// div Pi_2 v = Pi_3 div v as exact piecewise polynomials.
inline CommuteReport check_commute(DofMachine& machine, Diagram dia, int r, const Poly& p,
                                   const std::vector<Poly>& q, const std::vector<Poly>& v) {
  auto spaces = diagram_spaces(dia);
  const auto& sp = machine.split();
  CommuteReport rep;
  rep.diagram = diagram_name(dia);

  PiecewiseKForm p0 = machine.project(spaces[0], r, ProxyField::constant_field(sp, 0, {p}));
  PiecewiseKForm lhs_g = p0.d();
  PiecewiseKForm rhs_g = machine.project(spaces[1], r, ProxyField::constant_field(sp, 1, grad3(p)));
  rep.grad_ok = (lhs_g == rhs_g);

  PiecewiseKForm q1 = machine.project(spaces[1], r, ProxyField::constant_field(sp, 1, q));
  PiecewiseKForm lhs_c = q1.d();
  PiecewiseKForm rhs_c = machine.project(spaces[2], r, ProxyField::constant_field(sp, 2, curl3(q)));
  rep.curl_ok = (lhs_c == rhs_c);

  PiecewiseKForm v2 = machine.project(spaces[2], r, ProxyField::constant_field(sp, 2, v));
  PiecewiseKForm lhs_d = v2.d();
  PiecewiseKForm rhs_d = machine.project(spaces[3], r, ProxyField::constant_field(sp, 3, {div3(v)}));
  rep.div_ok = (lhs_d == rhs_d);
  return rep;
}

}  // namespace alfeld
