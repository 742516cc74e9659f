// Global spaces on Alfeld-refined macro meshes: per-cell local membership
// composed with inter-cell continuity and vertex smoothness, global
// exactness by rank counting (exact or modular), and global commuting
// projections applied cell by cell.
#pragma once

#include "alfeld/dofs3d.hpp"
#include "alfeld/mesh.hpp"
#include "alfeld/splitspaces.hpp"

namespace alfeld {

/// Vertex smoothness order of each global family (-1: no vertex condition).
inline int global_vertex_order(DofSpace tag) {
  switch (tag) {
    case DofSpace::Md0: return 2;
    case DofSpace::Md1: return 1;
    case DofSpace::Mc1: return 1;
    case DofSpace::Vc2: return 0;
    default: return -1;
  }
}

/// Quantities that must be continuous across shared macro faces.
enum class FaceCoupling { None, Trace, Value, ValueAndD };

inline FaceCoupling global_face_coupling(DofSpace tag) {
  switch (tag) {
    case DofSpace::Md0:
    case DofSpace::Md1:
    case DofSpace::Md2: return FaceCoupling::ValueAndD;
    case DofSpace::Md3:
    case DofSpace::Mc1:
    case DofSpace::M2: return FaceCoupling::Value;
    case DofSpace::Vc2: return FaceCoupling::Trace;
    case DofSpace::Vd3: return FaceCoupling::None;
  }
  return FaceCoupling::None;
}

/// A global space on a refined macro mesh, held as per-cell local bases plus
/// coupling rows over the concatenated local coordinates.
struct GlobalSpace {
  const MacroMesh* mesh = nullptr;
  DofSpace tag;
  int r = 0;
  std::vector<std::shared_ptr<const SpaceBasis>> local;
  std::vector<int> offset;  // column offset of each cell's coordinates
  RatMatrix coupling;       // inter-cell + vertex rows over reduced coordinates

  int reduced_dim() const { return offset.back(); }
};

namespace globaldetail {

// Restriction polynomials of one local basis element's child piece and its
// exterior derivative on a shared macro face, flattened to coefficient rows.
struct FaceRowBuilder {
  std::vector<Point> pts;        // canonical order: increasing global vertex index
  std::vector<Poly> images;
  Vec normal;                    // rational normal of the face plane
  FormLayout flay;               // 2-variable scalar layout for row indexing

  FaceRowBuilder(const MacroMesh& mesh, const std::vector<int>& verts, int max_deg)
      : flay(2, max_deg, 0) {
    for (int v : verts) pts.push_back(mesh.vertices()[v]);
    images = parametrization(pts);
    normal = cross(sub(pts[1], pts[0]), sub(pts[2], pts[0]));
  }

  // scalar restrictions describing the coupled quantities of a piece
  std::vector<Poly> coupled_quantities(const KForm& piece, FaceCoupling mode, int k) const {
    std::vector<Poly> out;
    auto push_restricted = [&](const Poly& p) { out.push_back(p.compose(images)); };
    if (mode == FaceCoupling::Trace) {
      KForm t = trace(piece, pts);
      // coefficients of the pullback in the face coordinates
      for (const auto& s : sigma_list(2, k)) out.push_back(t.coeff(s));
      return out;
    }
    auto comps = form_to_proxy(piece);
    for (const auto& c : comps) push_restricted(c);
    if (mode == FaceCoupling::ValueAndD && k < 3) {
      auto dcomps = form_to_proxy(exterior_d(piece));
      for (const auto& c : dcomps) push_restricted(c);
    }
    return out;
  }
};

}  // namespace globaldetail

inline GlobalSpace make_global_space(const MacroMesh& mesh, DofSpace tag, int r, SpaceCache& cache) {
  GlobalSpace g;
  g.mesh = &mesh;
  g.tag = tag;
  g.r = r;
  SpaceSpec spec = dof_target_spec(tag, r);
  int total = 0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    g.offset.push_back(total);
    g.local.push_back(build_space(spec, mesh.split(c), &cache));
    total += g.local.back()->dim();
  }
  g.offset.push_back(total);

  std::vector<RatVec> rows;
  FaceCoupling mode = global_face_coupling(tag);
  int k = spec.k;

  if (mode != FaceCoupling::None) {
    for (const auto& sf : mesh.shared_faces()) {
      globaldetail::FaceRowBuilder fb(mesh, sf.verts, spec.r);
      // quantity index -> (face monomial -> row)
      std::map<std::pair<int, int>, int> row_index;
      std::vector<RatVec> block;
      for (int side = 0; side < 2; ++side) {
        int cell = (side == 0) ? sf.cell_a : sf.cell_b;
        int sign = (side == 0) ? 1 : -1;
        int child = mesh.local_face_index(cell, sf.verts);
        const auto& sb = *g.local[cell];
        for (int j = 0; j < sb.dim(); ++j) {
          auto qs = fb.coupled_quantities(sb.element(j).pieces[child], mode, k);
          for (size_t qi = 0; qi < qs.size(); ++qi)
            for (const auto& [e, x] : qs[qi].terms()) {
              auto key = std::make_pair(static_cast<int>(qi), fb.flay.mono_index.at(e));
              auto it = row_index.find(key);
              if (it == row_index.end()) {
                it = row_index.emplace(key, static_cast<int>(block.size())).first;
                block.emplace_back(RatVec(g.reduced_dim()));
              }
              block[it->second][g.offset[cell] + j] += Rational(sign) * x;
            }
        }
      }
      for (auto& rr : block) rows.push_back(std::move(rr));
    }
  }

  int order = global_vertex_order(tag);
  if (order >= 0) {
    int ncomp = (k == 0 || k == 3) ? 1 : 3;
    auto alphas = monomials_up_to(3, order);
    for (int v = 0; v < mesh.n_all_vertices(); ++v) {
      auto pieces = mesh.pieces_containing_vertex(v);
      if (pieces.size() < 2) continue;
      Point pt = mesh.all_vertex_point(v);
      // jets of every basis element's relevant child piece at the vertex
      auto jet = [&](int cell, int child, int j, int comp, const Exponents& alpha) {
        auto comps = form_to_proxy(g.local[cell]->element(j).pieces[child]);
        Poly m = comps[comp];
        for (size_t a = 0; a < alpha.size(); ++a)
          for (int t = 0; t < alpha[a]; ++t) m = m.partial(static_cast<int>(a));
        return m.eval(pt);
      };
      auto [c0, ch0] = pieces[0];
      for (size_t pi = 1; pi < pieces.size(); ++pi) {
        auto [c1, ch1] = pieces[pi];
        for (int comp = 0; comp < ncomp; ++comp)
          for (const auto& alpha : alphas) {
            RatVec row(g.reduced_dim());
            for (int j = 0; j < g.local[c1]->dim(); ++j) row[g.offset[c1] + j] += jet(c1, ch1, j, comp, alpha);
            for (int j = 0; j < g.local[c0]->dim(); ++j) row[g.offset[c0] + j] -= jet(c0, ch0, j, comp, alpha);
            bool nonzero = false;
            for (const auto& x : row) nonzero = nonzero || !x.is_zero();
            if (nonzero) rows.push_back(std::move(row));
          }
      }
    }
  }

  g.coupling = RatMatrix(0, g.reduced_dim());
  for (auto& rr : rows) g.coupling.append_row(rr);
  return g;
}

/// Rank backend: exact elimination or randomized modular with several primes.
struct RankBackend {
  bool exact = true;
  int primes = 2;
  uint64_t seed = 0;
  mutable uint64_t counter = 0;

  long rank(const RatMatrix& m) const {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    if (exact) return rank_exact(m);
    return rank_modular(m, primes, seed + (counter++));
  }
};

inline long global_dim(const GlobalSpace& g, const RankBackend& backend) {
  return g.reduced_dim() - backend.rank(g.coupling);
}

/// Exact canonical basis over the concatenated local coordinates (meant for
/// small meshes; every column is a global field).
inline RatMatrix global_reduced_basis(const GlobalSpace& g) { return nullspace_basis(g.coupling); }

/// Per-entity closed-form dimension of the global families (r >= 5), from
/// the degree-of-freedom counts glued over the macro mesh.
inline long global_dimension_formula(DofSpace tag, long r, long V, long E, long F, long T) {
  switch (tag) {
    case DofSpace::Md0:
      return 10 * V + (3 * r - 13) * E + ((r - 5) * (r - 4) / 2 + (r - 3) * (r - 2) / 2) * F +
             2 * (r - 4) * (r - 3) * (r - 2) / 3 * T;
    case DofSpace::Md1:
      return 12 * V + (6 * r - 21) * E +
             ((r - 2) * (r - 3) / 2 + (r - 3) * (r - 5) + (r - 3) * (r - 4)) * F +
             (r - 3) * (2 * r - 5) * (r - 4) * T;
    case DofSpace::Md2:
      return 4 * V + (4 * r - 13) * E + (3 * (r - 3) * (r - 4) + (r - 4) * (r - 5)) / 2 * F +
             ((r - 4) * (r - 3) * (4 * r - 11) / 3 + (2 * r - 7) * (r * r - 7 * r + 15) / 3 - 1) * T;
    case DofSpace::Md3:
      return V + (r - 4) * E + (r - 4) * (r - 5) / 2 * F + (2 * r - 7) * (r * r - 7 * r + 15) / 3 * T;
    case DofSpace::Mc1:
      // vector Hermite counts over the refined mesh entities
      return 3 * (4 * (V + T) + (r - 4) * (E + 4 * T) + (r - 2) * (r - 3) / 2 * (F + 6 * T) +
                  (r - 2) * (r - 3) * (r - 4) / 6 * (4 * T));
    case DofSpace::M2:
      // vector Lagrange of degree r-2 over the refined mesh
      return 3 * ((V + T) + (r - 3) * (E + 4 * T) + (r - 3) * (r - 4) / 2 * (F + 6 * T) +
                  (r - 3) * (r - 4) * (r - 5) / 6 * (4 * T));
    case DofSpace::Vc2:
      // nodal H(div) counts over the refined mesh entities
      return 3 * (V + T) + (r * (r - 1) / 2 - 3) * (F + 6 * T) + r * (r - 3) * (r - 1) / 2 * (4 * T);
    case DofSpace::Vd3:
      return 2 * r * (r - 1) * (r - 2) / 3 * T;
  }
  throw std::logic_error("global_dimension_formula: unreachable");
}

// ---------------------------------------------------------------------------
// Global exactness
// ---------------------------------------------------------------------------

inline std::array<DofSpace, 4> global_sequence_tags(int seq_id) {
  switch (seq_id) {
    case 1: return {DofSpace::Md0, DofSpace::Md1, DofSpace::Md2, DofSpace::Md3};
    case 2: return {DofSpace::Md0, DofSpace::Md1, DofSpace::M2, DofSpace::Vd3};
    case 3: return {DofSpace::Md0, DofSpace::Mc1, DofSpace::Vc2, DofSpace::Vd3};
    default: throw std::invalid_argument("global_sequence_tags: id must be 1, 2, or 3");
  }
}

struct GlobalSlotReport {
  std::string space;
  long dim = 0;
  long dim_formula = 0;
  long kernel_dim = 0;
  long range_dim = 0;
  bool complex_ok = false;  // d maps this slot into the next
  bool exact = false;
};

struct GlobalSequenceReport {
  int seq_id = 0;
  std::string mesh;
  int r = 0;
  bool euler_ok = false;
  long alternating_sum = 0;
  std::vector<GlobalSlotReport> slots;
  bool pass = false;
};

inline GlobalSequenceReport check_global_exact(const MacroMesh& mesh, const std::string& mesh_name, int seq_id, int r,
                                               const RankBackend& backend, SpaceCache& cache) {
  auto tags = global_sequence_tags(seq_id);
  GlobalSequenceReport rep;
  rep.seq_id = seq_id;
  rep.mesh = mesh_name;
  rep.r = r;
  rep.euler_ok = (mesh.euler_characteristic() == 1);

  std::vector<GlobalSpace> spaces;
  for (auto t : tags) spaces.push_back(make_global_space(mesh, t, r, cache));

  // block-diagonal local derivative matrices between consecutive slots
  auto block_d = [&](int i) {
    const GlobalSpace& a = spaces[i];
    const GlobalSpace& b = spaces[i + 1];
    RatMatrix d(b.reduced_dim(), a.reduced_dim());
    for (int c = 0; c < mesh.n_cells(); ++c) {
      RatMatrix dc = d_matrix(*a.local[c], *b.local[c]);
      for (int i2 = 0; i2 < dc.rows(); ++i2)
        for (int j2 = 0; j2 < dc.cols(); ++j2) d.at(b.offset[c] + i2, a.offset[c] + j2) = dc.at(i2, j2);
    }
    return d;
  };

  long sign = 1;
  std::vector<long> dims(4), kernels(4);
  std::vector<bool> complex_ok(4, true);
  std::vector<long> c_rank(4);
  for (int i = 0; i < 4; ++i) c_rank[i] = backend.rank(spaces[i].coupling);
  for (int i = 0; i < 4; ++i) dims[i] = spaces[i].reduced_dim() - c_rank[i];
  for (int i = 0; i < 4; ++i) {
    if (i < 3) {
      RatMatrix d = block_d(i);
      // kernel of d restricted to the global space
      RatMatrix stacked = RatMatrix::vstack(spaces[i].coupling, d);
      kernels[i] = spaces[i].reduced_dim() - backend.rank(stacked);
      // complex property: the image satisfies the next slot's coupling
      RatMatrix image_coupling = spaces[i + 1].coupling * d;
      RatMatrix inc = RatMatrix::vstack(spaces[i].coupling, image_coupling);
      complex_ok[i] = (backend.rank(inc) == c_rank[i]);
    } else {
      kernels[i] = dims[i];  // d is the zero map out of the last slot
    }
  }

  rep.pass = rep.euler_ok;
  for (int i = 0; i < 4; ++i) {
    GlobalSlotReport sr;
    sr.space = dof_space_name(tags[i]);
    sr.dim = dims[i];
    sr.dim_formula = global_dimension_formula(tags[i], r, mesh.n_vertices(), mesh.n_edges(), mesh.n_faces(),
                                              mesh.n_cells());
    sr.kernel_dim = kernels[i];
    sr.range_dim = dims[i] - kernels[i];
    sr.complex_ok = complex_ok[i];
    long expected_kernel = (i == 0) ? 1 : dims[i - 1] - kernels[i - 1];
    sr.exact = sr.complex_ok && (sr.kernel_dim == expected_kernel) && (sr.dim == sr.dim_formula);
    rep.pass = rep.pass && sr.exact;
    rep.alternating_sum += sign * sr.dim;
    sign = -sign;
    rep.slots.push_back(sr);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Global commuting projection
// ---------------------------------------------------------------------------

struct GlobalProjectReport {
  std::string diagram;
  std::string mesh;
  bool membership_ok = true;   // projected fields satisfy all coupling rows
  bool commute_ok = true;      // the three identities hold cell by cell
  bool pass() const { return membership_ok && commute_ok; }
};

/// Projects a global polynomial field cell by cell and verifies both global
/// conformity and the commuting identities.
inline GlobalProjectReport global_project(const MacroMesh& mesh, const std::string& mesh_name, Diagram dia, int r,
                                          const Poly& p, const std::vector<Poly>& qv, const std::vector<Poly>& vv,
                                          SpaceCache& cache) {
  GlobalProjectReport rep;
  rep.diagram = diagram_name(dia);
  rep.mesh = mesh_name;
  auto dspaces = diagram_spaces(dia);

  std::vector<std::unique_ptr<DofMachine>> machines;
  for (int c = 0; c < mesh.n_cells(); ++c) machines.push_back(std::make_unique<DofMachine>(mesh.split(c), &cache));
  std::vector<GlobalSpace> gspaces;
  for (int slot = 0; slot < 4; ++slot) gspaces.push_back(make_global_space(mesh, dspaces[slot], r, cache));

  // project a global polynomial field into one slot on every cell, checking
  // conformity of the assembled result
  auto project_slot = [&](int slot, const std::vector<Poly>& field) {
    const GlobalSpace& g = gspaces[slot];
    int k = dof_target_spec(dspaces[slot], r).k;
    RatVec coords(g.reduced_dim());
    std::vector<PiecewiseKForm> out;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      ProxyField in = ProxyField::constant_field(mesh.split(c), k, field);
      PiecewiseKForm pr = machines[c]->project(dspaces[slot], r, in);
      auto local_coords = g.local[c]->coordinates(g.local[c]->vectorize(pr));
      if (!local_coords) throw VerificationError("global_project: projection left its local space");
      for (int j = 0; j < g.local[c]->dim(); ++j) coords[g.offset[c] + j] = (*local_coords)[j];
      out.push_back(std::move(pr));
    }
    for (const auto& x : g.coupling.apply(coords))
      if (!x.is_zero()) rep.membership_ok = false;
    return out;
  };

  // the three identities: d of the projection vs the projection of d
  struct Identity {
    int src_slot;
    std::vector<Poly> src, derived;
  };
  std::vector<Identity> identities{{0, {p}, grad3(p)}, {1, qv, curl3(qv)}, {2, vv, {div3(vv)}}};
  for (const auto& id : identities) {
    auto src_proj = project_slot(id.src_slot, id.src);
    auto dst_proj = project_slot(id.src_slot + 1, id.derived);
    for (int c = 0; c < mesh.n_cells(); ++c)
      if (!(src_proj[c].d() == dst_proj[c])) rep.commute_ok = false;
  }
  return rep;
}

}  // namespace alfeld
