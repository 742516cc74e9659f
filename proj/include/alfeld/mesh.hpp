// Macro tetrahedral meshes: text-format loader, built-in meshes, shared-face
// identification, and per-cell Alfeld refinement.
#pragma once

#include <array>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alfeld/geometry.hpp"

namespace alfeld {

class MacroMesh {
public:
  MacroMesh(int dim, std::vector<Point> vertices, std::vector<std::vector<int>> cells)
      : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)) {
    for (const auto& c : cells_) {
      if (static_cast<int>(c.size()) != dim_ + 1) throw std::runtime_error("mesh: cell arity mismatch");
      std::vector<Point> pts;
      for (int v : c) pts.push_back(vertices_.at(v));
      simplices_.emplace_back(pts);  // throws on degenerate cells
      splits_.emplace_back(simplices_.back());
    }
    build_face_table();
  }

  int dim() const { return dim_; }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<int>& cell(int c) const { return cells_.at(c); }
  const Simplex& cell_simplex(int c) const { return simplices_.at(c); }
  const AlfeldSplit& split(int c) const { return splits_.at(c); }

  struct SharedFace {
    std::vector<int> verts;  // global vertex indices, increasing
    int cell_a, cell_b;
  };
  const std::vector<SharedFace>& shared_faces() const { return shared_; }

  /// Macro-level sub-simplex count (before splitting): unique vertex subsets
  /// of dimension s over all cells.
  int count_subsimplices(int s) const {
    std::set<std::vector<int>> seen;
    for (const auto& c : cells_) {
      std::vector<int> idx(s + 1);
      auto rec = [&](auto&& self, int pos, int start) -> void {
        if (pos == s + 1) {
          std::vector<int> key(idx);
          std::sort(key.begin(), key.end());
          seen.insert(key);
          return;
        }
        for (size_t v = start; v < c.size(); ++v) {
          idx[pos] = c[v];
          self(self, pos + 1, static_cast<int>(v) + 1);
        }
      };
      rec(rec, 0, 0);
    }
    return static_cast<int>(seen.size());
  }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_edges() const { return count_subsimplices(1); }
  int n_faces() const { return count_subsimplices(dim_ - 1); }
  long euler_characteristic() const {
    long chi = 0;
    for (int s = 0; s <= dim_; ++s) chi += (s % 2 == 0 ? 1 : -1) * count_subsimplices(s);
    return chi;
  }

  /// Mesh vertex table including barycenters: 0..V-1 are macro vertices,
  /// V + c is the barycenter of cell c.
  int n_all_vertices() const { return n_vertices() + n_cells(); }
  Point all_vertex_point(int idx) const {
    if (idx < n_vertices()) return vertices_[idx];
    return splits_[idx - n_vertices()].barycenter();
  }
  /// Pieces (cell, child) whose closure contains the given mesh vertex.
  std::vector<std::pair<int, int>> pieces_containing_vertex(int idx) const {
    std::vector<std::pair<int, int>> out;
    if (idx >= n_vertices()) {
      int c = idx - n_vertices();
      for (int ch = 0; ch < splits_[c].n_children(); ++ch) out.emplace_back(c, ch);
      return out;
    }
    for (int c = 0; c < n_cells(); ++c) {
      for (size_t local = 0; local < cells_[c].size(); ++local) {
        if (cells_[c][local] != idx) continue;
        for (int ch = 0; ch < splits_[c].n_children(); ++ch)
          if (ch != static_cast<int>(local)) out.emplace_back(c, ch);
      }
    }
    return out;
  }

  /// Local index of a global face inside a cell: the parent-face number i
  /// such that F_i of cell c is this face; -1 when the cell does not own it.
  int local_face_index(int c, const std::vector<int>& face_verts) const {
    const auto& cv = cells_[c];
    for (size_t i = 0; i < cv.size(); ++i) {
      std::vector<int> f;
      for (size_t j = 0; j < cv.size(); ++j)
        if (j != i) f.push_back(cv[j]);
      std::sort(f.begin(), f.end());
      if (f == face_verts) return static_cast<int>(i);
    }
    return -1;
  }

private:
  void build_face_table() {
    std::map<std::vector<int>, std::vector<int>> incidence;
    for (int c = 0; c < n_cells(); ++c) {
      const auto& cv = cells_[c];
      for (size_t i = 0; i < cv.size(); ++i) {
        std::vector<int> f;
        for (size_t j = 0; j < cv.size(); ++j)
          if (j != i) f.push_back(cv[j]);
        std::sort(f.begin(), f.end());
        incidence[f].push_back(c);
      }
    }
    for (const auto& [f, cs] : incidence) {
      if (cs.size() > 2) throw std::runtime_error("mesh: face shared by more than two cells");
      if (cs.size() == 2) shared_.push_back(SharedFace{f, cs[0], cs[1]});
    }
  }

  int dim_;
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Simplex> simplices_;
  std::vector<AlfeldSplit> splits_;
  std::vector<SharedFace> shared_;
};

inline MacroMesh load_mesh(std::istream& in) {
  std::string line;
  int dim = -1;
  std::vector<Point> verts;
  std::vector<std::vector<int>> cells;
  int want_verts = -1, want_cells = -1;
  auto next_token_line = [&](std::string& out) -> bool {
    while (std::getline(in, line)) {
      auto h = line.find('#');
      if (h != std::string::npos) line = line.substr(0, h);
      std::istringstream probe(line);
      std::string t;
      if (probe >> t) {
        out = line;
        return true;
      }
    }
    return false;
  };
  std::string l;
  while (next_token_line(l)) {
    std::istringstream is(l);
    std::string kw;
    is >> kw;
    if (kw == "dim") {
      if (!(is >> dim) || dim < 2) throw std::runtime_error("mesh parse error: bad dim");
    } else if (kw == "vertices") {
      if (dim < 0) throw std::runtime_error("mesh parse error: dim must come first");
      if (!(is >> want_verts) || want_verts <= 0) throw std::runtime_error("mesh parse error: bad vertex count");
      for (int i = 0; i < want_verts; ++i) {
        if (!next_token_line(l)) throw std::runtime_error("mesh parse error: missing vertex line");
        std::istringstream vs(l);
        Point p;
        std::string tok;
        while (vs >> tok) p.push_back(Rational::parse(tok));
        if (static_cast<int>(p.size()) != dim) throw std::runtime_error("mesh parse error: vertex arity");
        verts.push_back(std::move(p));
      }
    } else if (kw == "tets") {
      if (!(is >> want_cells) || want_cells <= 0) throw std::runtime_error("mesh parse error: bad cell count");
      for (int i = 0; i < want_cells; ++i) {
        if (!next_token_line(l)) throw std::runtime_error("mesh parse error: missing cell line");
        std::istringstream cs(l);
        std::vector<int> c;
        int v;
        while (cs >> v) {
          if (v < 0 || v >= static_cast<int>(verts.size())) throw std::runtime_error("mesh parse error: vertex index out of range");
          c.push_back(v);
        }
        if (static_cast<int>(c.size()) != dim + 1) throw std::runtime_error("mesh parse error: cell arity");
        cells.push_back(std::move(c));
      }
    } else {
      throw std::runtime_error("mesh parse error: unknown keyword '" + kw + "'");
    }
  }
  if (dim < 0 || verts.empty() || cells.empty()) throw std::runtime_error("mesh parse error: incomplete mesh");
  return MacroMesh(dim, std::move(verts), std::move(cells));
}

inline MacroMesh load_mesh(const std::string& text) {
  std::istringstream is(text);
  return load_mesh(is);
}

inline MacroMesh standard_mesh(const std::string& name) {
  auto q = [](long a) { return Rational(a); };
  if (name == "single-tet") {
    std::vector<Point> v{{q(0), q(0), q(0)}, {q(1), q(0), q(0)}, {q(0), q(1), q(0)}, {q(0), q(0), q(1)}};
    return MacroMesh(3, v, {{0, 1, 2, 3}});
  }
  if (name == "two-tets") {
    std::vector<Point> v{{q(0), q(0), q(0)}, {q(1), q(0), q(0)}, {q(0), q(1), q(0)}, {q(0), q(0), q(1)},
                         {q(1), q(1), q(1)}};
    return MacroMesh(3, v, {{0, 1, 2, 3}, {1, 2, 3, 4}});
  }
  if (name == "cube6") {
    // Kuhn split of the unit cube: six tetrahedra around the main diagonal.
    std::vector<Point> v;
    for (int z = 0; z <= 1; ++z)
      for (int y = 0; y <= 1; ++y)
        for (int x = 0; x <= 1; ++x) v.push_back(Point{q(x), q(y), q(z)});
    auto idx = [](int x, int y, int z) { return x + 2 * y + 4 * z; };
    std::vector<std::vector<int>> cells;
    int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (auto& p : perms) {
      int c[3] = {0, 0, 0};
      std::vector<int> cell{idx(0, 0, 0)};
      for (int step = 0; step < 3; ++step) {
        c[p[step]] = 1;
        cell.push_back(idx(c[0], c[1], c[2]));
      }
      cells.push_back(cell);
    }
    return MacroMesh(3, v, cells);
  }
  throw std::invalid_argument("standard_mesh: unknown mesh '" + name + "'");
}

}  // namespace alfeld
