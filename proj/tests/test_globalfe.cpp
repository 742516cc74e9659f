#include <catch2/catch_amalgamated.hpp>

#include "alfeld/globalfe.hpp"
#include "helpers.hpp"

using namespace alfeld;
using testutil::q;

namespace {
const std::array<DofSpace, 8> all_tags{DofSpace::Md0, DofSpace::Md1, DofSpace::Md2, DofSpace::Md3,
                                       DofSpace::Mc1, DofSpace::M2, DofSpace::Vc2, DofSpace::Vd3};
}

TEST_CASE("single-tet global spaces reduce to the local ones") {
  auto mesh = standard_mesh("single-tet");
  SpaceCache cache;
  RankBackend exact{true, 2, 0};
  const long local_dims[8] = {68, 132, 80, 15, 192, 105, 165, 40};
  for (int i = 0; i < 8; ++i) {
    auto g = make_global_space(mesh, all_tags[i], 5, cache);
    INFO(dof_space_name(all_tags[i]));
    CHECK(global_dim(g, exact) == local_dims[i]);
    CHECK(global_dimension_formula(all_tags[i], 5, 4, 6, 4, 1) == local_dims[i]);
    // on one macro cell the coupling rows are vertex-smoothness constraints
    // only, and they must be redundant for every local basis element
    for (int j = 0; j < g.local[0]->dim(); ++j) {
      RatVec e(g.reduced_dim());
      e[j] = Rational(1);
      bool all_zero = true;
      for (const auto& x : g.coupling.apply(e)) all_zero = all_zero && x.is_zero();
      CHECK(all_zero);
    }
  }
}

TEST_CASE("two-tets: the discontinuous space is a direct sum") {
  auto mesh = standard_mesh("two-tets");
  SpaceCache cache;
  RankBackend exact{true, 2, 0};
  auto g = make_global_space(mesh, DofSpace::Vd3, 5, cache);
  CHECK(g.coupling.rows() == 0);
  CHECK(global_dim(g, exact) == 80);
}

TEST_CASE("two-tets global sequences are exact with exact ranks") {
  auto mesh = standard_mesh("two-tets");
  SpaceCache cache;
  RankBackend exact{true, 2, 0};
  for (int seq = 1; seq <= 3; ++seq) {
    auto rep = check_global_exact(mesh, "two-tets", seq, 5, exact, cache);
    INFO("sequence " << seq);
    CHECK(rep.euler_ok);
    CHECK(rep.alternating_sum == 1);
    for (const auto& s : rep.slots) {
      INFO(s.space);
      CHECK(s.complex_ok);
      CHECK(s.dim == s.dim_formula);
      CHECK(s.exact);
    }
    CHECK(rep.pass);
  }
}

TEST_CASE("two-tets global dimensions match the glued counts") {
  auto mesh = standard_mesh("two-tets");
  SpaceCache cache;
  RankBackend exact{true, 2, 0};
  // V=5, E=9, F=7, T=2
  const long expected[8] = {
      global_dimension_formula(DofSpace::Md0, 5, 5, 9, 7, 2), global_dimension_formula(DofSpace::Md1, 5, 5, 9, 7, 2),
      global_dimension_formula(DofSpace::Md2, 5, 5, 9, 7, 2), global_dimension_formula(DofSpace::Md3, 5, 5, 9, 7, 2),
      global_dimension_formula(DofSpace::Mc1, 5, 5, 9, 7, 2), global_dimension_formula(DofSpace::M2, 5, 5, 9, 7, 2),
      global_dimension_formula(DofSpace::Vc2, 5, 5, 9, 7, 2), global_dimension_formula(DofSpace::Vd3, 5, 5, 9, 7, 2)};
  for (int i = 0; i < 8; ++i) {
    auto g = make_global_space(mesh, all_tags[i], 5, cache);
    INFO(dof_space_name(all_tags[i]));
    CHECK(global_dim(g, exact) == expected[i]);
  }
}

TEST_CASE("modular and exact ranks agree on two-tets couplings") {
  auto mesh = standard_mesh("two-tets");
  SpaceCache cache;
  for (DofSpace tag : {DofSpace::Md0, DofSpace::M2}) {
    auto g = make_global_space(mesh, tag, 5, cache);
    CHECK(rank_modular(g.coupling, 2, 99) == rank_exact(g.coupling));
  }
}

TEST_CASE("global commuting projection on two-tets") {
  auto mesh = standard_mesh("two-tets");
  SpaceCache cache;
  // a polynomial already in every slot space reproduces itself
  Poly p = Poly::variable(3, 0) * Poly::variable(3, 0) * Poly::variable(3, 1);
  std::vector<Poly> qv{Poly::variable(3, 1), Poly::variable(3, 2), Poly::variable(3, 0)};
  std::vector<Poly> vv{Poly::variable(3, 2), Poly::variable(3, 0), Poly::variable(3, 1)};
  auto rep = global_project(mesh, "two-tets", Diagram::Two, 5, p, qv, vv, cache);
  CHECK(rep.membership_ok);
  CHECK(rep.commute_ok);

  // rough random input of degree 7
  std::mt19937_64 rng(11);
  Poly pr = testutil::random_poly(rng, 3, 7, 4);
  std::vector<Poly> qr = testutil::random_vector_field(rng, 7);
  std::vector<Poly> vr = testutil::random_vector_field(rng, 7);
  auto rep2 = global_project(mesh, "two-tets", Diagram::Two, 5, pr, qr, vr, cache);
  CHECK(rep2.membership_ok);
  CHECK(rep2.commute_ok);
}

TEST_CASE("euler characteristic of the built-in meshes") {
  for (const char* name : {"single-tet", "two-tets", "cube6"}) {
    auto mesh = standard_mesh(name);
    INFO(name);
    CHECK(mesh.euler_characteristic() == 1);
  }
}
