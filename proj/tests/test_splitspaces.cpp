#include <catch2/catch_amalgamated.hpp>

#include "alfeld/splitspaces.hpp"
#include "helpers.hpp"

using namespace alfeld;
using testutil::q;

namespace {

const AlfeldSplit& ref_split(int n) {
  static AlfeldSplit s2(Simplex::reference(2));
  static AlfeldSplit s3(Simplex::reference(3));
  static AlfeldSplit s4(Simplex::reference(4));
  switch (n) {
    case 2: return s2;
    case 3: return s3;
    default: return s4;
  }
}

// Embeds a global polynomial form as a piecewise form on the split.
PiecewiseKForm as_piecewise(const AlfeldSplit& sp, const KForm& w) {
  PiecewiseKForm p;
  p.split = &sp;
  for (int c = 0; c < sp.n_children(); ++c) p.pieces.push_back(w);
  return p;
}

bool satisfies_constraints(const SpaceSpec& spec, const AlfeldSplit& sp, const PiecewiseKForm& w) {
  RatMatrix c = constraint_matrix(spec, sp);
  auto sb = build_space(spec, sp);
  RatVec raw = sb->vectorize(w);
  for (const auto& x : c.apply(raw))
    if (!x.is_zero()) return false;
  return true;
}

}  // namespace

TEST_CASE("build_space dimensions match the closed forms") {
  const auto& s3 = ref_split(3);
  auto md0 = build_space(SpaceSpec{Family::Md, false, 3, 0, 5}, s3);
  CHECK(md0->dim() == 68);
  CHECK(68 == binom(8, 3) + 3 * binom(4, 3));

  auto md0_low = build_space(SpaceSpec{Family::Md, false, 3, 0, 3}, s3);
  CHECK(md0_low->dim() == 20);  // equals P_3 of the parent

  auto vd1 = build_space(SpaceSpec{Family::Vd, false, 3, 1, 1}, s3);
  CHECK(vd1->dim() == 20);  // two tangential moments on each of the 10 edges

  const auto& s2 = ref_split(2);
  CHECK(build_space(SpaceSpec{Family::M, false, 2, 0, 1}, s2)->dim() == 4);
}

TEST_CASE("low-degree Md^0 equals the global polynomial space") {
  const auto& s3 = ref_split(3);
  SpaceSpec spec{Family::Md, false, 3, 0, 3};
  auto sb = build_space(spec, s3);
  REQUIRE(sb->dim() == 20);
  for (const auto& b : pr_lambda_basis(3, 3, 0))
    CHECK(satisfies_constraints(spec, s3, as_piecewise(s3, b)));
}

TEST_CASE("dimension_formula spot values") {
  CHECK(dimension_formula(SpaceSpec{Family::Md, true, 3, 0, 5}) == 4);
  CHECK(dimension_formula(SpaceSpec{Family::Mc, false, 3, 1, 4}) == 192);
  CHECK(dimension_formula(SpaceSpec{Family::Vc, false, 3, 2, 3}) == 165);
  CHECK(dimension_formula(SpaceSpec{Family::M, false, 3, 2, 3}) == 105);
  CHECK(105 == 3 * (binom(7, 4) - binom(3, 4)));
  CHECK(dimension_formula(SpaceSpec{Family::Md, false, 3, 1, 4}) == 132);
  CHECK(dimension_formula(SpaceSpec{Family::Md, false, 3, 2, 3}) == 80);
  CHECK(dimension_formula(SpaceSpec{Family::Md, false, 3, 3, 2}) == 15);
  CHECK(dimension_formula(SpaceSpec{Family::Vd, false, 3, 3, 2}) == 40);
  // negative degree: the zero space
  CHECK(dimension_formula(SpaceSpec{Family::Md, false, 3, 1, -1}) == 0);
  // no closed form for ring Vd below top degree
  CHECK_FALSE(has_dimension_formula(SpaceSpec{Family::Vd, true, 3, 1, 3}));
  CHECK_THROWS_AS(dimension_formula(SpaceSpec{Family::Vd, true, 3, 1, 3}), std::invalid_argument);
}

TEST_CASE("verify_dimension") {
  const auto& s3 = ref_split(3);
  auto r1 = verify_dimension(SpaceSpec{Family::Md, false, 3, 0, 5}, s3);
  CHECK(r1.pass);
  CHECK(r1.dim_computed == 68);
  auto r2 = verify_dimension(SpaceSpec{Family::Md, false, 3, 1, 4}, s3);
  CHECK(r2.pass);
  CHECK(r2.dim_computed == 132);
  auto r3 = verify_dimension(SpaceSpec{Family::Md, false, 3, 3, 2}, s3);
  CHECK(r3.pass);
  CHECK(r3.dim_computed == 15);
}

TEST_CASE("d_matrix ranks") {
  const auto& s3 = ref_split(3);
  // constants have zero derivative
  auto consts = build_space(SpaceSpec{Family::Md, false, 3, 0, 0}, s3);
  REQUIRE(consts->dim() == 1);
  auto md1_0 = build_space(SpaceSpec{Family::Md, false, 3, 1, -1}, s3);
  RatMatrix zero = d_matrix(*consts, *md1_0);
  CHECK(zero.is_zero());

  auto ring0 = build_space(SpaceSpec{Family::Md, true, 3, 0, 5}, s3);
  auto ring1 = build_space(SpaceSpec{Family::Md, true, 3, 1, 4}, s3);
  CHECK(rank_exact(d_matrix(*ring0, *ring1)) == 4);  // grad injective on the ring space

  auto md0 = build_space(SpaceSpec{Family::Md, false, 3, 0, 5}, s3);
  auto md1 = build_space(SpaceSpec{Family::Md, false, 3, 1, 4}, s3);
  CHECK(rank_exact(d_matrix(*md0, *md1)) == 67);  // kernel = constants
}

TEST_CASE("local exactness of the vertex-smooth sequences") {
  const auto& s3 = ref_split(3);
  for (int id = 1; id <= 3; ++id) {
    auto rep = check_exact(c2_sequence(id, 5), s3);
    INFO(rep.name);
    CHECK(rep.pass);
    CHECK(rep.alternating_sum == 1);
  }
  auto r1 = check_exact(c2_sequence(1, 5), s3);
  CHECK(r1.slots[0].dim == 68);
  CHECK(r1.slots[1].dim == 132);
  CHECK(r1.slots[2].dim == 80);
  CHECK(r1.slots[3].dim == 15);
  auto r2 = check_exact(c2_sequence(2, 5), s3);
  CHECK(r2.slots[2].dim == 105);
  CHECK(68 - 132 + 105 - 40 == 1);
  auto r3 = check_exact(c2_sequence(3, 5), s3);
  CHECK(r3.slots[1].dim == 192);
  CHECK(r3.slots[2].dim == 165);
  CHECK(68 - 192 + 165 - 40 == 1);

  // low degrees stay exact
  for (int r = 1; r <= 3; ++r)
    for (int id = 1; id <= 3; ++id) {
      auto rep = check_exact(c2_sequence(id, r), s3);
      INFO(rep.name << " r=" << r);
      CHECK(rep.pass);
      CHECK(rep.alternating_sum == 1);
    }
}

TEST_CASE("ring sequences are exact") {
  const auto& s3 = ref_split(3);
  for (int t = 1; t <= 3; ++t) {
    auto rep = check_exact(ring_sequence(3, t, 5), s3);
    INFO(rep.name);
    CHECK(rep.pass);
  }
  // curl exactness instance from the third ring sequence:
  // dim{div-free members of ring Vd^2_3} = dim curl(ring M^1_4)
  auto m1 = build_space(SpaceSpec{Family::M, true, 3, 1, 4}, s3);
  auto vd2 = build_space(SpaceSpec{Family::Vd, true, 3, 2, 3}, s3);
  auto vd3 = build_space(SpaceSpec{Family::Vd, true, 3, 3, 2}, s3);
  long curl_rank = rank_exact(d_matrix(*m1, *vd2));
  long div_rank = rank_exact(d_matrix(*vd2, *vd3));
  CHECK(vd2->dim() - div_rank == curl_rank);

  const auto& s2 = ref_split(2);
  for (int t = 1; t <= 2; ++t)
    for (int r = 1; r <= 4; ++r) {
      auto rep = check_exact(ring_sequence(2, t, r), s2);
      INFO(rep.name << " r=" << r);
      CHECK(rep.pass);
    }
}

TEST_CASE("rank-nullity dimension identities") {
  // dim Md_r^k = dim M_{r-1}^{k+1} + dim M_r^k - dim Vd_{r-1}^{k+1}, and the
  // ring version, with every dimension computed from a built basis.
  for (int n : {2, 3}) {
    const auto& sp = ref_split(n);
    int rmax = (n == 2) ? 5 : 4;
    for (int k = 0; k <= n - 1; ++k)
      for (int r = 1; r <= rmax; ++r) {
        long md = build_space(SpaceSpec{Family::Md, false, n, k, r}, sp)->dim();
        long m_up = build_space(SpaceSpec{Family::M, false, n, k + 1, r - 1}, sp)->dim();
        long m = build_space(SpaceSpec{Family::M, false, n, k, r}, sp)->dim();
        long vd_up = build_space(SpaceSpec{Family::Vd, false, n, k + 1, r - 1}, sp)->dim();
        INFO("n=" << n << " k=" << k << " r=" << r);
        CHECK(md == m_up + m - vd_up);
        long mdo = build_space(SpaceSpec{Family::Md, true, n, k, r}, sp)->dim();
        long mo_up = build_space(SpaceSpec{Family::M, true, n, k + 1, r - 1}, sp)->dim();
        long mo = build_space(SpaceSpec{Family::M, true, n, k, r}, sp)->dim();
        long vdo_up = build_space(SpaceSpec{Family::Vd, true, n, k + 1, r - 1}, sp)->dim();
        CHECK(mdo == mo_up + mo - vdo_up);
      }
  }
}

TEST_CASE("family inclusions") {
  const auto& s3 = ref_split(3);
  int r = 3;
  for (int k = 0; k <= 2; ++k) {
    auto md = build_space(SpaceSpec{Family::Md, false, 3, k, r}, s3);
    SpaceSpec m_spec{Family::M, false, 3, k, r};
    SpaceSpec vd_spec{Family::Vd, false, 3, k, r};
    for (int j = 0; j < md->dim(); ++j) {
      auto e = md->element(j);
      CHECK(satisfies_constraints(m_spec, s3, e));
      CHECK(satisfies_constraints(vd_spec, s3, e));
    }
    auto m = build_space(m_spec, s3);
    for (int j = 0; j < m->dim(); ++j) CHECK(satisfies_constraints(vd_spec, s3, m->element(j)));
  }
  // Mc inside M, Vc inside Vd
  auto mc = build_space(SpaceSpec{Family::Mc, false, 3, 1, 2}, s3);
  for (int j = 0; j < mc->dim(); ++j)
    CHECK(satisfies_constraints(SpaceSpec{Family::M, false, 3, 1, 2}, s3, mc->element(j)));
  auto vc = build_space(SpaceSpec{Family::Vc, false, 3, 2, 2}, s3);
  for (int j = 0; j < vc->dim(); ++j)
    CHECK(satisfies_constraints(SpaceSpec{Family::Vd, false, 3, 2, 2}, s3, vc->element(j)));
}

TEST_CASE("basis elements satisfy their constraint catalog") {
  const auto& s3 = ref_split(3);
  for (SpaceSpec spec : {SpaceSpec{Family::Md, false, 3, 1, 3}, SpaceSpec{Family::Vc, false, 3, 2, 2},
                         SpaceSpec{Family::Md, true, 3, 2, 4}, SpaceSpec{Family::Vd, true, 3, 3, 2}}) {
    auto sb = build_space(spec, s3);
    for (int j = 0; j < sb->dim(); ++j) {
      RatVec res = sb->constraints.apply(sb->basis.column(j));
      bool all_zero = true;
      for (const auto& x : res) all_zero = all_zero && x.is_zero();
      CHECK(all_zero);
    }
  }
}

TEST_CASE("low-degree vertex-continuity spaces collapse (span equality)") {
  const auto& s3 = ref_split(3);
  // Mc at degree 2 equals the full vector quadratics
  SpaceSpec mc{Family::Mc, false, 3, 1, 2};
  auto mc_basis = build_space(mc, s3);
  CHECK(mc_basis->dim() == 30);
  for (const auto& b : pr_lambda_basis(3, 2, 1)) CHECK(satisfies_constraints(mc, s3, as_piecewise(s3, b)));
  // Vc at degree 1 equals the continuous space M^2_1
  SpaceSpec vc{Family::Vc, false, 3, 2, 1};
  auto vc_basis = build_space(vc, s3);
  auto m2 = build_space(SpaceSpec{Family::M, false, 3, 2, 1}, s3);
  CHECK(vc_basis->dim() == 15);
  CHECK(m2->dim() == 15);
  for (int j = 0; j < m2->dim(); ++j) CHECK(satisfies_constraints(vc, s3, m2->element(j)));
}

TEST_CASE("find_potential") {
  const auto& s3 = ref_split(3);
  // piecewise constant with zero mean on the four equal-volume children
  PiecewiseKForm w;
  w.split = &s3;
  for (int c = 0; c < 4; ++c) {
    KForm f(3, 3);
    f.add_term(Sigma{0, 1, 2}, Poly::constant(3, q(c == 3 ? -3 : 1)));
    w.pieces.push_back(f);
  }
  SpaceSpec target{Family::M, true, 3, 2, 1};
  PiecewiseKForm rho = find_potential(w, target, s3);
  CHECK(rho.d() == w);
  CHECK(satisfies_constraints(target, s3, rho));

  // zero input gives the zero potential
  PiecewiseKForm zero;
  zero.split = &s3;
  for (int c = 0; c < 4; ++c) zero.pieces.push_back(KForm(3, 3));
  CHECK(find_potential(zero, target, s3).is_zero());

  // nonzero mean violates the hypothesis
  PiecewiseKForm bad;
  bad.split = &s3;
  for (int c = 0; c < 4; ++c) {
    KForm f(3, 3);
    f.add_term(Sigma{0, 1, 2}, Poly::constant(3, q(c == 0 ? 24 : 0)));  // integral 1
    bad.pieces.push_back(f);
  }
  CHECK_THROWS_AS(find_potential(bad, target, s3), std::invalid_argument);

  // seeded random closed forms: d of a random ring element is closed and
  // conforming, and a continuous potential must exist for it
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dist(-3, 3);
  for (int k : {1, 2}) {
    SpaceSpec tgt{Family::M, true, 3, k, 4 - k};
    auto up = build_space(tgt, s3);
    for (int t = 0; t < 2; ++t) {
      RatVec coeff(up->dim());
      for (auto& c : coeff) c = q(dist(rng));
      PiecewiseKForm elt = up->devectorize(up->basis.apply(coeff));
      PiecewiseKForm closed = elt.d();
      PiecewiseKForm back = find_potential(closed, tgt, s3);
      CHECK(back.d() == closed);
      CHECK(satisfies_constraints(tgt, s3, back));
    }
  }
}

TEST_CASE("vertex smoothness probe") {
  const auto& s3 = ref_split(3);
  for (int r : {4, 5})
    for (int k = 0; k <= 2; ++k) {
      auto rep = vertex_smoothness_probe(k, r, s3);
      INFO("k=" << k << " r=" << r);
      CHECK(rep.pass);
    }
  auto rep = vertex_smoothness_probe(1, 4, s3);
  CHECK(rep.dim_plain == 132);
}

TEST_CASE("invalid specs are rejected") {
  const auto& s3 = ref_split(3);
  CHECK_THROWS_AS(build_space(SpaceSpec{Family::Mc, false, 3, 2, 3}, s3), std::invalid_argument);
  CHECK_THROWS_AS(build_space(SpaceSpec{Family::V, true, 3, 1, 2}, s3), std::invalid_argument);
  CHECK_THROWS_AS(build_space(SpaceSpec{Family::Vc, false, 2, 1, 2}, ref_split(2)), std::invalid_argument);
}
