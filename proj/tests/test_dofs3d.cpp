#include <catch2/catch_amalgamated.hpp>

#include "alfeld/dofs3d.hpp"
#include "helpers.hpp"

using namespace alfeld;
using testutil::q;

namespace {

const AlfeldSplit& ref3() {
  static AlfeldSplit sp(Simplex::reference(3));
  return sp;
}

DofMachine& machine() {
  static DofMachine m(ref3());
  return m;
}

long c0(long x) { return x < 0 ? 0 : x; }

// Block-count formulas from the per-space lists.
std::map<std::string, long> expected_counts(DofSpace s, long r) {
  switch (s) {
    case DofSpace::Md0:
      return {{"vertex-jet2", 40},
              {"edge-value", 6 * c0(r - 5)},
              {"edge-normal-deriv", 12 * (r - 4)},
              {"face-value", 4 * (r - 5) * (r - 4) / 2},
              {"face-normal-deriv", 4 * (r - 3) * (r - 2) / 2},
              {"cell-gradgrad", 2 * (r - 4) * (r - 3) * (r - 2) / 3}};
    case DofSpace::Md1:
      return {{"vertex-jet1", 48},
              {"edge-value", 18 * (r - 4)},
              {"edge-curl", 18 * (r - 3)},
              {"face-normal", 2 * (r - 2) * (r - 3)},
              {"face-tangential", 4 * (r - 3) * c0(r - 5)},
              {"face-curl-tangential", 4 * (r - 3) * (r - 4)},
              {"cell-grad-image", 2 * (r - 4) * (r - 3) * (r - 2) / 3},
              {"cell-curl-image", (r - 4) * (r - 3) * (4 * r - 11) / 3}};
    case DofSpace::Md2:
      return {{"vertex-value", 12},
              {"vertex-div", 4},
              {"edge-value", 18 * (r - 3)},
              {"edge-div", 6 * (r - 4)},
              {"face-value", 6 * (r - 3) * (r - 4)},
              {"face-div", 2 * (r - 4) * c0(r - 5)},
              {"cell-curl-image", (r - 4) * (r - 3) * (4 * r - 11) / 3},
              {"cell-div-ring", (2 * r - 7) * (r * r - 7 * r + 15) / 3 - 1}};
    case DofSpace::Md3:
      return {{"vertex-value", 4},
              {"edge-value", 6 * (r - 4)},
              {"face-value", 2 * (r - 4) * c0(r - 5)},
              {"cell-mean", 1},
              {"cell-ring", (2 * r - 7) * (r * r - 7 * r + 15) / 3 - 1}};
    case DofSpace::Mc1:
      return {{"vertex-jet1", 48},
              {"edge-value", 18 * (r - 4)},
              {"edge-face-curl-normal", 12 * (r - 3)},
              {"face-normal", 2 * (r - 2) * (r - 3)},
              {"face-tangential", 4 * (r - 3) * c0(r - 5)},
              {"cell-grad-image", 2 * (r - 4) * (r - 3) * (r - 2) / 3},
              {"cell-curl-image", (r - 3) * (4 * r * r + 3 * r + 14) / 3}};
    case DofSpace::M2:
      return {{"vertex-value", 12},
              {"edge-value", 18 * (r - 3)},
              {"face-value", 6 * (r - 4) * (r - 3)},
              {"cell-curl-image", (r - 4) * (r - 3) * (4 * r - 11) / 3},
              {"cell-div-ring", 2 * (r - 2) * (r - 1) * r / 3 - 1}};
    case DofSpace::Vc2:
      return {{"vertex-value", 12},
              {"edge-face-normal", 12 * (r - 3)},
              {"face-normal", 2 * (r - 3) * (r - 4)},
              {"cell-curl-image", (r - 3) * (4 * r * r + 3 * r + 14) / 3},
              {"cell-div-ring", 2 * (r - 2) * (r - 1) * r / 3 - 1}};
    case DofSpace::Vd3:
      return {{"cell-mean", 1}, {"cell-ring", 2 * (r - 2) * (r - 1) * r / 3 - 1}};
  }
  return {};
}

const std::array<DofSpace, 8> all_spaces{DofSpace::Md0, DofSpace::Md1, DofSpace::Md2, DofSpace::Md3,
                                         DofSpace::Mc1, DofSpace::M2, DofSpace::Vc2, DofSpace::Vd3};

ProxyField global0(const Poly& p) { return ProxyField::constant_field(ref3(), 0, {p}); }

}  // namespace

TEST_CASE("functional counts match the per-space lists for r = 5, 6, 7") {
  for (DofSpace s : all_spaces)
    for (int r : {5, 6, 7}) {
      DofSet ds = build_dofset(s, r, ref3());
      auto got = ds.count_by_block();
      long total = 0;
      for (auto& [block, count] : expected_counts(s, r)) {
        INFO(ds.space << " r=" << r << " block " << block);
        long actual = got.count(block) ? got.at(block) : 0;
        CHECK(actual == count);
        total += count;
      }
      CHECK(static_cast<long>(ds.dofs.size()) == total);
      CHECK(total == build_space(dof_target_spec(s, r), ref3())->dim());
    }
}

TEST_CASE("unisolvence at r = 5") {
  for (DofSpace s : all_spaces) {
    auto rep = machine().check_unisolvence(s, 5);
    INFO(rep.space);
    CHECK(rep.square);
    CHECK(rep.unisolvent);
  }
}

TEST_CASE("unisolvence of the small spaces at r = 6") {
  for (DofSpace s : {DofSpace::Md0, DofSpace::Md3, DofSpace::Vd3}) {
    auto rep = machine().check_unisolvence(s, 6);
    INFO(rep.space);
    CHECK(rep.unisolvent);
  }
}

TEST_CASE("r = 6 scalar count needs the low-order edge and face moments") {
  auto rep = machine().check_unisolvence(DofSpace::Md0, 6);
  CHECK(rep.space_dim == 114);
  CHECK(rep.functional_count == 114);
  CHECK(rep.unisolvent);
  // without the degree-zero edge/face value moments the count falls short
  long omitted = rep.functional_count - rep.count_by_kind.at("edge-value") - rep.count_by_kind.at("face-value");
  CHECK(omitted == 104);
}

TEST_CASE("projection reproduces members and is idempotent") {
  Poly p = Poly::variable(3, 0) * Poly::variable(3, 0) * Poly::variable(3, 1);  // x^2 y
  PiecewiseKForm pi = machine().project(DofSpace::Md0, 5, global0(p));
  for (const auto& piece : pi.pieces) CHECK(piece == KForm::from_scalar(p));

  // a genuine basis element of the space projects to itself
  auto target = build_space(dof_target_spec(DofSpace::Md3, 5), ref3());
  PiecewiseKForm elt = target->element(target->dim() / 2);
  PiecewiseKForm back = machine().project(DofSpace::Md3, 5, ProxyField::from_piecewise(elt));
  CHECK(back == elt);

  // idempotence on a rough input
  std::mt19937_64 rng(77);
  Poly rough = testutil::random_poly(rng, 3, 7);
  PiecewiseKForm once = machine().project(DofSpace::Md0, 5, global0(rough));
  PiecewiseKForm twice = machine().project(DofSpace::Md0, 5, ProxyField::from_piecewise(once));
  CHECK(once == twice);
}

TEST_CASE("projection matches every functional of the input") {
  std::mt19937_64 rng(99);
  Poly rough = testutil::random_poly(rng, 3, 7);
  ProxyField in = global0(rough);
  PiecewiseKForm out = machine().project(DofSpace::Md0, 5, in);
  DofSet ds = build_dofset(DofSpace::Md0, 5, ref3());
  RatMatrix rows7 = dof_rows(ds, ref3(), 7);
  ProxyLayout lay(1, 7, 4);
  RatVec v_in = rows7.apply(lay.vectorize(in));
  RatVec v_out = rows7.apply(lay.vectorize(ProxyField::from_piecewise(out)));
  REQUIRE(v_in.size() == 68);
  for (size_t i = 0; i < v_in.size(); ++i) CHECK(v_in[i] == v_out[i]);
}

TEST_CASE("rescaling a functional leaves the projection unchanged") {
  // solve the projection system by hand with and without row scalings
  DofSet ds = build_dofset(DofSpace::Md3, 5, ref3());
  auto target = build_space(dof_target_spec(DofSpace::Md3, 5), ref3());
  ProxyLayout lay(1, 2, 4);
  RatMatrix basis_proxy(lay.dim(), target->dim());
  for (int j = 0; j < target->dim(); ++j) {
    RatVec v = lay.vectorize(ProxyField::from_piecewise(target->element(j)));
    for (int i = 0; i < lay.dim(); ++i) basis_proxy.at(i, j) = v[i];
  }
  RatMatrix rows2 = dof_rows(ds, ref3(), 2);
  std::mt19937_64 rng(5);
  Poly p = testutil::random_poly(rng, 3, 2);
  RatVec vals = rows2.apply(lay.vectorize(global0(p)));
  RatMatrix m = rows2 * basis_proxy;
  auto x = solve_exact(m, vals);
  REQUIRE(x.has_value());
  // scale every third functional by -7/3
  for (int i = 0; i < m.rows(); i += 3) {
    for (int j = 0; j < m.cols(); ++j) m.at(i, j) *= q(-7, 3);
    vals[i] *= q(-7, 3);
  }
  auto y = solve_exact(m, vals);
  REQUIRE(y.has_value());
  CHECK(*x == *y);
}

TEST_CASE("commuting diagrams on seeded random fields") {
  std::mt19937_64 rng(314);
  Poly p = testutil::random_poly(rng, 3, 7);
  std::vector<Poly> qv = testutil::random_vector_field(rng, 7);
  std::vector<Poly> vv = testutil::random_vector_field(rng, 7);
  for (Diagram dia : {Diagram::Two, Diagram::One, Diagram::Three}) {
    auto rep = check_commute(machine(), dia, 5, p, qv, vv);
    INFO(rep.diagram);
    CHECK(rep.grad_ok);
    CHECK(rep.curl_ok);
    CHECK(rep.div_ok);
  }
}

TEST_CASE("commute example: q = (y^7, 0, 0) in the second diagram") {
  Poly p = Poly::variable(3, 0);
  std::vector<Poly> y7{Poly::monomial(Exponents{0, 7, 0}, q(1)), Poly(3), Poly(3)};
  auto rep = check_commute(machine(), Diagram::One, 5, p, y7, y7);
  CHECK(rep.curl_ok);
}

TEST_CASE("DOFs supported on one face control the trace there") {
  // members of the scalar space whose face-supported DOFs vanish have zero
  // value and gradient on that face
  const auto& sp = ref3();
  DofSet ds = build_dofset(DofSpace::Md0, 5, sp);
  auto target = build_space(dof_target_spec(DofSpace::Md0, 5), sp);
  ProxyLayout lay(1, 5, 4);
  RatMatrix basis_proxy(lay.dim(), target->dim());
  for (int j = 0; j < target->dim(); ++j) {
    RatVec v = lay.vectorize(ProxyField::from_piecewise(target->element(j)));
    for (int i = 0; i < lay.dim(); ++i) basis_proxy.at(i, j) = v[i];
  }
  RatMatrix rows5 = dof_rows(ds, sp, 5);
  RatMatrix all = rows5 * basis_proxy;
  std::vector<int> face{0, 1, 2};  // F_3
  RatMatrix face_rows(0, target->dim());
  for (size_t i = 0; i < ds.dofs.size(); ++i) {
    const auto& d = ds.dofs[i];
    if (d.op == DofOp::CellMoment) continue;
    bool inside = std::includes(face.begin(), face.end(), d.entity.begin(), d.entity.end());
    if (!inside) continue;
    RatVec row(target->dim());
    for (int j = 0; j < target->dim(); ++j) row[j] = all.at(static_cast<int>(i), j);
    face_rows.append_row(row);
  }
  RatMatrix ns = nullspace_basis(face_rows);
  REQUIRE(ns.cols() > 0);
  std::vector<Point> fpts{sp.parent().vertex(0), sp.parent().vertex(1), sp.parent().vertex(2)};
  auto images = parametrization(fpts);
  for (int j = 0; j < ns.cols(); ++j) {
    RatVec coords = ns.column(j);
    PiecewiseKForm w = target->devectorize(target->basis.apply(coords));
    // the face F_3 is owned by child 3
    Poly val = w.pieces[3].coeff(Sigma{});
    CHECK(val.compose(images).is_zero());
    for (int a = 0; a < 3; ++a) CHECK(val.partial(a).compose(images).is_zero());
  }
}

TEST_CASE("surface operators") {
  const auto& sp = ref3();
  std::vector<Point> fpts{sp.parent().vertex(1), sp.parent().vertex(2), sp.parent().vertex(3)};
  Vec N = face_normal(fpts, centroid(sp.parent().vertices()));
  std::mt19937_64 rng(8);
  Poly phi = testutil::random_poly(rng, 3, 3);
  Poly qq = testutil::random_poly(rng, 3, 3);
  std::vector<Poly> omega = testutil::random_vector_field(rng, 3);

  // curl_F of grad_F vanishes identically
  CHECK(surface_curl(surface_grad(phi, N), N).is_zero());
  // div_F of a constant tangential field vanishes
  Vec t1 = sub(fpts[1], fpts[0]);
  std::vector<Poly> const_t{Poly::constant(3, t1[0]), Poly::constant(3, t1[1]), Poly::constant(3, t1[2])};
  CHECK(surface_div(const_t, N).is_zero());

  // Stokes identity with the scaled operators and difference-vector edge
  // tangents: int_F (curl_F w) q - int_F (rot_F q) . w = sum_e int_e (w . t) q
  auto images = parametrization(fpts);
  Poly lhs1 = (surface_curl(omega, N) * qq).compose(images);
  Poly lhs2(2);
  {
    auto rot = surface_rot(qq, N);
    Poly s(3);
    for (int i = 0; i < 3; ++i) s += rot[i] * omega[i];
    lhs2 = s.compose(images);
  }
  Rational lhs = reference_simplex_integral(lhs1 - lhs2);
  Rational rhs(0);
  for (int e = 0; e < 3; ++e) {
    const Point& a = fpts[e];
    const Point& b = fpts[(e + 1) % 3];
    std::vector<Poly> edge_images;
    for (int m = 0; m < 3; ++m)
      edge_images.push_back(Poly::constant(1, a[m]) + (b[m] - a[m]) * Poly::variable(1, 0));
    Vec t = sub(b, a);
    Poly integrand(1);
    for (int i = 0; i < 3; ++i) integrand += t[i] * (omega[i].compose(edge_images) * qq.compose(edge_images));
    rhs += reference_simplex_integral(integrand);
  }
  CHECK(lhs == rhs);
}

TEST_CASE("low-degree acceptance of the vertex-continuity sets") {
  // counts are consistent below r = 5 for the two vertex-continuity spaces;
  // the unisolvence outcome at r = 4 is recorded but not asserted
  auto rep4 = machine().check_unisolvence(DofSpace::Vc2, 4);
  CHECK(rep4.square);
  INFO("Vc2 at r=4: rank " << rep4.matrix_rank << " of " << rep4.space_dim);
  auto rep3 = machine().check_unisolvence(DofSpace::Vc2, 3);
  CHECK(rep3.square);
  CHECK_THROWS_AS(build_dofset(DofSpace::Md0, 4, ref3()), std::invalid_argument);
}
