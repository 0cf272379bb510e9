#include <doctest.h>

#include <cmath>
#include <memory>

#include "oracles.hpp"
#include "stabcert/bounds.hpp"
#include "stabcert/demo_fem.hpp"
#include "stabcert/errors.hpp"

using namespace stabcert;
using bounds::Simplex;

namespace {

// alpha_Theta of the 1D toy operator psi1 I + psi2 diag(1,-1) with M_X = I:
// min(psi1 + psi2, psi1 - psi2), exactly piecewise affine.
AffineForm toy_form() {
  AffineForm form;
  form.n = 2;
  form.terms = {Matrix::identity(2), Matrix::diag({1.0, -1.0})};
  form.theta_map = theta::ThetaMap::parse({"mu1", "mu2"}, 2);
  form.x_norm = Matrix::identity(2);
  return form;
}

Simplex evaluated_simplex(const AffineForm& form, std::vector<Vector> vertices) {
  Vector values;
  std::vector<Vector> ys;
  for (const Vector& v : vertices) {
    const CoercivityResult r = alpha_theta(form, v);
    values.push_back(r.alpha);
    ys.push_back(r.y_point);
  }
  return Simplex(std::move(vertices), std::move(values), std::move(ys));
}

} // namespace

TEST_SUITE_BEGIN("bounds");

TEST_CASE("barycentric: vertices and centroid") {
  const Simplex s({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {1.0, 2.0, 3.0});
  const auto at_vertex = bounds::barycentric(s, {1.0, 0.0});
  CHECK(at_vertex.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at_vertex.coefficients[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at_vertex.coefficients[2] == doctest::Approx(0.0).epsilon(1e-12));

  const auto at_centroid = bounds::barycentric(s, {1.0 / 3.0, 1.0 / 3.0});
  for (double c : at_centroid.coefficients) CHECK(c == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("barycentric: closed-form coefficients along the quadratic curve") {
  const Simplex s({{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}}, {0.0, 0.0, 0.0});
  for (double mu : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const Vector psi{1.0, mu, mu * mu};
    const auto bc = bounds::barycentric(s, psi);
    CHECK(bc.coefficients[0] == doctest::Approx(1.0 - mu).epsilon(1e-10));
    CHECK(bc.coefficients[1] == doctest::Approx(mu - mu * mu).epsilon(1e-10));
    CHECK(bc.coefficients[2] == doctest::Approx(mu * mu).epsilon(1e-10));
  }
}

TEST_CASE("barycentric: off-hull and degenerate inputs") {
  const Simplex seg({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, {0.0, 0.0});
  CHECK_THROWS_AS(bounds::barycentric(seg, {0.5, 0.5, 0.0}), NotInAffineHull);
  CHECK_THROWS_AS(Simplex({{0.0, 0.0}, {0.0, 0.0}}, {0.0, 0.0}), DegenerateSimplex);
  CHECK_THROWS_AS(Simplex({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}, {0.0, 0.0, 0.0}),
                  DegenerateSimplex);
}

TEST_CASE("interp_lower_bound: vertices, the affine toy, and a FEM midpoint") {
  const AffineForm toy = toy_form();
  const Simplex s = evaluated_simplex(toy, {{1.0, 0.0}, {1.0, 1.0}});
  CHECK(bounds::interp_lower_bound(s, {1.0, 0.0}) == doctest::Approx(1.0));
  // alpha is affine along this segment: bound at the midpoint is exact.
  CHECK(bounds::interp_lower_bound(s, {1.0, 0.5}) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(alpha_theta(toy, {1.0, 0.5}).alpha == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(bounds::interp_lower_bound(s, {1.0, 2.0}), OutsideSimplex);

  const AffineForm fem = demo::assemble_fem({60});
  const Simplex fs = evaluated_simplex(fem, {{1.0, 0.0, 0.0}, {1.0, 8.0, 1.0}});
  const Vector mid{1.0, 4.0, 0.5};
  const double lb = bounds::interp_lower_bound(fs, mid);
  const double truth = alpha_theta(fem, mid).alpha;
  CHECK(lb == doctest::Approx(0.5 * (fs.values()[0] + fs.values()[1])).epsilon(1e-12));
  CHECK(lb <= truth + 1e-9);
}

TEST_CASE("hull_min_bound: basics and the FEM four-point hull") {
  CHECK(bounds::hull_min_bound({1.0}) == 1.0);
  CHECK(bounds::hull_min_bound({0.3, -0.1, 0.5}) == -0.1);
  CHECK_THROWS_AS(bounds::hull_min_bound({}), EmptyInput);

  const AffineForm fem = demo::assemble_fem({180});
  Vector values;
  for (const Vector& mu : std::vector<Vector>{{0.0, 0.0}, {0.0, 2.0}, {12.0, 0.0}, {17.0, 2.0}})
    values.push_back(alpha(fem, mu).alpha);
  const double bound = bounds::hull_min_bound(values);
  CHECK(bound > 0.0);  // coercive on the whole hull of the four points
}

TEST_CASE("extrapolate_upper_bound: chord extension and facet continuity") {
  // Concave f sampled at f(0)=0, f(1)=1; the chord extension at x=2 gives 2.
  const Simplex s({{0.0}, {1.0}}, {0.0, 1.0});
  CHECK(bounds::extrapolate_upper_bound(s, {2.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(bounds::extrapolate_upper_bound(s, {0.5}), InsideSimplex);
  // A boundary point (zero coefficient) is valid for both routes and agrees.
  CHECK(bounds::extrapolate_upper_bound(s, {1.0}) ==
        doctest::Approx(bounds::interp_lower_bound(s, {1.0})));
}

TEST_CASE("extrapolate_upper_bound: exact along the FEM affine ray") {
  const AffineForm fem = demo::assemble_fem({60});
  const Simplex s = evaluated_simplex(fem, {{1.0, 0.0, 0.0}, {1.0, 5.0, 0.0}});
  const Vector outside{1.0, 20.0, 0.0};
  const double extrapolated = bounds::extrapolate_upper_bound(s, outside);
  const double truth = alpha_theta(fem, outside).alpha;
  // alpha is exactly affine along this ray, so the affine extension is tight.
  CHECK(extrapolated == doctest::Approx(truth).epsilon(1e-8));
}

TEST_CASE("ypoint_upper_bound: harvested point is tight at its origin") {
  const AffineForm fem = demo::assemble_fem({60});
  const Vector psi{1.0, 6.0, 0.5};
  const CoercivityResult r = alpha_theta(fem, psi);
  CHECK(bounds::ypoint_upper_bound(psi, {r.y_point}) == doctest::Approx(r.alpha).epsilon(1e-10));
  CHECK_THROWS_AS(bounds::ypoint_upper_bound(psi, {}), EmptyInput);

  // A bank harvested elsewhere still dominates.
  const Vector other{1.0, 9.0, 1.0};
  const CoercivityResult ro = alpha_theta(fem, other);
  CHECK(bounds::ypoint_upper_bound(psi, {ro.y_point}) >= alpha_theta(fem, psi).alpha - 1e-9);
}

TEST_CASE("ypoint_upper_bound: two-point bank tight on the affine segment") {
  const AffineForm fem = demo::assemble_fem({180});
  std::vector<Vector> bank{alpha_theta(fem, {1.0, 0.0, 0.0}).y_point,
                           alpha_theta(fem, {1.0, 12.0, 0.0}).y_point};
  const Vector psi{1.0, 6.0, 0.0};
  const double ub = bounds::ypoint_upper_bound(psi, bank);
  const double truth = alpha_theta(fem, psi).alpha;
  CHECK(ub >= truth - 1e-9);
  CHECK(ub - truth <= 1e-6);  // chord of supporting hyperplanes is tight here
}

TEST_CASE("sandwich property on random simplexes of the FEM Theta-space") {
  auto gen = oracles::rng(401);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const AffineForm fem = demo::assemble_fem({40});
  int checked = 0;
  while (checked < 100) {
    // Random triangle in the plane psi1 = 1 (the Theta image plane).
    std::vector<Vector> verts;
    for (int k = 0; k < 3; ++k)
      verts.push_back({1.0, 30.0 * u01(gen), -0.4 + 2.4 * u01(gen)});
    Vector values;
    std::vector<Vector> ys;
    for (const Vector& v : verts) {
      const CoercivityResult r = alpha_theta(fem, v);
      values.push_back(r.alpha);
      ys.push_back(r.y_point);
    }
    std::unique_ptr<Simplex> s;
    try {
      s = std::make_unique<Simplex>(verts, values, ys);
    } catch (const DegenerateSimplex&) {
      continue;  // nearly collinear draw
    }
    // Random interior point by barycentric mixing.
    double c0 = u01(gen), c1 = u01(gen), c2 = u01(gen);
    const double sum = c0 + c1 + c2;
    c0 /= sum; c1 /= sum; c2 /= sum;
    Vector psi(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      psi[i] = c0 * verts[0][i] + c1 * verts[1][i] + c2 * verts[2][i];
    const double lb = bounds::interp_lower_bound(*s, psi);
    const double ub = bounds::ypoint_upper_bound(psi, ys);
    const double truth = alpha_theta(fem, psi).alpha;
    CHECK(lb - 1e-9 <= truth);
    CHECK(truth <= ub + 1e-9);
    ++checked;
  }
}

TEST_CASE("extrapolation dominance outside random simplexes") {
  auto gen = oracles::rng(402);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const AffineForm fem = demo::assemble_fem({40});
  int checked = 0;
  while (checked < 100) {
    std::vector<Vector> verts;
    for (int k = 0; k < 3; ++k)
      verts.push_back({1.0, 20.0 * u01(gen), 2.0 * u01(gen)});
    Vector values;
    for (const Vector& v : verts) values.push_back(alpha_theta(fem, v).alpha);
    std::unique_ptr<Simplex> s;
    try {
      s = std::make_unique<Simplex>(verts, values);
    } catch (const DegenerateSimplex&) {
      continue;
    }
    // A point beyond vertex 0 along the in-plane direction away from the centroid.
    Vector psi(3);
    for (std::size_t i = 0; i < 3; ++i) {
      const double centroid = (verts[0][i] + verts[1][i] + verts[2][i]) / 3.0;
      psi[i] = verts[0][i] + (2.0 + u01(gen)) * (verts[0][i] - centroid);
    }
    double ub;
    try {
      ub = bounds::extrapolate_upper_bound(*s, psi);
    } catch (const InsideSimplex&) {
      continue;
    }
    CHECK(ub >= alpha_theta(fem, psi).alpha - 1e-9);
    ++checked;
  }
}

TEST_CASE("refinement monotonicity: splitting never weakens interior bounds") {
  auto gen = oracles::rng(403);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const AffineForm fem = demo::assemble_fem({40});
  const std::vector<Vector> verts{{1.0, 0.0, 0.0}, {1.0, 18.0, 0.0}, {1.0, 9.0, 2.0}};
  const Simplex coarse = evaluated_simplex(fem, verts);

  // Split at an evaluated interior point: three sub-simplexes.
  const Vector w{1.0, 9.0, 2.0 / 3.0};
  std::vector<Simplex> fine;
  for (int drop = 0; drop < 3; ++drop) {
    std::vector<Vector> sub;
    for (int k = 0; k < 3; ++k)
      if (k != drop) sub.push_back(verts[static_cast<std::size_t>(k)]);
    sub.push_back(w);
    fine.push_back(evaluated_simplex(fem, sub));
  }
  for (int rep = 0; rep < 50; ++rep) {
    double c0 = u01(gen), c1 = u01(gen), c2 = u01(gen);
    const double sum = c0 + c1 + c2;
    c0 /= sum; c1 /= sum; c2 /= sum;
    Vector psi(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      psi[i] = c0 * verts[0][i] + c1 * verts[1][i] + c2 * verts[2][i];
    const double coarse_lb = bounds::interp_lower_bound(coarse, psi);
    for (const Simplex& s : fine) {
      try {
        const double fine_lb = bounds::interp_lower_bound(s, psi);
        CHECK(fine_lb >= coarse_lb - 1e-9);
      } catch (const OutsideSimplex&) {
      }
    }
  }
}

TEST_CASE("YPointBank: capacity and furthest-point eviction") {
  bounds::YPointBank bank(2);
  bank.insert({0.0, 0.0});
  bank.insert({1.0, 0.0});
  CHECK(bank.size() == 2);
  // Full: inserting near (0,0) evicts the furthest entry (1,0).
  bank.insert({0.1, 0.0});
  CHECK(bank.size() == 2);
  double nearest = 1e9;
  for (const Vector& y : bank.points()) nearest = std::min(nearest, std::abs(y[0] - 0.05));
  CHECK(nearest < 0.2);
}

TEST_SUITE_END();
