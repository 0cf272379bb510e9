#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "stabcert/bounds.hpp"
#include "stabcert/certify.hpp"
#include "stabcert/demo_fem.hpp"
#include "stabcert/errors.hpp"
#include "stabcert/json_io.hpp"

using namespace stabcert;
using certify::ParameterBox;
using certify::Verdict;

namespace {

ParameterBox box2(double a, double b, double c, double d) {
  return ParameterBox{{{a, b}, {c, d}}};
}

// Is psi inside the convex hull of the given simplex vertices?
bool inside_simplex(const std::vector<Vector>& verts, const Vector& psi, double tol = 1e-9) {
  bounds::Simplex s(verts, Vector(verts.size(), 0.0));
  try {
    const auto bc = bounds::barycentric(s, psi);
    return bc.inside(tol);
  } catch (const NotInAffineHull&) {
    return false;
  }
}

// 2x2 diagonal operator over theta = [1, mu1, mu1^2]: alpha is an explicit
// minimum of two quadratics in mu.
AffineForm quadratic_toy(double a, double b, double c, double d) {
  AffineForm form;
  form.n = 2;
  form.terms = {Matrix::identity(2), Matrix::diag({a, b}), Matrix::diag({c, d})};
  form.theta_map = theta::ThetaMap::parse({"1", "mu1", "mu1^2"}, 1);
  form.x_norm = Matrix::identity(2);
  return form;
}

} // namespace

TEST_SUITE_BEGIN("certify");

TEST_CASE("enclose_boundary: affine FEM facets map exactly") {
  const AffineForm form = demo::assemble_fem({10});
  const auto cells = certify::enclose_boundary(box2(0.0, 10.0, 0.0, 2.0), form.theta_map, 2);
  CHECK(cells.size() == 8);  // 4 facets x resolution 2, one segment each
  for (const auto& cell : cells) {
    CHECK(cell.construction == "affine");
    REQUIRE(cell.psi_vertices.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      REQUIRE(cell.on_image[k]);
      const Vector psi = form.theta_map.eval(cell.mu_of_vertex[k]);
      CHECK(psi == cell.psi_vertices[k]);
    }
    // Midpoint of the facet edge maps inside the segment (affine exactness).
    Vector mu_mid(2);
    for (std::size_t i = 0; i < 2; ++i) mu_mid[i] = cell.mu_box[i].mid();
    CHECK(inside_simplex(cell.psi_vertices, form.theta_map.eval(mu_mid)));
  }
}

TEST_CASE("enclose_boundary: quadratic curve [1, mu, mu^2] on [0, 1]") {
  const theta::ThetaMap map = theta::ThetaMap::parse({"1", "mu1", "mu1^2"}, 1);
  const auto cells = certify::enclose_boundary(ParameterBox{{{0.0, 1.0}}}, map, 1);
  REQUIRE(cells.size() == 1);
  const auto& cell = cells.front();
  CHECK(cell.construction == "curve-triangle");
  REQUIRE(cell.psi_vertices.size() == 3);

  // The whole curve [1, mu, mu^2] lies inside our cell.
  for (int k = 0; k <= 1000; ++k) {
    const double mu = static_cast<double>(k) / 1000.0;
    CHECK(inside_simplex(cell.psi_vertices, {1.0, mu, mu * mu}));
  }
  // And our triangle sits inside the classic coarse enclosure of the curve.
  const std::vector<Vector> coarse_hull{{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}};
  for (const Vector& v : cell.psi_vertices) CHECK(inside_simplex(coarse_hull, v, 1e-6));
}

TEST_CASE("enclose_boundary: secant/tangent triangle on [0.25, 0.75]") {
  const theta::ThetaMap map = theta::ThetaMap::parse({"mu1", "mu1^2"}, 1);
  const auto cells = certify::enclose_boundary(ParameterBox{{{0.25, 0.75}}}, map, 1);
  REQUIRE(cells.size() == 1);
  REQUIRE(cells.front().psi_vertices.size() == 3);
  for (int k = 0; k <= 1000; ++k) {
    const double mu = 0.25 + 0.5 * static_cast<double>(k) / 1000.0;
    CHECK(inside_simplex(cells.front().psi_vertices, {mu, mu * mu}));
  }
  // The apex is the padded tangent intersection at t* = 0.5.
  const Vector& apex = cells.front().psi_vertices[2];
  CHECK(apex[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(apex[1] == doctest::Approx(0.1875).epsilon(1e-6));
}

TEST_CASE("enclose_boundary: unsupported maps are rejected") {
  const theta::ThetaMap inflect = theta::ThetaMap::parse({"mu1^3-mu1"}, 1);
  CHECK_THROWS_AS(certify::enclose_boundary(ParameterBox{{{-1.0, 1.0}}}, inflect, 1),
                  UnsupportedTheta);
  // Non-affine over a two-dimensional cell.
  const theta::ThetaMap bilinear = theta::ThetaMap::parse({"mu1*mu2", "mu1^2"}, 2);
  CHECK_THROWS_AS(certify::enclose_boundary(box2(0.0, 1.0, 0.0, 1.0), bilinear, 1),
                  UnsupportedTheta);
}

TEST_CASE("certify_stability: FEM box [0,10]x[0,2] is stable") {
  const AffineForm form = demo::assemble_fem({180});
  const auto cert = certify::certify_stability(form, box2(0.0, 10.0, 0.0, 2.0), 1e-9, 200);
  CHECK(cert.verdict == Verdict::Stable);
  for (const auto& cell : cert.cells) CHECK(cell.bound > 0.0);
}

TEST_CASE("certify_stability: stable verdict is confirmed by a dense boundary oracle") {
  const AffineForm form = demo::assemble_fem({40});
  const ParameterBox d = box2(0.0, 8.0, 0.0, 1.5);
  const auto cert = certify::certify_stability(form, d, 1e-9, 200);
  REQUIRE(cert.verdict == Verdict::Stable);
  // Dense sampling of the domain boundary in mu-space.
  double min_alpha = 1e300;
  for (int side = 0; side < 4; ++side) {
    for (int k = 0; k <= 2500; ++k) {
      const double t = static_cast<double>(k) / 2500.0;
      Vector mu(2);
      if (side == 0) mu = {8.0 * t, 0.0};
      if (side == 1) mu = {8.0 * t, 1.5};
      if (side == 2) mu = {0.0, 1.5 * t};
      if (side == 3) mu = {8.0, 1.5 * t};
      min_alpha = std::min(min_alpha, alpha(form, mu).alpha);
    }
  }
  CHECK(min_alpha > 0.0);
}

TEST_CASE("certify_stability: segment [0,30]x{0} is unstable with a checkable witness") {
  const AffineForm form = demo::assemble_fem({180});
  const auto cert = certify::certify_stability(form, box2(0.0, 30.0, 0.0, 0.0), 1e-9, 100);
  REQUIRE(cert.verdict == Verdict::Unstable);
  REQUIRE(cert.witness_psi.has_value());
  CHECK(*cert.witness_alpha <= 0.0);
  // Re-evaluation reproduces the witness value.
  const double recheck = alpha_theta(form, *cert.witness_psi).alpha;
  CHECK(recheck <= 1e-9);
  CHECK(recheck == doctest::Approx(*cert.witness_alpha).epsilon(1e-9));
  REQUIRE(cert.witness_mu.has_value());
  CHECK((*cert.witness_mu)[0] >= 12.0);
}

TEST_CASE("certify_stability: zero budget never claims stability") {
  // Negative alpha somewhere on the boundary image, but no budget to refine.
  const AffineForm form = demo::assemble_fem({40});
  const auto cert = certify::certify_stability(form, box2(0.0, 30.0, 0.0, 2.0), 1e-9, 0);
  CHECK(cert.verdict != Verdict::Stable);
}

TEST_CASE("certify_stability: refinement clears a negative off-image vertex") {
  // alpha(mu) = min(1 - 2.2 mu + 2.4 mu^2, 1) > 0 on [0,1], yet the initial
  // curve-triangle apex [1, 0.5, ~0] evaluates to about -0.1.
  const AffineForm form = quadratic_toy(-2.2, 0.0, 2.4, 0.0);
  const ParameterBox d{{{0.0, 1.0}}};
  const auto cert = certify::certify_stability(form, d, 1e-9, 50);
  CHECK(cert.verdict == Verdict::Stable);
  CHECK(cert.adaptive_evaluations >= 1);

  // With no budget the same input must stay inconclusive.
  const auto stuck = certify::certify_stability(form, d, 1e-9, 0);
  CHECK(stuck.verdict == Verdict::Inconclusive);
}

TEST_CASE("certify_stability: detects instability hidden between vertices") {
  // alpha(mu) = 1 - 4.4 mu + 4 mu^2 dips to -0.21 at mu = 0.55 while both
  // endpoint values are positive.
  const AffineForm form = quadratic_toy(-4.4, 0.0, 4.0, 0.0);
  const auto cert = certify::certify_stability(form, ParameterBox{{{0.0, 1.0}}}, 1e-9, 60);
  REQUIRE(cert.verdict == Verdict::Unstable);
  CHECK(alpha_theta(form, *cert.witness_psi).alpha <= 1e-9);
}

TEST_CASE("certify_stability: deterministic certificates") {
  const AffineForm form = demo::assemble_fem({20});
  const auto a = certify::certify_stability(form, box2(0.0, 20.0, 0.0, 1.0), 1e-9, 40);
  const auto b = certify::certify_stability(form, box2(0.0, 20.0, 0.0, 1.0), 1e-9, 40);
  const std::string hash = io::operator_hash(form);
  CHECK(io::serialize_certificate(a, hash) == io::serialize_certificate(b, hash));
}

TEST_CASE("build_bound_mesh: sound lower bounds with exact vertices") {
  auto gen = oracles::rng(601);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const AffineForm form = demo::assemble_fem({40});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 0.1;
  opt.budget = 800;
  const auto mesh = certify::build_bound_mesh(form, box2(0.0, 30.0, 0.0, 2.0), opt);
  CHECK(mesh.tol_met);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector mu{30.0 * unif(gen), 2.0 * unif(gen)};
    const double lb = certify::query_lower_bound(mesh, mu);
    const double truth = alpha(form, mu).alpha;
    CHECK(lb <= truth + 1e-9);
    const double ub = bounds::ypoint_upper_bound(form.theta_map.eval(mu), mesh.y_bank);
    CHECK(ub >= truth - 1e-9);
  }
}

TEST_CASE("build_bound_mesh: sound lower bounds with SCM vertices") {
  auto gen = oracles::rng(602);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const AffineForm form = demo::assemble_fem({40});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 0.1;
  opt.budget = 300;
  opt.use_scm = true;
  opt.scm_vertices = true;
  opt.scm_budget = 16;
  const auto mesh = certify::build_bound_mesh(form, box2(0.0, 30.0, 0.0, 2.0), opt);
  std::size_t scm_count = 0;
  for (const auto& v : mesh.vertices)
    if (!v.exact) ++scm_count;
  CHECK(scm_count > 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector mu{30.0 * unif(gen), 2.0 * unif(gen)};
    CHECK(certify::query_lower_bound(mesh, mu) <= alpha(form, mu).alpha + 1e-9);
  }
}

TEST_CASE("build_bound_mesh: affine segment converges with few evaluations") {
  const AffineForm form = demo::assemble_fem({60});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 1e-3;
  opt.budget = 50;
  const auto mesh = certify::build_bound_mesh(form, box2(0.0, 30.0, 0.0, 0.0), opt);
  CHECK(mesh.tol_met);
  CHECK(mesh.evaluations <= 8);  // alpha is exactly affine along the segment
}

TEST_CASE("build_bound_mesh: budget exhaustion leaves a valid partial mesh") {
  const AffineForm form = demo::assemble_fem({30});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 1e-6;
  opt.budget = 6;
  const auto mesh = certify::build_bound_mesh(form, box2(0.0, 30.0, 0.0, 2.0), opt);
  CHECK(!mesh.tol_met);
  auto gen = oracles::rng(603);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector mu{30.0 * unif(gen), 2.0 * unif(gen)};
    CHECK(certify::query_lower_bound(mesh, mu) <= alpha(form, mu).alpha + 1e-9);
  }
}

TEST_CASE("query_lower_bound: vertex preimages are exact, outside queries throw") {
  const AffineForm form = demo::assemble_fem({30});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 0.5;
  const auto mesh = certify::build_bound_mesh(form, box2(0.0, 10.0, 0.0, 2.0), opt);
  // Corner of the domain is a mesh vertex (affine map of the box corners).
  const double at_corner = certify::query_lower_bound(mesh, {0.0, 0.0});
  CHECK(at_corner == doctest::Approx(alpha(form, {0.0, 0.0}).alpha).epsilon(1e-10));
  CHECK_THROWS_AS(certify::query_lower_bound(mesh, {50.0, 50.0}), OutsideCover);
}

TEST_CASE("build_bound_mesh: deterministic output") {
  const AffineForm form = demo::assemble_fem({20});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 0.05;
  opt.budget = 100;
  const auto a = certify::build_bound_mesh(form, box2(0.0, 15.0, 0.0, 1.0), opt);
  const auto b = certify::build_bound_mesh(form, box2(0.0, 15.0, 0.0, 1.0), opt);
  const std::string hash = io::operator_hash(form);
  CHECK(io::serialize_mesh(a, hash) == io::serialize_mesh(b, hash));
}

TEST_SUITE_END();
