#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stabcert/errors.hpp"
#include "stabcert/numerics.hpp"

using namespace stabcert;
using namespace stabcert::numerics;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("cholesky: identity") {
  const Matrix l = cholesky(Matrix::identity(3));
  CHECK(frobenius_norm(l - Matrix::identity(3)) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("cholesky: 2x2 hand check") {
  Matrix a(2, 2);
  a(0, 0) = 4; a(0, 1) = 2;
  a(1, 0) = 2; a(1, 1) = 5;
  const Matrix l = cholesky(a);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("cholesky: random SPD n=50 residual") {
  auto gen = oracles::rng(101);
  const Matrix a = oracles::random_spd(50, gen);
  const Matrix l = cholesky(a);
  const Matrix rec = matmul(l, transpose(l));
  CHECK(frobenius_norm(rec - a) <= 1e-10 * frobenius_norm(a));
}

TEST_CASE("cholesky: reconstruction up to n=200") {
  auto gen = oracles::rng(102);
  for (std::size_t n : {5, 40, 120, 200}) {
    const Matrix a = oracles::random_spd(n, gen);
    const Matrix l = cholesky(a);
    CHECK(frobenius_norm(matmul(l, transpose(l)) - a) <= 1e-10 * frobenius_norm(a));
  }
}

TEST_CASE("cholesky: NotSPD on an indefinite matrix") {
  Matrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 2; a(1, 1) = 1;
  CHECK_THROWS_AS(cholesky(a), NotSPD);
}

TEST_CASE("cholesky: rejects non-symmetric input") {
  Matrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 0.5;
  a(1, 0) = 0.0; a(1, 1) = 1;
  CHECK_THROWS_AS(cholesky(a), std::invalid_argument);
}

TEST_CASE("sym_eig_smallest: diagonal cases") {
  const Matrix a = Matrix::diag({2.0, 5.0});
  auto [l1, v1] = sym_eig_smallest(a, Matrix::identity(2));
  CHECK(l1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(v1[0]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(v1[1] == doctest::Approx(0.0).epsilon(1e-10));

  // Pencil (diag(2,8), diag(1,2)) has eigenvalues {2, 4}.
  auto [l2, v2] = sym_eig_smallest(Matrix::diag({2.0, 8.0}), Matrix::diag({1.0, 2.0}));
  CHECK(l2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(v2[0]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sym_eig_smallest: residual and B-normalization") {
  auto gen = oracles::rng(103);
  const Matrix a = oracles::random_symmetric(40, gen);
  const Matrix b = oracles::random_spd(40, gen);
  auto [lambda, v] = sym_eig_smallest(a, b);
  CHECK(quadratic_form(b, v, v) == doctest::Approx(1.0).epsilon(1e-10));
  Vector av = matvec(a, v);
  Vector bv = matvec(b, v);
  axpy(-lambda, bv, av);
  CHECK(norm2(av) <= 1e-8 * (frobenius_norm(a) + std::abs(lambda) * frobenius_norm(b)));
}

TEST_CASE("sym_eig_smallest: Rayleigh sampling oracle n=30") {
  auto gen = oracles::rng(104);
  const Matrix a = oracles::random_symmetric(30, gen);
  const Matrix b = Matrix::identity(30);
  auto [lambda, v] = sym_eig_smallest(a, b);
  const auto search = oracles::rayleigh_min_search(a, b, 100000, gen, lambda);
  CHECK(search.dominated);                    // lambda <= every sampled quotient
  CHECK(search.best - lambda <= 1e-3);        // the sampler gets close from above
}

TEST_CASE("sym_eig: Rayleigh-quotient domination property") {
  auto gen = oracles::rng(105);
  for (int rep = 0; rep < 3; ++rep) {
    const Matrix a = oracles::random_symmetric(25, gen);
    const Matrix b = oracles::random_spd(25, gen);
    auto [lambda, v] = sym_eig_smallest(a, b);
    for (int s = 0; s < 10000; ++s) {
      const Vector u = oracles::random_unit(25, gen);
      CHECK(lambda <= oracles::rayleigh(a, b, u) + 1e-12);
    }
  }
}

TEST_CASE("sym_eig agrees with the independent Jacobi route") {
  auto gen = oracles::rng(106);
  for (std::size_t n : {2, 7, 33, 80}) {
    const Matrix a = oracles::random_symmetric(n, gen);
    const EigResult ql = sym_eig(a);
    const EigResult jac = sym_eig_jacobi(a);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(ql.values[i] == doctest::Approx(jac.values[i]).epsilon(1e-10));
  }
}

TEST_CASE("solve_lyapunov: diagonal and identity cases") {
  const Matrix p1 = solve_lyapunov(Matrix::diag({1.0, 2.0}), Matrix::diag({2.0, 2.0}));
  CHECK(p1(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(p1(1, 1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(p1(0, 1) == doctest::Approx(0.0).epsilon(1e-10));

  auto gen = oracles::rng(107);
  const Matrix m = oracles::random_symmetric(6, gen);
  Matrix c = m;
  c *= 2.0;
  const Matrix p2 = solve_lyapunov(Matrix::identity(6), c);
  CHECK(frobenius_norm(p2 - m) <= 1e-9 * frobenius_norm(m));
}

TEST_CASE("solve_lyapunov: residual bound on 20 random stable T") {
  auto gen = oracles::rng(108);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 10 + static_cast<std::size_t>(rep) * 2;  // up to 48
    Matrix t = oracles::random_matrix(n, gen, 0.4);
    for (std::size_t i = 0; i < n; ++i) t(i, i) += 4.0;  // push the spectrum right
    const Matrix c = oracles::random_symmetric(n, gen);
    const Matrix p = solve_lyapunov(t, c);
    Matrix res = matmul(transpose(t), p);
    res += matmul(p, t);
    res -= c;
    CHECK(frobenius_norm(res) <= 1e-8 * frobenius_norm(c));
  }
}

TEST_CASE("solve_lyapunov: sign iteration matches the Kronecker route") {
  auto gen = oracles::rng(109);
  Matrix t = oracles::random_matrix(12, gen, 0.5);
  for (std::size_t i = 0; i < 12; ++i) t(i, i) += 5.0;
  const Matrix c = oracles::random_symmetric(12, gen);
  const Matrix p1 = solve_lyapunov(t, c);
  const Matrix p2 = solve_lyapunov_kronecker(t, c);
  CHECK(frobenius_norm(p1 - p2) <= 1e-9 * frobenius_norm(p2));
}

TEST_CASE("solve_lyapunov: unsolvable spectra raise SingularLyapunov") {
  // T = diag(1, -1): spectra of T and -T coincide, no solution in general.
  CHECK_THROWS_AS(solve_lyapunov(Matrix::diag({1.0, -1.0}), Matrix::identity(2)),
                  SingularLyapunov);
}

TEST_CASE("least_squares: exact solve and rank detection") {
  Matrix a(3, 2);
  a(0, 0) = 1; a(1, 1) = 2; a(2, 0) = 1; a(2, 1) = 1;
  const Vector b{1.0, 4.0, 3.0};
  const auto ls = least_squares(a, b, 1e-12);
  CHECK(ls.rank == 2);
  CHECK(ls.x[0] == doctest::Approx(1.0));
  CHECK(ls.x[1] == doctest::Approx(2.0));
  CHECK(ls.residual == doctest::Approx(0.0).epsilon(1e-12));

  Matrix d(3, 2);  // second column = 2x first
  d(0, 0) = 1; d(0, 1) = 2;
  d(1, 0) = 1; d(1, 1) = 2;
  d(2, 0) = 1; d(2, 1) = 2;
  CHECK(matrix_rank(d, 1e-10) == 1);
}

TEST_CASE("solve_lp: box-only and single-constraint examples") {
  const auto r1 = solve_lp({1.0}, {-2.0}, {3.0}, {});
  CHECK(r1.value == doctest::Approx(-2.0));
  CHECK(r1.y[0] == doctest::Approx(-2.0));

  const auto r2 = solve_lp({1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {{{1.0, 1.0}, 1.5}});
  CHECK(r2.value == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(r2.y[0] + r2.y[1] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("solve_lp: matches vertex enumeration on random Q=3 instances") {
  auto gen = oracles::rng(110);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t q = 3;
    Vector c(q), lower(q), upper(q);
    for (std::size_t i = 0; i < q; ++i) {
      c[i] = unif(gen);
      lower[i] = -1.0 - std::abs(unif(gen));
      upper[i] = 1.0 + std::abs(unif(gen));
    }
    // Constraints anchored at one shared interior point keep the region nonempty.
    Vector y0(q);
    for (std::size_t i = 0; i < q; ++i)
      y0[i] = lower[i] + (upper[i] - lower[i]) * (0.5 + 0.3 * unif(gen));
    std::vector<std::pair<Vector, double>> cons;
    std::vector<LinearConstraint> lp_cons;
    for (int k = 0; k < 3; ++k) {
      Vector a(q);
      for (std::size_t i = 0; i < q; ++i) a[i] = unif(gen);
      double b = 0.0;
      for (std::size_t i = 0; i < q; ++i) b += a[i] * y0[i];
      b -= 0.1;  // strictly satisfiable at y0
      cons.emplace_back(a, b);
      lp_cons.push_back({a, b});
    }
    const auto oracle = oracles::lp_vertex_enumeration(c, lower, upper, cons);
    REQUIRE(oracle.feasible);
    const auto lp = solve_lp(c, lower, upper, lp_cons);
    CHECK(lp.value == doctest::Approx(oracle.value).epsilon(1e-8));
    // Returned point is feasible.
    for (std::size_t i = 0; i < q; ++i) {
      CHECK(lp.y[i] >= lower[i] - 1e-9);
      CHECK(lp.y[i] <= upper[i] + 1e-9);
    }
    for (const auto& [a, b] : cons) CHECK(dot(a, lp.y) >= b - 1e-9);
  }
}

TEST_CASE("solve_lp: optimum never exceeds random feasible points") {
  auto gen = oracles::rng(111);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Vector c{0.3, -0.7, 1.1, 0.2};
  const Vector lower{-2.0, -2.0, -2.0, -2.0};
  const Vector upper{2.0, 2.0, 2.0, 2.0};
  const std::vector<LinearConstraint> cons{{{1.0, 1.0, 0.0, 0.0}, -1.0},
                                           {{0.0, 1.0, 1.0, -1.0}, -0.5}};
  const auto lp = solve_lp(c, lower, upper, cons);
  std::size_t accepted = 0;
  while (accepted < 1000) {
    Vector y(4);
    for (double& x : y) x = 2.0 * unif(gen);
    bool ok = true;
    for (const auto& con : cons) ok = ok && dot(con.a, y) >= con.b;
    if (!ok) continue;
    ++accepted;
    CHECK(lp.value <= dot(c, y) + 1e-9);
  }
}

TEST_CASE("solve_lp: infeasible constraint set") {
  CHECK_THROWS_AS(solve_lp({1.0}, {0.0}, {1.0}, {{{1.0}, 2.0}}), Infeasible);
  // Contradictory pair inside the box.
  CHECK_THROWS_AS(solve_lp({1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0},
                           {{{1.0, 0.0}, 0.8}, {{-1.0, 0.0}, -0.2}}),
                  Infeasible);
}

TEST_SUITE_END();
