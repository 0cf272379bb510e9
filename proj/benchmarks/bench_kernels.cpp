#include <benchmark/benchmark.h>

#include <random>

#include "stabcert/numerics.hpp"

using namespace stabcert;

namespace {

Matrix random_spd(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = gauss(gen);
  Matrix m = matmul(transpose(g), g);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
  return m;
}

Matrix random_symmetric(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = gauss(gen);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

} // namespace

static void BM_Cholesky(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_spd(n, gen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::cholesky(a));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cholesky)->RangeMultiplier(2)->Range(32, 256)->Complexity();

static void BM_SymEigSmallest(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_symmetric(n, gen);
  const Matrix b = random_spd(n, gen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::sym_eig_smallest(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SymEigSmallest)->RangeMultiplier(2)->Range(32, 256)->Complexity();

static void BM_SymEigJacobi(benchmark::State& state) {
  std::mt19937_64 gen(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_symmetric(n, gen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::sym_eig_jacobi(a));
  }
}
BENCHMARK(BM_SymEigJacobi)->Arg(32)->Arg(64)->Arg(128);

static void BM_SolveLyapunov(benchmark::State& state) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> gauss(0.0, 0.4);
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) t(i, j) = gauss(gen);
    t(i, i) += 4.0;
  }
  const Matrix c = random_spd(n, gen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::solve_lyapunov(t, c));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveLyapunov)->RangeMultiplier(2)->Range(32, 256)->Complexity();

static void BM_SolveLp(benchmark::State& state) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto q = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  Vector c(q), lower(q, -2.0), upper(q, 2.0), y0(q);
  for (std::size_t i = 0; i < q; ++i) {
    c[i] = unif(gen);
    y0[i] = unif(gen);
  }
  std::vector<numerics::LinearConstraint> cons;
  for (std::size_t k = 0; k < m; ++k) {
    Vector a(q);
    for (double& x : a) x = unif(gen);
    double b = 0.0;
    for (std::size_t i = 0; i < q; ++i) b += a[i] * y0[i];
    cons.push_back({a, b - 0.1});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::solve_lp(c, lower, upper, cons));
  }
}
BENCHMARK(BM_SolveLp)->Args({3, 8})->Args({3, 32})->Args({8, 32})->Args({16, 64});

BENCHMARK_MAIN();
