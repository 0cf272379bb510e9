#include <benchmark/benchmark.h>

#include "stabcert/certify.hpp"
#include "stabcert/demo_fem.hpp"
#include "stabcert/lyapunov.hpp"
#include "stabcert/scm.hpp"

using namespace stabcert;

static void BM_AlphaFem(benchmark::State& state) {
  const AffineForm form = demo::assemble_fem({static_cast<std::size_t>(state.range(0))});
  for (auto _ : state) {
    benchmark::DoNotOptimize(alpha(form, {12.0, 1.0}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AlphaFem)->Arg(60)->Arg(120)->Arg(180)->Arg(240)->Complexity();

static void BM_BuildBoundMesh(benchmark::State& state) {
  const AffineForm form = demo::assemble_fem({static_cast<std::size_t>(state.range(0))});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 0.1;
  opt.budget = 600;
  const certify::ParameterBox domain{{{0.0, 30.0}, {0.0, 2.0}}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify::build_bound_mesh(form, domain, opt));
  }
}
BENCHMARK(BM_BuildBoundMesh)->Arg(40)->Arg(90)->Unit(benchmark::kMillisecond);

static void BM_QueryLowerBound(benchmark::State& state) {
  const AffineForm form = demo::assemble_fem({60});
  certify::MeshBuildOptions opt;
  opt.gap_tol = 0.05;
  opt.budget = 800;
  const auto mesh =
      certify::build_bound_mesh(form, certify::ParameterBox{{{0.0, 30.0}, {0.0, 2.0}}}, opt);
  const theta::ThetaMap map = theta::ThetaMap::parse(mesh.theta_sources, mesh.theta_p);
  const Vector psi = map.eval({13.0, 0.7});
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify::query_lower_bound_psi(mesh, psi));
  }
}
BENCHMARK(BM_QueryLowerBound);

static void BM_ScmLowerBound(benchmark::State& state) {
  const AffineForm form = demo::assemble_fem({60});
  scm::ScmState scm_state = scm::build_box(form);
  std::vector<Vector> train;
  for (int k = 0; k < 24; ++k)
    train.push_back({1.0, 30.0 * static_cast<double>(k) / 23.0, 1.0});
  scm::greedy_enrich(scm_state, form, train, 1e-3, static_cast<std::size_t>(state.range(0)));
  const Vector psi{1.0, 17.0, 0.4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(scm::scm_lower_bound(scm_state, psi));
  }
}
BENCHMARK(BM_ScmLowerBound)->Arg(4)->Arg(16);

static void BM_BuildLyapunovCertificate(benchmark::State& state) {
  const AffineForm form = demo::assemble_fem({static_cast<std::size_t>(state.range(0))});
  for (auto _ : state) {
    benchmark::DoNotOptimize(lyapunov::build_p(form, {20.0, 0.0}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildLyapunovCertificate)->Arg(60)->Arg(120)->Arg(180)->Unit(benchmark::kMillisecond);
