#include <benchmark/benchmark.h>

#include "ellex/rmatrix.hpp"
#include "ellex/thetap.hpp"

using namespace ellex;

namespace {

const cplx kTau(0.0, 1.0);
const cplx kEta(0.17, 0.11);

void BM_ThetaEval(benchmark::State& state) {
  Lattice l{kTau};
  ThetaSeries s{l};
  cplx z(0.31, 0.12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta(z, s));
    z += cplx(1e-6, 0.0);  // defeat value caching across iterations
  }
}
BENCHMARK(BM_ThetaEval);

void BM_ThetaAlphaEval(benchmark::State& state) {
  const long n = state.range(0);
  Lattice l{kTau};
  ThetaSeries s{l};
  cplx z(0.31, 0.12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta_alpha(1, z, n, s));
    z += cplx(1e-6, 0.0);
  }
}
BENCHMARK(BM_ThetaAlphaEval)->Arg(2)->Arg(5);

void BM_WEval(benchmark::State& state) {
  const long n = state.range(0), k = state.range(1);
  Lattice l{kTau};
  WBasis w = build_w_basis(build_space(expand(n, k), l));
  std::vector<cplx> z(w.p(), cplx(0.31, 0.12));
  for (auto _ : state) {
    benchmark::DoNotOptimize(w.eval(1, z));
    z[0] += cplx(1e-6, 0.0);
  }
}
BENCHMARK(BM_WEval)->Args({2, 1})->Args({5, 2});

void BM_SpaceBuild(benchmark::State& state) {
  const long n = state.range(0), k = state.range(1);
  Lattice l{kTau};
  CFrac c = expand(n, k);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_w_basis(build_space(c, l)));
}
BENCHMARK(BM_SpaceBuild)->Args({2, 1})->Args({5, 2});

void BM_RTensorBuild(benchmark::State& state) {
  const long n = state.range(0), k = state.range(1);
  Lattice l{kTau};
  RMatrixSpec spec = make_rmatrix_spec(n, k, l, kEta);
  cplx u(0.21, 0.05), v(0.48, -0.13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(r_entries(spec, u, v));
    u += cplx(1e-6, 0.0);
  }
}
BENCHMARK(BM_RTensorBuild)->Args({2, 1})->Args({5, 2});

void BM_YbeContraction(benchmark::State& state) {
  const long n = state.range(0), k = state.range(1);
  Lattice l{kTau};
  RMatrixSpec spec = make_rmatrix_spec(n, k, l, kEta);
  cplx u(0.21, 0.05), v(0.48, -0.13), w(0.73, 0.21);
  for (auto _ : state)
    benchmark::DoNotOptimize(ybe_residual(spec, u, v, w));
}
BENCHMARK(BM_YbeContraction)->Args({2, 1})->Args({5, 2});

}  // namespace

BENCHMARK_MAIN();
