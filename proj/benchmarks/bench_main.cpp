// microbenchmarks for the hot numerical kernels
#include <benchmark/benchmark.h>

#include <cmath>

#include "hopflab/centriole.hpp"
#include "hopflab/classifier.hpp"
#include "hopflab/clifford.hpp"
#include "hopflab/liegroup.hpp"
#include "hopflab/matrix.hpp"
#include "hopflab/pathflow.hpp"

namespace cf = hopflab::classifier;
namespace cl = hopflab::clifford;
namespace lg = hopflab::liegroup;
namespace pf = hopflab::pathflow;
using hopflab::Matrix;
using hopflab::Rng;

namespace {

void bm_expm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const Matrix a = rng.skew(n);
  for (auto _ : state) benchmark::DoNotOptimize(lg::expm(a));
}
BENCHMARK(bm_expm)->Arg(16)->Arg(64);

void bm_logm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  const Matrix r = lg::expm(rng.skew(n));
  for (auto _ : state) benchmark::DoNotOptimize(lg::logm(r));
}
BENCHMARK(bm_logm)->Arg(16)->Arg(64);

void bm_skew_spectral(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  const Matrix a = rng.skew(n);
  for (auto _ : state) benchmark::DoNotOptimize(lg::skew_spectral(a));
}
BENCHMARK(bm_skew_spectral)->Arg(16)->Arg(64);

void bm_birkhoff_sweep(benchmark::State& state) {
  Rng rng(4);
  const cl::CliffordSystem s = cl::irreducible(3);
  pf::DiscretePath base;
  const Matrix id = Matrix::Identity(s.n, s.n);
  for (int i = 0; i <= 64; ++i) {
    const double t = lg::kPi * i / 64.0;
    base.points.push_back(std::cos(t) * id + std::sin(t) * s.generators[0]);
  }
  pf::perturb_interior(base, 0.2, rng);
  for (auto _ : state) {
    pf::DiscretePath path = base;
    pf::birkhoff_sweep(path);
    benchmark::DoNotOptimize(path.points.back());
  }
}
BENCHMARK(bm_birkhoff_sweep);

void bm_decompose(benchmark::State& state) {
  const cl::CliffordSystem one = cl::irreducible(3);
  const cl::CliffordSystem s =
      cl::direct_sum(cl::direct_sum(one, one), cl::second_irreducible(3));
  for (auto _ : state) benchmark::DoNotOptimize(cl::decompose(s));
}
BENCHMARK(bm_decompose);

void bm_classify_circle(benchmark::State& state) {
  const pf::MapFamily fam = cf::hopf_clutching(cl::irreducible(1), 16);
  cf::ClassifyOptions opts;
  opts.path_segments = 16;
  for (auto _ : state) benchmark::DoNotOptimize(cf::classify(fam, opts));
}
BENCHMARK(bm_classify_circle);

}  // namespace

BENCHMARK_MAIN();
