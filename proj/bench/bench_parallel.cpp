// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include "slab/free_group.hpp"
#include "slab/spectral_lab.hpp"
#include "slab/tensor_norms.hpp"

using namespace slab;

namespace {

void BM_Convolve(benchmark::State& state) {
    CounterRng rng(1);
    const auto terms = static_cast<std::size_t>(state.range(0));
    const GroupFunction f = random_sparse_function(Group::free2(), 6, terms, rng);
    const GroupFunction g = random_sparse_function(Group::free2(), 6, terms, rng);
    const bool parallel = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(parallel ? convolve(f, g) : convolve_serial(f, g));
    state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_Convolve)->ArgsProduct({{200, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_BallShift(benchmark::State& state) {
    const BallShiftOperator op(generator_sum(Group::free2()), static_cast<int>(state.range(0)));
    CounterRng rng(2);
    Vector v(op.domain_size()), w;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
    const bool parallel = state.range(1) != 0;
    for (auto _ : state) {
        if (parallel) {
            op.apply(v, w, true);
        } else {
            op.apply_serial(v, w);
        }
        benchmark::DoNotOptimize(w.data());
    }
    state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_BallShift)->ArgsProduct({{8, 10}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Estimator(benchmark::State& state) {
    CounterRng rng(3);
    const TensorElement x = random_tensor(4, 4, 4, rng);
    EstimatorOptions o;
    o.restarts = 16;
    o.parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(schatten_op_norm(x, SchattenIndex(3.0), 2, o).value);
    state.SetLabel(o.parallel ? "parallel" : "serial");
}
BENCHMARK(BM_Estimator)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CircleMaximum(benchmark::State& state) {
    CounterRng rng(4);
    const GroupFunction f = random_symmetric_z(8, rng);
    const bool parallel = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(z_reduced_norm(f, 1u << 16, parallel).value);
    state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_CircleMaximum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
