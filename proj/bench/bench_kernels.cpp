// Serial reference kernels against their OpenMP versions on a spherical cap.
//
//   ./bench_kernels --benchmark_filter=Forms
//
// Set OMP_NUM_THREADS to vary the thread count of the parallel variants.

#include "rdeform/linearize.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numbers>

using namespace rdeform;

namespace {

struct Cap {
    std::shared_ptr<const PolarGrid> grid;
    MetricField metric = MetricField::constant_curvature(0.5);
    Immersion im;
    FundamentalForms forms;
    BaseSurface base;
    DeformationField field;

    explicit Cap(int n_r)
        : grid(std::make_shared<PolarGrid>(GridSpec{n_r, 4 * n_r})),
          im(build_immersion(Chart::spherical_cap(1.0, std::numbers::pi / 4), grid)),
          forms(fundamental_forms(im, metric)),
          base{&im, &forms, &metric},
          field(DeformationField::zeros(grid->num_nodes()))
    {
        for (int p = 0; p < grid->num_nodes(); ++p) {
            field.a1[p] = 0.01 * grid->x1(p) * grid->x2(p);
            field.a2[p] = 0.01 * std::sin(grid->x1(p));
            field.c[p] = 0.01 * (1.0 + grid->x2(p) * grid->x2(p));
        }
    }
};

const Cap& cap(int n_r)
{
    static const Cap c16(16), c32(32);
    return n_r == 16 ? c16 : c32;
}

template <bool Parallel>
void Forms(benchmark::State& state)
{
    const Cap& c = cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto f = Parallel ? fundamental_forms(c.im, c.metric) : fundamental_forms_serial(c.im, c.metric);
        benchmark::DoNotOptimize(f);
    }
    state.SetItemsProcessed(state.iterations() * c.grid->num_nodes());
}

template <bool Parallel>
void JetJacobians(benchmark::State& state)
{
    const Cap& c = cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto j = Parallel ? jet_jacobians(c.base, DeformationKind::H, &c.field)
                          : jet_jacobians_serial(c.base, DeformationKind::H, &c.field);
        benchmark::DoNotOptimize(j);
    }
    state.SetItemsProcessed(state.iterations() * c.grid->num_nodes());
}

template <bool Parallel>
void FullResidual(benchmark::State& state)
{
    const Cap& c = cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto r = Parallel ? full_residual(c.base, DeformationKind::H, c.field)
                          : full_residual_serial(c.base, DeformationKind::H, c.field);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * c.grid->num_nodes());
}

} // namespace

BENCHMARK(Forms<false>)->Name("Forms/serial")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(Forms<true>)->Name("Forms/openmp")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(JetJacobians<false>)->Name("JetJacobians/serial")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(JetJacobians<true>)->Name("JetJacobians/openmp")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(FullResidual<false>)->Name("FullResidual/serial")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(FullResidual<true>)->Name("FullResidual/openmp")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
