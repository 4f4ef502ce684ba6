#include "aclab/boundary_data.hpp"
#include "aclab/connection1d.hpp"
#include "aclab/energy.hpp"
#include "aclab/geometry.hpp"
#include "aclab/potential.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace aclab;

namespace {

// Stadium l=1, h=2 at dx = eps/4 with the step boundary data imposed.
Field2D stadium_field(double eps) {
    static const PotentialPtr p = make_potential("quartic");
    auto d = std::make_shared<const Domain2D>(build_stadium(1.0, 2.0, eps / 4.0));
    BoundaryData b;
    b.eps = eps;
    b.a_minus = {-1.0};
    b.a_plus = {1.0};
    b.z = {-1.0};
    b.M = 2.0;
    Field2D f = make_field(d, 1, eps, {-0.3});
    impose_boundary(f, b);
    return f;
}

void BM_TotalEnergy(benchmark::State& state) {
    const double eps = 0.32 / static_cast<double>(state.range(0));
    const Field2D f = stadium_field(eps);
    const PotentialPtr p = make_potential("quartic");
    for (auto _ : state) benchmark::DoNotOptimize(total_energy(f, *p).total);
    state.counters["nodes"] = static_cast<double>(f.domain->grid.size());
}

void BM_EnergyAndGradient(benchmark::State& state) {
    const double eps = 0.32 / static_cast<double>(state.range(0));
    const Field2D f = stadium_field(eps);
    const PotentialPtr p = make_potential("quartic");
    std::vector<double> g;
    for (auto _ : state) benchmark::DoNotOptimize(energy_and_gradient(f, *p, g));
    state.counters["nodes"] = static_cast<double>(f.domain->grid.size());
}

void BM_Connection(benchmark::State& state) {
    const PotentialPtr p = make_potential("quartic");
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_connection(*p, {-1.0}, 20.0, n).action);
}

}  // namespace

BENCHMARK(BM_TotalEnergy)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyAndGradient)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Connection)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
