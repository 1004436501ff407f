// Serial reference against the OpenMP kernels for the JSA grid and the HOM curves.
#include <benchmark/benchmark.h>

#include "spdc/crystal.hpp"
#include "spdc/interference.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"

using namespace spdc;

namespace {

const CrystalSet& data() {
    static const CrystalSet set = load_crystal_database(default_crystal_data_path());
    return set;
}

SpdcConfig bbo(GvmCondition cond, double bandwidth_nm) {
    auto c = solve_gvm_degenerate(get_crystal(data(), "BBO"), Plane::uniaxial, cond).solution->config;
    c.pump_bandwidth_nm = bandwidth_nm;
    return c;
}

Execution mode(const benchmark::State& state) { return state.range(1) ? Execution::parallel : Execution::serial; }

void jsa_grid(benchmark::State& state) {
    const auto c = bbo(GvmCondition::gvm3, 1.69);
    GridSpec spec;
    spec.size = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(compute_jsa_grid(c, spec, mode(state)));
}

void hom_same(benchmark::State& state) {
    GridSpec spec;
    spec.size = static_cast<std::size_t>(state.range(0));
    const auto g = compute_jsa_grid(bbo(GvmCondition::gvm3, 1.69), spec);
    for (auto _ : state) benchmark::DoNotOptimize(hom_same_source(g, {}, mode(state)));
}

void hom_independent_sources(benchmark::State& state) {
    GridSpec spec;
    spec.size = static_cast<std::size_t>(state.range(0));
    const auto g = compute_jsa_grid(bbo(GvmCondition::gvm1, 5.34), spec);
    for (auto _ : state) benchmark::DoNotOptimize(hom_independent(g, g, {}, HeraldedPhoton::signal, mode(state)));
}

// Args: {grid size, 0 serial / 1 parallel}
void sizes(benchmark::internal::Benchmark* b) {
    for (long n : {101L, 201L, 401L})
        for (long par : {0L, 1L}) b->Args({n, par});
    b->ArgNames({"grid", "parallel"})->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(jsa_grid)->Apply(sizes);
BENCHMARK(hom_same)->Apply(sizes);
BENCHMARK(hom_independent_sources)->Apply(sizes);

BENCHMARK_MAIN();
