#include <benchmark/benchmark.h>

#include "qthermo/dynamics.hpp"
#include "qthermo/generators.hpp"
#include "qthermo/needle.hpp"
#include "qthermo/protocols.hpp"

using namespace qthermo;

namespace {

// Deterministic non-degenerate test Hamiltonian with full off-diagonal coupling.
ComplexMatrix test_hamiltonian(Eigen::Index n) {
    ComplexMatrix h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) h(i, j) = i == j ? Complex(0.7 * static_cast<double>(i * i), 0.0) : Complex(0.1, 0.05 * static_cast<double>(i - j));
    }
    return h;
}

BathSpec test_bath(Eigen::Index n) {
    BathSpec b;
    b.beta = 1.0;
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
    b.coupling_ops.emplace_back(a);
    return b;
}

void BM_DaviesConstruction(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const HermitianObservable h(test_hamiltonian(n));
    const BathSpec bath = test_bath(n);
    for (auto _ : state) benchmark::DoNotOptimize(build_davies_generator(h, bath));
}
BENCHMARK(BM_DaviesConstruction)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_GeneratorApply(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const HermitianObservable h(test_hamiltonian(n));
    const GKLSGenerator gen = build_davies_generator(h, test_bath(n));
    const ComplexMatrix rho = gibbs_state(h, 0.5).matrix();
    for (auto _ : state) benchmark::DoNotOptimize(gen.apply(rho));
}
BENCHMARK(BM_GeneratorApply)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_Relaxation(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const HermitianObservable h(test_hamiltonian(n));
    Schedule s;
    s.initial_hamiltonian = h;
    s.baths.push_back(test_bath(n));
    s.segments.push_back(Segment::constant(0.0, 5.0, h, {0}));
    for (auto _ : state) benchmark::DoNotOptimize(integrate_mme(DensityOperator::maximally_mixed(n), s, {}));
}
BENCHMARK(BM_Relaxation)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_WorkExtractionCycle(benchmark::State& state) {
    Section3Params p;
    p.tau_ramp = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_section3_cycle(p));
}
BENCHMARK(BM_WorkExtractionCycle)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_NeedleForce(benchmark::State& state) {
    NeedleConfig cfg;
    cfg.n_phi = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(thermodynamic_force(0.8, cfg));
}
BENCHMARK(BM_NeedleForce)->Arg(64)->Arg(512)->Arg(4096);

void BM_NeedleCycle(benchmark::State& state) {
    const NeedleConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(run_needle_cycle(cfg));
}
BENCHMARK(BM_NeedleCycle)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
