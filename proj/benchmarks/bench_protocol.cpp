#include <benchmark/benchmark.h>

#include "qkdsim/reconcile.hpp"
#include "qkdsim/session.hpp"

namespace {

void BM_CrudeCascade(benchmark::State& state) {
    qkd::Rng rng(11);
    const size_t n = state.range(0);
    const auto a = qkd::BitVec::random(n, rng);
    auto b = a;
    for (size_t i = 0; i < n; ++i)
        if (rng.next_unit() < 0.05) b.flip(i);
    for (auto _ : state) {
        qkd::Transcript t;
        qkd::Rng pairing(42);
        benchmark::DoNotOptimize(qkd::crude_cascade(a, b, 1e-3, 16, pairing, t));
    }
}
BENCHMARK(BM_CrudeCascade)->Arg(10000)->Arg(100000);

void BM_RunSession(benchmark::State& state) {
    qkd::ProtocolConfig config;
    config.n = state.range(0);
    config.delta = 0.8;
    config.channel = qkd::ChannelParams(0.03, 0.03, 0.0);
    uint64_t seed = 0;
    for (auto _ : state) {
        config.seed = seed++;
        benchmark::DoNotOptimize(qkd::run_session(config));
    }
}
BENCHMARK(BM_RunSession)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
