#include <benchmark/benchmark.h>

#include "qkdsim/gf2.hpp"

namespace {

void BM_Dot(benchmark::State& state) {
    qkd::Rng rng(7);
    const auto a = qkd::BitVec::random(state.range(0), rng);
    const auto b = qkd::BitVec::random(state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(qkd::dot(a, b));
}
BENCHMARK(BM_Dot)->Arg(100)->Arg(1024)->Arg(65536);

void BM_Rank(benchmark::State& state) {
    qkd::Rng rng(7);
    const auto m = qkd::BitMatrix::random(state.range(0), state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(qkd::rank(m));
}
BENCHMARK(BM_Rank)->Arg(64)->Arg(256)->Arg(1024);

void BM_ParityCheckOf(benchmark::State& state) {
    qkd::Rng rng(7);
    const auto g =
        qkd::BitMatrix::random_full_rank(state.range(0) / 2, state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(qkd::parity_check_of(g));
}
BENCHMARK(BM_ParityCheckOf)->Arg(128)->Arg(512);

}  // namespace
