#include <benchmark/benchmark.h>

#include "qkd/amplify.hpp"
#include "qkd/reconcile.hpp"
#include "qkd/session.hpp"
#include "qkd/wire.hpp"

using namespace qkd;

static void BM_Session(benchmark::State& state) {
    SessionConfig c;
    c.protocol = static_cast<ProtocolId>(state.range(1));
    c.n_pulses = static_cast<std::uint32_t>(state.range(0));
    c.channel.noise_probability = 0.02;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        c.seed = seed++;
        auto s = run_session(c);
        benchmark::DoNotOptimize(s.receiver.final_key.bits.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Session)
    ->ArgsProduct({{10'000, 100'000}, {1, 2, 3}})
    ->ArgNames({"pulses", "protocol"})
    ->Unit(benchmark::kMillisecond);

static void BM_Toeplitz(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const std::size_t out = p / 2;
    RandomStream rng(1);
    Bits key = random_bits(rng, p);
    PaParams params{static_cast<std::uint32_t>(out), 32, random_bits(rng, toeplitz_seed_length(p, out))};
    for (auto _ : state) benchmark::DoNotOptimize(privacy_amplify(key, params));
    state.SetItemsProcessed(state.iterations() * p);
}
BENCHMARK(BM_Toeplitz)->RangeMultiplier(4)->Range(256, 65536);

static void BM_Reconcile(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double q = state.range(1) / 100.0;
    RandomStream rng(2);
    Bits a = random_bits(rng, n), b = a;
    for (auto& bit : b)
        if (rng.bernoulli(q)) bit ^= 1;
    ReconcileSchedule sched{7, default_block_schedule(q, n)};
    for (auto _ : state) benchmark::DoNotOptimize(reconcile(a, b, sched));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Reconcile)->ArgsProduct({{1024, 16384, 65536}, {1, 3}})->ArgNames({"bits", "qber%"});

static void BM_WireBasisReveal(benchmark::State& state) {
    RandomStream rng(3);
    BasisReveal msg;
    for (int i = 0; i < state.range(0); ++i) {
        msg.bases.push_back(rng.bit() ? Basis::Diagonal : Basis::Rectilinear);
        msg.received_mask.push_back(rng.bit());
    }
    for (auto _ : state) benchmark::DoNotOptimize(decode_frame(encode_frame(msg)));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WireBasisReveal)->Arg(100'000);
BENCHMARK_MAIN();
