#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "om/order_list.hpp"

namespace {

using om::LockKind;
using om::OrderList;

constexpr std::size_t kItems = 1 << 16;

void BM_Order(benchmark::State& state) {
    OrderList list(32, kItems, LockKind::Spin);
    std::mt19937_64 rng(1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs(4096);
    for (auto& p : pairs) p = {rng() % kItems, rng() % kItems};
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[i++ % pairs.size()];
        benchmark::DoNotOptimize(list.order(list.initial_item(a), list.initial_item(b)));
    }
}
BENCHMARK(BM_Order);

void BM_InsertNo(benchmark::State& state) {
    for (auto _ : state) {
        state.PauseTiming();
        OrderList list(32, kItems, LockKind::Spin);
        state.ResumeTiming();
        for (std::size_t i = 0; i < kItems; ++i) {
            benchmark::DoNotOptimize(list.insert_after(list.initial_item(i)));
        }
    }
    state.SetItemsProcessed(state.iterations() * kItems);
}
BENCHMARK(BM_InsertNo)->Unit(benchmark::kMillisecond);

void BM_InsertMax(benchmark::State& state) {
    for (auto _ : state) {
        state.PauseTiming();
        OrderList list(32, kItems, LockKind::Spin);
        state.ResumeTiming();
        om::Item& x = list.initial_item(kItems / 2);
        for (std::size_t i = 0; i < kItems; ++i) benchmark::DoNotOptimize(list.insert_after(x));
    }
    state.SetItemsProcessed(state.iterations() * kItems);
}
BENCHMARK(BM_InsertMax)->Unit(benchmark::kMillisecond);

void BM_Delete(benchmark::State& state) {
    for (auto _ : state) {
        state.PauseTiming();
        OrderList list(32, kItems, LockKind::Spin);
        state.ResumeTiming();
        for (std::size_t i = 0; i < kItems; ++i) list.remove(list.initial_item(i));
    }
    state.SetItemsProcessed(state.iterations() * kItems);
}
BENCHMARK(BM_Delete)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
