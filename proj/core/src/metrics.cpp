#include "om/metrics.hpp"

#include <stdexcept>

namespace om {

MetricsSink::MetricsSink(std::size_t workers)
    : workers_(workers), slots_(std::make_unique<Slot[]>(workers)) {
    if (workers == 0) throw std::invalid_argument("MetricsSink needs at least one worker");
}

MetricsTotals MetricsSink::aggregate() const noexcept {
    std::array<std::uint64_t, kCounterCount> sum{};
    for (std::size_t w = 0; w < workers_; ++w) {
        for (std::size_t c = 0; c < kCounterCount; ++c) {
            sum[c] += slots_[w].values[c].load(std::memory_order_relaxed);
        }
    }
    auto at = [&](Counter c) { return sum[static_cast<std::size_t>(c)]; };
    MetricsTotals t;
    t.relabels = at(Counter::Relabels);
    t.lb_updates = at(Counter::LbUpdates);
    t.lt_updates = at(Counter::LtUpdates);
    t.order_redos = at(Counter::OrderRedos);
    t.order_fails = at(Counter::OrderFails);
    t.delete_fails = at(Counter::DeleteFails);
    t.insert_fails = at(Counter::InsertFails);
    t.inserts = at(Counter::Inserts);
    t.deletes = at(Counter::Deletes);
    t.orders = at(Counter::Orders);
    t.order_lock_acquires = at(Counter::OrderLockAcquires);
    return t;
}

void MetricsSink::reset() noexcept {
    for (std::size_t w = 0; w < workers_; ++w) {
        for (auto& v : slots_[w].values) v.store(0, std::memory_order_relaxed);
    }
}

}  // namespace om
