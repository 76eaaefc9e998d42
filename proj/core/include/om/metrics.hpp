#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>

namespace om {

enum class Counter : std::uint8_t {
    Relabels,
    LbUpdates,
    LtUpdates,
    OrderRedos,
    OrderFails,
    DeleteFails,
    InsertFails,
    Inserts,
    Deletes,
    Orders,
    /// Lock acquisitions observed inside the order path (audit builds only).
    OrderLockAcquires,
};

inline constexpr std::size_t kCounterCount = 11;

struct MetricsTotals {
    std::uint64_t relabels = 0;
    std::uint64_t lb_updates = 0;
    std::uint64_t lt_updates = 0;
    std::uint64_t order_redos = 0;
    std::uint64_t order_fails = 0;
    std::uint64_t delete_fails = 0;
    std::uint64_t insert_fails = 0;
    std::uint64_t inserts = 0;
    std::uint64_t deletes = 0;
    std::uint64_t orders = 0;
    std::uint64_t order_lock_acquires = 0;

    /// Label writes per performed insert; 0 when nothing was inserted.
    double avg_label() const noexcept {
        return inserts == 0 ? 0.0
                            : static_cast<double>(lb_updates + lt_updates) /
                                  static_cast<double>(inserts);
    }
};

/// Per-worker counters. Each worker owns one cache-line aligned slot and is
/// its only writer, so bump needs no read-modify-write atomics; aggregate is
/// meant for quiescent points.
class MetricsSink {
public:
    explicit MetricsSink(std::size_t workers = 1);

    MetricsSink(const MetricsSink&) = delete;
    MetricsSink& operator=(const MetricsSink&) = delete;

    std::size_t workers() const noexcept { return workers_; }

    void bump(std::size_t worker, Counter counter, std::uint64_t delta = 1) noexcept {
        auto& cell = slots_[worker].values[static_cast<std::size_t>(counter)];
        cell.store(cell.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
    }

    std::uint64_t get(std::size_t worker, Counter counter) const noexcept {
        return slots_[worker].values[static_cast<std::size_t>(counter)].load(
            std::memory_order_relaxed);
    }

    MetricsTotals aggregate() const noexcept;
    void reset() noexcept;

private:
    struct alignas(64) Slot {
        std::array<std::atomic<std::uint64_t>, kCounterCount> values{};
    };

    std::size_t workers_;
    std::unique_ptr<Slot[]> slots_;
};

}  // namespace om
