#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iosfwd>
#include <string_view>
#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace om {

enum class LockKind : std::uint8_t { Spin, Blocking };

std::string_view to_string(LockKind kind) noexcept;
bool parse_lock_kind(std::string_view text, LockKind& out) noexcept;

#ifdef OM_LOCK_AUDIT
inline constexpr bool kLockAudit = true;
#else
inline constexpr bool kLockAudit = false;
#endif

/// Lock instrumentation. Only active when the library is compiled with
/// OM_LOCK_AUDIT; otherwise every entry point is a no-op returning zero.
namespace audit {
void on_acquire(const void* lock) noexcept;
void on_release(const void* lock) noexcept;
/// Lock acquisitions performed by the calling thread since it started.
std::uint64_t thread_acquisitions() noexcept;
/// Writes the most recent acquisitions/releases of every thread that ever
/// took a lock. Used when a stress run is suspected to be deadlocked.
void dump_traces(std::ostream& os);
}  // namespace audit

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    _mm_pause();
#elif defined(__aarch64__)
    asm volatile("yield");
#endif
}

/// Exponential backoff: the busy-wait doubles after every failed attempt.
/// Once the cap is reached the thread also yields, so a preempted holder
/// can run on an oversubscribed machine.
class Backoff {
public:
    static constexpr std::uint32_t kInitialSpins = 4;
    static constexpr std::uint32_t kMaxSpins = 1u << 12;

    void pause() noexcept {
        for (std::uint32_t i = 0; i < spins_; ++i) {
            cpu_relax();
        }
        if (spins_ < kMaxSpins) {
            spins_ <<= 1;
        } else {
            std::this_thread::yield();
        }
    }

    std::uint32_t current() const noexcept { return spins_; }

private:
    std::uint32_t spins_ = kInitialSpins;
};

/// One word of mutual exclusion state. The same word backs both lock
/// variants; the caller passes the kind chosen for the owning structure.
///
/// Spin: test-then-CAS with exponential backoff.
/// Blocking: three-state futex mutex (0 free, 1 held, 2 held with waiters),
/// parking on std::atomic::wait.
class NodeLock {
public:
    NodeLock() noexcept = default;
    NodeLock(const NodeLock&) = delete;
    NodeLock& operator=(const NodeLock&) = delete;

    void lock(LockKind kind) noexcept {
        if (kind == LockKind::Spin) {
            lock_spin();
        } else {
            lock_blocking();
        }
        if constexpr (kLockAudit) audit::on_acquire(this);
    }

    bool try_lock() noexcept {
        std::uint32_t expected = 0;
        if (state_.load(std::memory_order_relaxed) == 0 &&
            state_.compare_exchange_strong(expected, 1, std::memory_order_acquire,
                                           std::memory_order_relaxed)) {
            if constexpr (kLockAudit) audit::on_acquire(this);
            return true;
        }
        return false;
    }

    void unlock(LockKind kind) noexcept {
        if constexpr (kLockAudit) audit::on_release(this);
#ifndef NDEBUG
        if (state_.load(std::memory_order_relaxed) == 0) {
            std::fputs("om::NodeLock: release of a lock that is not held\n", stderr);
            std::abort();
        }
#endif
        if (kind == LockKind::Spin) {
            state_.store(0, std::memory_order_release);
        } else if (state_.exchange(0, std::memory_order_release) == 2) {
            state_.notify_one();
        }
    }

    bool is_locked() const noexcept { return state_.load(std::memory_order_relaxed) != 0; }

private:
    void lock_spin() noexcept {
        Backoff backoff;
        for (;;) {
            std::uint32_t expected = 0;
            if (state_.load(std::memory_order_relaxed) == 0 &&
                state_.compare_exchange_weak(expected, 1, std::memory_order_acquire,
                                             std::memory_order_relaxed)) {
                return;
            }
            backoff.pause();
        }
    }

    void lock_blocking() noexcept {
        std::uint32_t c = 0;
        if (state_.compare_exchange_strong(c, 1, std::memory_order_acquire,
                                           std::memory_order_relaxed)) {
            return;
        }
        if (c != 2) c = state_.exchange(2, std::memory_order_acquire);
        while (c != 0) {
            state_.wait(2, std::memory_order_relaxed);
            c = state_.exchange(2, std::memory_order_acquire);
        }
    }

    std::atomic<std::uint32_t> state_{0};
};

static_assert(sizeof(NodeLock) == 4);

/// Atomically: if cell == expected, set it to desired and return true.
inline bool cas_flag(std::atomic<bool>& cell, bool expected, bool desired) noexcept {
    return cell.compare_exchange_strong(expected, desired, std::memory_order_seq_cst);
}

}  // namespace om
