#include "om/sync.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <ostream>
#include <vector>

namespace om {

std::string_view to_string(LockKind kind) noexcept {
    return kind == LockKind::Spin ? "spin" : "blocking";
}

bool parse_lock_kind(std::string_view text, LockKind& out) noexcept {
    if (text == "spin") {
        out = LockKind::Spin;
        return true;
    }
    if (text == "blocking") {
        out = LockKind::Blocking;
        return true;
    }
    return false;
}

namespace audit {

#ifdef OM_LOCK_AUDIT

namespace {

struct TraceEntry {
    const void* lock = nullptr;
    bool acquire = false;
};

struct ThreadTrace {
    static constexpr std::size_t kRing = 64;
    std::thread::id owner;
    std::atomic<std::uint64_t> acquisitions{0};
    std::atomic<std::uint64_t> cursor{0};
    std::array<std::atomic<const void*>, kRing> locks{};
    std::array<std::atomic<bool>, kRing> acquires{};
};

std::mutex registry_mutex;
// Traces are intentionally never freed: a stuck thread may still own one
// when the registry is dumped.
std::vector<ThreadTrace*>& registry() {
    static auto* traces = new std::vector<ThreadTrace*>();
    return *traces;
}

ThreadTrace& local_trace() {
    thread_local ThreadTrace* trace = [] {
        auto* t = new ThreadTrace();
        t->owner = std::this_thread::get_id();
        std::lock_guard guard(registry_mutex);
        registry().push_back(t);
        return t;
    }();
    return *trace;
}

void record(const void* lock, bool acquire) noexcept {
    ThreadTrace& t = local_trace();
    const std::uint64_t slot = t.cursor.load(std::memory_order_relaxed);
    t.locks[slot % ThreadTrace::kRing].store(lock, std::memory_order_relaxed);
    t.acquires[slot % ThreadTrace::kRing].store(acquire, std::memory_order_relaxed);
    t.cursor.store(slot + 1, std::memory_order_release);
}

}  // namespace

void on_acquire(const void* lock) noexcept {
    ThreadTrace& t = local_trace();
    t.acquisitions.store(t.acquisitions.load(std::memory_order_relaxed) + 1,
                         std::memory_order_relaxed);
    record(lock, true);
}

void on_release(const void* lock) noexcept { record(lock, false); }

std::uint64_t thread_acquisitions() noexcept {
    return local_trace().acquisitions.load(std::memory_order_relaxed);
}

void dump_traces(std::ostream& os) {
    std::lock_guard guard(registry_mutex);
    for (const ThreadTrace* t : registry()) {
        const std::uint64_t end = t->cursor.load(std::memory_order_acquire);
        const std::uint64_t begin = end > ThreadTrace::kRing ? end - ThreadTrace::kRing : 0;
        os << "thread " << t->owner << ": " << t->acquisitions.load() << " acquisitions\n";
        for (std::uint64_t i = begin; i < end; ++i) {
            const auto idx = i % ThreadTrace::kRing;
            os << "  " << (t->acquires[idx].load() ? "acquire " : "release ")
               << t->locks[idx].load() << '\n';
        }
    }
}

#else

void on_acquire(const void*) noexcept {}
void on_release(const void*) noexcept {}
std::uint64_t thread_acquisitions() noexcept { return 0; }
void dump_traces(std::ostream& os) {
    os << "lock tracing unavailable: library built without OM_LOCK_AUDIT\n";
}

#endif

}  // namespace audit
}  // namespace om
