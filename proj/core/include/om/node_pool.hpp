#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace om {

/// Chunked, append-only node storage. Nodes are never freed before the pool
/// is destroyed: lock-free readers may still dereference a node after it has
/// been unlinked, so deleted nodes stay valid until the whole structure goes.
///
/// allocate() is thread-safe; a node's index doubles as its stable id.
template <class T>
class NodePool {
public:
    static constexpr std::uint32_t kChunkBits = 16;
    static constexpr std::uint32_t kChunkSize = 1u << kChunkBits;
    static constexpr std::uint32_t kMaxChunks = 1u << 16;

    NodePool() : chunks_(std::make_unique<std::atomic<T*>[]>(kMaxChunks)) {}

    ~NodePool() {
        for (std::uint32_t c = 0; c < kMaxChunks; ++c) {
            delete[] chunks_[c].load(std::memory_order_relaxed);
        }
    }

    NodePool(const NodePool&) = delete;
    NodePool& operator=(const NodePool&) = delete;

    /// Returns a default-constructed node and its id.
    std::pair<T*, std::uint32_t> allocate() {
        const std::uint64_t index = next_.fetch_add(1, std::memory_order_relaxed);
        if (index >= static_cast<std::uint64_t>(kChunkSize) * kMaxChunks) {
            throw std::length_error("node pool exhausted");
        }
        const auto id = static_cast<std::uint32_t>(index);
        T* chunk = chunk_for(id >> kChunkBits);
        return {&chunk[id & (kChunkSize - 1)], id};
    }

    T* at(std::uint32_t id) const noexcept {
        return &chunks_[id >> kChunkBits].load(std::memory_order_acquire)[id & (kChunkSize - 1)];
    }

    std::uint64_t allocated() const noexcept { return next_.load(std::memory_order_relaxed); }

private:
    T* chunk_for(std::uint32_t c) {
        T* chunk = chunks_[c].load(std::memory_order_acquire);
        if (chunk != nullptr) return chunk;
        std::lock_guard guard(grow_);
        chunk = chunks_[c].load(std::memory_order_relaxed);
        if (chunk == nullptr) {
            chunk = new T[kChunkSize];
            chunks_[c].store(chunk, std::memory_order_release);
        }
        return chunk;
    }

    std::unique_ptr<std::atomic<T*>[]> chunks_;
    std::atomic<std::uint64_t> next_{0};
    std::mutex grow_;
};

}  // namespace om
