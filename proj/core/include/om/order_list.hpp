#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "om/metrics.hpp"
#include "om/node_pool.hpp"
#include "om/sync.hpp"

namespace om {

class OrderList;
class Group;

/// Thrown when an operation would exceed the label capacity N.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A bottom-list node.
class Item {
public:
    Item() = default;
    Item(const Item&) = delete;
    Item& operator=(const Item&) = delete;

    std::uint32_t id() const noexcept { return id_; }
    bool live() const noexcept { return live_.load(std::memory_order_acquire); }
    std::uint32_t label() const noexcept { return label_.load(std::memory_order_acquire); }
    const Group* group() const noexcept { return group_.load(std::memory_order_acquire); }
    const Item* prev() const noexcept { return pre_.load(std::memory_order_acquire); }
    const Item* next() const noexcept { return next_.load(std::memory_order_acquire); }

private:
    friend class OrderList;
    friend struct ItemSpace;

    std::atomic<Group*> group_{nullptr};
    std::atomic<Item*> pre_{nullptr};
    std::atomic<Item*> next_{nullptr};
    std::atomic<std::uint32_t> label_{0};
    std::uint32_t temp_label_ = 0;
    NodeLock lock_;
    std::uint32_t id_ = 0;
    std::atomic<bool> live_{false};
};

/// A top-list node; every item of a group shares its label.
class Group {
public:
    Group() = default;
    Group(const Group&) = delete;
    Group& operator=(const Group&) = delete;

    std::uint32_t id() const noexcept { return id_; }
    bool live() const noexcept { return live_.load(std::memory_order_acquire); }
    std::uint64_t label() const noexcept { return label_.load(std::memory_order_acquire); }
    std::uint32_t count() const noexcept { return count_.load(std::memory_order_acquire); }
    const Group* prev() const noexcept { return pre_.load(std::memory_order_acquire); }
    const Group* next() const noexcept { return next_.load(std::memory_order_acquire); }

private:
    friend class OrderList;
    friend struct GroupSpace;

    std::atomic<std::uint64_t> label_{0};
    std::uint64_t temp_label_ = 0;
    std::atomic<Group*> pre_{nullptr};
    std::atomic<Group*> next_{nullptr};
    std::atomic<std::uint32_t> count_{0};
    NodeLock lock_;
    std::uint32_t id_ = 0;
    std::atomic<bool> live_{false};
};

enum class OrderResult : std::uint8_t { Before, NotBefore, Fail };
enum class OpStatus : std::uint8_t { Ok, Fail };

/// Receives every label and group-membership write made while a full group
/// is being split. Callbacks run on the relabelling thread with all affected
/// nodes locked.
class WriteObserver {
public:
    virtual ~WriteObserver() = default;

    /// Called once all locks of a relabel are held. `members` are the items
    /// of the full group in list order; `before`/`after` are the nearest items
    /// outside it.
    virtual void relabel_begin(const Item& before, std::span<Item* const> members,
                               const Item& after, const Group* group_before, const Group& group,
                               const Group& group_after) = 0;
    /// Groups reached by a rebalance walk, in top-list order, before any of
    /// their labels is written.
    virtual void rebalance_walk(std::span<const Group* const> groups) = 0;
    virtual void item_label(const Item& item, std::uint32_t label) = 0;
    virtual void item_moved(const Item& item, const Group& to) = 0;
    virtual void group_label(const Group& group, std::uint64_t label) = 0;
    virtual void group_linked(const Group& group, const Group& after) = 0;
    virtual void relabel_end() = 0;
};

/// Explicit initial state for tests: one entry per group, in order.
struct GroupLayout {
    std::uint64_t label;
    std::vector<std::uint32_t> item_labels;
};

struct CheckReport {
    bool ok = true;
    std::string violation;
    std::size_t items = 0;   ///< live items, sentinels excluded
    std::size_t groups = 0;  ///< groups, sentinels excluded
};

/// Concurrent two-level order-maintenance list.
///
/// insert and remove synchronise with per-node locks taken in list order;
/// order() never locks and instead re-reads the labels it compared,
/// restarting if any of them changed underneath it.
///
/// Labels: bottom labels live in [0, N-1], top labels in [0, N^2-1], with
/// N = 2^capacity_bits. The head sentinel carries (0, 0) and the tail
/// sentinel (N^2-1, N-1).
class OrderList {
public:
    static constexpr unsigned kMinCapacityBits = 4;
    static constexpr unsigned kMaxCapacityBits = 32;

    /// `initial_count` items, each alone in its own group, groups spaced N
    /// apart (closer if N groups would not fit).
    OrderList(unsigned capacity_bits, std::size_t initial_count, LockKind lock,
              std::size_t workers = 1);

    /// Builds exactly the given groups and labels. Throws std::invalid_argument
    /// if the layout violates the order invariant or label ranges.
    OrderList(unsigned capacity_bits, std::span<const GroupLayout> layout, LockKind lock,
              std::size_t workers = 1);

    OrderList(const OrderList&) = delete;
    OrderList& operator=(const OrderList&) = delete;

    // ---- core operations -------------------------------------------------

    /// Lock-free comparison: Before iff x precedes y.
    OrderResult order(const Item& x, const Item& y, std::size_t worker = 0) const;

    /// Links the fresh item `y` directly after `x`. Fails if x has been
    /// deleted. Throws CapacityError when the list already holds N items.
    OpStatus insert(Item& x, Item& y, std::size_t worker = 0);

    /// Allocates a fresh item and inserts it after `x`; nullptr on failure.
    Item* insert_after(Item& x, std::size_t worker = 0);

    /// Logical delete (live flag) followed by unlinking; fails if already
    /// deleted.
    OpStatus remove(Item& x, std::size_t worker = 0);

    Item& allocate_item();

    // ---- inspection ------------------------------------------------------

    /// Full consistency sweep. Quiescent use only.
    CheckReport check() const;

    /// Live items in list order. Quiescent use only.
    std::vector<const Item*> items() const;

    std::uint64_t top_label(const Item& item) const noexcept { return item.group()->label(); }

    Item& initial_item(std::size_t index) { return *initial_.at(index); }
    std::size_t initial_count() const noexcept { return initial_.size(); }

    Item& head() noexcept { return *head_; }
    Item& tail() noexcept { return *tail_; }
    const Group& head_group() const noexcept { return *head_group_; }
    const Group& tail_group() const noexcept { return *tail_group_; }

    Item& item_by_id(std::uint32_t id) const { return *item_pool_.at(id); }
    bool is_sentinel(const Item& item) const noexcept { return &item == head_ || &item == tail_; }

    unsigned capacity_bits() const noexcept { return bits_; }
    std::uint64_t capacity() const noexcept { return std::uint64_t{1} << bits_; }
    std::uint64_t bottom_max() const noexcept { return capacity() - 1; }
    std::uint64_t top_max() const noexcept { return top_max_; }
    std::uint32_t group_cap() const noexcept { return group_cap_; }
    std::uint32_t initial_bottom_label() const noexcept {
        return static_cast<std::uint32_t>(capacity() / 2 - 1);
    }
    LockKind lock_kind() const noexcept { return lock_kind_; }
    std::size_t size() const noexcept { return live_items_.load(std::memory_order_relaxed); }

    MetricsSink& metrics() const noexcept { return metrics_; }

    /// Not synchronised: install before starting workers.
    void set_write_observer(WriteObserver* observer) noexcept { observer_ = observer; }

private:
    friend struct ItemSpace;
    friend struct GroupSpace;

    void init_sentinels(unsigned capacity_bits);
    Group& new_group();
    bool is_sentinel(const Group& g) const noexcept {
        return &g == head_group_ || &g == tail_group_;
    }

    std::uint64_t bound_after(const Item& x, const Item& z) const noexcept;
    bool relabel(Item& x, Item& z, std::size_t worker);
    void rebalance(Group& g0, const Group& last_held, std::size_t worker);

    void lock(Item& item) const noexcept { item.lock_.lock(lock_kind_); }
    void unlock(Item& item) const noexcept { item.lock_.unlock(lock_kind_); }
    void lock(Group& group) const noexcept { group.lock_.lock(lock_kind_); }
    void unlock(Group& group) const noexcept { group.lock_.unlock(lock_kind_); }

    unsigned bits_ = 0;
    std::uint64_t top_max_ = 0;
    std::uint32_t group_cap_ = 1;
    LockKind lock_kind_;

    NodePool<Item> item_pool_;
    NodePool<Group> group_pool_;

    Item* head_ = nullptr;
    Item* tail_ = nullptr;
    Group* head_group_ = nullptr;
    Group* tail_group_ = nullptr;

    std::vector<Item*> initial_;
    std::atomic<std::uint64_t> live_items_{0};

    mutable MetricsSink metrics_;
    WriteObserver* observer_ = nullptr;
};

}  // namespace om
