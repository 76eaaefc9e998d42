#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "om/order_list.hpp"

namespace om {

/// Sequential reference list: a plain vector in list order. Every operation
/// is O(n); it exists to be obviously correct, not fast.
class OracleList {
public:
    using Id = std::uint64_t;

    /// Appends `id` at the end (used to mirror an initial population).
    void push_back(Id id);

    /// Places y immediately after x. Throws std::logic_error if x is absent or
    /// y already present.
    void insert(Id x, Id y);

    /// Places y at the front (mirrors an insert after the head sentinel).
    void insert_front(Id y);

    /// Removes x; false if it was not present.
    bool remove(Id x);

    /// Before iff x sits at a smaller position; Fail if either is absent.
    OrderResult order(Id x, Id y) const;

    bool contains(Id id) const { return members_.contains(id); }
    std::size_t size() const noexcept { return sequence_.size(); }
    const std::vector<Id>& sequence() const noexcept { return sequence_; }

    /// No duplicates and membership set equals the sequence contents.
    bool consistent() const;

private:
    std::ptrdiff_t position(Id id) const;

    std::vector<Id> sequence_;
    std::unordered_set<Id> members_;
};

}  // namespace om
