#pragma once

#include <cassert>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

namespace om {

/// Label accessor used by assign_labels. `lower`/`upper` return the current
/// label of the element's list neighbours, or the space bound when the
/// neighbour lies outside the labelled range.
template <class S, class Node>
concept LabelSpace = requires(S s, Node* n, std::uint64_t v) {
    { s.lower(n) } -> std::convertible_to<std::uint64_t>;
    { s.upper(n) } -> std::convertible_to<std::uint64_t>;
    { s.temp(n) } -> std::convertible_to<std::uint64_t>;
    s.set_temp(n, v);
    s.commit(n, v);
};

/// Spreads `elems` evenly over (base, base + width): the k-th element gets
/// base + floor(k * width / (|elems| + 1)).
///
/// A new label is committed only while it still lies strictly between the
/// current labels of both neighbours; otherwise the element waits on a stack
/// until its successor has moved out of the way. Every single commit
/// therefore leaves the labels consistent with list order, which is what
/// lets readers compare labels without taking locks.
///
/// Requires width > |elems| and that every element's neighbours are locked.
template <class Node, LabelSpace<Node> Space>
void assign_labels(std::span<Node* const> elems, Space& space, std::uint64_t base,
                   std::uint64_t width) {
    const auto slots = static_cast<unsigned __int128>(elems.size()) + 1;
    for (std::size_t k = 1; k <= elems.size(); ++k) {
        const auto offset = static_cast<unsigned __int128>(k) * width / slots;
        space.set_temp(elems[k - 1], base + static_cast<std::uint64_t>(offset));
    }

    std::vector<Node*> pending;
    for (Node* z : elems) {
        const std::uint64_t target = space.temp(z);
        if (space.lower(z) < target && target < space.upper(z)) {
            space.commit(z, target);
            while (!pending.empty()) {
                Node* x = pending.back();
                pending.pop_back();
                space.commit(x, space.temp(x));
            }
        } else {
            pending.push_back(z);
        }
    }
    // The last element always fits below the upper bound of the range.
    assert(pending.empty());
}

}  // namespace om
