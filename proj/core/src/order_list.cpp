#include "om/order_list.hpp"

#include <cassert>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "om/assign_label.hpp"

namespace om {

/// Bottom-label view of a group's items. Neighbours in another group are
/// replaced by the space bounds 0 and N-1.
struct ItemSpace {
    const OrderList& list;
    std::size_t worker;
    WriteObserver* observer;

    std::uint64_t lower(Item* n) const noexcept {
        const Item* p = n->pre_.load(std::memory_order_acquire);
        return p->group_.load(std::memory_order_acquire) == n->group_.load(std::memory_order_relaxed)
                   ? p->label_.load(std::memory_order_acquire)
                   : 0;
    }
    std::uint64_t upper(Item* n) const noexcept {
        const Item* q = n->next_.load(std::memory_order_acquire);
        return q->group_.load(std::memory_order_acquire) == n->group_.load(std::memory_order_relaxed)
                   ? q->label_.load(std::memory_order_acquire)
                   : list.bottom_max();
    }
    std::uint64_t temp(Item* n) const noexcept { return n->temp_label_; }
    void set_temp(Item* n, std::uint64_t v) const noexcept {
        n->temp_label_ = static_cast<std::uint32_t>(v);
    }
    void commit(Item* n, std::uint64_t v) const noexcept {
        n->label_.store(static_cast<std::uint32_t>(v), std::memory_order_release);
        list.metrics_.bump(worker, Counter::LbUpdates);
        if (observer != nullptr) observer->item_label(*n, static_cast<std::uint32_t>(v));
    }
};

/// Top-label view of a run of consecutive groups.
struct GroupSpace {
    const OrderList& list;
    std::size_t worker;
    WriteObserver* observer;

    std::uint64_t lower(Group* g) const noexcept {
        return g->pre_.load(std::memory_order_acquire)->label_.load(std::memory_order_acquire);
    }
    std::uint64_t upper(Group* g) const noexcept {
        return g->next_.load(std::memory_order_acquire)->label_.load(std::memory_order_acquire);
    }
    std::uint64_t temp(Group* g) const noexcept { return g->temp_label_; }
    void set_temp(Group* g, std::uint64_t v) const noexcept { g->temp_label_ = v; }
    void commit(Group* g, std::uint64_t v) const noexcept {
        g->label_.store(v, std::memory_order_release);
        list.metrics_.bump(worker, Counter::LtUpdates);
        if (observer != nullptr) observer->group_label(*g, v);
    }
};

namespace {

[[noreturn]] void fatal(const char* what) {
    std::fprintf(stderr, "om::OrderList: %s\n", what);
    std::abort();
}

}  // namespace

// ---------------------------------------------------------------------------
// construction

void OrderList::init_sentinels(unsigned capacity_bits) {
    if (capacity_bits < kMinCapacityBits || capacity_bits > kMaxCapacityBits) {
        throw std::invalid_argument("capacity bits must be in [4, 32]");
    }
    bits_ = capacity_bits;
    top_max_ = bits_ == 32 ? ~std::uint64_t{0} : (std::uint64_t{1} << (2 * bits_)) - 1;
    group_cap_ = bits_ / 2;

    head_group_ = &new_group();
    tail_group_ = &new_group();
    head_group_->label_.store(0, std::memory_order_relaxed);
    tail_group_->label_.store(top_max_, std::memory_order_relaxed);
    head_group_->next_.store(tail_group_, std::memory_order_relaxed);
    tail_group_->pre_.store(head_group_, std::memory_order_relaxed);
    head_group_->live_.store(true, std::memory_order_relaxed);
    tail_group_->live_.store(true, std::memory_order_relaxed);

    head_ = &allocate_item();
    tail_ = &allocate_item();
    head_->label_.store(0, std::memory_order_relaxed);
    tail_->label_.store(static_cast<std::uint32_t>(bottom_max()), std::memory_order_relaxed);
    head_->group_.store(head_group_, std::memory_order_relaxed);
    tail_->group_.store(tail_group_, std::memory_order_relaxed);
    head_->next_.store(tail_, std::memory_order_relaxed);
    tail_->pre_.store(head_, std::memory_order_relaxed);
    head_->live_.store(true, std::memory_order_relaxed);
    tail_->live_.store(true, std::memory_order_relaxed);
}

OrderList::OrderList(unsigned capacity_bits, std::size_t initial_count, LockKind lock,
                     std::size_t workers)
    : lock_kind_(lock), metrics_(workers) {
    init_sentinels(capacity_bits);
    if (initial_count > capacity()) {
        throw CapacityError("initial item count exceeds capacity N");
    }

    const std::uint64_t gap =
        initial_count < capacity() ? capacity() : top_max_ / (initial_count + 1);

    initial_.reserve(initial_count);
    Item* prev = head_;
    Group* gprev = head_group_;
    for (std::size_t i = 1; i <= initial_count; ++i) {
        Group& g = new_group();
        g.label_.store(gap * i, std::memory_order_relaxed);
        g.count_.store(1, std::memory_order_relaxed);
        g.live_.store(true, std::memory_order_relaxed);
        g.pre_.store(gprev, std::memory_order_relaxed);
        gprev->next_.store(&g, std::memory_order_relaxed);
        gprev = &g;

        Item& it = allocate_item();
        it.label_.store(initial_bottom_label(), std::memory_order_relaxed);
        it.group_.store(&g, std::memory_order_relaxed);
        it.live_.store(true, std::memory_order_relaxed);
        it.pre_.store(prev, std::memory_order_relaxed);
        prev->next_.store(&it, std::memory_order_relaxed);
        prev = &it;
        initial_.push_back(&it);
    }
    gprev->next_.store(tail_group_, std::memory_order_relaxed);
    tail_group_->pre_.store(gprev, std::memory_order_relaxed);
    prev->next_.store(tail_, std::memory_order_relaxed);
    tail_->pre_.store(prev, std::memory_order_release);
    live_items_.store(initial_count, std::memory_order_release);
}

OrderList::OrderList(unsigned capacity_bits, std::span<const GroupLayout> layout, LockKind lock,
                     std::size_t workers)
    : lock_kind_(lock), metrics_(workers) {
    init_sentinels(capacity_bits);

    std::size_t total = 0;
    std::uint64_t last_top = 0;
    for (const GroupLayout& gl : layout) {
        if (gl.label <= last_top || gl.label >= top_max_) {
            throw std::invalid_argument("group labels must increase strictly inside (0, N^2-1)");
        }
        if (gl.item_labels.empty()) throw std::invalid_argument("layout groups must be non-empty");
        std::uint64_t last_bottom = 0;
        for (std::uint32_t l : gl.item_labels) {
            if (l <= last_bottom || l >= bottom_max()) {
                throw std::invalid_argument("item labels must increase strictly inside (0, N-1)");
            }
            last_bottom = l;
        }
        last_top = gl.label;
        total += gl.item_labels.size();
    }
    if (total > capacity()) throw CapacityError("layout holds more than N items");

    initial_.reserve(total);
    Item* prev = head_;
    Group* gprev = head_group_;
    for (const GroupLayout& gl : layout) {
        Group& g = new_group();
        g.label_.store(gl.label, std::memory_order_relaxed);
        g.count_.store(static_cast<std::uint32_t>(gl.item_labels.size()), std::memory_order_relaxed);
        g.live_.store(true, std::memory_order_relaxed);
        g.pre_.store(gprev, std::memory_order_relaxed);
        gprev->next_.store(&g, std::memory_order_relaxed);
        gprev = &g;
        for (std::uint32_t l : gl.item_labels) {
            Item& it = allocate_item();
            it.label_.store(l, std::memory_order_relaxed);
            it.group_.store(&g, std::memory_order_relaxed);
            it.live_.store(true, std::memory_order_relaxed);
            it.pre_.store(prev, std::memory_order_relaxed);
            prev->next_.store(&it, std::memory_order_relaxed);
            prev = &it;
            initial_.push_back(&it);
        }
    }
    gprev->next_.store(tail_group_, std::memory_order_relaxed);
    tail_group_->pre_.store(gprev, std::memory_order_relaxed);
    prev->next_.store(tail_, std::memory_order_relaxed);
    tail_->pre_.store(prev, std::memory_order_release);
    live_items_.store(total, std::memory_order_release);
}

Item& OrderList::allocate_item() {
    auto [item, id] = item_pool_.allocate();
    item->id_ = id;
    return *item;
}

Group& OrderList::new_group() {
    auto [group, id] = group_pool_.allocate();
    group->id_ = id;
    return *group;
}

// ---------------------------------------------------------------------------
// order

OrderResult OrderList::order(const Item& x, const Item& y, std::size_t worker) const {
    [[maybe_unused]] const std::uint64_t locks_before = audit::thread_acquisitions();
    auto finish = [&](OrderResult r) {
        metrics_.bump(worker, Counter::Orders);
        if (r == OrderResult::Fail) metrics_.bump(worker, Counter::OrderFails);
        if constexpr (kLockAudit) {
            const std::uint64_t taken = audit::thread_acquisitions() - locks_before;
            if (taken != 0) metrics_.bump(worker, Counter::OrderLockAcquires, taken);
        }
        return r;
    };

    // Reads the top label through the group link; the link is re-read so the
    // returned label belonged to x's group at one instant.
    auto top_of = [](const Item& it, std::uint64_t& out) {
        const Group* g = it.group_.load(std::memory_order_acquire);
        out = g->label_.load(std::memory_order_acquire);
        return it.group_.load(std::memory_order_acquire) == g;
    };

    for (;; metrics_.bump(worker, Counter::OrderRedos)) {
        if (!x.live_.load(std::memory_order_acquire) || !y.live_.load(std::memory_order_acquire)) {
            return finish(OrderResult::Fail);
        }
        std::uint64_t tx = 0;
        std::uint64_t ty = 0;
        if (!top_of(x, tx) || !top_of(y, ty)) continue;

        bool before = false;
        std::uint64_t check_x = 0;
        std::uint64_t check_y = 0;
        if (tx != ty) {
            before = tx < ty;
            if (!top_of(x, check_x) || !top_of(y, check_y) || check_x != tx || check_y != ty) {
                continue;
            }
        } else {
            const std::uint32_t bx = x.label_.load(std::memory_order_acquire);
            const std::uint32_t by = y.label_.load(std::memory_order_acquire);
            before = bx < by;
            if (!top_of(x, check_x) || !top_of(y, check_y) || check_x != tx || check_y != ty ||
                x.label_.load(std::memory_order_acquire) != bx ||
                y.label_.load(std::memory_order_acquire) != by) {
                continue;
            }
        }

        if (!x.live_.load(std::memory_order_acquire) || !y.live_.load(std::memory_order_acquire)) {
            return finish(OrderResult::Fail);
        }
        return finish(before ? OrderResult::Before : OrderResult::NotBefore);
    }
}

// ---------------------------------------------------------------------------
// insert

std::uint64_t OrderList::bound_after(const Item& x, const Item& z) const noexcept {
    return z.group_.load(std::memory_order_acquire) == x.group_.load(std::memory_order_acquire)
               ? z.label_.load(std::memory_order_acquire)
               : bottom_max();
}

OpStatus OrderList::insert(Item& x, Item& y, std::size_t worker) {
    if (&x == tail_) throw std::invalid_argument("cannot insert after the tail sentinel");
    if (live_items_.fetch_add(1, std::memory_order_relaxed) >= capacity()) {
        live_items_.fetch_sub(1, std::memory_order_relaxed);
        throw CapacityError("order list already holds N items");
    }

    Backoff backoff;
    for (;;) {
        lock(x);
        if (!x.live_.load(std::memory_order_acquire)) {
            unlock(x);
            live_items_.fetch_sub(1, std::memory_order_relaxed);
            metrics_.bump(worker, Counter::InsertFails);
            return OpStatus::Fail;
        }
        Item& z = *x.next_.load(std::memory_order_acquire);
        lock(z);

        std::uint64_t bound = bound_after(x, z);
        if (bound - x.label_.load(std::memory_order_relaxed) < 2) {
            if (!relabel(x, z, worker)) {
                // Lock conflict on a group member: drop everything and retry.
                unlock(z);
                unlock(x);
                backoff.pause();
                continue;
            }
            bound = bound_after(x, z);
        }

        Group* g = x.group_.load(std::memory_order_relaxed);
        const std::uint64_t lx = x.label_.load(std::memory_order_relaxed);
        y.label_.store(static_cast<std::uint32_t>(lx + (bound - lx) / 2), std::memory_order_relaxed);
        y.group_.store(g, std::memory_order_relaxed);
        y.pre_.store(&x, std::memory_order_relaxed);
        y.next_.store(&z, std::memory_order_relaxed);
        y.live_.store(true, std::memory_order_relaxed);
        g->count_.fetch_add(1, std::memory_order_relaxed);
        z.pre_.store(&y, std::memory_order_release);
        x.next_.store(&y, std::memory_order_release);

        metrics_.bump(worker, Counter::LbUpdates);
        metrics_.bump(worker, Counter::Inserts);
        unlock(z);
        unlock(x);
        return OpStatus::Ok;
    }
}

Item* OrderList::insert_after(Item& x, std::size_t worker) {
    Item& y = allocate_item();
    return insert(x, y, worker) == OpStatus::Ok ? &y : nullptr;
}

bool OrderList::relabel(Item& x, Item& z, std::size_t worker) {
    Group& g0 = *x.group_.load(std::memory_order_acquire);
    lock(g0);
    Group& g0_next = *g0.next_.load(std::memory_order_acquire);
    lock(g0_next);

    // Members before x and after z are taken out of list order, so only
    // try-lock them; on conflict the caller releases x and z as well.
    std::vector<Item*> before;
    std::vector<Item*> after;
    auto release_members = [&] {
        for (Item* it : before) unlock(*it);
        for (Item* it : after) unlock(*it);
    };
    bool acquired = true;
    if (&x != head_) {
        for (Item* p = x.pre_.load(std::memory_order_acquire);
             p != head_ && p->group_.load(std::memory_order_acquire) == &g0;
             p = p->pre_.load(std::memory_order_acquire)) {
            if (!p->lock_.try_lock()) {
                acquired = false;
                break;
            }
            before.push_back(p);
        }
    }
    const bool z_member = z.group_.load(std::memory_order_acquire) == &g0;
    if (acquired && z_member) {
        for (Item* q = z.next_.load(std::memory_order_acquire);
             q != tail_ && q->group_.load(std::memory_order_acquire) == &g0;
             q = q->next_.load(std::memory_order_acquire)) {
            if (!q->lock_.try_lock()) {
                acquired = false;
                break;
            }
            after.push_back(q);
        }
    }
    if (!acquired) {
        release_members();
        unlock(g0_next);
        unlock(g0);
        return false;
    }

    std::vector<Item*> members;
    members.reserve(before.size() + after.size() + 2);
    members.assign(before.rbegin(), before.rend());
    if (&x != head_) members.push_back(&x);
    if (z_member) members.push_back(&z);
    members.insert(members.end(), after.begin(), after.end());
    assert(members.size() == g0.count_.load(std::memory_order_relaxed));

    WriteObserver* const obs = observer_;
    if (obs != nullptr) {
        const Group* gb = &g0 == head_group_ ? nullptr : g0.pre_.load(std::memory_order_acquire);
        obs->relabel_begin(*members.front()->pre_.load(std::memory_order_acquire), members,
                           *members.back()->next_.load(std::memory_order_acquire), gb, g0, g0_next);
    }

    ItemSpace space{*this, worker, obs};
    std::vector<Group*> created;
    std::size_t remaining = members.size();
    while (remaining > group_cap_) {
        Group* next = g0.next_.load(std::memory_order_acquire);
        if (next->label_.load(std::memory_order_relaxed) - g0.label_.load(std::memory_order_relaxed) <
            2) {
            rebalance(g0, g0_next, worker);
        }
        const std::uint64_t lo = g0.label_.load(std::memory_order_relaxed);
        const std::uint64_t hi = next->label_.load(std::memory_order_relaxed);

        Group& g = new_group();
        lock(g);
        created.push_back(&g);
        g.label_.store(lo + (hi - lo) / 2, std::memory_order_relaxed);
        g.count_.store(group_cap_, std::memory_order_relaxed);
        g.live_.store(true, std::memory_order_relaxed);
        g.pre_.store(&g0, std::memory_order_relaxed);
        g.next_.store(next, std::memory_order_relaxed);
        next->pre_.store(&g, std::memory_order_release);
        g0.next_.store(&g, std::memory_order_release);
        metrics_.bump(worker, Counter::LtUpdates);
        if (obs != nullptr) obs->group_linked(g, g0);

        // Trailing members move in reverse list order; each keeps its old
        // bottom label until the new group is relabelled as a whole.
        const std::size_t first = remaining - group_cap_;
        for (std::size_t i = remaining; i-- > first;) {
            members[i]->group_.store(&g, std::memory_order_release);
            if (obs != nullptr) obs->item_moved(*members[i], g);
        }
        g0.count_.fetch_sub(group_cap_, std::memory_order_relaxed);
        assign_labels(std::span<Item* const>(members).subspan(first, group_cap_), space, 0,
                      bottom_max());
        remaining = first;
    }
    assign_labels(std::span<Item* const>(members).first(remaining), space, 0, bottom_max());

    metrics_.bump(worker, Counter::Relabels);
    if (obs != nullptr) obs->relabel_end();

    release_members();
    for (Group* g : created) unlock(*g);
    unlock(g0_next);
    unlock(g0);
    return true;
}

void OrderList::rebalance(Group& g0, const Group& last_held, std::size_t worker) {
    // Groups between g0 and last_held (inclusive) are already locked by the
    // calling relabel; everything past last_held is locked here, in order.
    std::vector<Group*> walk;
    std::vector<Group*> locked_here;
    const std::uint64_t base = g0.label_.load(std::memory_order_relaxed);

    Group* gp = g0.next_.load(std::memory_order_acquire);
    bool past_held = false;
    unsigned __int128 visited = 1;
    std::uint64_t width = gp->label_.load(std::memory_order_relaxed) - base;
    while (gp != tail_group_ && static_cast<unsigned __int128>(width) <= visited * visited) {
        walk.push_back(gp);
        if (gp == &last_held) past_held = true;
        Group* nx = gp->next_.load(std::memory_order_acquire);
        if (past_held) {
            lock(*nx);
            locked_here.push_back(nx);
        }
        gp = nx;
        ++visited;
        width = gp->label_.load(std::memory_order_acquire) - base;
    }
    if (width <= walk.size()) fatal("top label space exhausted");

    if (observer_ != nullptr) {
        std::vector<const Group*> seen(walk.begin(), walk.end());
        seen.push_back(gp);
        observer_->rebalance_walk(seen);
    }

    GroupSpace space{*this, worker, observer_};
    assign_labels(std::span<Group* const>(walk), space, base, width);

    for (Group* g : locked_here) unlock(*g);
}

// ---------------------------------------------------------------------------
// delete

OpStatus OrderList::remove(Item& x, std::size_t worker) {
    if (is_sentinel(x)) throw std::invalid_argument("sentinels cannot be deleted");
    if (!cas_flag(x.live_, true, false)) {
        metrics_.bump(worker, Counter::DeleteFails);
        return OpStatus::Fail;
    }

    Item* y = nullptr;
    for (;;) {
        y = x.pre_.load(std::memory_order_acquire);
        lock(*y);
        if (y == x.pre_.load(std::memory_order_acquire)) break;
        unlock(*y);
    }
    lock(x);
    Item& n = *x.next_.load(std::memory_order_acquire);
    lock(n);
    Group& g = *x.group_.load(std::memory_order_acquire);

    y->next_.store(&n, std::memory_order_release);
    n.pre_.store(y, std::memory_order_release);
    // Label and group link stay readable for concurrent order() calls.
    x.pre_.store(nullptr, std::memory_order_relaxed);
    x.next_.store(nullptr, std::memory_order_relaxed);
    live_items_.fetch_sub(1, std::memory_order_relaxed);

    if (g.count_.fetch_sub(1, std::memory_order_acq_rel) == 1 && !is_sentinel(g) &&
        cas_flag(g.live_, true, false)) {
        Group* gp = nullptr;
        for (;;) {
            gp = g.pre_.load(std::memory_order_acquire);
            lock(*gp);
            if (gp == g.pre_.load(std::memory_order_acquire)) break;
            unlock(*gp);
        }
        lock(g);
        Group& gn = *g.next_.load(std::memory_order_acquire);
        lock(gn);
        gp->next_.store(&gn, std::memory_order_release);
        gn.pre_.store(gp, std::memory_order_release);
        g.pre_.store(nullptr, std::memory_order_relaxed);
        g.next_.store(nullptr, std::memory_order_relaxed);
        unlock(gn);
        unlock(g);
        unlock(*gp);
    }

    unlock(n);
    unlock(x);
    unlock(*y);
    metrics_.bump(worker, Counter::Deletes);
    return OpStatus::Ok;
}

// ---------------------------------------------------------------------------
// inspection

std::vector<const Item*> OrderList::items() const {
    std::vector<const Item*> out;
    out.reserve(size());
    for (const Item* it = head_->next(); it != tail_; it = it->next()) out.push_back(it);
    return out;
}

CheckReport OrderList::check() const {
    CheckReport report;
    auto fail = [&](const std::string& what) {
        report.ok = false;
        report.violation = what;
        return report;
    };
    auto describe = [](const Item& it) {
        std::ostringstream os;
        os << "item " << it.id() << " (" << it.group()->label() << ", " << it.label() << ")";
        return os.str();
    };

    if (!head_->live() || !tail_->live() || head_->label() != 0 ||
        tail_->label() != bottom_max() || head_->group() != head_group_ ||
        tail_->group() != tail_group_) {
        return fail("bottom-list sentinel damaged");
    }
    if (!head_group_->live() || !tail_group_->live() || head_group_->label() != 0 ||
        tail_group_->label() != top_max_) {
        return fail("top-list sentinel damaged");
    }

    std::unordered_map<const Group*, std::size_t> position;
    std::unordered_map<const Group*, std::uint32_t> seen_count;
    position.emplace(head_group_, 0);
    const Group* gprev = head_group_;
    for (const Group* g = head_group_->next(); g != nullptr; g = g->next()) {
        if (g->prev() != gprev) {
            return fail("top-list back link broken at group " + std::to_string(g->id()));
        }
        if (g->label() <= gprev->label()) {
            return fail("group labels not increasing at group " + std::to_string(g->id()) + " (" +
                        std::to_string(gprev->label()) + " then " + std::to_string(g->label()) +
                        ")");
        }
        position.emplace(g, position.size());
        if (g == tail_group_) break;
        if (!g->live()) return fail("dead group " + std::to_string(g->id()) + " still linked");
        if (g->count() == 0) return fail("empty group " + std::to_string(g->id()) + " still linked");
        ++report.groups;
        gprev = g;
    }
    if (!position.contains(tail_group_)) return fail("top list does not reach the tail");

    const Item* prev = head_;
    std::size_t current_pos = 0;
    for (const Item* it = head_->next(); it != nullptr; it = it->next()) {
        if (it->prev() != prev) return fail("bottom-list back link broken at " + describe(*it));
        const Group* g = it->group();
        const auto pos = position.find(g);
        if (pos == position.end()) return fail(describe(*it) + " belongs to an unlinked group");
        const std::uint64_t pt = prev->group()->label();
        const std::uint64_t t = g->label();
        if (!(pt < t || (pt == t && prev->label() < it->label()))) {
            return fail("order invariant broken between " + describe(*prev) + " and " +
                        describe(*it));
        }
        if (pos->second < current_pos) {
            return fail(describe(*it) + " breaks contiguity of its group");
        }
        current_pos = pos->second;
        if (it == tail_) break;
        if (!it->live()) return fail("deleted " + describe(*it) + " still linked");
        ++seen_count[g];
        ++report.items;
        prev = it;
    }
    if (prev->next() != tail_) return fail("bottom list does not reach the tail");

    for (const auto& [g, pos] : position) {
        (void)pos;
        const auto it = seen_count.find(g);
        const std::uint32_t seen = it == seen_count.end() ? 0 : it->second;
        if (seen != g->count()) {
            return fail("group " + std::to_string(g->id()) + " count " +
                        std::to_string(g->count()) + " but spans " + std::to_string(seen) +
                        " items");
        }
    }
    if (report.items != size()) {
        return fail("live item counter " + std::to_string(size()) + " but traversal found " +
                    std::to_string(report.items));
    }
    return report;
}

}  // namespace om
