#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "om/order_list.hpp"
#include "om/workload.hpp"

namespace om {

/// Operation mix of a stress worker, as relative weights.
struct StressMix {
    unsigned insert = 1;
    unsigned remove = 0;
    unsigned order = 0;
};

StressMix insert_storm() noexcept;
StressMix delete_heavy() noexcept;
StressMix mixed_ops() noexcept;
/// "insert-storm", "delete-heavy" or "mixed"; throws ConfigError.
StressMix parse_mix(std::string_view text);

struct StressPlan {
    std::size_t workers = 4;
    std::size_t ops_per_worker = 20'000;
    StressMix mix = mixed_ops();
    /// No: workers insert after random live items. Max: every insert targets
    /// the middle initial item.
    CaseKind kind = CaseKind::No;
    std::uint64_t initial_size = 4096;
    unsigned capacity_bits = 32;
    LockKind lock = LockKind::Spin;
    /// Pairs of initial items with fixed relative order, never deleted.
    std::size_t pinned_pairs = 64;
    std::size_t validators = 1;
    std::chrono::milliseconds timeout{60'000};
    std::uint64_t seed = 1;
    /// Relabel episodes whose write log is kept and replayed afterwards.
    std::size_t sampled_episodes = 32;

    void validate() const;  // throws ConfigError
};

struct StressReport {
    bool ok = true;
    std::vector<std::string> failures;
    std::uint64_t inserts = 0;
    std::uint64_t insert_fails = 0;
    std::uint64_t deletes = 0;
    std::uint64_t orders = 0;
    std::uint64_t pinned_checks = 0;
    std::uint64_t wrong_verdicts = 0;
    std::uint64_t order_redos = 0;
    std::uint64_t relabels = 0;
    std::size_t final_items = 0;
    std::size_t episodes_replayed = 0;
    double elapsed_ms = 0;

    void fail(std::string what);
    std::string summary() const;
};

/// Runs the plan on a fresh list. If the workers do not finish within the
/// timeout the lock traces are dumped to stderr and the process exits with
/// status 3, since hung threads cannot be reclaimed.
StressReport run_stress(const StressPlan& plan);

/// Records the label writes of relabel episodes as text logs.
///
/// Log lines, one event each:
///   group <gid> <label>              snapshot of the top list, in order
///   item <iid> <gid> <label>         snapshot of the affected items, in order
///   label-item <iid> <label>
///   move-item <iid> <gid>
///   label-group <gid> <label>
///   link-group <gid> <after-gid> <label>
///   walk-group <gid> <label>         group reached by a rebalance walk
class WriteLogRecorder final : public WriteObserver {
public:
    /// Keeps at most `limit` episodes; every `stride`-th episode is kept.
    explicit WriteLogRecorder(std::size_t limit, std::size_t stride = 1);

    void relabel_begin(const Item& before, std::span<Item* const> members, const Item& after,
                       const Group* group_before, const Group& group,
                       const Group& group_after) override;
    void rebalance_walk(std::span<const Group* const> groups) override;
    void item_label(const Item& item, std::uint32_t label) override;
    void item_moved(const Item& item, const Group& to) override;
    void group_label(const Group& group, std::uint64_t label) override;
    void group_linked(const Group& group, const Group& after) override;
    void relabel_end() override;

    std::vector<std::string> logs() const;

private:
    std::size_t limit_;
    std::size_t stride_;
    std::atomic<std::uint64_t> seen_{0};
    mutable std::mutex mu_;
    std::vector<std::string> logs_;
};

struct ReplayVerdict {
    bool ok = true;
    std::size_t writes = 0;
    std::string violation;  ///< first bad write with labels before and after
};

/// Replays a log one write at a time and checks, after each write, that the
/// labels of the recorded items and groups still follow their list order.
ReplayVerdict replay_writelog(std::string_view log);

}  // namespace om
