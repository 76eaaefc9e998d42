#include "om/stress.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "om/oracle.hpp"

namespace om {

StressMix insert_storm() noexcept { return {8, 0, 1}; }
StressMix delete_heavy() noexcept { return {2, 3, 1}; }
StressMix mixed_ops() noexcept { return {2, 1, 2}; }

StressMix parse_mix(std::string_view text) {
    if (text == "insert-storm") return insert_storm();
    if (text == "delete-heavy") return delete_heavy();
    if (text == "mixed") return mixed_ops();
    throw ConfigError("unknown mix '" + std::string(text) +
                      "' (expected insert-storm|delete-heavy|mixed)");
}

void StressPlan::validate() const {
    if (workers == 0) throw ConfigError("stress needs at least one worker");
    if (mix.insert + mix.remove + mix.order == 0) throw ConfigError("empty operation mix");
    if (kind != CaseKind::No && kind != CaseKind::Max) {
        throw ConfigError("stress supports the no and max cases");
    }
    if (capacity_bits < 4 || capacity_bits > 32) throw ConfigError("capacity bits must be in [4, 32]");
    if (initial_size < 2 * pinned_pairs + 2) {
        throw ConfigError("initial size too small for the pinned pairs");
    }
    const std::uint64_t capacity = std::uint64_t{1} << capacity_bits;
    const std::uint64_t worst = initial_size + static_cast<std::uint64_t>(workers) * ops_per_worker;
    if (worst > capacity) throw ConfigError("plan may exceed the list capacity");
}

void StressReport::fail(std::string what) {
    ok = false;
    if (failures.size() < 16) failures.push_back(std::move(what));
}

std::string StressReport::summary() const {
    std::ostringstream os;
    os << (ok ? "PASS" : "FAIL") << " inserts=" << inserts << " insert_fails=" << insert_fails
       << " deletes=" << deletes << " orders=" << orders << " pinned_checks=" << pinned_checks
       << " wrong_verdicts=" << wrong_verdicts << " order_redos=" << order_redos
       << " relabels=" << relabels << " final_items=" << final_items
       << " episodes_replayed=" << episodes_replayed << " elapsed_ms=" << elapsed_ms;
    for (const std::string& f : failures) os << "\n  " << f;
    return os.str();
}

// ---------------------------------------------------------------------------
// write log

namespace {

struct Episode {
    const WriteLogRecorder* owner = nullptr;
    std::ostringstream text;
};

thread_local Episode* current_episode = nullptr;

Episode* episode_of(const WriteLogRecorder* rec) {
    return current_episode != nullptr && current_episode->owner == rec ? current_episode : nullptr;
}

}  // namespace

WriteLogRecorder::WriteLogRecorder(std::size_t limit, std::size_t stride)
    : limit_(limit), stride_(std::max<std::size_t>(1, stride)) {}

void WriteLogRecorder::relabel_begin(const Item& before, std::span<Item* const> members,
                                     const Item& after, const Group*, const Group&,
                                     const Group&) {
    const std::uint64_t n = seen_.fetch_add(1, std::memory_order_relaxed);
    if (n % stride_ != 0) return;
    {
        std::lock_guard guard(mu_);
        if (logs_.size() >= limit_) return;
    }
    static thread_local Episode episode;
    episode.owner = this;
    episode.text.str({});
    current_episode = &episode;

    std::ostringstream& os = episode.text;
    const Group* last = after.group();
    for (const Group* g = before.group(); g != nullptr; g = g->next()) {
        os << "group " << g->id() << ' ' << g->label() << '\n';
        if (g == last) break;
    }
    auto item_line = [&os](const Item& it) {
        os << "item " << it.id() << ' ' << it.group()->id() << ' ' << it.label() << '\n';
    };
    item_line(before);
    for (const Item* it : members) item_line(*it);
    item_line(after);
}

void WriteLogRecorder::rebalance_walk(std::span<const Group* const> groups) {
    if (Episode* e = episode_of(this)) {
        for (const Group* g : groups) e->text << "walk-group " << g->id() << ' ' << g->label() << '\n';
    }
}

void WriteLogRecorder::item_label(const Item& item, std::uint32_t label) {
    if (Episode* e = episode_of(this)) e->text << "label-item " << item.id() << ' ' << label << '\n';
}

void WriteLogRecorder::item_moved(const Item& item, const Group& to) {
    if (Episode* e = episode_of(this)) e->text << "move-item " << item.id() << ' ' << to.id() << '\n';
}

void WriteLogRecorder::group_label(const Group& group, std::uint64_t label) {
    if (Episode* e = episode_of(this)) {
        e->text << "label-group " << group.id() << ' ' << label << '\n';
    }
}

void WriteLogRecorder::group_linked(const Group& group, const Group& after) {
    if (Episode* e = episode_of(this)) {
        e->text << "link-group " << group.id() << ' ' << after.id() << ' ' << group.label() << '\n';
    }
}

void WriteLogRecorder::relabel_end() {
    Episode* e = episode_of(this);
    if (e == nullptr) return;
    current_episode = nullptr;
    std::lock_guard guard(mu_);
    if (logs_.size() < limit_) logs_.push_back(e->text.str());
}

std::vector<std::string> WriteLogRecorder::logs() const {
    std::lock_guard guard(mu_);
    return logs_;
}

namespace {

class Replay {
public:
    // Returns false with a message if `line` is malformed.
    bool apply(std::string_view line, bool& is_write, std::string& error) {
        std::istringstream in{std::string(line)};
        std::string op;
        in >> op;
        is_write = true;
        std::uint64_t a = 0;
        std::uint64_t b = 0;
        std::uint64_t c = 0;
        if (op == "group") {
            is_write = false;
            in >> a >> b;
            groups_.push_back(a);
            group_label_[a] = b;
        } else if (op == "item") {
            is_write = false;
            in >> a >> b >> c;
            items_.push_back(a);
            item_group_[a] = b;
            item_label_[a] = c;
        } else if (op == "walk-group") {
            is_write = false;
            in >> a >> b;
            if (!group_label_.contains(a)) {
                groups_.push_back(a);
                group_label_[a] = b;
            }
        } else if (op == "label-item") {
            in >> a >> b;
            if (!item_label_.contains(a)) return bad(error, "unknown item", line);
            item_label_[a] = b;
        } else if (op == "move-item") {
            in >> a >> b;
            if (!item_label_.contains(a) || !group_label_.contains(b)) {
                return bad(error, "unknown item or group", line);
            }
            item_group_[a] = b;
        } else if (op == "label-group") {
            in >> a >> b;
            if (!group_label_.contains(a)) return bad(error, "unknown group", line);
            group_label_[a] = b;
        } else if (op == "link-group") {
            in >> a >> b >> c;
            const auto at = std::ranges::find(groups_, b);
            if (at == groups_.end()) return bad(error, "link after unknown group", line);
            groups_.insert(at + 1, a);
            group_label_[a] = c;
        } else {
            return bad(error, "unknown event", line);
        }
        if (in.fail()) return bad(error, "malformed event", line);
        return true;
    }

    // First pair of neighbours whose labels disagree with list order.
    std::string first_violation() const {
        for (std::size_t i = 1; i < groups_.size(); ++i) {
            const std::uint64_t l = group_label_.at(groups_[i - 1]);
            const std::uint64_t r = group_label_.at(groups_[i]);
            if (l >= r) {
                std::ostringstream os;
                os << "group " << groups_[i - 1] << " (" << l << ") not below group " << groups_[i]
                   << " (" << r << ")";
                return os.str();
            }
        }
        for (std::size_t i = 1; i < items_.size(); ++i) {
            const auto [lt, lb] = key(items_[i - 1]);
            const auto [rt, rb] = key(items_[i]);
            if (!(lt < rt || (lt == rt && lb < rb))) {
                std::ostringstream os;
                os << "item " << items_[i - 1] << " (" << lt << ", " << lb << ") not below item "
                   << items_[i] << " (" << rt << ", " << rb << ")";
                return os.str();
            }
        }
        return {};
    }

private:
    static bool bad(std::string& error, std::string_view what, std::string_view line) {
        error = std::string(what) + ": '" + std::string(line) + "'";
        return false;
    }

    std::pair<std::uint64_t, std::uint64_t> key(std::uint64_t item) const {
        const std::uint64_t g = item_group_.at(item);
        const auto it = group_label_.find(g);
        return {it == group_label_.end() ? 0 : it->second, item_label_.at(item)};
    }

    std::vector<std::uint64_t> groups_;
    std::unordered_map<std::uint64_t, std::uint64_t> group_label_;
    std::vector<std::uint64_t> items_;
    std::unordered_map<std::uint64_t, std::uint64_t> item_group_;
    std::unordered_map<std::uint64_t, std::uint64_t> item_label_;
};

}  // namespace

ReplayVerdict replay_writelog(std::string_view log) {
    ReplayVerdict verdict;
    Replay replay;
    bool snapshot_checked = false;
    std::size_t start = 0;
    while (start < log.size()) {
        std::size_t end = log.find('\n', start);
        if (end == std::string_view::npos) end = log.size();
        const std::string_view line = log.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;

        const bool snapshot_line = line.starts_with("group ") || line.starts_with("item ") ||
                                   line.starts_with("walk-group ");
        if (!snapshot_line && !snapshot_checked) {
            snapshot_checked = true;
            if (std::string v = replay.first_violation(); !v.empty()) {
                verdict.ok = false;
                verdict.violation = "snapshot already out of order: " + v;
                return verdict;
            }
        }
        bool is_write = false;
        std::string error;
        if (!replay.apply(line, is_write, error)) {
            verdict.ok = false;
            verdict.violation = error;
            return verdict;
        }
        if (!is_write) continue;
        ++verdict.writes;
        if (std::string v = replay.first_violation(); !v.empty()) {
            verdict.ok = false;
            verdict.violation = "write " + std::to_string(verdict.writes) + " '" +
                                std::string(line) + "' leaves " + v;
            return verdict;
        }
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// run_stress

namespace {

struct WorkerLog {
    std::vector<std::pair<const Item*, const Item*>> parents;  // successful insert(x, y)
    std::vector<const Item*> inserted;
    std::vector<const Item*> deleted;
    std::uint64_t insert_fails = 0;
    std::vector<std::string> failures;
};

}  // namespace

StressReport run_stress(const StressPlan& plan) {
    plan.validate();
    const std::size_t total_workers = plan.workers + plan.validators;
    OrderList list(plan.capacity_bits, plan.initial_size, plan.lock, total_workers);
    WriteLogRecorder recorder(plan.sampled_episodes, 7);
    list.set_write_observer(&recorder);

    const std::size_t n = plan.initial_size;
    // Pinned items: spread across the list, in list order, never deleted.
    std::vector<Item*> pinned;
    std::vector<bool> protect(n, false);
    for (std::size_t i = 0; i < 2 * plan.pinned_pairs; ++i) {
        const std::size_t idx = (i + 1) * n / (2 * plan.pinned_pairs + 1);
        pinned.push_back(&list.initial_item(idx));
        protect[idx] = true;
    }
    const std::size_t middle = n / 2;
    protect[middle] = true;

    const bool mirror = plan.workers == 1;
    OracleList oracle;
    if (mirror) {
        for (std::size_t i = 0; i < n; ++i) oracle.push_back(list.initial_item(i).id());
    }

    StressReport report;
    std::vector<WorkerLog> logs(plan.workers);
    std::atomic<std::size_t> finished{0};
    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> pinned_checks{0};
    std::atomic<std::uint64_t> wrong{0};
    std::mutex witness_mu;
    std::vector<std::string> witnesses;

    auto worker = [&](std::size_t w) {
        WorkerLog& log = logs[w];
        std::mt19937_64 rng(mix64(plan.seed ^ mix64(w + 1)));
        std::vector<Item*> own;  // items this worker inserted and has not deleted
        const unsigned weight = plan.mix.insert + plan.mix.remove + plan.mix.order;
        auto any_initial = [&]() -> Item& { return list.initial_item(rng() % n); };
        auto any_item = [&]() -> Item& {
            if (!own.empty() && rng() % 2 == 0) return *own[rng() % own.size()];
            return any_initial();
        };

        for (std::size_t op = 0; op < plan.ops_per_worker; ++op) {
            const unsigned r = static_cast<unsigned>(rng() % weight);
            if (r < plan.mix.insert) {
                Item& x = plan.kind == CaseKind::Max ? list.initial_item(middle) : any_item();
                Item* y = list.insert_after(x, w);
                if (mirror && (y != nullptr) != oracle.contains(x.id())) {
                    log.failures.push_back("insert outcome differs from the reference list");
                }
                if (y == nullptr) {
                    ++log.insert_fails;
                    continue;
                }
                if (mirror) oracle.insert(x.id(), y->id());
                own.push_back(y);
                log.inserted.push_back(y);
                log.parents.emplace_back(&x, y);
            } else if (r < plan.mix.insert + plan.mix.remove) {
                Item* victim = nullptr;
                const bool owned = !own.empty() && rng() % 2 == 0;
                if (owned) {
                    const std::size_t at = rng() % own.size();
                    victim = own[at];
                    own[at] = own.back();
                    own.pop_back();
                } else {
                    const std::size_t idx = rng() % n;
                    if (protect[idx]) continue;
                    victim = &list.initial_item(idx);
                }
                const bool ok = list.remove(*victim, w) == OpStatus::Ok;
                if (mirror && ok != oracle.remove(victim->id())) {
                    log.failures.push_back("delete outcome differs from the reference list");
                }
                if (owned && !ok) log.failures.push_back("delete of a live owned item failed");
                if (ok) log.deleted.push_back(victim);
            } else {
                Item& a = any_item();
                Item& b = any_item();
                if (&a == &b) continue;
                const OrderResult v = list.order(a, b, w);
                if (mirror && v != oracle.order(a.id(), b.id())) {
                    log.failures.push_back("order verdict differs from the reference list");
                }
            }
        }
        finished.fetch_add(1, std::memory_order_release);
    };

    auto validator = [&](std::size_t v) {
        const std::size_t w = plan.workers + v;
        std::mt19937_64 rng(mix64(plan.seed ^ mix64(1000 + v)));
        std::uint64_t checks = 0;
        while (!stop.load(std::memory_order_acquire)) {
            const std::size_t i = rng() % pinned.size();
            const std::size_t j = rng() % pinned.size();
            if (i == j) continue;
            const OrderResult got = list.order(*pinned[i], *pinned[j], w);
            const OrderResult want = i < j ? OrderResult::Before : OrderResult::NotBefore;
            ++checks;
            if (got != want) {
                wrong.fetch_add(1, std::memory_order_relaxed);
                std::lock_guard guard(witness_mu);
                if (witnesses.size() < 8) {
                    std::ostringstream os;
                    os << "pinned pair (item " << pinned[i]->id() << ", item " << pinned[j]->id()
                       << ") expected " << (want == OrderResult::Before ? "before" : "not-before")
                       << " got " << static_cast<int>(got);
                    witnesses.push_back(os.str());
                }
            }
            if (checks % 64 == 0) std::this_thread::yield();
        }
        pinned_checks.fetch_add(checks, std::memory_order_relaxed);
    };

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::thread> threads;
    for (std::size_t v = 0; v < plan.validators; ++v) threads.emplace_back(validator, v);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < plan.workers; ++w) workers.emplace_back(worker, w);

    const auto deadline = start + plan.timeout;
    while (finished.load(std::memory_order_acquire) < plan.workers) {
        if (std::chrono::steady_clock::now() > deadline) {
            std::fprintf(stderr,
                         "stress: workers did not finish within %lld ms; suspected deadlock\n",
                         static_cast<long long>(plan.timeout.count()));
            audit::dump_traces(std::cerr);
            std::cerr.flush();
            std::_Exit(3);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    for (auto& t : workers) t.join();
    stop.store(true, std::memory_order_release);
    for (auto& t : threads) t.join();
    report.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    // ---- quiescent checks ----
    const MetricsTotals totals = list.metrics().aggregate();
    report.inserts = totals.inserts;
    report.deletes = totals.deletes;
    report.orders = totals.orders;
    report.order_redos = totals.order_redos;
    report.relabels = totals.relabels;
    report.pinned_checks = pinned_checks.load();
    report.wrong_verdicts = wrong.load();
    for (const std::string& w : witnesses) report.fail("wrong verdict: " + w);

    for (const WorkerLog& log : logs) {
        report.insert_fails += log.insert_fails;
        for (const std::string& f : log.failures) report.fail(f);
    }

    const CheckReport check = list.check();
    if (!check.ok) report.fail("consistency sweep: " + check.violation);

    // Membership: initial + inserted - deleted, each deletion exactly once.
    std::unordered_set<const Item*> expected;
    for (std::size_t i = 0; i < n; ++i) expected.insert(&list.initial_item(i));
    for (const WorkerLog& log : logs) expected.insert(log.inserted.begin(), log.inserted.end());
    for (const WorkerLog& log : logs) {
        for (const Item* d : log.deleted) {
            if (expected.erase(d) == 0) {
                report.fail("item " + std::to_string(d->id()) + " deleted twice or never present");
            }
        }
    }
    const std::vector<const Item*> seq = list.items();
    report.final_items = seq.size();
    std::unordered_map<const Item*, std::size_t> rank;
    for (std::size_t i = 0; i < seq.size(); ++i) rank.emplace(seq[i], i);
    if (seq.size() != expected.size()) {
        report.fail("list holds " + std::to_string(seq.size()) + " items, expected " +
                    std::to_string(expected.size()));
    }
    for (const Item* it : expected) {
        if (!rank.contains(it)) {
            report.fail("item " + std::to_string(it->id()) + " missing from the list");
            break;
        }
    }
    for (std::size_t i = 1; i < pinned.size(); ++i) {
        if (!(rank.at(pinned[i - 1]) < rank.at(pinned[i]))) report.fail("pinned items reordered");
    }

    // Parent relation: y was linked after x, so x stays before y.
    for (const WorkerLog& log : logs) {
        for (const auto& [x, y] : log.parents) {
            const auto rx = rank.find(x);
            const auto ry = rank.find(y);
            if (rx == rank.end() || ry == rank.end()) continue;
            if (rx->second >= ry->second) {
                report.fail("item " + std::to_string(y->id()) + " ended up before its parent " +
                            std::to_string(x->id()));
                break;
            }
            if (list.order(*x, *y) != OrderResult::Before) {
                report.fail("order() disagrees with the parent relation");
                break;
            }
        }
    }

    if (mirror) {
        std::vector<OracleList::Id> ids;
        for (const Item* it : seq) ids.push_back(it->id());
        if (ids != oracle.sequence()) report.fail("final sequence differs from the reference list");
    }

    for (const std::string& log : recorder.logs()) {
        const ReplayVerdict v = replay_writelog(log);
        ++report.episodes_replayed;
        if (!v.ok) report.fail("write log replay: " + v.violation);
    }
    return report;
}

}  // namespace om
