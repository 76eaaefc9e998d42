#include "om/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <latch>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace om {

std::string csv_row(const RunRecord& r) {
    std::ostringstream os;
    os << to_string(r.experiment) << ',' << to_string(r.kind) << ',' << r.workers << ','
       << to_string(r.lock) << ',' << r.rep << ',' << std::fixed << std::setprecision(3)
       << r.elapsed_ms << ',' << r.inserts << ',' << r.deletes << ',' << r.orders << ','
       << r.relabels << ',' << r.lb_updates << ',' << r.lt_updates << ',' << r.order_redos << ','
       << r.order_fails << ',' << r.seed;
    return os.str();
}

void append_csv(const std::string& path, std::span<const RunRecord> records) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    if (fresh) out << kCsvHeader << '\n';
    for (const RunRecord& r : records) out << csv_row(r) << '\n';
}

double execute(OrderList& list, const std::vector<std::vector<Op>>& streams,
               std::vector<Item*>& inserted) {
    const std::size_t workers = streams.size();
    std::latch ready(static_cast<std::ptrdiff_t>(workers));
    std::atomic<bool> go{false};
    const Item& tail = list.tail();

    auto work = [&](std::size_t w) {
        ready.count_down();
        go.wait(false, std::memory_order_acquire);
        for (const Op& op : streams[w]) {
            switch (op.kind) {
                case OpKind::Insert:
                    inserted[op.slot] = list.insert_after(list.initial_item(op.position), w);
                    break;
                case OpKind::Order: {
                    const Item* a = inserted[op.slot];
                    const Item* b = a->next();
                    for (std::uint32_t k = 0; k < op.span && b != nullptr; ++k) {
                        list.order(*a, *b, w);
                        if (b != &tail) b = b->next();
                    }
                    break;
                }
                case OpKind::Delete:
                    list.remove(*inserted[op.slot], w);
                    break;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    ready.wait();
    const auto start = std::chrono::steady_clock::now();
    go.store(true, std::memory_order_release);
    go.notify_all();
    for (auto& t : threads) t.join();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

RunResult run_once(const WorkloadSpec& spec, std::size_t rep) {
    WorkloadSpec s = spec;
    s.seed = rep_seed(spec.seed, rep);
    const Workload load = generate(s);

    OrderList list(s.capacity_bits, s.initial_size, s.lock, s.workers);
    std::vector<Item*> inserted(load.slots, nullptr);
    if (!load.setup.empty()) {
        execute(list, load.setup, inserted);
        list.metrics().reset();
    }
    const double ms = execute(list, load.streams, inserted);

    RunResult out;
    out.totals = list.metrics().aggregate();
    out.check = list.check();
    if (!out.check.ok) throw InvariantError("consistency sweep failed: " + out.check.violation);

    RunRecord& r = out.record;
    r.experiment = s.experiment;
    r.kind = s.kind;
    r.workers = s.workers;
    r.lock = s.lock;
    r.rep = rep;
    r.elapsed_ms = ms;
    r.inserts = out.totals.inserts;
    r.deletes = out.totals.deletes;
    r.orders = out.totals.orders;
    r.relabels = out.totals.relabels;
    r.lb_updates = out.totals.lb_updates;
    r.lt_updates = out.totals.lt_updates;
    r.order_redos = out.totals.order_redos;
    r.order_fails = out.totals.order_fails;
    r.seed = s.seed;
    return out;
}

MeanCi mean_ci95(std::span<const double> samples) {
    MeanCi out;
    if (samples.empty()) return out;
    const double n = static_cast<double>(samples.size());
    out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    if (samples.size() > 1) {
        double ss = 0;
        for (double x : samples) ss += (x - out.mean) * (x - out.mean);
        out.half_width = 1.96 * std::sqrt(ss / (n - 1)) / std::sqrt(n);
    }
    return out;
}

namespace {

MeanCi run_reps(const WorkloadSpec& spec, const RecordSink& sink) {
    std::vector<double> times;
    for (std::size_t rep = 0; rep < spec.reps; ++rep) {
        const RunResult r = run_once(spec, rep);
        times.push_back(r.record.elapsed_ms);
        if (sink) sink(r.record);
    }
    return mean_ci95(times);
}

}  // namespace

std::vector<SweepCell> sweep(const WorkloadSpec& base, std::span<const std::size_t> workers,
                             std::span<const LockKind> locks, const RecordSink& sink) {
    if (workers.empty() || locks.empty()) throw ConfigError("sweep needs workers and locks");
    std::vector<SweepCell> cells;
    for (LockKind lock : locks) {
        for (std::size_t w : workers) {
            WorkloadSpec s = base;
            s.workers = w;
            s.lock = lock;
            s.validate();
            cells.push_back({w, lock, run_reps(s, sink), 0});
        }
    }
    for (const SweepCell& c : cells) {
        if (c.workers != 1 || c.lock != LockKind::Spin) continue;
        for (SweepCell& other : cells) {
            if (other.elapsed.mean > 0) other.speedup = c.elapsed.mean / other.elapsed.mean;
        }
    }
    return cells;
}

std::vector<ScalePoint> scale_sweep(const WorkloadSpec& base, std::span<const std::uint64_t> sizes,
                                    const RecordSink& sink) {
    if (sizes.empty()) throw ConfigError("scale needs at least one size");
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] <= sizes[i - 1]) throw ConfigError("scale sizes must be ascending");
    }
    WorkloadSpec first = base;
    first.initial_size = sizes[0];
    first.validate();

    std::vector<ScalePoint> points;
    for (std::uint64_t size : sizes) {
        const double factor = static_cast<double>(size) / static_cast<double>(sizes[0]);
        const WorkloadSpec s = scale(first, factor);
        ScalePoint p;
        p.size = size;
        p.elapsed = run_reps(s, sink);
        p.size_ratio = factor;
        points.push_back(p);
    }
    for (ScalePoint& p : points) {
        if (points[0].elapsed.mean > 0) p.ratio = p.elapsed.mean / points[0].elapsed.mean;
    }
    return points;
}

void print_sweep(std::ostream& os, std::span<const SweepCell> cells) {
    os << std::left << std::setw(9) << "lock" << std::setw(9) << "workers" << std::right
       << std::setw(14) << "mean_ms" << std::setw(12) << "ci95_ms" << std::setw(10) << "speedup"
       << '\n';
    for (const SweepCell& c : cells) {
        os << std::left << std::setw(9) << to_string(c.lock) << std::setw(9) << c.workers
           << std::right << std::fixed << std::setprecision(3) << std::setw(14) << c.elapsed.mean
           << std::setw(12) << c.elapsed.half_width << std::setprecision(2) << std::setw(10);
        if (c.speedup > 0) {
            os << c.speedup;
        } else {
            os << "-";
        }
        os << '\n';
    }
}

void print_scale(std::ostream& os, std::span<const ScalePoint> points) {
    os << std::right << std::setw(12) << "size" << std::setw(14) << "mean_ms" << std::setw(12)
       << "ci95_ms" << std::setw(10) << "ratio" << std::setw(12) << "size_ratio" << '\n';
    for (const ScalePoint& p : points) {
        os << std::setw(12) << p.size << std::fixed << std::setprecision(3) << std::setw(14)
           << p.elapsed.mean << std::setw(12) << p.elapsed.half_width << std::setprecision(2)
           << std::setw(10) << p.ratio << std::setw(12) << p.size_ratio << '\n';
    }
}

}  // namespace om
