#include "om/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <ranges>
#include <string>

namespace om {

namespace {

// Distinct seeds for the independent random choices of one workload.
enum Stream : std::uint64_t { kPositions = 1, kTargets, kAssign, kDeleteOrder };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream s) {
    return std::mt19937_64(mix64(seed ^ mix64(s)));
}

}  // namespace

std::string_view to_string(CaseKind c) noexcept {
    switch (c) {
        case CaseKind::No: return "no";
        case CaseKind::Few: return "few";
        case CaseKind::Many: return "many";
        case CaseKind::Max: return "max";
    }
    return "?";
}

std::string_view to_string(ExperimentKind e) noexcept {
    switch (e) {
        case ExperimentKind::Insert: return "insert";
        case ExperimentKind::Order: return "order";
        case ExperimentKind::Delete: return "delete";
        case ExperimentKind::Mixed: return "mixed";
    }
    return "?";
}

CaseKind parse_case(std::string_view text) {
    for (CaseKind c : {CaseKind::No, CaseKind::Few, CaseKind::Many, CaseKind::Max}) {
        if (text == to_string(c)) return c;
    }
    throw ConfigError("unknown case '" + std::string(text) + "' (expected no|few|many|max)");
}

ExperimentKind parse_experiment(std::string_view text) {
    for (ExperimentKind e : {ExperimentKind::Insert, ExperimentKind::Order, ExperimentKind::Delete,
                             ExperimentKind::Mixed}) {
        if (text == to_string(e)) return e;
    }
    throw ConfigError("unknown experiment '" + std::string(text) +
                      "' (expected insert|order|delete|mixed)");
}

void WorkloadSpec::validate() const {
    if (capacity_bits < 4 || capacity_bits > 32) {
        throw ConfigError("capacity bits must be in [4, 32]");
    }
    if (workers == 0) throw ConfigError("need at least one worker");
    if (reps == 0) throw ConfigError("need at least one repetition");
    if (initial_size == 0) throw ConfigError("initial size must be at least 1");
    if (op_count < workers) throw ConfigError("op count must be at least the worker count");
    const std::uint64_t capacity = std::uint64_t{1} << capacity_bits;
    if (initial_size > capacity || op_count > capacity - initial_size) {
        throw ConfigError("initial size plus inserts (" + std::to_string(initial_size) + " + " +
                          std::to_string(op_count) + ") exceeds capacity 2^" +
                          std::to_string(capacity_bits));
    }
    if (op_count >= (std::uint64_t{1} << 32) || initial_size >= (std::uint64_t{1} << 32)) {
        throw ConfigError("sizes must fit in 32 bits");
    }
}

std::uint64_t position_count(CaseKind kind, std::uint64_t initial_size) {
    switch (kind) {
        case CaseKind::No: return initial_size;
        case CaseKind::Few: return std::max<std::uint64_t>(1, initial_size / 10);
        case CaseKind::Many: return std::max<std::uint64_t>(1, initial_size / kManyDensity);
        case CaseKind::Max: return 1;
    }
    return 1;
}

WorkloadSpec scale(const WorkloadSpec& spec, double factor) {
    if (!(factor >= 1.0)) throw ConfigError("scale factor must be at least 1");
    WorkloadSpec out = spec;
    out.initial_size = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(spec.initial_size) * factor));
    out.op_count =
        static_cast<std::uint64_t>(std::llround(static_cast<double>(spec.op_count) * factor));
    out.validate();
    return out;
}

std::vector<std::uint32_t> insert_positions(const WorkloadSpec& spec) {
    const auto n = static_cast<std::uint32_t>(spec.initial_size);
    const std::uint64_t k = position_count(spec.kind, spec.initial_size);
    std::vector<std::uint32_t> out;
    if (spec.kind == CaseKind::Max) {
        out.push_back(n / 2);
    } else if (k == n) {
        out.resize(n);
        std::iota(out.begin(), out.end(), 0u);
    } else {
        out.resize(k);
        auto rng = stream_rng(spec.seed, kPositions);
        std::ranges::sample(std::views::iota(0u, n), out.begin(), static_cast<std::ptrdiff_t>(k),
                            rng);
        std::ranges::sort(out);
    }
    return out;
}

std::uint64_t Workload::count(OpKind kind) const noexcept {
    std::uint64_t total = 0;
    for (const auto& s : streams) {
        total += static_cast<std::uint64_t>(
            std::ranges::count_if(s, [kind](const Op& op) { return op.kind == kind; }));
    }
    return total;
}

std::uint64_t Workload::order_comparisons() const noexcept {
    std::uint64_t total = 0;
    for (const auto& s : streams) {
        for (const Op& op : s) {
            if (op.kind == OpKind::Order) total += op.span;
        }
    }
    return total;
}

Workload generate(const WorkloadSpec& spec) {
    spec.validate();
    const auto m = static_cast<std::uint32_t>(spec.op_count);
    const std::vector<std::uint32_t> positions = insert_positions(spec);

    // Insert targets, independent of the worker count.
    std::vector<std::uint32_t> target(m);
    auto rng = stream_rng(spec.seed, kTargets);
    if (spec.kind == CaseKind::No) {
        // Every position once per pass, in a fresh random order each pass.
        std::vector<std::uint32_t> perm = positions;
        for (std::uint32_t i = 0; i < m; ++i) {
            const std::size_t at = i % perm.size();
            if (at == 0) std::ranges::shuffle(perm, rng);
            target[i] = perm[at];
        }
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
        for (std::uint32_t i = 0; i < m; ++i) target[i] = positions[pick(rng)];
    }

    const std::uint64_t assign_seed = mix64(spec.seed ^ mix64(kAssign));
    auto worker_of = [&](std::uint64_t i) {
        return static_cast<std::size_t>(mix64(assign_seed ^ i) % spec.workers);
    };

    Workload w;
    w.slots = m;
    w.streams.resize(spec.workers);
    auto insert_op = [&](std::uint32_t i) { return Op{OpKind::Insert, 0, target[i], i}; };

    switch (spec.experiment) {
        case ExperimentKind::Insert:
            for (std::uint32_t i = 0; i < m; ++i) w.streams[worker_of(i)].push_back(insert_op(i));
            break;
        case ExperimentKind::Mixed:
            for (std::uint32_t i = 0; i < m; ++i) {
                auto& s = w.streams[worker_of(i)];
                s.push_back(insert_op(i));
                s.push_back(Op{OpKind::Order, kMixedOrders, 0, i});
            }
            break;
        case ExperimentKind::Order:
        case ExperimentKind::Delete: {
            w.setup.resize(spec.workers);
            for (std::uint32_t i = 0; i < m; ++i) w.setup[worker_of(i)].push_back(insert_op(i));
            if (spec.experiment == ExperimentKind::Order) {
                for (std::uint32_t i = 0; i < m; ++i) {
                    w.streams[worker_of(i)].push_back(Op{OpKind::Order, 1, 0, i});
                }
            } else {
                std::vector<std::uint32_t> order(m);
                std::iota(order.begin(), order.end(), 0u);
                auto drng = stream_rng(spec.seed, kDeleteOrder);
                std::ranges::shuffle(order, drng);
                for (std::uint32_t i = 0; i < m; ++i) {
                    w.streams[worker_of(i)].push_back(Op{OpKind::Delete, 0, 0, order[i]});
                }
            }
            break;
        }
    }
    return w;
}

}  // namespace om
