#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "om/workload.hpp"

namespace {

using namespace om;

WorkloadSpec small(ExperimentKind e, CaseKind c, std::size_t workers = 1) {
    WorkloadSpec s;
    s.experiment = e;
    s.kind = c;
    s.initial_size = 1000;
    s.op_count = 1000;
    s.workers = workers;
    s.seed = 1;
    return s;
}

std::vector<Op> flatten(const std::vector<std::vector<Op>>& streams) {
    std::vector<Op> all;
    for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());
    return all;
}

TEST(Workload, NoCaseUsesEveryPositionOnce) {
    const Workload w = generate(small(ExperimentKind::Insert, CaseKind::No));
    std::set<std::uint32_t> seen;
    for (const Op& op : flatten(w.streams)) {
        ASSERT_EQ(op.kind, OpKind::Insert);
        EXPECT_TRUE(seen.insert(op.position).second);
    }
    EXPECT_EQ(seen.size(), 1000u);
}

TEST(Workload, MaxCaseTargetsMiddle) {
    const Workload w = generate(small(ExperimentKind::Insert, CaseKind::Max, 4));
    for (const Op& op : flatten(w.streams)) EXPECT_EQ(op.position, 500u);
    EXPECT_EQ(w.count(OpKind::Insert), 1000u);
}

TEST(Workload, PositionCounts) {
    EXPECT_EQ(position_count(CaseKind::No, 10'000'000), 10'000'000u);
    EXPECT_EQ(position_count(CaseKind::Few, 10'000'000), 1'000'000u);
    EXPECT_EQ(position_count(CaseKind::Many, 10'000'000), 1'000u);
    EXPECT_EQ(position_count(CaseKind::Max, 10'000'000), 1u);
    EXPECT_EQ(position_count(CaseKind::Many, 500), 1u);

    WorkloadSpec s = small(ExperimentKind::Insert, CaseKind::Few);
    s.initial_size = 100'000;
    s.op_count = 100'000;
    const auto positions = insert_positions(s);
    EXPECT_EQ(positions.size(), 10'000u);
    EXPECT_TRUE(std::ranges::is_sorted(positions));
    EXPECT_EQ(std::ranges::adjacent_find(positions), positions.end());
    EXPECT_LT(positions.back(), 100'000u);

    const Workload w = generate(s);
    std::set<std::uint32_t> used;
    for (const Op& op : flatten(w.streams)) used.insert(op.position);
    EXPECT_TRUE(std::ranges::includes(std::set<std::uint32_t>(positions.begin(), positions.end()),
                                      used));
}

TEST(Workload, DeterministicAndWorkerIndependent) {
    const auto spec = small(ExperimentKind::Mixed, CaseKind::Few, 3);
    const Workload a = generate(spec);
    const Workload b = generate(spec);
    ASSERT_EQ(a.streams.size(), b.streams.size());
    for (std::size_t w = 0; w < a.streams.size(); ++w) {
        ASSERT_EQ(a.streams[w].size(), b.streams[w].size());
        for (std::size_t i = 0; i < a.streams[w].size(); ++i) {
            const Op& x = a.streams[w][i];
            const Op& y = b.streams[w][i];
            ASSERT_TRUE(x.kind == y.kind && x.span == y.span && x.position == y.position &&
                        x.slot == y.slot);
        }
    }

    // Same slot -> same position regardless of how ops are partitioned.
    const Workload one = generate(small(ExperimentKind::Insert, CaseKind::Few, 1));
    const Workload many = generate(small(ExperimentKind::Insert, CaseKind::Few, 7));
    std::vector<std::uint32_t> by_slot_one(1000);
    std::vector<std::uint32_t> by_slot_many(1000);
    for (const Op& op : flatten(one.streams)) by_slot_one[op.slot] = op.position;
    for (const Op& op : flatten(many.streams)) by_slot_many[op.slot] = op.position;
    EXPECT_EQ(by_slot_one, by_slot_many);
}

TEST(Workload, SeedChangesPositions) {
    auto s = small(ExperimentKind::Insert, CaseKind::Few);
    const auto a = insert_positions(s);
    s.seed = 2;
    EXPECT_NE(a, insert_positions(s));
}

TEST(Workload, ExperimentShapes) {
    const Workload order = generate(small(ExperimentKind::Order, CaseKind::No, 2));
    std::size_t setup = 0;
    for (const auto& s : order.setup) setup += s.size();
    EXPECT_EQ(setup, 1000u);
    EXPECT_EQ(order.count(OpKind::Order), 1000u);
    EXPECT_EQ(order.order_comparisons(), 1000u);

    const Workload del = generate(small(ExperimentKind::Delete, CaseKind::Many, 2));
    std::set<std::uint32_t> slots;
    for (const Op& op : flatten(del.streams)) {
        ASSERT_EQ(op.kind, OpKind::Delete);
        slots.insert(op.slot);
    }
    EXPECT_EQ(slots.size(), 1000u);

    const Workload mixed = generate(small(ExperimentKind::Mixed, CaseKind::Max, 4));
    EXPECT_EQ(mixed.count(OpKind::Insert), 1000u);
    EXPECT_EQ(mixed.order_comparisons(), 10'000u);
    for (const auto& s : mixed.streams) {
        for (std::size_t i = 0; i < s.size(); i += 2) {
            ASSERT_EQ(s[i].kind, OpKind::Insert);
            ASSERT_EQ(s[i + 1].kind, OpKind::Order);
            ASSERT_EQ(s[i + 1].slot, s[i].slot);
        }
    }
}

TEST(Workload, ScaleKeepsDensity) {
    WorkloadSpec s = small(ExperimentKind::Insert, CaseKind::Few);
    s.initial_size = 10'000'000;
    s.op_count = 10'000'000;
    const WorkloadSpec doubled = scale(s, 2.0);
    EXPECT_EQ(doubled.initial_size, 20'000'000u);
    EXPECT_EQ(doubled.op_count, 20'000'000u);
    EXPECT_EQ(position_count(CaseKind::Few, doubled.initial_size), 2'000'000u);
    EXPECT_EQ(position_count(CaseKind::Many, doubled.initial_size), 2'000u);

    const WorkloadSpec same = scale(s, 1.0);
    EXPECT_EQ(same.initial_size, s.initial_size);
    EXPECT_EQ(same.op_count, s.op_count);

    EXPECT_THROW(scale(s, 0.5), ConfigError);
    EXPECT_THROW(scale(s, 1000.0), ConfigError);
}

TEST(Workload, InvalidSpecs) {
    WorkloadSpec s = small(ExperimentKind::Insert, CaseKind::No);
    s.workers = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = small(ExperimentKind::Insert, CaseKind::No);
    s.capacity_bits = 10;  // 1000 + 1000 > 1024
    EXPECT_THROW(generate(s), ConfigError);
    s.capacity_bits = 3;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_THROW(parse_case("some"), ConfigError);
    EXPECT_THROW(parse_experiment("update"), ConfigError);
    EXPECT_EQ(parse_case("many"), CaseKind::Many);
    EXPECT_EQ(parse_experiment("delete"), ExperimentKind::Delete);
}

}  // namespace
