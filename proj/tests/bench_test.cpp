#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "om/bench.hpp"

namespace {

using namespace om;

WorkloadSpec spec(ExperimentKind e, CaseKind c, std::size_t workers) {
    WorkloadSpec s;
    s.experiment = e;
    s.kind = c;
    s.initial_size = 20'000;
    s.op_count = 20'000;
    s.workers = workers;
    s.reps = 2;
    s.seed = 9;
    return s;
}

TEST(Bench, CsvHeaderAndAppend) {
    const auto path = std::filesystem::temp_directory_path() / "om_bench_test.csv";
    std::filesystem::remove(path);
    RunRecord r;
    r.elapsed_ms = 1.5;
    r.seed = 3;
    append_csv(path.string(), std::span(&r, 1));
    append_csv(path.string(), std::span(&r, 1));
    std::ifstream in(path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str(), std::string(kCsvHeader) + "\n" + csv_row(r) + "\n" + csv_row(r) + "\n");
    EXPECT_EQ(csv_row(r), "insert,no,1,spin,0,1.500,0,0,0,0,0,0,0,0,3");
    std::filesystem::remove(path);
}

TEST(Bench, InsertNoCaseCounts) {
    const RunResult r = run_once(spec(ExperimentKind::Insert, CaseKind::No, 4), 0);
    EXPECT_TRUE(r.check.ok);
    EXPECT_EQ(r.record.inserts, 20'000u);
    EXPECT_EQ(r.record.relabels, 0u);
    EXPECT_EQ(r.record.lb_updates, 20'000u);
    EXPECT_EQ(r.record.lt_updates, 0u);
    EXPECT_EQ(r.check.items, 40'000u);
    EXPECT_GT(r.record.elapsed_ms, 0.0);
}

TEST(Bench, MaxCaseRelabels) {
    const RunResult r = run_once(spec(ExperimentKind::Insert, CaseKind::Max, 2), 0);
    EXPECT_GT(r.record.relabels, 0u);
    EXPECT_GE(r.record.lb_updates, r.record.inserts);
}

TEST(Bench, OrderDeleteMixedStreamLengths) {
    const RunResult order = run_once(spec(ExperimentKind::Order, CaseKind::Few, 3), 0);
    EXPECT_EQ(order.record.orders, 20'000u);
    EXPECT_EQ(order.record.inserts, 0u);
    EXPECT_EQ(order.record.order_fails, 0u);

    const RunResult del = run_once(spec(ExperimentKind::Delete, CaseKind::Many, 3), 0);
    EXPECT_EQ(del.record.deletes, 20'000u);
    EXPECT_EQ(del.check.items, 20'000u);

    const RunResult mixed = run_once(spec(ExperimentKind::Mixed, CaseKind::Few, 3), 0);
    EXPECT_EQ(mixed.record.inserts, 20'000u);
    EXPECT_EQ(mixed.record.orders, 10 * mixed.record.inserts);
}

TEST(Bench, SingleWorkerMetricsReproduce) {
    const auto s = spec(ExperimentKind::Insert, CaseKind::Many, 1);
    RunRecord a = run_once(s, 1).record;
    RunRecord b = run_once(s, 1).record;
    a.elapsed_ms = b.elapsed_ms = 0;
    EXPECT_EQ(csv_row(a), csv_row(b));
    EXPECT_EQ(a.seed, rep_seed(s.seed, 1));
}

TEST(Bench, MeanCi) {
    const double one[] = {4.0};
    EXPECT_DOUBLE_EQ(mean_ci95(one).mean, 4.0);
    EXPECT_DOUBLE_EQ(mean_ci95(one).half_width, 0.0);
    const double xs[] = {1.0, 2.0, 3.0, 4.0};
    const MeanCi m = mean_ci95(xs);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    // sample sd of 1..4 is sqrt(5/3)
    EXPECT_NEAR(m.half_width, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
}

TEST(Bench, SweepAndScale) {
    std::vector<RunRecord> rows;
    auto sink = [&rows](const RunRecord& r) { rows.push_back(r); };
    const std::size_t workers[] = {1, 2};
    const LockKind locks[] = {LockKind::Spin, LockKind::Blocking};
    const auto cells = sweep(spec(ExperimentKind::Order, CaseKind::No, 1), workers, locks, sink);
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(rows.size(), 8u);
    EXPECT_DOUBLE_EQ(cells[0].speedup, 1.0);
    for (const auto& c : cells) EXPECT_GT(c.speedup, 0.0);

    rows.clear();
    auto base = spec(ExperimentKind::Insert, CaseKind::No, 2);
    base.reps = 1;
    const std::uint64_t sizes[] = {10'000, 20'000};
    const auto points = scale_sweep(base, sizes, sink);
    ASSERT_EQ(points.size(), 2u);
    EXPECT_DOUBLE_EQ(points[0].ratio, 1.0);
    EXPECT_DOUBLE_EQ(points[1].size_ratio, 2.0);
    EXPECT_EQ(rows[1].inserts, 40'000u);

    const std::uint64_t descending[] = {20'000, 10'000};
    EXPECT_THROW(scale_sweep(base, descending, sink), ConfigError);
}

}  // namespace
