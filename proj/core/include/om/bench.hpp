#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "om/metrics.hpp"
#include "om/order_list.hpp"
#include "om/workload.hpp"

namespace om {

/// A run left the list in a state that fails the consistency sweep.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One CSV row: a single repetition of a workload.
struct RunRecord {
    ExperimentKind experiment = ExperimentKind::Insert;
    CaseKind kind = CaseKind::No;
    std::size_t workers = 1;
    LockKind lock = LockKind::Spin;
    std::size_t rep = 0;
    double elapsed_ms = 0;
    std::uint64_t inserts = 0;
    std::uint64_t deletes = 0;
    std::uint64_t orders = 0;
    std::uint64_t relabels = 0;
    std::uint64_t lb_updates = 0;
    std::uint64_t lt_updates = 0;
    std::uint64_t order_redos = 0;
    std::uint64_t order_fails = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kCsvHeader =
    "experiment,case,workers,lock,rep,elapsed_ms,inserts,deletes,orders,relabels,lb_updates,"
    "lt_updates,order_redos,order_fails,seed";

std::string csv_row(const RunRecord& r);

/// Writes rows to `path`, adding the header only when the file is new or
/// empty.
void append_csv(const std::string& path, std::span<const RunRecord> records);

struct RunResult {
    RunRecord record;
    MetricsTotals totals;  ///< measured phase only
    CheckReport check;
};

/// Seed actually used for repetition `rep`.
constexpr std::uint64_t rep_seed(std::uint64_t seed, std::size_t rep) noexcept {
    return seed + rep;
}

/// Builds the initial list, performs untimed setup, then times the measured
/// streams from a common start signal to the last worker's completion.
/// Throws InvariantError if the final consistency sweep fails.
RunResult run_once(const WorkloadSpec& spec, std::size_t rep);

/// Runs `streams` on `list`, one thread per stream; returns wall-clock ms
/// from the start signal until every stream finished.
double execute(OrderList& list, const std::vector<std::vector<Op>>& streams,
               std::vector<Item*>& inserted);

struct MeanCi {
    double mean = 0;
    double half_width = 0;  ///< 95%, normal approximation
};
MeanCi mean_ci95(std::span<const double> samples);

struct SweepCell {
    std::size_t workers = 1;
    LockKind lock = LockKind::Spin;
    MeanCi elapsed;
    double speedup = 0;  ///< vs the 1-worker spin cell; 0 when that cell is absent
};

using RecordSink = std::function<void(const RunRecord&)>;

/// Every (workers, lock) combination, spec.reps repetitions each.
std::vector<SweepCell> sweep(const WorkloadSpec& base, std::span<const std::size_t> workers,
                             std::span<const LockKind> locks, const RecordSink& sink);

struct ScalePoint {
    std::uint64_t size = 0;
    MeanCi elapsed;
    double ratio = 1;       ///< elapsed / elapsed at the smallest size
    double size_ratio = 1;  ///< size / smallest size
};

/// `sizes` ascending; base.op_count applies to the smallest size and grows
/// in proportion.
std::vector<ScalePoint> scale_sweep(const WorkloadSpec& base, std::span<const std::uint64_t> sizes,
                                    const RecordSink& sink);

void print_sweep(std::ostream& os, std::span<const SweepCell> cells);
void print_scale(std::ostream& os, std::span<const ScalePoint> points);

}  // namespace om
