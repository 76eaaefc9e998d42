#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "om/sync.hpp"

namespace om {

/// Invalid workload or command-line configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How many distinct insert positions a workload uses.
enum class CaseKind : std::uint8_t { No, Few, Many, Max };
enum class ExperimentKind : std::uint8_t { Insert, Order, Delete, Mixed };

std::string_view to_string(CaseKind c) noexcept;
std::string_view to_string(ExperimentKind e) noexcept;
CaseKind parse_case(std::string_view text);              // throws ConfigError
ExperimentKind parse_experiment(std::string_view text);  // throws ConfigError

struct WorkloadSpec {
    ExperimentKind experiment = ExperimentKind::Insert;
    CaseKind kind = CaseKind::No;
    std::uint64_t initial_size = 10'000'000;
    std::uint64_t op_count = 10'000'000;
    std::size_t workers = 1;
    LockKind lock = LockKind::Spin;
    std::uint64_t seed = 1;
    std::size_t reps = 10;
    unsigned capacity_bits = 32;

    /// Throws ConfigError when the spec cannot be run.
    void validate() const;
};

/// Items per insert position in the Many case.
inline constexpr std::uint64_t kManyDensity = 10'000;
/// Successors compared after every insert in the Mixed experiment.
inline constexpr std::uint32_t kMixedOrders = 10;

/// Number of distinct insert positions among `initial_size` items.
std::uint64_t position_count(CaseKind kind, std::uint64_t initial_size);

/// Scales size and op count by `factor`, keeping items per position fixed.
WorkloadSpec scale(const WorkloadSpec& spec, double factor);

enum class OpKind : std::uint8_t { Insert, Order, Delete };

struct Op {
    OpKind kind;
    /// Order: number of successive items to compare against.
    std::uint32_t span;
    /// Insert: index of the initial item to insert after.
    std::uint32_t position;
    /// Index of the inserted item this op creates (Insert) or refers to.
    std::uint32_t slot;
};

struct Workload {
    /// Untimed inserts that must complete before the measured phase (Order
    /// and Delete experiments); partitioned per worker like `streams`.
    std::vector<std::vector<Op>> setup;
    /// Measured operations, one stream per worker.
    std::vector<std::vector<Op>> streams;
    /// Total inserted slots referenced by setup and streams.
    std::uint64_t slots = 0;

    std::uint64_t count(OpKind kind) const noexcept;
    /// Order comparisons implied by the measured streams.
    std::uint64_t order_comparisons() const noexcept;
};

/// Deterministic in `spec` (worker count only changes the partition, not
/// which positions are used).
Workload generate(const WorkloadSpec& spec);

/// The distinct initial-item indices a workload inserts after, sorted.
std::vector<std::uint32_t> insert_positions(const WorkloadSpec& spec);

/// 64-bit finaliser used to derive independent seeds and hash op indices.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace om
