// om_bench: runs the order-list experiments and writes CSV records.
//
//   om_bench run    --experiment insert --case no --size 10000000 --ops 10000000 --workers 32
//   om_bench sweep  --experiment order --case no --workers 1,2,4,8 --lock spin,blocking
//   om_bench scale  --experiment insert --case few --sizes 1000000,2000000,4000000 --workers 8
//   om_bench stress --workers 8 --mix mixed --case max
//
// Exit status: 0 success, 2 configuration error, 3 invariant failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "om/bench.hpp"
#include "om/stress.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kInvariantError = 3;

// Accepts plain integers as well as forms like 1e7.
std::uint64_t parse_count(const std::string& text) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || value < 0 || value != std::floor(value) || value > 1.8e19) {
        throw om::ConfigError("not a non-negative integer: '" + text + "'");
    }
    return static_cast<std::uint64_t>(value);
}

struct CommonFlags {
    std::string experiment = "insert";
    std::string kind = "no";
    std::string size = "10000000";
    std::string ops;
    std::string seed = "1";
    std::size_t reps = 10;
    std::string out;
    unsigned capacity_bits = 32;

    void add_to(CLI::App* app) {
        app->add_option("--experiment", experiment, "insert|order|delete|mixed")
            ->capture_default_str();
        app->add_option("--case", kind, "no|few|many|max")->capture_default_str();
        app->add_option("--size", size, "initial list size")->capture_default_str();
        app->add_option("--ops", ops, "inserts to perform (default: --size)");
        app->add_option("--seed", seed, "random seed")->capture_default_str();
        app->add_option("--reps", reps, "repetitions per configuration")->capture_default_str();
        app->add_option("--out", out, "append CSV records to FILE instead of stdout");
        app->add_option("--capacity-bits", capacity_bits, "label capacity N = 2^bits")
            ->capture_default_str();
    }

    om::WorkloadSpec spec() const {
        om::WorkloadSpec s;
        s.experiment = om::parse_experiment(experiment);
        s.kind = om::parse_case(kind);
        s.initial_size = parse_count(size);
        s.op_count = ops.empty() ? s.initial_size : parse_count(ops);
        s.seed = parse_count(seed);
        s.reps = reps;
        s.capacity_bits = capacity_bits;
        return s;
    }
};

// Records go to --out (appended, header once) or to stdout (header first).
class RecordWriter {
public:
    explicit RecordWriter(std::string path) : path_(std::move(path)) {
        if (path_.empty()) std::cout << om::kCsvHeader << '\n';
    }
    void operator()(const om::RunRecord& r) const {
        if (path_.empty()) {
            std::cout << om::csv_row(r) << '\n' << std::flush;
        } else {
            om::append_csv(path_, std::span(&r, 1));
        }
    }

private:
    std::string path_;
};

std::vector<std::size_t> parse_workers(const std::vector<std::string>& items) {
    std::vector<std::size_t> out;
    for (const std::string& w : items) out.push_back(static_cast<std::size_t>(parse_count(w)));
    if (out.empty()) throw om::ConfigError("--workers needs at least one value");
    return out;
}

std::vector<om::LockKind> parse_locks(const std::vector<std::string>& items) {
    std::vector<om::LockKind> out;
    for (const std::string& text : items) {
        om::LockKind k{};
        if (!om::parse_lock_kind(text, k)) {
            throw om::ConfigError("unknown lock '" + text + "' (expected spin|blocking)");
        }
        out.push_back(k);
    }
    if (out.empty()) throw om::ConfigError("--lock needs at least one value");
    return out;
}

void warn_oversubscription(std::size_t workers) {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw != 0 && workers > hw) {
        std::cerr << "warning: " << workers << " workers on " << hw
                  << " hardware threads; timings will reflect oversubscription\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concurrent order-maintenance list benchmarks"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::size_t run_workers = 1;
    std::string run_lock = "spin";
    CLI::App* run = app.add_subcommand("run", "run one configuration");
    run_flags.add_to(run);
    run->add_option("--workers", run_workers, "worker threads")->capture_default_str();
    run->add_option("--lock", run_lock, "spin|blocking")->capture_default_str();

    CommonFlags sweep_flags;
    std::vector<std::string> sweep_workers{"1", "2", "4", "8"};
    std::vector<std::string> sweep_locks{"spin"};
    CLI::App* sweep = app.add_subcommand("sweep", "cross product of worker counts and locks");
    sweep_flags.add_to(sweep);
    sweep->add_option("--workers", sweep_workers, "comma-separated worker counts")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--lock", sweep_locks, "comma-separated lock kinds")
        ->delimiter(',')
        ->capture_default_str();

    CommonFlags scale_flags;
    std::size_t scale_workers = 8;
    std::string scale_lock = "spin";
    std::vector<std::string> scale_sizes{"1000000", "2000000", "4000000", "8000000"};
    CLI::App* scale = app.add_subcommand("scale", "time ratio over growing list sizes");
    scale_flags.add_to(scale);
    scale->add_option("--sizes", scale_sizes, "comma-separated ascending sizes")
        ->delimiter(',')
        ->capture_default_str();
    scale->add_option("--workers", scale_workers, "worker threads")->capture_default_str();
    scale->add_option("--lock", scale_lock, "spin|blocking")->capture_default_str();

    om::StressPlan plan;
    std::string stress_mix = "mixed";
    std::string stress_case = "no";
    std::string stress_lock = "spin";
    std::string stress_seed = "1";
    std::string stress_size = std::to_string(plan.initial_size);
    long long timeout_ms = plan.timeout.count();
    CLI::App* stress = app.add_subcommand("stress", "concurrent correctness run");
    stress->add_option("--workers", plan.workers, "mutating workers")->capture_default_str();
    stress->add_option("--ops", plan.ops_per_worker, "operations per worker")->capture_default_str();
    stress->add_option("--mix", stress_mix, "insert-storm|delete-heavy|mixed")->capture_default_str();
    stress->add_option("--case", stress_case, "no|max")->capture_default_str();
    stress->add_option("--size", stress_size, "initial list size")->capture_default_str();
    stress->add_option("--pinned", plan.pinned_pairs, "pinned pairs checked by validators")
        ->capture_default_str();
    stress->add_option("--validators", plan.validators, "validator threads")->capture_default_str();
    stress->add_option("--timeout-ms", timeout_ms, "deadlock timeout")->capture_default_str();
    stress->add_option("--lock", stress_lock, "spin|blocking")->capture_default_str();
    stress->add_option("--seed", stress_seed, "random seed")->capture_default_str();
    stress->add_option("--capacity-bits", plan.capacity_bits, "label capacity N = 2^bits")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) {
            om::WorkloadSpec spec = run_flags.spec();
            spec.workers = run_workers;
            spec.lock = parse_locks({run_lock}).front();
            spec.validate();
            warn_oversubscription(spec.workers);
            const RecordWriter write(run_flags.out);
            for (std::size_t rep = 0; rep < spec.reps; ++rep) write(om::run_once(spec, rep).record);
        } else if (*sweep) {
            const om::WorkloadSpec spec = sweep_flags.spec();
            const auto workers = parse_workers(sweep_workers);
            const auto locks = parse_locks(sweep_locks);
            for (std::size_t w : workers) warn_oversubscription(w);
            const RecordWriter write(sweep_flags.out);
            const auto cells = om::sweep(spec, workers, locks, write);
            om::print_sweep(std::cerr, cells);
        } else if (*scale) {
            om::WorkloadSpec spec = scale_flags.spec();
            spec.workers = scale_workers;
            spec.lock = parse_locks({scale_lock}).front();
            std::vector<std::uint64_t> sizes;
            for (const std::string& s : scale_sizes) sizes.push_back(parse_count(s));
            if (scale_flags.ops.empty()) spec.op_count = sizes.front();
            warn_oversubscription(spec.workers);
            const RecordWriter write(scale_flags.out);
            const auto points = om::scale_sweep(spec, sizes, write);
            om::print_scale(std::cerr, points);
        } else if (*stress) {
            plan.mix = om::parse_mix(stress_mix);
            plan.kind = om::parse_case(stress_case);
            plan.lock = parse_locks({stress_lock}).front();
            plan.seed = parse_count(stress_seed);
            plan.initial_size = parse_count(stress_size);
            plan.timeout = std::chrono::milliseconds(timeout_ms);
            const om::StressReport report = om::run_stress(plan);
            std::cout << report.summary() << '\n';
            return report.ok ? 0 : kInvariantError;
        }
    } catch (const om::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const om::CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const om::InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << '\n';
        return kInvariantError;
    }
    return 0;
}
