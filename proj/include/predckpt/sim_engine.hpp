#pragma once

#include "predckpt/platform.hpp"
#include "predckpt/strategies.hpp"
#include "predckpt/trace_gen.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace predckpt
{

struct JobSpec
{
    Seconds base_work = 0.0;  // fault-free, checkpoint-free compute time

    static JobSpec make(Seconds base_work);
};

struct SimOutcome
{
    std::uint64_t seed = 0;
    Seconds makespan = 0.0;
    Seconds useful_work = 0.0;
    double waste_fraction = 0.0;  // 1 - base_work / makespan
    RunCounters counters;

    /// Non-useful time over makespan, from the time partition.
    double waste_from_accounting() const;
};

/// Raised when a run exceeds 10^4 times its base work.
class NonTerminationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Child stream of the run seed that drives the trust draws.
inline constexpr std::uint64_t kTrustStream = 4;

/// Runs a job against a lazily extended trace.
SimOutcome run(const JobSpec& job, const StrategySpec& spec, const PlatformParams& platform,
               TraceStream& trace, std::uint64_t seed, const EventLog& log = {});

/// Convenience: builds the trace stream from `config` and `seed`.
SimOutcome run(const JobSpec& job, const StrategySpec& spec, const PlatformParams& platform,
               const TraceConfig& config, std::uint64_t seed, const EventLog& log = {});

/// Runs against a fixed trace; no event exists past its last entry.
SimOutcome run_fixed(const JobSpec& job, const StrategySpec& spec,
                     const PlatformParams& platform, const EventTrace& trace,
                     std::uint64_t seed, const EventLog& log = {});

/// Exact-date strategies see the same faults with a zero-length window.
TraceConfig trace_config_for(Strategy strategy, TraceConfig config);

struct ReplicateSummary
{
    std::vector<SimOutcome> runs;  // in replicate order
    double makespan_mean = 0.0;
    double makespan_se = 0.0;
    double waste_mean = 0.0;
    double waste_se = 0.0;
};

/// Seed of replicate `index`.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t index);

/// Worker count: PREDCKPT_WORKERS if set, else the hardware concurrency.
unsigned worker_count();

/// n_reps independent runs on a bounded worker pool. Replicate i uses
/// replicate_seed(base_seed, i), so a prefix of replicates never depends on
/// n_reps; aggregation is in replicate order.
ReplicateSummary run_replicates(const JobSpec& job, const StrategySpec& spec,
                                const PlatformParams& platform, const TraceConfig& config,
                                int n_reps, std::uint64_t base_seed);

struct PeriodPoint
{
    Seconds period = 0.0;
    double waste_mean = 0.0;
    double waste_se = 0.0;
    Seconds makespan_mean = 0.0;
    Seconds makespan_se = 0.0;
};

struct BestPeriod
{
    Seconds period = 0.0;
    double waste = 0.0;
    std::size_t best_index = 0;  // into curve
    std::vector<PeriodPoint> curve;
};

/// Geometric grid of `n` periods on [lo, hi].
std::vector<Seconds> period_grid(Seconds lo, Seconds hi, int n);

/// Evaluates the strategy at every T_R of the grid with common random
/// numbers and returns the minimizer of the mean waste.
BestPeriod best_period_search(const JobSpec& job, const StrategySpec& spec,
                              const PlatformParams& platform, const TraceConfig& config,
                              const std::vector<Seconds>& grid, int n_reps,
                              std::uint64_t base_seed);

/// Base work for which the mean simulated makespan of `spec` hits `target`.
Seconds calibrate_base_work(const StrategySpec& spec, const PlatformParams& platform,
                            const TraceConfig& config, Seconds target_makespan, int n_reps,
                            std::uint64_t base_seed, int iterations = 4);

} // namespace predckpt
