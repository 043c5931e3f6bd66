#include "predckpt/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>

namespace predckpt
{

namespace
{

constexpr Seconds kInf = std::numeric_limits<Seconds>::infinity();
constexpr double kGuardFactor = 1e4;

/// Either a growing TraceStream or a fixed, complete trace.
class EventSource
{
public:
    explicit EventSource(TraceStream& stream) : stream_(&stream) {}
    explicit EventSource(const EventTrace& trace) : fixed_(&trace) {}

    const EventTrace& trace() const { return stream_ ? stream_->trace() : *fixed_; }

    Seconds final_until() const
    {
        return stream_ ? stream_->trace().complete_until() : kInf;
    }

    bool can_extend() const { return stream_ != nullptr; }

    void extend()
    {
        const EventTrace& t = stream_->trace();
        const Seconds span = t.config.predictor.window + t.config.lead;
        stream_->extend_to(2.0 * t.horizon + span);
    }

private:
    TraceStream* stream_ = nullptr;
    const EventTrace* fixed_ = nullptr;
};

SimOutcome drive(const JobSpec& job, const StrategySpec& spec, const PlatformParams& platform,
                 EventSource& source, std::uint64_t seed, const EventLog& log)
{
    if (!(job.base_work > 0.0))
        throw std::invalid_argument("base work must be positive");
    const Seconds window = source.trace().config.predictor.window;
    spec.validate(platform, window);

    Policy policy(spec, platform, job.base_work, Rng(seed).split(kTrustStream), log);
    std::priority_queue<Seconds, std::vector<Seconds>, std::greater<>> faults;
    std::size_t next = 0;
    const Seconds guard = kGuardFactor * job.base_work;

    while (!policy.done())
    {
        // Make sure the next visible announcement is really the next one.
        while (source.can_extend())
        {
            const auto& events = source.trace().events;
            const Seconds known = next < events.size() ? events[next].time : kInf;
            const Seconds horizon = std::min({known, policy.phase_end(),
                                              faults.empty() ? kInf : faults.top()});
            if (horizon < source.final_until())
                break;
            source.extend();
        }
        const auto& events = source.trace().events;
        const Seconds next_announce = next < events.size() ? events[next].time : kInf;
        const Seconds next_fault = faults.empty() ? kInf : faults.top();
        const Seconds external = std::min(next_announce, next_fault);
        const Seconds end = policy.phase_end();

        if (std::min(end, external) > guard)
            throw NonTerminationError("run exceeded 1e4 x base work without completing");

        // A phase ending exactly when an event arrives completes first.
        if (end <= external)
        {
            policy.complete_phase();
            continue;
        }
        if (next_fault <= next_announce)
        {
            faults.pop();
            policy.on_fault(next_fault);
            continue;
        }
        const TraceEvent ev = events[next++];
        switch (ev.kind)
        {
        case EventKind::UnpredictedFault:
            policy.on_fault(ev.time);
            break;
        case EventKind::TruePrediction:
            faults.push(ev.fault_time);
            [[fallthrough]];
        case EventKind::FalsePrediction: {
            const bool is_true = ev.kind == EventKind::TruePrediction;
            if (ev.time < 0.0)
                policy.drop_prediction(is_true);
            else
                policy.on_prediction(ev.time, ev.window_start, window, is_true);
            break;
        }
        }
    }

    SimOutcome out;
    out.seed = seed;
    out.makespan = policy.now();
    out.useful_work = policy.committed_work();
    out.waste_fraction = 1.0 - job.base_work / out.makespan;
    out.counters = policy.counters();
    return out;
}

} // namespace

JobSpec JobSpec::make(Seconds base_work)
{
    if (!(base_work > 0.0) || !std::isfinite(base_work))
        throw std::invalid_argument("base work must be positive");
    return {base_work};
}

double SimOutcome::waste_from_accounting() const
{
    const RunCounters& c = counters;
    const Seconds wasted = c.lost_work + c.checkpoint_time + c.downtime + c.recovery_time +
                           c.idle_time;
    return wasted / makespan;
}

SimOutcome run(const JobSpec& job, const StrategySpec& spec, const PlatformParams& platform,
               TraceStream& trace, std::uint64_t seed, const EventLog& log)
{
    EventSource source(trace);
    return drive(job, spec, platform, source, seed, log);
}

SimOutcome run(const JobSpec& job, const StrategySpec& spec, const PlatformParams& platform,
               const TraceConfig& config, std::uint64_t seed, const EventLog& log)
{
    const Seconds span = config.predictor.window + config.lead;
    TraceStream stream(config, seed, 1.5 * job.base_work + span);
    return run(job, spec, platform, stream, seed, log);
}

SimOutcome run_fixed(const JobSpec& job, const StrategySpec& spec,
                     const PlatformParams& platform, const EventTrace& trace,
                     std::uint64_t seed, const EventLog& log)
{
    EventSource source(trace);
    return drive(job, spec, platform, source, seed, log);
}

TraceConfig trace_config_for(Strategy strategy, TraceConfig config)
{
    if (strategy == Strategy::ExactPrediction)
        config.predictor = config.predictor.with_window(0.0);
    return config;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t index)
{
    return derive_seed(base_seed, index);
}

unsigned worker_count()
{
    if (const char* env = std::getenv("PREDCKPT_WORKERS"))
    {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace
{

/// Calls task(i) for i in [0, n) on at most worker_count() threads.
void parallel_for(int n, const std::function<void(int)>& task)
{
    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(n));
    if (workers <= 1)
    {
        for (int i = 0; i < n; ++i)
            task(i);
        return;
    }
    std::atomic<int> cursor{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = cursor++; i < n; i = cursor++)
            {
                try
                {
                    task(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

void mean_se(const std::vector<double>& xs, double& mean, double& se)
{
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    mean = sum / n;
    if (xs.size() < 2)
    {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}

} // namespace

ReplicateSummary run_replicates(const JobSpec& job, const StrategySpec& spec,
                                const PlatformParams& platform, const TraceConfig& config,
                                int n_reps, std::uint64_t base_seed)
{
    if (n_reps < 1)
        throw std::invalid_argument("n_reps must be at least 1");
    ReplicateSummary s;
    s.runs.resize(static_cast<std::size_t>(n_reps));
    parallel_for(n_reps, [&](int i) {
        s.runs[static_cast<std::size_t>(i)] =
            run(job, spec, platform, config, replicate_seed(base_seed, static_cast<std::uint64_t>(i)));
    });
    std::vector<double> makespans, wastes;
    for (const SimOutcome& o : s.runs)
    {
        makespans.push_back(o.makespan);
        wastes.push_back(o.waste_fraction);
    }
    mean_se(makespans, s.makespan_mean, s.makespan_se);
    mean_se(wastes, s.waste_mean, s.waste_se);
    return s;
}

std::vector<Seconds> period_grid(Seconds lo, Seconds hi, int n)
{
    if (n < 1 || !(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("period grid needs n >= 1 and 0 < lo <= hi");
    std::vector<Seconds> grid;
    if (n == 1)
        return {lo};
    const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
    for (int i = 0; i < n; ++i)
        grid.push_back(i == n - 1 ? hi : lo * std::pow(ratio, i));
    return grid;
}

BestPeriod best_period_search(const JobSpec& job, const StrategySpec& spec,
                              const PlatformParams& platform, const TraceConfig& config,
                              const std::vector<Seconds>& grid, int n_reps,
                              std::uint64_t base_seed)
{
    if (grid.empty())
        throw std::invalid_argument("empty period grid");
    BestPeriod best;
    best.waste = kInf;
    for (Seconds t : grid)
    {
        StrategySpec s = spec;
        s.period_tr = ExtendedDuration::finite(t);
        const ReplicateSummary sum = run_replicates(job, s, platform, config, n_reps, base_seed);
        best.curve.push_back({t, sum.waste_mean, sum.waste_se, sum.makespan_mean,
                              sum.makespan_se});
        if (sum.waste_mean < best.waste)
        {
            best.waste = sum.waste_mean;
            best.period = t;
            best.best_index = best.curve.size() - 1;
        }
    }
    return best;
}

Seconds calibrate_base_work(const StrategySpec& spec, const PlatformParams& platform,
                            const TraceConfig& config, Seconds target_makespan, int n_reps,
                            std::uint64_t base_seed, int iterations)
{
    if (!(target_makespan > 0.0))
        throw std::invalid_argument("target makespan must be positive");
    Seconds base = 0.5 * target_makespan;
    for (int i = 0; i < iterations; ++i)
    {
        const ReplicateSummary s =
            run_replicates(JobSpec::make(base), spec, platform, config, n_reps, base_seed);
        base *= target_makespan / s.makespan_mean;
    }
    return base;
}

} // namespace predckpt
