#pragma once

#include "predckpt/platform.hpp"
#include "predckpt/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace predckpt
{

/// Inter-arrival law of a renewal process, parameterized by its mean.
struct FailureLaw
{
    enum class Kind
    {
        Exponential,
        Weibull,
        UniformRenewal,  // uniform on [0, 2 mean]
    };

    Kind kind = Kind::Exponential;
    double shape = 1.0;  // Weibull k
    Seconds mean = 1.0;

    static FailureLaw exponential(Seconds mean);
    static FailureLaw weibull(double shape, Seconds mean);
    static FailureLaw uniform(Seconds mean);

    /// "exp", "weibull:0.7", "uniform". The mean is supplied separately.
    static FailureLaw parse(std::string_view text, Seconds mean);

    FailureLaw with_mean(Seconds m) const;

    /// Weibull scale lambda with lambda * Gamma(1 + 1/k) = mean.
    Seconds weibull_scale() const;

    std::string name() const;
};

/// Gamma function via the Lanczos approximation (g = 7, 9 terms).
double lanczos_gamma(double x);

Seconds sample_interarrival(const FailureLaw& law, Rng& rng);

/// Ordinary renewal process starting at time 0.
class RenewalProcess
{
public:
    RenewalProcess(FailureLaw law, Rng rng) : law_(law), rng_(rng) {}

    Seconds next()
    {
        last_ += sample_interarrival(law_, rng_);
        return last_;
    }

private:
    FailureLaw law_;
    Rng rng_;
    Seconds last_ = 0.0;
};

/// Superposition of `n` independent renewal processes that all start fresh
/// at time 0, each with inter-arrival law `law_ind` (mean = individual MTBF).
/// Its long-run mean inter-arrival is law_ind.mean / n, but for a decreasing
/// hazard (Weibull k < 1) the early rate is much higher.
class SuperposedRenewal
{
public:
    /// Dates are reported relative to `age`, the time the processes have
    /// already been running; failures before it are skipped.
    SuperposedRenewal(FailureLaw law_ind, std::uint64_t n, Rng rng, Seconds age = 0.0);

    Seconds next();

private:
    /// Cumulative hazard of the individual law, and its inverse.
    double cum_hazard(Seconds t) const;
    Seconds inv_cum_hazard(double h) const;
    /// Resolves first failures of never-failed processes on (resolved_, resolved_ + step_].
    void advance();

    FailureLaw law_;
    Rng rng_;
    std::uint64_t survivors_;
    Seconds resolved_ = 0.0;
    Seconds step_;
    Seconds age_;
    std::vector<Seconds> heap_;  // min-heap of pending failure dates
};

/// How platform faults arise from the failure law.
enum class FaultProcess
{
    PlatformRenewal,  // one renewal process with mean = platform MTBF
    PerProcessor,     // superposition of N fresh processor renewal processes
};

std::string to_string(FaultProcess f);
FaultProcess parse_fault_process(std::string_view text);

struct FaultSample
{
    Seconds time = 0.0;
    bool predicted = false;
};

/// Faults on [0, horizon], each tagged predicted with probability `recall`.
std::vector<FaultSample> gen_fault_trace(const FailureLaw& law, Seconds horizon, double recall,
                                         Rng& rng);

/// Shape of the false-prediction renewal process.
enum class FalsePredictionShape
{
    SameAsFaults,
    Uniform,
};

std::string to_string(FalsePredictionShape s);
FalsePredictionShape parse_false_shape(std::string_view text);

/// Mean inter-arrival of false predictions, p mu / (r (1 - p)). Infinite
/// (no false predictions) when r = 0 or p = 1.
ExtendedDuration false_prediction_mean(Seconds mu, double recall, double precision);

/// False prediction dates on [0, horizon]. Empty when r = 0 or p = 1.
std::vector<Seconds> gen_false_prediction_trace(const FailureLaw& fault_law,
                                                FalsePredictionShape shape, Seconds mu,
                                                double recall, double precision,
                                                Seconds horizon, Rng& rng);

enum class EventKind
{
    UnpredictedFault = 0,
    TruePrediction = 1,
    FalsePrediction = 2,
};

std::string to_string(EventKind k);

/// One trace entry. `time` is when the engine learns about the event: the
/// fault date for an unpredicted fault, the announcement date (window start
/// minus the lead time) for a prediction.
struct TraceEvent
{
    Seconds time = 0.0;
    EventKind kind = EventKind::UnpredictedFault;
    Seconds fault_time = 0.0;    // faults and true predictions
    Seconds window_start = 0.0;  // predictions
    std::uint64_t index = 0;     // generation order within its family

    bool is_prediction() const { return kind != EventKind::UnpredictedFault; }
    bool carries_fault() const { return kind != EventKind::FalsePrediction; }
};

/// Total order used for the merged trace: time, then kind, then index.
bool event_before(const TraceEvent& a, const TraceEvent& b);

struct TraceConfig
{
    FailureLaw fault_law;  // mean = platform MTBF
    FalsePredictionShape false_shape = FalsePredictionShape::SameAsFaults;
    PredictorParams predictor;
    Seconds lead = 0.0;  // announcement precedes the window by this much (C)
    FaultProcess process = FaultProcess::PlatformRenewal;
    std::uint64_t n_procs = 1;  // PerProcessor only
    Seconds processor_age = 0.0;  // PerProcessor only: running time before the job starts
    /// Process of false predictions; PerProcessor superposes N processes of
    /// individual mean N p mu / (r (1 - p)) (same-shape false predictions only).
    FaultProcess false_process = FaultProcess::PlatformRenewal;
};

struct EventTrace
{
    TraceConfig config;
    std::uint64_t seed = 0;
    Seconds horizon = 0.0;  // faults and false predictions generated up to here
    std::vector<TraceEvent> events;

    /// Announcements earlier than this are final; later ones may still be
    /// joined by events generated past the horizon.
    Seconds complete_until() const
    {
        return horizon - config.predictor.window - config.lead;
    }
};

/// Turns predicted faults into true predictions (window placed according to
/// the window law, one offset draw per predicted fault) and false prediction
/// dates into false predictions, then sorts by event_before().
EventTrace merge_traces(const std::vector<FaultSample>& faults,
                        const std::vector<Seconds>& false_preds, const TraceConfig& config,
                        Rng& offset_rng);

/// Incrementally generated trace. Extending to a longer horizon yields
/// exactly the trace that generating the longer horizon at once would.
class TraceStream
{
public:
    TraceStream(TraceConfig config, std::uint64_t seed, Seconds initial_horizon);

    const EventTrace& trace() const { return trace_; }

    void extend_to(Seconds horizon);

private:
    EventTrace trace_;
    Seconds next_fault_date();
    Seconds next_false_date();

    Rng fault_rng_;  // inter-arrival and tag draws, interleaved
    Rng offset_rng_;
    std::optional<RenewalProcess> false_preds_;
    std::optional<SuperposedRenewal> superposed_faults_;
    std::optional<SuperposedRenewal> superposed_false_;
    Seconds fault_clock_ = 0.0;
    std::optional<FaultSample> pending_fault_;
    std::optional<Seconds> pending_false_;
    std::uint64_t fault_count_ = 0;
    std::uint64_t false_count_ = 0;
    bool started_ = false;
};

/// Convenience: a complete trace over [0, horizon].
EventTrace generate_trace(const TraceConfig& config, std::uint64_t seed, Seconds horizon);

/// Placement of a fault inside its window for the configured law.
Seconds sample_window_offset(const PredictorParams& pred, Rng& rng);

/// Line-oriented text format. Header lines start with '#'; each event line is
/// `<time_s> <kind> [fault_time_s]` with kind one of unpredicted/true/false.
void write_trace(std::ostream& out, const EventTrace& trace);
EventTrace read_trace(std::istream& in);

} // namespace predckpt
