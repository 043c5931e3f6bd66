#pragma once

#include "predckpt/platform.hpp"
#include "predckpt/rng.hpp"
#include "predckpt/waste_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace predckpt
{

/// What a trusted prediction announced during proactive mode does.
enum class OverlapPolicy
{
    Drop,     // ignored; the current window runs to its end
    Restart,  // entry checkpoint (or epsilon work) and a new window
};

std::string to_string(OverlapPolicy o);
OverlapPolicy parse_overlap_policy(std::string_view text);

/// Executable checkpointing policy: which strategy, its periods and its trust
/// probability. Migration has no executable policy.
struct StrategySpec
{
    Strategy kind = Strategy::Young;
    ExtendedDuration period_tr = ExtendedDuration::infinite();
    std::optional<Seconds> period_tp;  // WithCkptI only
    double trust_q = 0.0;
    OverlapPolicy overlap = OverlapPolicy::Drop;

    static StrategySpec make(Strategy kind, ExtendedDuration period_tr,
                             std::optional<Seconds> period_tp = std::nullopt,
                             double trust_q = 1.0);

    /// Builds the StrategySpec an optimized plan describes.
    static StrategySpec from_plan(const OptimizedPlan& plan);

    /// Throws std::invalid_argument unless T_R >= C and, for WithCkptI,
    /// C <= T_P <= I with I / T_P an integer.
    void validate(const PlatformParams& platform, Seconds window) const;
};

enum class Phase
{
    RegularCompute,
    RegularCheckpoint,
    EntryCheckpoint,    // extra checkpoint just before a trusted window
    EpsilonWork,        // no time for the extra checkpoint: work until the window
    ProactiveCompute,
    ProactiveCheckpoint,
    Downtime,
    Recovery,
    Done,
};

std::string to_string(Phase p);

enum class Mode
{
    Regular,
    Proactive,
};

enum class PredictionDecision
{
    Trusted,
    Ignored,  // trust draw failed, or the strategy never trusts
    Dropped,  // overlaps a prediction already being acted on
};

std::string to_string(PredictionDecision d);

/// Time and event accounting of one run. The time fields partition the
/// elapsed time: compute (useful + lost), checkpoint, downtime, recovery, idle.
struct RunCounters
{
    std::uint64_t faults = 0;
    std::uint64_t faults_during_restart = 0;  // struck during D or R
    std::uint64_t true_predictions = 0;
    std::uint64_t false_predictions = 0;
    std::uint64_t trusted = 0;
    std::uint64_t ignored = 0;
    std::uint64_t dropped = 0;
    std::uint64_t regular_checkpoints = 0;
    std::uint64_t proactive_checkpoints = 0;  // entry + in-window
    std::uint64_t voided_checkpoints = 0;
    std::uint64_t rollbacks = 0;
    Seconds compute_time = 0.0;
    Seconds lost_work = 0.0;
    Seconds checkpoint_time = 0.0;
    Seconds downtime = 0.0;
    Seconds recovery_time = 0.0;
    Seconds idle_time = 0.0;
};

/// Receives `<time> <event> <detail>` records.
using EventLog = std::function<void(Seconds, std::string_view, const std::string&)>;

/// Policy state machine for one run of a job of `base_work` seconds of work.
///
/// The driver repeatedly compares phase_end() with the next external event:
/// it calls complete_phase() when the phase ends first (ties included), and
/// on_prediction() / on_fault() otherwise. Work done since the last completed
/// checkpoint is lost on a fault. W_reg counts the work of the current regular
/// period; it is frozen in proactive mode and restored from the last
/// checkpoint after a rollback.
class Policy
{
public:
    Policy(const StrategySpec& spec, const PlatformParams& platform, Seconds base_work,
           Rng trust_rng, EventLog log = {});

    Phase phase() const { return phase_; }
    Mode mode() const { return mode_; }
    Seconds now() const { return now_; }
    /// Absolute end of the current phase; +inf only when Done.
    Seconds phase_end() const { return phase_end_; }
    bool done() const { return phase_ == Phase::Done; }

    void complete_phase();

    /// A prediction announced at `now` for the window [window_start,
    /// window_start + window]. Consumes exactly one trust draw.
    PredictionDecision on_prediction(Seconds now, Seconds window_start, Seconds window,
                                     bool true_prediction);

    void on_fault(Seconds now);

    /// Counts a prediction the driver cannot deliver (announced before the
    /// run started) as dropped, still consuming its trust draw.
    void drop_prediction(bool true_prediction);

    Seconds committed_work() const { return committed_; }
    Seconds uncommitted_work() const;
    Seconds w_reg() const;
    const RunCounters& counters() const { return counters_; }
    const StrategySpec& spec() const { return spec_; }

private:
    struct PendingWindow
    {
        Seconds start = 0.0;
        Seconds end = 0.0;
    };

    bool trusts_predictions() const;
    void account_elapsed(Seconds until);
    void start_phase(Phase p, Seconds duration);
    void start_compute(Phase p, Seconds work_limit);
    void resume_regular();
    void begin_checkpoint(Phase p, bool final_ckpt = false);
    void commit();
    void after_checkpoint();
    void enter_window();
    void next_proactive_step();
    void after_restart();
    void log(std::string_view event, const std::string& detail = {}) const;

    StrategySpec spec_;
    PlatformParams platform_;
    Seconds base_work_;
    Rng trust_rng_;
    EventLog log_;

    Phase phase_ = Phase::RegularCompute;
    Mode mode_ = Mode::Regular;
    Seconds now_ = 0.0;
    Seconds phase_start_ = 0.0;
    Seconds phase_end_ = 0.0;

    Seconds committed_ = 0.0;
    Seconds uncommitted_ = 0.0;   // work since the last completed checkpoint, excluding the current phase
    Seconds w_reg_ = 0.0;         // excluding the current phase
    Seconds w_reg_committed_ = 0.0;
    bool finishing_ = false;         // the running checkpoint is the final one
    bool compute_finishes_ = false;  // the running compute phase completes the job
    bool ckpt_after_compute_ = false;  // WithCkptI: a proactive checkpoint follows
    std::optional<PendingWindow> pending_;  // trusted window not yet entered
    Seconds deadline_ = 0.0;                // end of the proactive window

    RunCounters counters_;
};

} // namespace predckpt
