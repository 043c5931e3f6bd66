#include "predckpt/strategies.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace predckpt
{

namespace
{

constexpr Seconds kInf = std::numeric_limits<Seconds>::infinity();

bool is_compute(Phase p)
{
    return p == Phase::RegularCompute || p == Phase::EpsilonWork || p == Phase::ProactiveCompute;
}

bool is_checkpoint(Phase p)
{
    return p == Phase::RegularCheckpoint || p == Phase::EntryCheckpoint ||
           p == Phase::ProactiveCheckpoint;
}

std::string fmt(Seconds s)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return buf;
}

} // namespace

StrategySpec StrategySpec::make(Strategy kind, ExtendedDuration period_tr,
                                std::optional<Seconds> period_tp, double trust_q)
{
    if (kind == Strategy::Migration)
        throw std::invalid_argument("Migration has no executable policy");
    if (!(trust_q >= 0.0 && trust_q <= 1.0))
        throw std::invalid_argument("trust probability q must lie in [0, 1]");
    if (kind == Strategy::WithCkptI && !period_tp)
        throw std::invalid_argument("WithCkptI needs a proactive period T_P");
    StrategySpec spec;
    spec.kind = kind;
    spec.period_tr = period_tr;
    spec.period_tp = kind == Strategy::WithCkptI ? period_tp : std::nullopt;
    spec.trust_q = kind == Strategy::Young ? 0.0 : trust_q;
    return spec;
}

StrategySpec StrategySpec::from_plan(const OptimizedPlan& plan)
{
    return make(plan.strategy, plan.t_r_star, plan.t_p_star, static_cast<double>(plan.q_star));
}

void StrategySpec::validate(const PlatformParams& platform, Seconds window) const
{
    if (kind == Strategy::Migration)
        throw std::invalid_argument("Migration has no executable policy");
    if (period_tr.is_finite() && !(period_tr.seconds() >= platform.ckpt))
        throw std::invalid_argument("regular period T_R must be at least C");
    if (!(trust_q >= 0.0 && trust_q <= 1.0))
        throw std::invalid_argument("trust probability q must lie in [0, 1]");
    if (kind != Strategy::WithCkptI)
        return;
    if (!period_tp)
        throw std::invalid_argument("WithCkptI needs a proactive period T_P");
    if (window < platform.ckpt)
        throw std::invalid_argument("WithCkptI needs a window I >= C");
    const Seconds tp = *period_tp;
    if (!(tp >= platform.ckpt) || tp > window * (1.0 + 1e-12))
        throw std::invalid_argument("proactive period T_P must satisfy C <= T_P <= I");
    const double pieces = window / tp;
    if (std::abs(pieces - std::round(pieces)) > 1e-9 * pieces)
        throw std::invalid_argument("I / T_P must be an integer");
}

std::string to_string(OverlapPolicy o)
{
    return o == OverlapPolicy::Drop ? "drop" : "restart";
}

OverlapPolicy parse_overlap_policy(std::string_view text)
{
    if (text == "drop")
        return OverlapPolicy::Drop;
    if (text == "restart")
        return OverlapPolicy::Restart;
    throw std::invalid_argument("overlap policy must be 'drop' or 'restart'");
}

std::string to_string(Phase p)
{
    switch (p)
    {
    case Phase::RegularCompute:
        return "compute";
    case Phase::RegularCheckpoint:
        return "checkpoint";
    case Phase::EntryCheckpoint:
        return "entry-checkpoint";
    case Phase::EpsilonWork:
        return "epsilon-work";
    case Phase::ProactiveCompute:
        return "proactive-compute";
    case Phase::ProactiveCheckpoint:
        return "proactive-checkpoint";
    case Phase::Downtime:
        return "downtime";
    case Phase::Recovery:
        return "recovery";
    case Phase::Done:
        return "done";
    }
    return "?";
}

std::string to_string(PredictionDecision d)
{
    switch (d)
    {
    case PredictionDecision::Trusted:
        return "trusted";
    case PredictionDecision::Ignored:
        return "ignored";
    case PredictionDecision::Dropped:
        return "dropped";
    }
    return "?";
}

Policy::Policy(const StrategySpec& spec, const PlatformParams& platform, Seconds base_work,
               Rng trust_rng, EventLog log)
    : spec_(spec), platform_(platform), base_work_(base_work), trust_rng_(trust_rng),
      log_(std::move(log))
{
    if (!(base_work > 0.0))
        throw std::invalid_argument("base work must be positive");
    if (spec.kind == Strategy::Migration)
        throw std::invalid_argument("Migration has no executable policy");
    resume_regular();
}

Seconds Policy::uncommitted_work() const
{
    return uncommitted_ + (is_compute(phase_) ? now_ - phase_start_ : 0.0);
}

Seconds Policy::w_reg() const
{
    return w_reg_ + (phase_ == Phase::RegularCompute ? now_ - phase_start_ : 0.0);
}

bool Policy::trusts_predictions() const
{
    return spec_.kind != Strategy::Young;
}

void Policy::log(std::string_view event, const std::string& detail) const
{
    if (log_)
        log_(now_, event, detail);
}

void Policy::account_elapsed(Seconds until)
{
    const Seconds dt = until - phase_start_;
    switch (phase_)
    {
    case Phase::RegularCompute:
        w_reg_ += dt;
        [[fallthrough]];
    case Phase::EpsilonWork:
    case Phase::ProactiveCompute:
        counters_.compute_time += dt;
        uncommitted_ += dt;
        break;
    case Phase::RegularCheckpoint:
    case Phase::EntryCheckpoint:
    case Phase::ProactiveCheckpoint:
        counters_.checkpoint_time += dt;
        break;
    case Phase::Downtime:
        counters_.downtime += dt;
        break;
    case Phase::Recovery:
        counters_.recovery_time += dt;
        break;
    case Phase::Done:
        break;
    }
    phase_start_ = until;
    now_ = until;
}

void Policy::start_phase(Phase p, Seconds duration)
{
    phase_ = p;
    phase_start_ = now_;
    phase_end_ = p == Phase::Done ? kInf : now_ + duration;
    if (p != Phase::Done)
        log(to_string(p), fmt(duration));
    else
        log("done");
}

void Policy::start_compute(Phase p, Seconds work_limit)
{
    const Seconds need = std::max(0.0, base_work_ - committed_ - uncommitted_);
    compute_finishes_ = need <= work_limit;
    start_phase(p, compute_finishes_ ? need : std::max(0.0, work_limit));
}

void Policy::resume_regular()
{
    mode_ = Mode::Regular;
    ckpt_after_compute_ = false;
    const Seconds limit = spec_.period_tr.is_finite()
                              ? spec_.period_tr.seconds() - platform_.ckpt - w_reg_
                              : kInf;
    start_compute(Phase::RegularCompute, limit);
}

void Policy::begin_checkpoint(Phase p, bool final_ckpt)
{
    finishing_ = final_ckpt;
    compute_finishes_ = false;
    start_phase(p, platform_.ckpt);
}

void Policy::commit()
{
    committed_ += uncommitted_;
    uncommitted_ = 0.0;
}

void Policy::after_checkpoint()
{
    if (finishing_ || committed_ >= base_work_)
    {
        // The job's last piece of work is now protected.
        committed_ = base_work_;
        start_phase(Phase::Done, 0.0);
        return;
    }
    if (mode_ == Mode::Proactive)
    {
        next_proactive_step();
        return;
    }
    if (pending_)
    {
        if (now_ < pending_->start)
            start_compute(Phase::EpsilonWork, pending_->start - now_);
        else
            enter_window();
        return;
    }
    resume_regular();
}

void Policy::complete_phase()
{
    if (phase_ == Phase::Done)
        return;
    account_elapsed(phase_end_);
    switch (phase_)
    {
    case Phase::RegularCompute:
    case Phase::EpsilonWork:
    case Phase::ProactiveCompute:
        if (compute_finishes_)
            begin_checkpoint(Phase::RegularCheckpoint, true);
        else if (phase_ == Phase::RegularCompute)
            begin_checkpoint(Phase::RegularCheckpoint);
        else if (phase_ == Phase::EpsilonWork)
            enter_window();
        else if (ckpt_after_compute_)
            begin_checkpoint(Phase::ProactiveCheckpoint);
        else
            resume_regular();
        break;
    case Phase::RegularCheckpoint:
        commit();
        ++counters_.regular_checkpoints;
        w_reg_ = 0.0;
        w_reg_committed_ = 0.0;
        after_checkpoint();
        break;
    case Phase::EntryCheckpoint:
    case Phase::ProactiveCheckpoint:
        commit();
        ++counters_.proactive_checkpoints;
        w_reg_committed_ = w_reg_;
        after_checkpoint();
        break;
    case Phase::Downtime:
        start_phase(Phase::Recovery, platform_.recovery);
        break;
    case Phase::Recovery:
        after_restart();
        break;
    case Phase::Done:
        break;
    }
}

void Policy::enter_window()
{
    const PendingWindow w = *pending_;
    pending_.reset();
    mode_ = Mode::Proactive;
    deadline_ = w.end;
    log("window", fmt(w.start) + " " + fmt(w.end));
    switch (spec_.kind)
    {
    case Strategy::NoCkptI:
        ckpt_after_compute_ = false;
        if (deadline_ > now_)
        {
            start_compute(Phase::ProactiveCompute, deadline_ - now_);
            return;
        }
        break;
    case Strategy::WithCkptI:
        next_proactive_step();
        return;
    default:
        // Exact-date strategies leave the window as soon as it opens.
        break;
    }
    resume_regular();
}

void Policy::next_proactive_step()
{
    const Seconds tp = *spec_.period_tp;
    const Seconds slack = 1e-9 * tp;
    if (now_ + tp <= deadline_ + slack)
    {
        ckpt_after_compute_ = true;
        start_compute(Phase::ProactiveCompute, tp - platform_.ckpt);
    }
    else if (deadline_ - now_ > slack)
    {
        ckpt_after_compute_ = false;
        start_compute(Phase::ProactiveCompute, deadline_ - now_);
    }
    else
    {
        resume_regular();
    }
}

void Policy::after_restart()
{
    mode_ = Mode::Regular;
    if (pending_)
    {
        if (now_ < pending_->start)
        {
            start_compute(Phase::EpsilonWork, pending_->start - now_);
            return;
        }
        if (now_ < pending_->end)
        {
            enter_window();
            return;
        }
        pending_.reset();
    }
    resume_regular();
}

PredictionDecision Policy::on_prediction(Seconds now, Seconds window_start, Seconds window,
                                         bool true_prediction)
{
    if (phase_ == Phase::Done)
        return PredictionDecision::Dropped;
    account_elapsed(now);
    if (true_prediction)
        ++counters_.true_predictions;
    else
        ++counters_.false_predictions;
    const bool draw = trust_rng_.bernoulli(spec_.trust_q);

    PredictionDecision decision;
    if (!trusts_predictions() || !draw)
        decision = PredictionDecision::Ignored;
    else if (pending_ || (mode_ == Mode::Proactive && spec_.overlap == OverlapPolicy::Drop))
        decision = PredictionDecision::Dropped;
    else
        decision = PredictionDecision::Trusted;

    switch (decision)
    {
    case PredictionDecision::Ignored:
        ++counters_.ignored;
        break;
    case PredictionDecision::Dropped:
        ++counters_.dropped;
        break;
    case PredictionDecision::Trusted:
        ++counters_.trusted;
        break;
    }
    log(true_prediction ? "prediction-true" : "prediction-false",
        to_string(decision) + " " + fmt(window_start));
    if (decision != PredictionDecision::Trusted)
        return decision;

    pending_ = PendingWindow{window_start, window_start + window};
    if (mode_ == Mode::Proactive)
    {
        // The current window is abandoned; W_reg stays frozen.
        mode_ = Mode::Regular;
        ckpt_after_compute_ = false;
    }
    if (is_compute(phase_))
    {
        if (uncommitted_ > 0.0)
            begin_checkpoint(Phase::EntryCheckpoint);
        else
            start_compute(Phase::EpsilonWork, std::max(0.0, window_start - now_));
    }
    // Otherwise a checkpoint, downtime or recovery is running; the window is
    // handled when it ends.
    return decision;
}

void Policy::drop_prediction(bool true_prediction)
{
    if (true_prediction)
        ++counters_.true_predictions;
    else
        ++counters_.false_predictions;
    (void)trust_rng_.uniform();
    ++counters_.dropped;
}

void Policy::on_fault(Seconds now)
{
    if (phase_ == Phase::Done)
        return;
    account_elapsed(now);
    ++counters_.faults;
    if (phase_ == Phase::Downtime || phase_ == Phase::Recovery)
    {
        ++counters_.faults_during_restart;
        log("fault", "restart");
        start_phase(Phase::Downtime, platform_.downtime);
        return;
    }
    ++counters_.rollbacks;
    if (is_checkpoint(phase_))
        ++counters_.voided_checkpoints;
    log("fault", "lost " + fmt(uncommitted_));
    counters_.lost_work += uncommitted_;
    uncommitted_ = 0.0;
    w_reg_ = w_reg_committed_;
    finishing_ = false;
    compute_finishes_ = false;
    ckpt_after_compute_ = false;
    mode_ = Mode::Regular;
    start_phase(Phase::Downtime, platform_.downtime);
}

} // namespace predckpt
