#include "predckpt/waste_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace predckpt
{

namespace
{

constexpr double kRelTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Regular period, possibly infinite. Terms linear in T vanish when their
// coefficient is exactly zero, which gives the T -> infinity limit of the
// checkpoint-free plan.
struct Period
{
    double t = 0.0;
    bool inf = false;

    static Period of(const ExtendedDuration& d)
    {
        return d.is_infinite() ? Period{0.0, true} : Period{d.seconds(), false};
    }
    double inverse() const { return inf ? 0.0 : 1.0 / t; }
    double times(double coef) const
    {
        if (!inf)
            return coef * t;
        return coef == 0.0 ? 0.0 : kInf;
    }
    double half_capped(double e) const { return inf ? e : std::min(e, t / 2.0); }
};

struct Inputs
{
    Seconds mu;
    Seconds c;
    Seconds dr;  // D + R
    double r;
    double p;
    Seconds window;
    Seconds e_off;  // E_I^f
    RateSet rates;
};

Inputs inputs_of(const PlatformParams& platform, const PredictorParams& pred)
{
    const Seconds mu = platform_mtbf(platform);
    return {mu,
            platform.ckpt,
            platform.downtime + platform.recovery,
            pred.recall,
            pred.precision,
            pred.window,
            pred.fault_offset_mean(),
            derive_rates(mu, pred)};
}

double core_exact(const Inputs& in, Period t, double q)
{
    const double rq = in.r * q;
    return in.c * t.inverse() + t.times((1.0 - rq) / (2.0 * in.mu)) +
           (in.dr + rq / in.p * in.c) / in.mu;
}

double core_migration(const Inputs& in, Period t, double q, Seconds m)
{
    const double rq = in.r * q;
    return in.c * t.inverse() + t.times((1.0 - rq) / (2.0 * in.mu)) +
           ((1.0 - rq) * in.dr + rq / in.p * m) / in.mu;
}

double core_instant(const Inputs& in, Period t, double q)
{
    const double rq = in.r * q;
    return in.c * t.inverse() + t.times((1.0 - rq) / (2.0 * in.mu)) +
           (in.dr + rq / in.p * in.c + rq * t.half_capped(in.e_off)) / in.mu;
}

Seconds i_prime_q(const Inputs& in, double q)
{
    return q * ((1.0 - in.p) * in.window + in.p * in.e_off);
}

// Terms shared by the two window strategies that leave regular mode for the
// whole window: everything except the proactive checkpoint/loss terms.
double core_window_common(const Inputs& in, Period tr, double q)
{
    const double rate_p = in.rates.mu_p.rate();
    const double rate_np = in.rates.mu_np.rate();
    const double frac_p = i_prime_q(in, q) * rate_p;
    const double regular = 1.0 - frac_p;
    return (regular * tr.inverse() + q * rate_p) * in.c +
           tr.times(in.p * (1.0 - q) * rate_p / 2.0 + regular * rate_np / 2.0) +
           (in.p * rate_p + regular * rate_np) * in.dr;
}

double core_withckpt(const Inputs& in, Period tr, Seconds tp, double q)
{
    const double rate_p = in.rates.mu_p.rate();
    const double frac_p = i_prime_q(in, q) * rate_p;
    double w = core_window_common(in, tr, q);
    if (frac_p != 0.0)
        w += frac_p / tp * in.c;
    w += in.p * q * rate_p * tp;
    return w;
}

double core_nockpt(const Inputs& in, Period tr, double q)
{
    const double rate_p = in.rates.mu_p.rate();
    return core_window_common(in, tr, q) + in.p * q * rate_p * in.e_off;
}

void check_q(double q)
{
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("trust probability q must lie in [0, 1]");
}

// Enforces C <= T, plus the validity cap in capped mode.
void check_domain(const WasteQuery& query, const Inputs& in, double q, bool window_strategy)
{
    const Period t = Period::of(query.period_tr);
    if (!t.inf && t.t < in.c * (1.0 - kRelTol))
        throw DomainError("period " + format_duration(t.t) + " is shorter than C");
    if (!query.options.capped)
        return;
    if (t.inf)
        throw DomainError("an infinite period is only admissible in uncapped mode");
    const double alpha = query.options.alpha;
    if (q == 0.0)
    {
        if (t.t > alpha * in.mu * (1.0 + kRelTol))
            throw DomainError("period exceeds alpha * mu");
        return;
    }
    const Seconds cap = alpha * in.rates.mu_e.seconds();
    const Seconds span = window_strategy ? t.t + in.window : t.t;
    if (span > cap * (1.0 + kRelTol))
        throw DomainError(window_strategy ? "T_R + I exceeds alpha * mu_e"
                                          : "period exceeds alpha * mu_e");
}

void check_tp(const Inputs& in, Seconds tp)
{
    if (!(tp >= in.c * (1.0 - kRelTol)))
        throw std::invalid_argument("proactive period T_P must be at least C");
    if (tp > in.window * (1.0 + kRelTol))
        throw std::invalid_argument("proactive period T_P must not exceed I");
    const double pieces = in.window / tp;
    if (std::fabs(pieces - std::round(pieces)) > 1e-9 * std::max(1.0, pieces))
        throw std::invalid_argument("I / T_P must be an integer");
}

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& ch : out)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

} // namespace

std::string to_string(Strategy s)
{
    switch (s)
    {
    case Strategy::Young:
        return "Young";
    case Strategy::ExactPrediction:
        return "ExactPrediction";
    case Strategy::Migration:
        return "Migration";
    case Strategy::Instant:
        return "Instant";
    case Strategy::NoCkptI:
        return "NoCkptI";
    case Strategy::WithCkptI:
        return "WithCkptI";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name)
{
    const std::string n = lower(name);
    for (Strategy s : {Strategy::Young, Strategy::ExactPrediction, Strategy::Migration,
                       Strategy::Instant, Strategy::NoCkptI, Strategy::WithCkptI})
        if (lower(to_string(s)) == n)
            return s;
    if (n == "exact")
        return Strategy::ExactPrediction;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

WasteQuery WasteQuery::make(const PlatformParams& platform, const PredictorParams& predictor,
                            Seconds period_tr, std::optional<Seconds> period_tp,
                            WasteOptions options)
{
    return {platform, predictor, ExtendedDuration::finite(period_tr), period_tp, options};
}

double waste_young(const WasteQuery& query)
{
    const Inputs in = inputs_of(query.platform, query.predictor);
    check_domain(query, in, 0.0, false);
    return core_exact(in, Period::of(query.period_tr), 0.0);
}

double waste_exact_date(const WasteQuery& query, double q)
{
    check_q(q);
    const Inputs in = inputs_of(query.platform, query.predictor);
    check_domain(query, in, q, false);
    return core_exact(in, Period::of(query.period_tr), q);
}

double waste_migration(const WasteQuery& query, double q)
{
    check_q(q);
    if (!query.platform.migration)
        throw std::invalid_argument("the migration model needs a migration duration M");
    const Inputs in = inputs_of(query.platform, query.predictor);
    check_domain(query, in, q, false);
    return core_migration(in, Period::of(query.period_tr), q, *query.platform.migration);
}

Seconds i_prime(const PredictorParams& pred)
{
    const double p = pred.precision;
    return pred.trust * ((1.0 - p) * pred.window + p * pred.fault_offset_mean());
}

double waste_withckpt(const WasteQuery& query, double q)
{
    check_q(q);
    const Inputs in = inputs_of(query.platform, query.predictor);
    check_domain(query, in, q, true);
    if (!query.period_tp)
    {
        if (q != 0.0)
            throw std::invalid_argument("WithCkptI needs a proactive period T_P");
        return core_withckpt(in, Period::of(query.period_tr), 1.0, 0.0);
    }
    check_tp(in, *query.period_tp);
    return core_withckpt(in, Period::of(query.period_tr), *query.period_tp, q);
}

double waste_instant(const WasteQuery& query, double q)
{
    check_q(q);
    const Inputs in = inputs_of(query.platform, query.predictor);
    check_domain(query, in, q, true);
    return core_instant(in, Period::of(query.period_tr), q);
}

double waste_nockpt(const WasteQuery& query, double q)
{
    check_q(q);
    const Inputs in = inputs_of(query.platform, query.predictor);
    check_domain(query, in, q, true);
    return core_nockpt(in, Period::of(query.period_tr), q);
}

double waste_of(Strategy strategy, const WasteQuery& query, double q)
{
    switch (strategy)
    {
    case Strategy::Young:
        return waste_young(query);
    case Strategy::ExactPrediction:
        return waste_exact_date(query, q);
    case Strategy::Migration:
        return waste_migration(query, q);
    case Strategy::Instant:
        return waste_instant(query, q);
    case Strategy::NoCkptI:
        return waste_nockpt(query, q);
    case Strategy::WithCkptI:
        return waste_withckpt(query, q);
    }
    throw std::logic_error("unhandled strategy");
}

Seconds tp_extremum(const PredictorParams& pred, Seconds ckpt)
{
    const double p = pred.precision;
    const double k = ((1.0 - p) * pred.window + p * pred.fault_offset_mean()) / p;
    return std::sqrt(k * ckpt);
}

Seconds opt_period_tp(const PredictorParams& pred, Seconds ckpt)
{
    const Seconds window = pred.window;
    if (!(window > 0.0))
        throw std::invalid_argument("opt_period_tp needs a positive window I");
    if (window < ckpt)
        throw std::invalid_argument("proactive checkpointing needs C <= I");

    const double p = pred.precision;
    const double k = ((1.0 - p) * window + p * pred.fault_offset_mean()) / p;
    const Seconds extr = std::sqrt(k * ckpt);
    const auto cost = [&](Seconds tp) { return k * ckpt / tp + tp; };

    const double n = std::floor(window / extr);
    Seconds candidates[2] = {window, window};
    if (n >= 1.0)
    {
        candidates[0] = window / n;
        candidates[1] = window / (n + 1.0);
    }

    std::optional<Seconds> best;
    for (Seconds tp : candidates)
    {
        if (tp < ckpt * (1.0 - kRelTol))
            continue;
        if (!best || cost(tp) < cost(*best))
            best = tp;
    }
    if (best)
        return *best;
    // Both divisors are shorter than C: take the shortest admissible divisor.
    return window / std::floor(window / ckpt * (1.0 + kRelTol));
}

bool dominance_nockpt(const PredictorParams& pred, Seconds ckpt)
{
    if (!(pred.window > 0.0))
        throw std::invalid_argument("dominance_nockpt needs a positive window I");
    return 2.0 * tp_extremum(pred, ckpt) >= pred.fault_offset_mean();
}

Seconds uniform_dominance_threshold(double precision, Seconds ckpt)
{
    return 16.0 * (1.0 - precision / 2.0) / precision * ckpt;
}

OptimizedPlan optimize_branch(Strategy strategy, const PlatformParams& platform,
                              const PredictorParams& pred, int q, WasteOptions options)
{
    if (q != 0 && q != 1)
        throw std::invalid_argument("trust branch must be 0 or 1");
    if (strategy == Strategy::Young)
        q = 0;
    if (strategy == Strategy::Migration && !platform.migration)
        throw std::invalid_argument("the migration model needs a migration duration M");

    const Inputs in = inputs_of(platform, pred);
    OptimizedPlan plan;
    plan.strategy = strategy;
    plan.q_star = q;

    const double one_minus_r = 1.0 - (q == 1 ? in.r : 0.0);
    Period tr;
    if (one_minus_r <= 0.0)
        tr = Period{0.0, true};
    else
        tr = Period{std::sqrt(2.0 * in.mu * in.c / one_minus_r), false};

    if (options.capped)
    {
        Seconds cap = options.alpha * in.mu;
        if (q == 1)
        {
            cap = options.alpha * in.rates.mu_e.seconds();
            if (uses_window(strategy))
                cap -= in.window;
        }
        const Seconds lifted = tr.inf ? kInf : std::max(tr.t, in.c);
        Seconds t = std::min(cap, lifted);
        if (t < in.c)
        {
            t = in.c;
            plan.feasible = false;
        }
        tr = Period{t, false};
    }

    Seconds tp = 0.0;
    if (strategy == Strategy::WithCkptI && q == 1)
    {
        tp = opt_period_tp(pred, in.c);
        plan.t_p_star = tp;
    }

    const double qd = static_cast<double>(q);
    switch (strategy)
    {
    case Strategy::Young:
    case Strategy::ExactPrediction:
        plan.waste_raw = core_exact(in, tr, qd);
        break;
    case Strategy::Migration:
        plan.waste_raw = core_migration(in, tr, qd, *platform.migration);
        break;
    case Strategy::Instant:
        plan.waste_raw = core_instant(in, tr, qd);
        break;
    case Strategy::NoCkptI:
        plan.waste_raw = core_nockpt(in, tr, qd);
        break;
    case Strategy::WithCkptI:
        plan.waste_raw = core_withckpt(in, tr, q == 1 ? tp : 1.0, qd);
        break;
    }
    plan.t_r_star = tr.inf ? ExtendedDuration::infinite() : ExtendedDuration::finite(tr.t);
    plan.waste_star = std::clamp(plan.waste_raw, 0.0, 1.0);
    return plan;
}

namespace
{

OptimizedPlan best_of_branches(Strategy strategy, const PlatformParams& platform,
                               const PredictorParams& pred, WasteOptions options)
{
    OptimizedPlan q0 = optimize_branch(strategy, platform, pred, 0, options);
    if (strategy == Strategy::Young)
        return q0;
    OptimizedPlan q1 = optimize_branch(strategy, platform, pred, 1, options);
    // Infeasible branches only win when nothing else is available.
    if (q0.feasible != q1.feasible)
        return q0.feasible ? q0 : q1;
    const double tol = kRelTol * std::max(1.0, std::fabs(q0.waste_raw));
    return q1.waste_raw < q0.waste_raw - tol ? q1 : q0;
}

} // namespace

OptimizedPlan opt_period_exact(const PlatformParams& platform, const PredictorParams& pred,
                               WasteOptions options)
{
    return best_of_branches(Strategy::ExactPrediction, platform, pred, options);
}

std::vector<OptimizedPlan> optimize_all(const PlatformParams& platform,
                                        const PredictorParams& pred, WasteOptions options)
{
    std::vector<OptimizedPlan> plans;
    plans.push_back(best_of_branches(Strategy::Young, platform, pred, options));
    plans.push_back(best_of_branches(Strategy::ExactPrediction, platform, pred, options));
    if (platform.migration)
        plans.push_back(best_of_branches(Strategy::Migration, platform, pred, options));
    plans.push_back(best_of_branches(Strategy::Instant, platform, pred, options));
    plans.push_back(best_of_branches(Strategy::NoCkptI, platform, pred, options));
    if (pred.window >= platform.ckpt && !dominance_nockpt(pred, platform.ckpt))
        plans.push_back(best_of_branches(Strategy::WithCkptI, platform, pred, options));
    std::stable_sort(plans.begin(), plans.end(),
                     [](const OptimizedPlan& a, const OptimizedPlan& b) {
                         return a.waste_raw < b.waste_raw;
                     });
    return plans;
}

} // namespace predckpt
