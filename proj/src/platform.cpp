#include "predckpt/platform.hpp"

#include <cmath>
#include <stdexcept>

namespace predckpt
{

namespace
{

void require(bool ok, const char* what)
{
    if (!ok)
        throw std::invalid_argument(what);
}

bool positive(Seconds s) { return std::isfinite(s) && s > 0.0; }

} // namespace

PlatformParams PlatformParams::make(std::uint64_t n_procs, Seconds mtbf_ind, Seconds ckpt,
                                    Seconds downtime, Seconds recovery,
                                    std::optional<Seconds> migration)
{
    PlatformParams p{n_procs, mtbf_ind, ckpt, downtime, recovery, migration};
    p.validate();
    return p;
}

void PlatformParams::validate() const
{
    require(n_procs >= 1, "n_procs must be at least 1");
    require(positive(mtbf_ind), "individual MTBF must be positive");
    require(positive(ckpt), "checkpoint duration C must be positive");
    require(positive(downtime), "downtime D must be positive");
    require(positive(recovery), "recovery R must be positive");
    if (migration)
        require(positive(*migration), "migration duration M must be positive");
    require(ckpt <= platform_mtbf(*this), "checkpoint duration C exceeds the platform MTBF");
}

PlatformParams PlatformParams::scaled(double factor) const
{
    PlatformParams p = *this;
    p.mtbf_ind *= factor;
    p.ckpt *= factor;
    p.downtime *= factor;
    p.recovery *= factor;
    if (p.migration)
        *p.migration *= factor;
    return p;
}

Seconds platform_mtbf(const PlatformParams& platform)
{
    return platform.mtbf_ind / static_cast<double>(platform.n_procs);
}

std::string WindowLaw::name() const
{
    switch (kind)
    {
    case Kind::UniformInWindow:
        return "uniform";
    case Kind::AtWindowStart:
        return "start";
    case Kind::Custom:
        return "custom";
    }
    return "?";
}

PredictorParams PredictorParams::make(double recall, double precision, Seconds window,
                                      double trust, WindowLaw law)
{
    PredictorParams p{recall, precision, window, trust, law};
    p.validate();
    return p;
}

void PredictorParams::validate() const
{
    require(recall >= 0.0 && recall <= 1.0, "recall must lie in [0, 1]");
    require(precision > 0.0 && precision <= 1.0, "precision must lie in (0, 1]");
    require(trust >= 0.0 && trust <= 1.0, "trust probability q must lie in [0, 1]");
    require(std::isfinite(window) && window >= 0.0, "window I must be non-negative");
    if (window_law.kind == WindowLaw::Kind::Custom)
        require(window_law.custom_mean_offset >= 0.0 && window_law.custom_mean_offset <= window,
                "custom mean fault offset must lie in [0, I]");
}

Seconds PredictorParams::fault_offset_mean() const
{
    switch (window_law.kind)
    {
    case WindowLaw::Kind::UniformInWindow:
        return window / 2.0;
    case WindowLaw::Kind::AtWindowStart:
        return 0.0;
    case WindowLaw::Kind::Custom:
        return window_law.custom_mean_offset;
    }
    return 0.0;
}

PredictorParams PredictorParams::with_trust(double q) const
{
    PredictorParams p = *this;
    p.trust = q;
    p.validate();
    return p;
}

PredictorParams PredictorParams::with_window(Seconds w) const
{
    PredictorParams p = *this;
    p.window = w;
    if (p.window_law.kind == WindowLaw::Kind::Custom && p.window_law.custom_mean_offset > w)
        p.window_law.custom_mean_offset = w;
    p.validate();
    return p;
}

RateSet derive_rates(Seconds mu, const PredictorParams& pred)
{
    require(positive(mu), "platform MTBF must be positive");
    const double r = pred.recall;
    const double p = pred.precision;
    const double rate_np = (1.0 - r) / mu;
    const double rate_p = r / (p * mu);
    RateSet rs{mu, ExtendedDuration::from_rate(rate_p), ExtendedDuration::from_rate(rate_np),
               ExtendedDuration::from_rate(rate_p + rate_np)};
    return rs;
}

double multi_event_prob(Seconds period, Seconds mean)
{
    require(period >= 0.0 && positive(mean), "multi_event_prob needs period >= 0 and mean > 0");
    const double beta = period / mean;
    // -expm1(-b) - b e^-b keeps precision for small beta.
    return -std::expm1(-beta) - beta * std::exp(-beta);
}

} // namespace predckpt
